"""
Acceptance guardrail: reproductions plus the seeded property suites.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

SUITES = [
    "setting1_acceptance",
    "setting2_acceptance",
    "setting3_acceptance",
    "setting4_uniform_acceptance",
    "setting4_partition_acceptance",
]


def _args() -> argparse.Namespace:
    p = argparse.ArgumentParser(description="Lottery gap lab acceptance guardrail")
    p.add_argument("--configs-dir", default="configs/experiments", help="Directory with suite configs (*.json)")
    p.add_argument("--report-json", default="reports/acceptance_guardrail.json", help="Output JSON report path")
    p.add_argument("--report-md", default="reports/acceptance_guardrail.md", help="Output markdown summary path")
    p.add_argument("--workers", type=int, default=None, help="Override worker count of every suite")
    p.add_argument("--skip-suites", action="store_true", help="Run the reproductions only")
    p.add_argument("--skip-repro", action="store_true", help="Run the property suites only")
    p.add_argument("--appendix-n", type=int, default=10_000)
    p.add_argument("--appendix-grid", type=int, default=2000)
    p.add_argument("--uniform-step", default="0.001")
    return p.parse_args()


def _to_text(report: dict[str, Any]) -> str:
    lines = ["# Acceptance guardrail", ""]
    for name, ch in report["checks"].items():
        status = "ok" if ch.get("ok") else "FAILED"
        elapsed = ch.get("elapsed_s")
        suffix = f" ({elapsed:.1f}s)" if isinstance(elapsed, (int, float)) else ""
        lines.append(f"- {name}: {status}{suffix}")
    return "\n".join(lines).strip() + "\n"


def main() -> int:
    from lottery_gap_lab.common.logging import setup_logging
    from lottery_gap_lab.contracts.instances import ExperimentConfig
    from lottery_gap_lab.services.experiments import run_check
    from lottery_gap_lab.services.report_artifacts import write_run_artifacts
    from lottery_gap_lab.services.repro import repro_appendix, repro_uniform56

    args = _args()
    setup_logging()
    configs_dir = Path(args.configs_dir).resolve()
    checks: dict[str, dict[str, Any]] = {}

    if not args.skip_repro:
        started = time.perf_counter()
        app = repro_appendix(args.appendix_n, args.appendix_grid, refine=False)
        checks["repro_appendix"] = {
            "ok": app.passed,
            "elapsed_s": time.perf_counter() - started,
            "menu_revenue": app.menu_revenue,
            "r1_mass": app.region_masses["r1"],
            "ratio": app.ratio,
            "checks": app.checks,
        }
        started = time.perf_counter()
        uni = repro_uniform56(args.uniform_step)
        checks["repro_uniform56"] = {
            "ok": uni.passed,
            "elapsed_s": time.perf_counter() - started,
            "symmetric_price": uni.symmetric_price,
            "pricing_revenue": uni.pricing_revenue,
            "augmented_revenue": uni.augmented_revenue,
            "checks": uni.checks,
        }

    if not args.skip_suites:
        if not configs_dir.exists():
            print(f"configs_dir_not_found: {configs_dir}")
            return 2
        for name in SUITES:
            path = configs_dir / f"{name}.json"
            if not path.exists():
                print(f"suite_config_not_found: {path}")
                return 2
            cfg = ExperimentConfig.model_validate(json.loads(path.read_text(encoding="utf-8")))
            if args.workers is not None:
                cfg = cfg.model_copy(update={"workers": args.workers})
            started = time.perf_counter()
            timings: dict[str, Any] = {}
            run = run_check(cfg, timings=timings)
            write_run_artifacts(cfg.out, run, timings)
            failing = sorted({a.inequality for a in run.aggregates if a.failures})
            checks[name] = {
                "ok": run.passed,
                "elapsed_s": time.perf_counter() - started,
                "instances": run.instances,
                "failures": run.failures,
                "errors": [e.model_dump(mode="json") for e in run.errors[:5]],
                "failing_inequalities": failing,
            }

    report = {"configs_dir": str(configs_dir), "checks": checks}
    out_path = Path(args.report_json)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(report, ensure_ascii=False, indent=2), encoding="utf-8")
    md_path = Path(args.report_md)
    md_path.parent.mkdir(parents=True, exist_ok=True)
    md_path.write_text(_to_text(report), encoding="utf-8")

    failed = [name for name, ch in checks.items() if not ch.get("ok")]
    if failed:
        print(f"acceptance_guardrail_failed: {', '.join(failed)}")
        print(f"report={out_path}")
        return 1

    print("acceptance_guardrail_ok")
    print(f"report={out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
