"""
Command-line entry point (`lottery-lab`).

Subcommands:
- gen / check: seeded instance families and batch inequality checks
- lp / myerson / pricing: single-instance optima
- repro-appendix / repro-uniform56: large-grid reproductions

Exit codes: 0 pass, 1 inequality or invariant violation, 2 configuration/capacity, 3 internal.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import pydantic

from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_VIOLATION,
    AppError,
    ValidationError,
    exit_code_for,
)
from lottery_gap_lab.common.logging import get_project_logger, setup_logging
from lottery_gap_lab.common.metrics import track_stage_latency, write_metrics_textfile
from lottery_gap_lab.common.numeric import to_json_number
from lottery_gap_lab.contracts.instances import ExperimentConfig
from lottery_gap_lab.domain.enums import NumericMode

log = get_project_logger()

_CONFIG_FLAGS = ("seed", "setting", "n", "m", "support", "count", "k_max", "value_max", "j1_kind", "mode", "workers", "out")


# =============================================================================
# helpers
# =============================================================================
def _emit(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    base: dict[str, Any] = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError("cannot read experiment config", {"path": args.config, "error": str(e)[:200]}) from e
    else:
        s = get_settings()
        base = {"mode": s.numeric_mode, "workers": s.workers, "out": str(Path(s.reports_dir) / "run")}
    for key in _CONFIG_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    try:
        return ExperimentConfig.model_validate(base)
    except pydantic.ValidationError as e:
        raise ValidationError("invalid experiment config", {"errors": e.errors(include_url=False)[:5]}) from e


def _mode(args: argparse.Namespace, default: NumericMode | None = None) -> NumericMode | None:
    return NumericMode(args.mode) if args.mode else default


def _out_dir(args: argparse.Namespace) -> Path:
    return Path(args.out) if args.out else Path(get_settings().reports_dir)


# =============================================================================
# commands
# =============================================================================
def cmd_gen(args: argparse.Namespace) -> int:
    from lottery_gap_lab.services.experiments import generate, write_instances

    cfg = _experiment_config(args)
    paths = write_instances(generate(cfg), cfg.out)
    _emit({"instances": len(paths), "dir": str(Path(cfg.out) / "instances")})
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    from lottery_gap_lab.services.experiments import load_instance_docs, run_check, run_exit_code
    from lottery_gap_lab.services.report_artifacts import write_run_artifacts

    cfg = _experiment_config(args)
    docs = load_instance_docs(args.instances) if args.instances else None
    timings: dict[str, Any] = {}
    run = run_check(cfg, docs, timings)
    paths = write_run_artifacts(cfg.out, run, timings)
    _emit(
        {
            "run_id": run.run_id,
            "passed": run.passed,
            "instances": run.instances,
            "failures": run.failures,
            "errors": len(run.errors),
            **paths,
        }
    )
    return run_exit_code(run)


def cmd_lp(args: argparse.Namespace) -> int:
    from lottery_gap_lab.mech.lotteries import menu_revenue
    from lottery_gap_lab.opt.dsic import build_dsic_lp, optimal_dsic_lp
    from lottery_gap_lab.opt.lp import to_lp_format
    from lottery_gap_lab.opt.menus import build_menu_lp, optimal_menu_lp
    from lottery_gap_lab.services.codec import load_instance, menu_to_doc, table_to_doc
    from lottery_gap_lab.services.report_artifacts import write_json

    inst = load_instance(args.instance, _mode(args))
    ts, fs = inst.ts, inst.fs
    out = _out_dir(args)
    single = ts.n == 1 and inst.setting <= 2
    if args.lp_out:
        lp = build_menu_lp(ts).lp if single else build_dsic_lp(ts, fs)
        Path(args.lp_out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.lp_out).write_text(to_lp_format(lp), encoding="utf-8")

    with track_stage_latency("lp"):
        if single:
            menu, sol = optimal_menu_lp(ts)
            revenue = menu_revenue(menu, ts)
            path = write_json(out / f"{inst.instance_id}.menu.json", menu_to_doc(menu))
            size = len(menu)
        else:
            table, sol = optimal_dsic_lp(ts, fs)
            revenue = table.expected_revenue(ts)
            path = write_json(out / f"{inst.instance_id}.mechanism.json", table_to_doc(table, ts))
            size = ts.num_profiles
    _emit(
        {
            "instance_id": inst.instance_id,
            "revenue": to_json_number(revenue),
            "lp_status": sol.status,
            "lp_backend": sol.backend,
            "size": size,
            "path": str(path),
            "lp_out": args.lp_out,
        }
    )
    return EXIT_OK


def cmd_myerson(args: argparse.Namespace) -> int:
    from lottery_gap_lab.bounds.copies import build_copies
    from lottery_gap_lab.opt.myerson import virtual_value_rows
    from lottery_gap_lab.services.codec import load_instance

    inst = load_instance(args.instance, _mode(args))
    ci = build_copies(inst.ts, inst.fs)
    with track_stage_latency("myerson"):
        _, revenue = ci.myerson()
    payload: dict[str, Any] = {
        "instance_id": inst.instance_id,
        "revenue": to_json_number(revenue),
        "virtual_values": [
            {k: (to_json_number(v) if k in {"value", "phi", "phi_bar"} else v) for k, v in row.items()}
            for row in virtual_value_rows(inst.ts)
        ],
    }
    if ci.is_single_sale():
        payload["closed_form_revenue"] = to_json_number(ci.myerson_single_sale_revenue())
    _emit(payload)
    return EXIT_OK


def cmd_pricing(args: argparse.Namespace) -> int:
    from lottery_gap_lab.opt.pricing import optimal_pricing_exact
    from lottery_gap_lab.services.codec import load_instance

    inst = load_instance(args.instance, _mode(args))
    with track_stage_latency("pricing"):
        pricing, revenue = optimal_pricing_exact(inst.ts)
    _emit(
        {
            "instance_id": inst.instance_id,
            "prices": [to_json_number(p) for p in pricing.prices],
            "revenue": to_json_number(revenue),
        }
    )
    return EXIT_OK


def cmd_repro_appendix(args: argparse.Namespace) -> int:
    from lottery_gap_lab.services.report_artifacts import write_repro_artifacts
    from lottery_gap_lab.services.repro import repro_appendix

    doc = repro_appendix(args.n, args.grid, _mode(args, NumericMode.float), refine=not args.no_refine)
    paths = write_repro_artifacts(_out_dir(args), "repro_appendix", doc)
    _emit({"passed": doc.passed, "menu_revenue": doc.menu_revenue, "ratio": doc.ratio, **paths})
    return EXIT_OK if doc.passed else EXIT_VIOLATION


def cmd_repro_uniform56(args: argparse.Namespace) -> int:
    from lottery_gap_lab.services.report_artifacts import write_repro_artifacts
    from lottery_gap_lab.services.repro import repro_uniform56

    doc = repro_uniform56(args.step, _mode(args, NumericMode.float), args.lottery_price, args.lp_step)
    paths = write_repro_artifacts(_out_dir(args), "repro_uniform56", doc)
    _emit(
        {
            "passed": doc.passed,
            "symmetric_price": doc.symmetric_price,
            "augmented_revenue": doc.augmented_revenue,
            **paths,
        }
    )
    return EXIT_OK if doc.passed else EXIT_VIOLATION


# =============================================================================
# parser
# =============================================================================
def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[m.value for m in NumericMode], default=None, help="rational|float")
    p.add_argument("--out", default=None, help="Output directory")


def _add_experiment(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="ExperimentConfig JSON file (flags override it)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--setting", type=int, choices=[1, 2, 3, 4], default=None)
    p.add_argument("--n", type=int, default=None, help="Agents")
    p.add_argument("--m", type=int, default=None, help="Items")
    p.add_argument("--support", type=int, default=None, help="Support size per distribution")
    p.add_argument("--count", type=int, default=None, help="Instances")
    p.add_argument("--k-max", dest="k_max", type=int, default=None, help="Largest item capacity / block cap")
    p.add_argument("--value-max", dest="value_max", type=int, default=None)
    p.add_argument("--j1-kind", dest="j1_kind", choices=["uniform", "partition"], default=None)
    p.add_argument("--workers", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lottery-lab", description="Lottery vs pricing gap lab")
    sub = parser.add_subparsers(dest="command", required=True)

    gen_p = sub.add_parser("gen", help="Write seeded instance files")
    _add_common(gen_p)
    _add_experiment(gen_p)
    gen_p.set_defaults(func=cmd_gen)

    check_p = sub.add_parser("check", help="Check every bound on a family of instances")
    _add_common(check_p)
    _add_experiment(check_p)
    check_p.add_argument("--instances", default=None, help="Instance file or directory (default: generate)")
    check_p.set_defaults(func=cmd_check)

    lp_p = sub.add_parser("lp", help="Optimal menu (single agent) or optimal DSIC mechanism")
    _add_common(lp_p)
    lp_p.add_argument("instance", help="Instance JSON file")
    lp_p.add_argument("--lp-out", default=None, help="Write the LP in CPLEX-LP text format")
    lp_p.set_defaults(func=cmd_lp)

    mye_p = sub.add_parser("myerson", help="Virtual values and Myerson revenue on the copies")
    _add_common(mye_p)
    mye_p.add_argument("instance", help="Instance JSON file")
    mye_p.set_defaults(func=cmd_myerson)

    pr_p = sub.add_parser("pricing", help="Optimal item pricing (single agent)")
    _add_common(pr_p)
    pr_p.add_argument("instance", help="Instance JSON file")
    pr_p.set_defaults(func=cmd_pricing)

    app_p = sub.add_parser("repro-appendix", help="Equal-revenue 3-lottery example")
    _add_common(app_p)
    app_p.add_argument("--n", type=int, default=10_000, help="Equal-revenue bound")
    app_p.add_argument("--grid", "-K", dest="grid", type=int, default=2000, help="Grid cells")
    app_p.add_argument("--no-refine", action="store_true", help="Skip the grid refinement sequence")
    app_p.set_defaults(func=cmd_repro_appendix)

    uni_p = sub.add_parser("repro-uniform56", help="Uniform [5,6]^2 pricing vs lottery example")
    _add_common(uni_p)
    uni_p.add_argument("--step", default="0.001")
    uni_p.add_argument("--lp-step", dest="lp_step", default="0.1")
    uni_p.add_argument("--lottery-price", dest="lottery_price", default="5.057")
    uni_p.set_defaults(func=cmd_repro_uniform56)
    return parser


def main(argv: list[str] | None = None) -> int:
    setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = int(args.func(args))
    except AppError as e:
        log.error(
            "command_failed",
            extra={"payload": {"command": args.command, "code": e.code, "message": e.message, "details": e.details}},
        )
        print(json.dumps({"error": e.code, "message": e.message}, ensure_ascii=False), file=sys.stderr)
        code = exit_code_for(e)
    except pydantic.ValidationError as e:
        log.error("command_failed", extra={"payload": {"command": args.command, "error": str(e)[:300]}})
        code = EXIT_CONFIG
    metrics_path = get_settings().metrics_textfile
    if metrics_path:
        write_metrics_textfile(metrics_path)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
