"""
Run artifacts on disk.

Purpose:
- report.json (deterministic), results.csv (one line per inequality row),
  summary.md (jinja2), timing.json (wall-clock, kept out of report.json)
- reproduction reports as JSON + markdown
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

from jinja2 import Environment, FileSystemLoader, select_autoescape
from pydantic import BaseModel

from lottery_gap_lab.contracts.reports import AppendixReproDoc, RunReportDoc, Uniform56ReproDoc

CSV_COLUMNS = ["instance_id", "inequality_id", "lhs", "rhs", "slack", "ratio"]


def _jinja() -> Environment:
    tpl_dir = Path(__file__).resolve().parents[1] / "templates"
    return Environment(
        loader=FileSystemLoader(str(tpl_dir)),
        autoescape=select_autoescape(["html", "xml"]),
        trim_blocks=True,
        lstrip_blocks=True,
    )


def write_json(path: Path, payload: dict[str, Any] | BaseModel) -> Path:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def csv_rows(run: RunReportDoc) -> list[dict[str, Any]]:
    rows = []
    for rep in run.reports:
        for row in rep.rows:
            rows.append(
                {
                    "instance_id": rep.instance_id,
                    "inequality_id": row.inequality,
                    "lhs": row.lhs,
                    "rhs": row.rhs,
                    "slack": row.slack,
                    "ratio": "" if row.ratio is None else row.ratio,
                }
            )
    return rows


def write_csv(path: Path, run: RunReportDoc) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(csv_rows(run))
    return path


def render_run_summary(run: RunReportDoc) -> str:
    return _jinja().get_template("run_summary.md.j2").render(run=run)


def write_run_artifacts(
    out_dir: str | Path, run: RunReportDoc, timings: dict[str, Any] | None = None
) -> dict[str, str | None]:
    root = Path(out_dir)
    report_path = write_json(root / "report.json", run)
    csv_path = write_csv(root / "results.csv", run)
    summary_path = root / "summary.md"
    summary_path.write_text(render_run_summary(run), encoding="utf-8")
    timing_path = None
    if timings is not None:
        timing_path = str(write_json(root / "timing.json", {"run_id": run.run_id, **timings}))
    return {
        "report_json_path": str(report_path),
        "results_csv_path": str(csv_path),
        "summary_md_path": str(summary_path),
        "timing_json_path": timing_path,
    }


def write_repro_artifacts(
    out_dir: str | Path, name: str, doc: AppendixReproDoc | Uniform56ReproDoc
) -> dict[str, str]:
    root = Path(out_dir)
    json_path = write_json(root / f"{name}.json", doc)
    md_path = root / f"{name}.md"
    md_path.write_text(_jinja().get_template(f"{name}.md.j2").render(doc=doc), encoding="utf-8")
    return {"json_path": str(json_path), "md_path": str(md_path)}
