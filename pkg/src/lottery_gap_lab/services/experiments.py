"""
Seeded instance generation and batch checking.

Purpose:
- gen: ExperimentConfig -> deterministic InstanceDocs (one rng per (seed, index))
- check: InstanceDocs -> RunReportDoc, optionally over a process pool
- aggregates per inequality (min slack, worst ratio) and the CLI exit code
"""

from __future__ import annotations

import json
import time
from collections.abc import Sequence
from fractions import Fraction
from multiprocessing import Pool
from pathlib import Path
from typing import Any

import numpy as np

from lottery_gap_lab.bounds import check_setting1, check_setting2, check_setting3, check_setting4
from lottery_gap_lab.bounds.reports import GapReport
from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import (
    EXIT_OK,
    EXIT_VIOLATION,
    AppError,
    ErrCode,
    ValidationError,
    exit_code_for,
)
from lottery_gap_lab.common.ids import config_run_id, instance_id
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.metrics import (
    INEQUALITY_VIOLATIONS_TOTAL,
    INSTANCES_CHECKED_TOTAL,
    track_stage_latency,
)
from lottery_gap_lab.common.numeric import rationalize, to_json_number, to_number
from lottery_gap_lab.contracts.instances import (
    DistributionDoc,
    ExperimentConfig,
    FeasibilityDoc,
    InstanceDoc,
    JsonNumber,
    MatroidDoc,
    TypeSpaceDoc,
)
from lottery_gap_lab.contracts.reports import (
    AggregateRowDoc,
    GapReportDoc,
    InstanceErrorDoc,
    RunReportDoc,
)
from lottery_gap_lab.domain.enums import FeasibilityKind, MatroidKind, NumericMode, Structure

from .codec import LoadedInstance, instance_from_doc, parse_instance, write_instance

log = get_project_logger()

# weights are rationalized to this denominator before normalizing
_WEIGHT_DENOMINATOR = 10


# =============================================================================
# gen
# =============================================================================
def _draw_dist(rng: np.random.Generator, cfg: ExperimentConfig) -> DistributionDoc:
    support = sorted(int(v) for v in rng.choice(cfg.value_max + 1, size=cfg.support, replace=False))
    weights = [rationalize(float(w), _WEIGHT_DENOMINATOR) for w in rng.uniform(0.1, 1.0, size=cfg.support)]
    z = sum(weights, Fraction(0))
    return DistributionDoc(
        support=support,
        probs=[to_json_number(w / z) for w in weights],
    )


def _draw_matroid(rng: np.random.Generator, cfg: ExperimentConfig) -> MatroidDoc:
    size = cfg.n * cfg.m
    if cfg.j1_kind == "uniform":
        return MatroidDoc(kind=MatroidKind.uniform, size=size, rank=int(rng.integers(1, size + 1)))
    labels = rng.integers(0, max(cfg.n, 1), size=size)
    blocks = [[e for e in range(size) if labels[e] == b] for b in range(max(cfg.n, 1))]
    blocks = [b for b in blocks if b]
    caps = [int(c) for c in rng.integers(1, cfg.k_max + 1, size=len(blocks))]
    return MatroidDoc(kind=MatroidKind.partition, size=size, blocks=blocks, capacities=caps)


def generate_instance(cfg: ExperimentConfig, index: int) -> InstanceDoc:
    """Instance `index` of the family; depends only on (cfg, index)."""
    rng = np.random.default_rng([cfg.seed, cfg.setting, index])
    feasibility = None
    if cfg.setting == 2:
        ts = TypeSpaceDoc(
            kind=Structure.additive, n=1, m=cfg.m, t_dists=[_draw_dist(rng, cfg) for _ in range(cfg.m + 1)]
        )
    else:
        ts = TypeSpaceDoc(
            kind=Structure.product,
            n=cfg.n,
            m=cfg.m,
            dists=[[_draw_dist(rng, cfg) for _ in range(cfg.m)] for _ in range(cfg.n)],
        )
    if cfg.setting == 3:
        caps = [int(k) for k in rng.integers(1, cfg.k_max + 1, size=cfg.m)]
        feasibility = FeasibilityDoc(kind=FeasibilityKind.matching, n=cfg.n, m=cfg.m, capacities=caps)
    elif cfg.setting == 4:
        feasibility = FeasibilityDoc(
            kind=FeasibilityKind.general, n=cfg.n, m=cfg.m, matroid=_draw_matroid(rng, cfg)
        )
    return InstanceDoc(
        instance_id=instance_id(cfg.setting, cfg.seed, index),
        setting=cfg.setting,
        seed=cfg.seed,
        index=index,
        mode=cfg.mode,
        type_space=ts,
        feasibility=feasibility,
    )


def generate(cfg: ExperimentConfig) -> list[InstanceDoc]:
    if cfg.setting >= 3 and cfg.n * cfg.m > get_settings().subset_cap:
        raise ValidationError(
            "ground set too large for the feasibility oracles",
            {"n": cfg.n, "m": cfg.m, "cap": get_settings().subset_cap},
        )
    docs = [generate_instance(cfg, k) for k in range(cfg.count)]
    log.info(
        "instances_generated",
        extra={"payload": {"setting": cfg.setting, "seed": cfg.seed, "count": len(docs)}},
    )
    return docs


def write_instances(docs: Sequence[InstanceDoc], out_dir: str | Path) -> list[Path]:
    root = Path(out_dir) / "instances"
    return [write_instance(root / f"{doc.instance_id}.json", doc) for doc in docs]


def load_instance_docs(path: str | Path) -> list[InstanceDoc]:
    """A single instance file or every *.json in a directory (sorted by name)."""
    p = Path(path)
    files = sorted(p.glob("*.json")) if p.is_dir() else [p]
    if not files:
        raise ValidationError("no instance files found", {"path": str(p)})
    docs = []
    for f in files:
        try:
            raw = json.loads(f.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError("cannot read instance file", {"path": str(f), "error": str(e)[:200]}) from e
        docs.append(parse_instance(raw))
    return docs


# =============================================================================
# check
# =============================================================================
def check_instance(loaded: LoadedInstance) -> GapReport:
    ts, fs, iid = loaded.ts, loaded.fs, loaded.instance_id
    if loaded.setting == 1:
        return check_setting1(ts, iid)
    if loaded.setting == 2:
        return check_setting2(ts, iid)
    if loaded.setting == 3:
        return check_setting3(ts, fs, iid)
    return check_setting4(ts, fs, iid)


def _jsonable(details: dict | None) -> dict[str, Any] | None:
    if details is None:
        return None
    return json.loads(json.dumps(details, default=str))


def _check_payload(raw: dict[str, Any]) -> dict[str, Any]:
    """Pool worker: plain dicts in, plain dicts out."""
    iid = str(raw.get("instance_id", "unknown"))
    setting = int(raw.get("setting", 0))
    started = time.perf_counter()
    try:
        report = check_instance(instance_from_doc(parse_instance(raw)))
    except AppError as e:
        err = InstanceErrorDoc(instance_id=iid, code=e.code, message=e.message, details=_jsonable(e.details))
        return {"instance_id": iid, "setting": setting, "error": err.model_dump(mode="json")}
    except Exception as e:
        log.exception("instance_check_crashed", extra={"payload": {"instance_id": iid}})
        err = InstanceErrorDoc(instance_id=iid, code=ErrCode.UNKNOWN, message=str(e)[:300])
        return {"instance_id": iid, "setting": setting, "error": err.model_dump(mode="json")}
    return {
        "instance_id": iid,
        "setting": setting,
        "report": report.to_doc().model_dump(mode="json"),
        "elapsed_ms": (time.perf_counter() - started) * 1000,
    }


def _comparable(x: JsonNumber) -> Fraction | float:
    if isinstance(x, float):
        return x
    return to_number(x, NumericMode.rational)


def aggregate(reports: Sequence[GapReportDoc]) -> list[AggregateRowDoc]:
    """Per inequality id: counts, failures, minimum slack and worst ratio with their instances."""
    acc: dict[str, dict[str, Any]] = {}
    for rep in reports:
        for row in rep.rows:
            a = acc.get(row.inequality)
            if a is None:
                a = acc[row.inequality] = {
                    "scope": row.scope,
                    "count": 0,
                    "failures": 0,
                    "min_slack": row.slack,
                    "min_slack_instance": rep.instance_id,
                    "worst_ratio": None,
                    "worst_ratio_instance": None,
                }
            a["count"] += 1
            if not row.passed:
                a["failures"] += 1
            if _comparable(row.slack) < _comparable(a["min_slack"]):
                a["min_slack"] = row.slack
                a["min_slack_instance"] = rep.instance_id
            if row.ratio is not None and (a["worst_ratio"] is None or row.ratio > a["worst_ratio"]):
                a["worst_ratio"] = row.ratio
                a["worst_ratio_instance"] = rep.instance_id
    return [AggregateRowDoc(inequality=k, **acc[k]) for k in sorted(acc)]


def _record_metrics(result: dict[str, Any], doc: GapReportDoc | None) -> None:
    setting = str(result["setting"])
    if doc is None:
        INSTANCES_CHECKED_TOTAL.labels(setting=setting, result="error").inc()
        return
    INSTANCES_CHECKED_TOTAL.labels(setting=setting, result="pass" if doc.passed else "fail").inc()
    for row in doc.rows:
        if row.passed:
            continue
        INEQUALITY_VIOLATIONS_TOTAL.labels(inequality=row.inequality).inc()
        log.warning(
            "inequality_violation",
            extra={
                "payload": {
                    "instance_id": doc.instance_id,
                    "inequality": row.inequality,
                    "slack": row.slack,
                    "violations": row.violations,
                }
            },
        )


def run_check(
    cfg: ExperimentConfig,
    docs: Sequence[InstanceDoc] | None = None,
    timings: dict[str, Any] | None = None,
) -> RunReportDoc:
    """
    Checks docs (generated from cfg when omitted). Results are merged by instance id,
    so the report does not depend on the worker count.
    """
    timings = timings if timings is not None else {}
    if docs is None:
        with track_stage_latency("generate", timings):
            docs = generate(cfg)
    payloads = [doc.model_dump(mode="json") for doc in docs]

    with track_stage_latency("check", timings):
        if cfg.workers > 1 and len(payloads) > 1:
            with Pool(processes=cfg.workers) as pool:
                results = pool.map(_check_payload, payloads, chunksize=1)
        else:
            results = [_check_payload(p) for p in payloads]
    results.sort(key=lambda r: r["instance_id"])

    reports: list[GapReportDoc] = []
    errors: list[InstanceErrorDoc] = []
    per_instance: dict[str, float] = {}
    for res in results:
        if "error" in res:
            errors.append(InstanceErrorDoc.model_validate(res["error"]))
            _record_metrics(res, None)
            continue
        doc = GapReportDoc.model_validate(res["report"])
        reports.append(doc)
        per_instance[doc.instance_id] = res["elapsed_ms"]
        _record_metrics(res, doc)
    timings["instances_ms"] = per_instance

    failures = sum(1 for r in reports if not r.passed)
    run = RunReportDoc(
        run_id=config_run_id(cfg.setting, cfg.seed, len(payloads)),
        app_env=get_settings().app_env,
        config=cfg,
        passed=failures == 0 and not errors,
        instances=len(payloads),
        failures=failures,
        reports=reports,
        aggregates=aggregate(reports),
        errors=errors,
    )
    log.info(
        "run_checked",
        extra={
            "payload": {
                "run_id": run.run_id,
                "instances": run.instances,
                "failures": run.failures,
                "errors": len(errors),
                "workers": cfg.workers,
            }
        },
    )
    return run


def run_exit_code(run: RunReportDoc) -> int:
    code = EXIT_OK if run.failures == 0 else EXIT_VIOLATION
    for err in run.errors:
        code = max(code, exit_code_for(AppError(err.code, err.message, err.details)))
    return code
