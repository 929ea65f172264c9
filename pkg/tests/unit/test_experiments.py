from __future__ import annotations

from pathlib import Path

import pytest

from lottery_gap_lab.common.errors import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, ErrCode, ValidationError
from lottery_gap_lab.contracts.instances import ExperimentConfig
from lottery_gap_lab.contracts.reports import GapReportDoc, InequalityRowDoc, InstanceErrorDoc
from lottery_gap_lab.domain.enums import FeasibilityKind, InequalityScope, MatroidKind, Structure
from lottery_gap_lab.services.experiments import (
    _check_payload,
    aggregate,
    generate,
    generate_instance,
    load_instance_docs,
    run_check,
    run_exit_code,
    write_instances,
)


def _cfg(**kw) -> ExperimentConfig:
    base = {"seed": 7, "setting": 1, "m": 2, "support": 2, "count": 3, "value_max": 4}
    base.update(kw)
    return ExperimentConfig.model_validate(base)


# =============================================================================
# gen
# =============================================================================
def test_generation_is_deterministic() -> None:
    a = [d.model_dump(mode="json") for d in generate(_cfg())]
    b = [d.model_dump(mode="json") for d in generate(_cfg())]
    assert a == b
    assert [d["instance_id"] for d in a] == ["inst_s1_7_00000", "inst_s1_7_00001", "inst_s1_7_00002"]


def test_instances_depend_only_on_their_index() -> None:
    assert generate_instance(_cfg(count=1), 2) == generate(_cfg(count=3))[2]
    assert generate_instance(_cfg(seed=8), 0) != generate_instance(_cfg(), 0)


def test_generated_distributions_fit_the_grid() -> None:
    for doc in generate(_cfg(count=5, support=3)):
        for dist in doc.type_space.dists[0]:
            assert len(dist.support) == 3
            assert dist.support == sorted(dist.support)
            assert all(0 <= v <= 4 for v in dist.support)


def test_setting2_generates_additive_spaces() -> None:
    doc = generate(_cfg(setting=2, m=3))[0]
    assert doc.type_space.kind is Structure.additive
    assert len(doc.type_space.t_dists) == 4
    assert doc.feasibility is None


def test_setting3_generates_matching_capacities() -> None:
    for doc in generate(_cfg(setting=3, n=2, m=2, k_max=2)):
        assert doc.feasibility.kind is FeasibilityKind.matching
        assert all(1 <= k <= 2 for k in doc.feasibility.capacities)


def test_setting4_generates_general_matroids() -> None:
    uniform = generate(_cfg(setting=4, n=2, m=2))[0]
    assert uniform.feasibility.matroid.kind is MatroidKind.uniform
    assert 1 <= uniform.feasibility.matroid.rank <= 4
    partition = generate(_cfg(setting=4, n=2, m=2, j1_kind="partition"))[0]
    blocks = partition.feasibility.matroid.blocks
    assert sorted(e for b in blocks for e in b) == [0, 1, 2, 3]


def test_generation_rejects_large_ground_sets() -> None:
    with pytest.raises(ValidationError):
        generate(_cfg(setting=3, n=5, m=4))


def test_config_rejects_multi_agent_single_settings() -> None:
    with pytest.raises(ValueError):
        _cfg(setting=1, n=2)


def test_instance_files_round_trip(tmp_path: Path) -> None:
    docs = generate(_cfg())
    paths = write_instances(docs, tmp_path)
    assert all(p.parent == tmp_path / "instances" for p in paths)
    assert load_instance_docs(tmp_path / "instances") == docs
    assert load_instance_docs(paths[1]) == [docs[1]]
    (tmp_path / "empty").mkdir()
    with pytest.raises(ValidationError):
        load_instance_docs(tmp_path / "empty")


# =============================================================================
# check
# =============================================================================
def _row(name: str, slack, passed: bool = True, ratio: float | None = None) -> InequalityRowDoc:
    return InequalityRowDoc(
        inequality=name, scope=InequalityScope.expectation, lhs=0, rhs=slack, slack=slack, ratio=ratio, passed=passed
    )


def test_aggregate_tracks_min_slack_and_worst_ratio() -> None:
    reports = [
        GapReportDoc(instance_id="a", setting=1, passed=True, rows=[_row("x", "1/2", ratio=0.5), _row("y", 3)]),
        GapReportDoc(instance_id="b", setting=1, passed=False, rows=[_row("x", "1/3", ratio=0.9), _row("y", -1, False)]),
    ]
    rows = {a.inequality: a for a in aggregate(reports)}
    assert list(rows) == ["x", "y"]
    assert rows["x"].count == 2
    assert rows["x"].min_slack == "1/3"
    assert rows["x"].min_slack_instance == "b"
    assert rows["x"].worst_ratio == 0.9
    assert rows["y"].failures == 1
    assert rows["y"].min_slack == -1


def test_check_payload_turns_errors_into_documents() -> None:
    raw = generate(_cfg(setting=3, n=2, m=1, count=1))[0].model_dump(mode="json")
    raw["feasibility"] = None
    out = _check_payload(raw)
    assert "report" not in out
    err = InstanceErrorDoc.model_validate(out["error"])
    assert err.code == ErrCode.VALIDATION


def test_run_check_setting1_passes() -> None:
    timings: dict = {}
    run = run_check(_cfg(), timings=timings)
    assert run.passed
    assert run.instances == 3
    assert run.run_id == "run_s1_7_n3"
    assert [r.instance_id for r in run.reports] == sorted(r.instance_id for r in run.reports)
    assert set(timings["instances_ms"]) == {r.instance_id for r in run.reports}
    assert run_exit_code(run) == EXIT_OK


def test_worker_count_does_not_change_results() -> None:
    serial = run_check(_cfg(count=4))
    pooled = run_check(_cfg(count=4, workers=2))
    assert [r.model_dump() for r in serial.reports] == [r.model_dump() for r in pooled.reports]
    assert serial.aggregates == pooled.aggregates


def test_run_check_setting3_small() -> None:
    run = run_check(_cfg(setting=3, n=2, m=1, count=2))
    assert run.passed, [a.inequality for a in run.aggregates if a.failures]
    assert all(r.setting == 3 for r in run.reports)


def test_run_with_bad_instance_exits_with_config_code() -> None:
    docs = generate(_cfg(setting=3, n=2, m=1, count=2))
    broken = docs[0].model_copy(update={"feasibility": None})
    run = run_check(_cfg(setting=3, n=2, m=1, count=2), docs=[broken, docs[1]])
    assert not run.passed
    assert len(run.errors) == 1
    assert run.errors[0].instance_id == broken.instance_id
    assert run_exit_code(run) == EXIT_CONFIG


def test_exit_code_for_violations() -> None:
    run = run_check(_cfg(count=1))
    failing = run.model_copy(update={"failures": 1, "passed": False})
    assert run_exit_code(failing) == EXIT_VIOLATION
