from __future__ import annotations

import json
from pathlib import Path

import pytest

from lottery_gap_lab.cli import build_parser, main
from lottery_gap_lab.common.errors import EXIT_CONFIG, EXIT_OK


def _instance_file(tmp_path: Path, instance_id: str = "inst_cli") -> Path:
    raw = {
        "instance_id": instance_id,
        "setting": 1,
        "mode": "rational",
        "type_space": {
            "kind": "product",
            "n": 1,
            "m": 1,
            "dists": [[{"support": [1, 2, 3], "probs": [1, 1, 1]}]],
        },
    }
    path = tmp_path / f"{instance_id}.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    return path


_GEN_FLAGS = ["--setting", "1", "--m", "2", "--support", "2", "--count", "2", "--seed", "3", "--value-max", "3"]


def test_parser_knows_every_command() -> None:
    parser = build_parser()
    for argv in (
        ["gen"],
        ["check"],
        ["lp", "x.json"],
        ["myerson", "x.json"],
        ["pricing", "x.json"],
        ["repro-appendix"],
        ["repro-uniform56"],
    ):
        assert callable(parser.parse_args(argv).func)


def test_gen_writes_instances(tmp_path: Path) -> None:
    assert main(["gen", *_GEN_FLAGS, "--out", str(tmp_path)]) == EXIT_OK
    files = sorted(p.name for p in (tmp_path / "instances").glob("*.json"))
    assert files == ["inst_s1_3_00000.json", "inst_s1_3_00001.json"]


def test_check_generated_family(tmp_path: Path) -> None:
    assert main(["check", *_GEN_FLAGS, "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["passed"] is True
    assert report["instances"] == 2
    for name in ("results.csv", "summary.md", "timing.json"):
        assert (tmp_path / name).exists()


def test_check_instances_dir(tmp_path: Path) -> None:
    assert main(["gen", *_GEN_FLAGS, "--out", str(tmp_path / "gen")]) == EXIT_OK
    out = tmp_path / "run"
    code = main(["check", "--instances", str(tmp_path / "gen" / "instances"), "--out", str(out)])
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert [r["instance_id"] for r in report["reports"]] == ["inst_s1_3_00000", "inst_s1_3_00001"]


def test_check_rejects_bad_config(tmp_path: Path) -> None:
    assert main(["check", "--setting", "1", "--n", "2", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert not (tmp_path / "report.json").exists()


def test_check_rejects_unreadable_config_file(tmp_path: Path) -> None:
    bad = tmp_path / "cfg.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["check", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_lp_writes_menu_and_lp_text(tmp_path: Path) -> None:
    path = _instance_file(tmp_path)
    lp_out = tmp_path / "lp" / "menu.lp"
    assert main(["lp", str(path), "--out", str(tmp_path), "--lp-out", str(lp_out)]) == EXIT_OK
    menu = json.loads((tmp_path / "inst_cli.menu.json").read_text(encoding="utf-8"))
    assert menu["lotteries"]
    text = lp_out.read_text(encoding="utf-8")
    assert "Maximize" in text
    assert text.rstrip().endswith("End")


def test_lp_missing_instance_is_config_error(tmp_path: Path) -> None:
    assert main(["lp", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_CONFIG


@pytest.mark.parametrize("command", ["myerson", "pricing"])
def test_single_instance_commands(tmp_path: Path, command: str) -> None:
    path = _instance_file(tmp_path)
    assert main([command, str(path)]) == EXIT_OK
    assert main([command, str(path), "--mode", "float"]) == EXIT_OK


def test_repro_uniform56_writes_reports(tmp_path: Path) -> None:
    code = main(["repro-uniform56", "--step", "0.1", "--lp-step", "0.5", "--out", str(tmp_path)])
    doc = json.loads((tmp_path / "repro_uniform56.json").read_text(encoding="utf-8"))
    assert code == (EXIT_OK if doc["passed"] else 1)
    assert (tmp_path / "repro_uniform56.md").exists()


def test_repro_appendix_small(tmp_path: Path) -> None:
    code = main(["repro-appendix", "--n", "16", "--grid", "8", "--no-refine", "--out", str(tmp_path)])
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "repro_appendix.json").read_text(encoding="utf-8"))
    assert doc["refinement"] == []
    assert "revenue_near_target" not in doc["checks"]
