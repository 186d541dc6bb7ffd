import csv
import json
import os
import shutil
import subprocess

import pytest

CLI = os.environ.get("STARCCO_CLI") or shutil.which("starcco")

TINY_PLAN = {
    "name": "tiny",
    "axis": "n_ris",
    "values": [1],
    "strategies": ["AVUS", "NoRIS"],
    "seeds": [1],
    "budget": {"episodes": 2, "steps": 5},
    "scenario": {"preset": "desk"},
}


def cli(*args):
    if CLI is None:
        pytest.skip("starcco executable not found")
    return subprocess.run([CLI, *args], capture_output=True, text=True)


def test_cli_verify_and_mutation():
    assert cli("verify").returncode == 0
    assert cli("verify", "--perturb-nu", "0.05").returncode == 2


def test_cli_run_chart_pareto(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps(TINY_PLAN))
    out = tmp_path / "out"
    r = cli("run", str(plan), "--out-dir", str(out))
    assert r.returncode == 0, r.stderr
    with open(out / "results.csv") as f:
        rows = list(csv.DictReader(f))
    assert [row["strategy"] for row in rows] == ["AVUS", "NoRIS"]
    assert all(row["status"] == "ok" for row in rows)

    assert cli("chart", str(out / "results.csv")).returncode == 0
    assert any(p.suffix == ".svg" for p in (out / "charts").iterdir())

    archive = out / rows[0]["archive_path"]
    r = cli("pareto", str(archive))
    assert r.returncode == 0
    assert r.stdout.startswith("coverage,capacity")


def test_cli_plan_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**TINY_PLAN, "axis": "nope"}))
    assert cli("run", str(bad), "--out-dir", str(tmp_path / "o")).returncode == 1
    assert cli("run", str(tmp_path / "missing.json")).returncode == 1


def test_module():
    starcco = pytest.importorskip("starcco")
    env = starcco.make_env("desk", seed=3)
    obs = env.reset(0)
    assert len(obs) == env.observation_size
    r = env.step(env.hold_action())
    assert len(r["reward"]) == 2
    assert 0.0 <= env.objectives[0] <= 1.0
    assert starcco.pareto_front([(1, 0), (0, 1), (0.5, 0.5), (0.2, 0.2)]) == [(1, 0), (0, 1), (0.5, 0.5)]
    assert all(s["passed"] for s in starcco.verify())
