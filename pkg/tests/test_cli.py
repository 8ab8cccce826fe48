import json

import pytest
from click.testing import CliRunner

from backshift.cli import main, random_deltas
from backshift.construct.schedule import IntervalSchedule, validate_schedule


@pytest.fixture()
def run(tmp_path):
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [*args, "--out", str(tmp_path)])

    invoke.out = tmp_path
    return invoke


def test_check_weight_parametric(run):
    result = run("check-weight", "--mu", "2", "--p", "2")
    assert result.exit_code == 0, result.output
    report = json.loads((run.out / "weight_report.json").read_text())
    assert report["verdict"] == "converges"
    assert float(report["surrogate"]) <= 1 + report["tolerance"]


def test_check_weight_constant_one_fails(run, tmp_path):
    table = tmp_path / "w.json"
    table.write_text(json.dumps({"kind": "tabulated", "values": [1], "extension": "periodic"}))
    result = run("check-weight", "--table", str(table), "--p", "1", "--horizon", "1000", "--kmax", "1000")
    assert result.exit_code == 1


def test_missing_config_is_usage_error(run):
    assert run("build", "--config", "does-not-exist.json").exit_code == 2


def test_unknown_config_key_is_usage_error(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"levelz": 3}))
    assert run("build", "--config", str(cfg)).exit_code == 2


def test_build_writes_valid_schedule(run):
    result = run("build", "--variant", "v1", "--levels", "5", "--no-vectors")
    assert result.exit_code == 0, result.output
    sched = IntervalSchedule.from_json(json.loads((run.out / "schedule.json").read_text()))
    assert validate_schedule(sched) == []
    assert (run.out / "config.resolved.json").exists()
    meta = json.loads((run.out / "run.meta.json").read_text())
    assert meta["passed"] and "started" in meta


def test_certify_visit_single_index(run):
    result = run("certify", "visit", "--s-index", "3")
    assert result.exit_code == 0, result.output
    report = json.loads((run.out / "visit.json").read_text())
    assert report["passed"] is True
    assert all(report["pass"].values())


def test_certify_visit_index_out_of_range(run):
    assert run("certify", "visit", "--preset", "v1-flagship", "--s-index", "100000").exit_code == 2


def test_outputs_are_reproducible(tmp_path):
    runner = CliRunner()
    texts = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert runner.invoke(main, ["certify", "nonfhc", "--preset", "v1-flagship", "--out", str(out)]).exit_code == 0
        texts.append((out / "nonfhc.json").read_text() + (out / "config.resolved.json").read_text())
    assert texts[0] == texts[1]


def test_certify_family_reports_unreachable_mu(run):
    result = run("certify", "family", "--preset", "v3-family")
    assert result.exit_code == 1
    rows = json.loads((run.out / "family.json").read_text())
    assert rows[0]["passed"] is True
    assert rows[1]["error"].startswith("NeedDeeperSchedule")


def test_find_interval(run):
    result = run("find-interval", "--n", "7", "--seed", "5")
    assert result.exit_code == 0
    assert json.loads((run.out / "interval.json").read_text())["valid"]


def test_random_deltas_respect_the_sum():
    values = random_deltas(7, 11)
    assert len(values) == 128 and sum(values) <= 1
    assert all(-1 <= v <= 1 for v in values)


def test_a_set(run):
    result = run("a-set", "--mu", "2", "--n", "3")
    assert result.exit_code == 0
    assert len(json.loads((run.out / "a_set.json").read_text())["members"]) == 5


def test_orbit_csv(run):
    result = run("orbit", "--preset", "v1-flagship", "--gnuplot")
    assert result.exit_code == 0, result.output
    lines = (run.out / "orbit.csv").read_text().splitlines()
    assert lines[0] == "s,distance" and len(lines) == 4
    assert (run.out / "orbit.gp").exists()


def test_verify_clean_tree(run):
    assert run("verify").exit_code == 0


def test_verify_v2(run):
    assert run("verify", "--preset", "v2-isometry").exit_code == 0
