import csv
import io
import json
import subprocess
import sys

import pytest

from cpcsim.cli import main, parse_range, read_curve_csv, run


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_predict_exponential():
    code, out = run(["predict", "exp:1", "--cores", "100", "--json"])
    assert code == 0
    (rec,) = records(out)
    assert rec["speedup"] == pytest.approx(100.0, rel=1e-12)
    assert rec["expected_min"] == pytest.approx(0.01)


def test_predict_uniform_single_core():
    code, out = run(["predict", "uniform:0:2", "--cores", "1", "--json"])
    assert code == 0 and records(out)[0]["speedup"] == 1.0


def test_predict_hyper():
    code, out = run(["predict", "hyper:5:1", "--cores", "100", "--json"])
    assert records(out)[0]["speedup"] == pytest.approx(275.7, rel=0.03)


def test_predict_text_output():
    code, out = run(["predict", "erlang:3:1", "--cores", "100"])
    assert code == 0
    fields = dict(line.split(None, 1) for line in out.splitlines())
    assert float(fields["speedup"]) == pytest.approx(7.68, rel=0.03)
    assert fields["method"] == "quadrature"


@pytest.mark.parametrize("argv", [
    ["predict", "bogus:1"],
    ["predict", "exp:0"],
    ["predict", "exp:1", "--cores", "0"],
    ["predict", "exp:1", "--cores", "many"],
    ["sweep", "--family", "cores", "--range", "1..5"],
    ["sweep", "--family", "cores", "--dist", "exp:1", "--range", "5..1"],
    ["sweep", "--family", "erlang-k", "--range", "1-5"],
    ["race", "exp:1", "--cmd", "true"],
    ["race"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv, io.StringIO()) == 2


def test_numeric_failure_exit_3(monkeypatch):
    from cpcsim import cli
    from cpcsim.order_stats import QuadratureError

    def boom(q, method="auto"):
        raise QuadratureError("no convergence")

    monkeypatch.setattr(cli, "expected_min_details", boom)
    assert main(["predict", "erlang:3:1", "--cores", "5"], io.StringIO()) == 3


def test_race_environment_failure_exit_4():
    assert main(["race", "--cmd", "sh -c 'exit 1'", "--replicas", "2", "--rounds", "1"], io.StringIO()) == 4
    assert main(["race", "exp:1", "--unit-ms", "0.0001", "--rounds", "2"], io.StringIO()) == 4


def test_simulate_exponential():
    code, out = run(["simulate", "exp:1", "--cores", "100", "--steps", "100000", "--seed", "1", "--json"])
    rec = records(out)[0]
    assert abs(rec["speedup_estimate"] - 100) <= 4 * rec["speedup_stderr"]


def test_simulate_deterministic_bytes():
    argv = [sys.executable, "-m", "cpcsim", "simulate", "exp:1", "--cores", "1", "--steps", "10", "--seed", "7", "--csv"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("CPCSIM_SEED", "31")
    _, env_out = run(["simulate", "hyper:5:1", "--cores", "3", "--steps", "50", "--json"])
    monkeypatch.delenv("CPCSIM_SEED")
    _, flag_out = run(["simulate", "hyper:5:1", "--cores", "3", "--steps", "50", "--seed", "31", "--json"])
    assert env_out == flag_out
    assert records(env_out)[0]["seed"] == 31


def test_simulate_hyper_ten():
    code, out = run(["simulate", "hyper:10:1", "--cores", "100", "--steps", "100000", "--json"])
    assert records(out)[0]["speedup_estimate"] == pytest.approx(521.15, rel=0.05)


def test_sweep_cores_csv(tmp_path):
    path = tmp_path / "exp.csv"
    code, _ = run(["sweep", "--family", "cores", "--dist", "exp:1", "--range", "1..100", "--out", str(path)])
    assert code == 0
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "cv", "analytic_speedup", "mc_speedup", "mc_stderr"]
    assert len(rows) == 101
    for n, row in enumerate(rows[1:], start=1):
        assert int(row[0]) == n
        assert float(row[2]) == pytest.approx(n, rel=1e-12)
        assert row[3] == "" and row[4] == ""


def test_sweep_erlang_shape():
    code, out = run(["sweep", "--family", "erlang-k", "--range", "2..100", "--cores", "100"])
    pts = read_curve_csv(io.StringIO(out))
    s = [p.analytic_speedup for p in pts]
    assert [p.x for p in pts] == list(range(2, 101))
    assert all(b < a for a, b in zip(s, s[1:]))


def test_sweep_hyper_shape():
    code, out = run(["sweep", "--family", "hyper-a", "--range", "1..100", "--cores", "100"])
    s = [p.analytic_speedup for p in read_curve_csv(io.StringIO(out))]
    assert all(b > a for a, b in zip(s, s[1:]))


def test_sweep_csv_round_trip(tmp_path):
    from cpcsim.distributions import Hyperexponential
    from cpcsim.monte_carlo import SimConfig, sweep_hyper_a

    path = tmp_path / "h.csv"
    argv = ["sweep", "--family", "hyper-a", "--range", "1..4:0.5", "--mode", "both",
            "--steps", "2000", "--seed", "9", "--out", str(path)]
    assert run(argv)[0] == 0
    parsed = read_curve_csv(path)
    sim = SimConfig(Hyperexponential(1.0, 1.0), steps=2000, seed=9)
    expected = sweep_hyper_a([1.0 + 0.5 * i for i in range(7)], cores=100, sim=sim)
    assert parsed == expected
    for p, e in zip(parsed, expected):
        assert p.mc_speedup == e.mc_speedup and p.cv == e.cv  # bit-exact


def test_sweep_json_lines():
    code, out = run(["sweep", "--family", "cores", "--dist", "uniform:0:2", "--range", "1..3", "--format", "json"])
    recs = records(out)
    assert [r["analytic_speedup"] for r in recs] == [1.0, 1.5, 2.0]
    assert list(recs[0]) == ["x", "cv", "analytic_speedup", "mc_speedup", "mc_stderr"]
    assert recs[0]["mc_speedup"] is None


def test_sweep_mc_only_blanks_analytic():
    code, out = run(["sweep", "--family", "cores", "--dist", "exp:1", "--range", "2..3", "--mode", "mc", "--steps", "100"])
    pts = read_curve_csv(io.StringIO(out))
    assert all(p.analytic_speedup is None and p.mc_speedup > 0 for p in pts)


@pytest.mark.parametrize("text, expected", [
    ("1..5", [1, 2, 3, 4, 5]),
    ("2..10:4", [2, 6, 10]),
    ("1..2:0.25", [1.0, 1.25, 1.5, 1.75, 2.0]),
    ("3..3", [3]),
])
def test_parse_range(text, expected):
    assert parse_range(text) == expected


def test_race_command_winner_index():
    template = f"{sys.executable} -c \"import sys, time; time.sleep(0.05 * int(sys.argv[1]))\" {{i}}"
    code, out = run(["race", "--cmd", template, "--replicas", "3", "--rounds", "2", "--per-round", "--json"])
    assert code == 0
    for rec in records(out):
        assert rec["winner"] in {0, 1, 2}


def test_race_single_replica():
    code, out = run(["race", "exp:1", "--replicas", "1", "--rounds", "50", "--json"])
    rec = records(out)[0]
    assert rec["empirical_speedup"] == pytest.approx(1.0, rel=0.05)
    assert rec["model_speedup"] == 1.0


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "cpcsim", "predict", "exp:2", "--cores", "4", "--csv"],
                         capture_output=True, text=True, check=True).stdout
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["speedup"]) == pytest.approx(4.0)
    assert rows[0]["dist"] == "exp:2.0"
