"""Exit criteria. Each test registers one PASS/FAIL line, printed in the
terminal summary under "acceptance criteria"."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from cpcsim.distributions import Erlang, Exponential, Hyperexponential, Uniform
from cpcsim.monte_carlo import SimConfig, hyper_a_for_cv, simulate, sweep_cores, sweep_erlang_k
from cpcsim.order_stats import MinQuery, expected_min_details, speedup
from cpcsim.racer import RaceConfig, SyntheticTask, race
from cpcsim.rng import Rng

from conftest import ACCEPTANCE, integrate_support

STEPS = 100_000
SEED = 20240601


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, f"{key}: {detail}"


def test_c1_linear_speedup_theorem():
    start = time.perf_counter()
    worst = max(abs(speedup(MinQuery(Exponential(1.0), n)) - n) / n for n in range(1, 1001))
    elapsed = time.perf_counter() - start
    record("C1 exponential speedup = n, n=1..1000",
           worst <= 1e-12 and elapsed < 1.0,
           f"max relative error {worst:.2e} (tol 1e-12), {elapsed:.3f}s")


def test_c2_reference_cvs():
    got = [round(d.cv(), 2) for d in (Erlang(10, 1.0), Exponential(1.0), Hyperexponential(5.0, 1.0),
                                      Hyperexponential(10.0, 1.0))]
    record("C2 reference CVs", got == [0.32, 1.00, 1.51, 1.62], f"got {got}, want [0.32, 1.0, 1.51, 1.62]")


@pytest.mark.parametrize("a, target", [(5.0, 275.71), (10.0, 521.15)])
def test_c3_hyper_anchors(a, target):
    d = Hyperexponential(a, 1.0)
    analytic = speedup(MinQuery(d, 100))
    mc = simulate(SimConfig(d, cores=100, steps=STEPS, seed=SEED))
    in_band = lambda v: abs(v - target) <= 0.05 * target
    ok = in_band(mc.speedup_estimate) and in_band(analytic) and \
        abs(mc.speedup_estimate - analytic) <= 4 * mc.speedup_stderr
    record(f"C3 H2({a:g}) speedup at n=100 = {target} +-5%", ok,
           f"MC {mc.speedup_estimate:.2f} +- {mc.speedup_stderr:.2f}, analytic {analytic:.2f}")


def test_c4_erlang_anchors_and_sweep():
    checks = []
    for k, target in ((3, 7.68), (2, 15.14)):
        analytic = speedup(MinQuery(Erlang(k, 1.0), 100))
        mc = simulate(SimConfig(Erlang(k, 1.0), cores=100, steps=STEPS, seed=SEED + k))
        checks.append((abs(analytic - target) <= 0.03 * target
                       and abs(mc.speedup_estimate - analytic) <= 4 * mc.speedup_stderr,
                       f"k={k}: analytic {analytic:.3f} (want {target} +-3%), MC {mc.speedup_estimate:.3f}"
                       f" +- {mc.speedup_stderr:.3f}"))
    pts = sweep_erlang_k(range(2, 101), cores=100)
    s = [p.analytic_speedup for p in pts]
    monotone = all(b < a for a, b in zip(s, s[1:]))
    below_two = [p.x for p in pts if p.analytic_speedup < 2]
    tail_low = below_two and below_two == list(range(below_two[0], 101))
    ok = all(c for c, _ in checks) and monotone and tail_low
    detail = "; ".join(d for _, d in checks) + \
        f"; monotone={monotone}; speedup < 2 for k >= {below_two[0] if below_two else None}"
    record("C4 Erlang anchors and k sweep", ok, detail)


def test_c5_hyper_cv_anchors():
    rows, ok = [], True
    for cv, target in ((1.59, 426.08), (1.70, 1798.56), (1.72, 4975.12)):
        a = hyper_a_for_cv(cv)
        s = speedup(MinQuery(Hyperexponential(a, 1.0), 100))
        ok &= abs(s - target) <= 0.10 * target
        rows.append(f"cv {cv}: a={a:.3f} speedup {s:.2f} (want {target} +-10%)")
    record("C5 H2(a) CV anchors", ok, "; ".join(rows))


def test_c6_uniform_vs_erlang_equal_cv():
    uni = sweep_cores(Uniform(0.0, 2.0), range(1, 101))
    erl = sweep_cores(Erlang(3, 1.0), range(1, 101))
    exact = all(abs(p.analytic_speedup - (p.x + 1) / 2) <= 1e-12 * p.x for p in uni)
    beats = all(u.analytic_speedup > e.analytic_speedup for u, e in zip(uni[1:], erl[1:]))
    record("C6 uniform (n+1)/2 and above Erlang-3", exact and beats and uni[99].analytic_speedup == 50.5,
           f"uniform(100)={uni[99].analytic_speedup}, erlang3(100)={erl[99].analytic_speedup:.3f}, "
           f"exact={exact}, dominates={beats}")


def _ks_ok(d, seed):
    x = d.sample(Rng(seed), STEPS)
    return stats.kstest(x, d.cdf).statistic < 1.95 / math.sqrt(STEPS)


@pytest.mark.slow
def test_c7_property_suite():
    start = time.perf_counter()
    builtin = [Exponential(1.0), Erlang(3, 1.0), Erlang(10, 1.0), Hyperexponential(5.0, 1.0),
               Hyperexponential(10.0, 1.0), Uniform(0.0, 2.0)]
    results = {}

    results["ks"] = all(_ks_ok(d, SEED + i) for i, d in enumerate(builtin))
    results["pdf mass"] = all(abs(integrate_support(d.pdf, d) - 1) <= 1e-8 for d in builtin)

    agree = True
    for d in (Exponential(1.0), Uniform(0.0, 2.0), Hyperexponential(5.0, 1.0), Hyperexponential(10.0, 1.0)):
        for n in (1, 10, 100):
            q = MinQuery(d, n)
            c, g = expected_min_details(q).value, expected_min_details(q, "quadrature").value
            agree &= abs(c - g) <= 1e-6 * c
    results["closed vs quadrature"] = agree

    consistent = True
    for d in builtin:
        for n in (1, 2, 10, 100):
            exact = expected_min_details(MinQuery(d, n)).value
            misses = 0
            for s in range(5):
                r = simulate(SimConfig(d, cores=n, steps=STEPS, seed=SEED + 31 * s + n))
                misses += abs(r.mean_min - exact) > 4 * r.stderr
            consistent &= misses <= 1
    results["MC vs analytic"] = consistent

    stable = True
    for n in (2, 10, 100):
        mins = Exponential(1.0).sample(Rng(SEED + n), (20_000, n)).min(axis=1)
        stable &= stats.kstest(mins, Exponential(float(n)).cdf).statistic < 1.95 / math.sqrt(20_000)
    results["min stability"] = stable

    argv = [sys.executable, "-m", "cpcsim", "simulate", "hyper:5:1", "--cores", "10",
            "--steps", "1000", "--seed", "3", "--json"]
    outs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
    cfg = SimConfig(Erlang(3, 1.0), cores=7, steps=1000, seed=3)
    results["determinism"] = outs[0] == outs[1] and simulate(cfg) == simulate(cfg)

    elapsed = time.perf_counter() - start
    ok = all(results.values()) and elapsed < 120
    record("C7 property suite", ok,
           ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in results.items()) + f"; {elapsed:.1f}s")


@pytest.mark.soft
def test_c8_racer():
    expo = race(RaceConfig(SyntheticTask(Exponential(1.0), unit_ms=20.0), replicas=4, rounds=200, seed=0))
    const = race(RaceConfig(SyntheticTask(Uniform(1.0, 1.000001), unit_ms=20.0), replicas=8, rounds=50, seed=0))
    ok = abs(expo.empirical_speedup - 4) <= 0.2 * 4 and abs(const.empirical_speedup - 1) <= 0.1
    record("C8 racer (timing-sensitive)", ok,
           f"exponential n=4: {expo.empirical_speedup:.3f} (want 4 +-20%), "
           f"constant n=8: {const.empirical_speedup:.3f} (want 1 +-10%), "
           f"overhead {expo.overhead_estimate * 1e3:.3f} ms")
