"""Monte Carlo estimate of the first-finisher time, and parameter sweeps.

Each step draws ``n`` fresh execution times, keeps the minimum, and the
estimate is the average of those minima over ``steps`` iterations. The inner
loop runs in the compiled kernel when available (see :mod:`cpcsim._backend`).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from . import _backend
from .distributions import Distribution, Erlang, Hyperexponential
from .order_stats import CurvePoint, MinQuery, speedup
from .rng import Rng, derive_seed

__all__ = [
    "CurvePoint",
    "DENOMINATOR_MODES",
    "MAX_CORES",
    "SimConfig",
    "SimResult",
    "hyper_a_for_cv",
    "simulate",
    "sweep_cores",
    "sweep_erlang_k",
    "sweep_hyper_a",
]

DENOMINATOR_MODES = ("analytic", "simulated")
MAX_CORES = 1_000_000


@dataclass(frozen=True)
class SimConfig:
    dist: Distribution
    cores: int = 1
    steps: int = 100_000
    seed: int = 0
    denominator: str = "analytic"

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not 1 <= self.cores <= MAX_CORES:
            raise ValueError(f"cores must be in [1, {MAX_CORES}], got {self.cores}")
        if self.denominator not in DENOMINATOR_MODES:
            raise ValueError(f"denominator must be one of {DENOMINATOR_MODES}, got {self.denominator!r}")


@dataclass(frozen=True)
class SimResult:
    dist: str
    cores: int
    steps: int
    seed: int
    denominator: str
    mean_min: float
    stderr: float
    mean_single: float
    speedup_estimate: float
    speedup_stderr: float


def simulate(cfg: SimConfig) -> SimResult:
    """Run the minimum-of-n Monte Carlo loop for ``cfg.steps`` iterations.

    ``mean_single`` is the average draw of core 0 over the same steps. In
    ``"simulated"`` mode it is the speedup numerator. In ``"analytic"`` mode
    the numerator is the exact mean of the distribution.
    """
    rng = Rng(cfg.seed)
    kind, k, p0, p1 = cfg.dist.kernel_params()
    minima, firsts = _backend.sample_minima(rng.bit_generator, kind, k, p0, p1, cfg.steps, cfg.cores)

    n = cfg.steps
    mean_min = float(minima.sum() / n)
    mean_single = float(firsts.sum() / n)
    if n > 1:
        var_min = float(((minima - mean_min) ** 2).sum() / (n - 1))
        var_single = float(((firsts - mean_single) ** 2).sum() / (n - 1))
        cov = float(((minima - mean_min) * (firsts - mean_single)).sum() / (n - 1))
    else:
        var_min = var_single = cov = 0.0
    stderr = math.sqrt(var_min / n)

    if cfg.denominator == "analytic":
        numer = cfg.dist.mean()
        ratio = numer / mean_min
        ratio_se = numer / mean_min**2 * stderr
    else:
        numer = mean_single
        ratio = numer / mean_min
        # delta method for a ratio of correlated means
        var_ratio = (var_single - 2.0 * ratio * cov + ratio**2 * var_min) / (mean_min**2 * n)
        ratio_se = math.sqrt(max(var_ratio, 0.0))

    return SimResult(
        dist=cfg.dist.spec(),
        cores=cfg.cores,
        steps=cfg.steps,
        seed=cfg.seed,
        denominator=cfg.denominator,
        mean_min=mean_min,
        stderr=stderr,
        mean_single=mean_single,
        speedup_estimate=ratio,
        speedup_stderr=ratio_se,
    )


def _evaluate(points, sim: SimConfig | None, workers: int):
    """``points`` is a list of ``(x, dist, cores)``; returns CurvePoints in order."""

    def one(item):
        index, (x, dist, cores) = item
        analytic = speedup(MinQuery(dist, cores))
        if sim is None:
            return CurvePoint(x=x, cv=dist.cv(), analytic_speedup=analytic)
        cfg = replace(sim, dist=dist, cores=cores, seed=derive_seed(sim.seed, index))
        res = simulate(cfg)
        return CurvePoint(
            x=x, cv=dist.cv(), analytic_speedup=analytic,
            mc_speedup=res.speedup_estimate, mc_stderr=res.speedup_stderr,
        )

    items = list(enumerate(points))
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, items))
    return [one(item) for item in items]


def sweep_cores(dist: Distribution, n_values, sim: SimConfig | None = None, workers: int = 1):
    """Speedup against core count for one distribution.

    When ``sim`` is given its ``steps``/``seed``/``denominator`` are used for a
    Monte Carlo column; point ``i`` runs on seed ``derive_seed(sim.seed, i)``.
    """
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise ValueError("n_values must be nonempty")
    bad = [n for n in n_values if not 1 <= n <= MAX_CORES]
    if bad:
        raise ValueError(f"core counts must lie in [1, {MAX_CORES}]: {bad[:5]}")
    return _evaluate([(n, dist, n) for n in n_values], sim, workers)


def sweep_erlang_k(k_values, lam: float = 1.0, cores: int = 100, sim: SimConfig | None = None,
                   workers: int = 1):
    ks = sorted(int(k) for k in k_values)
    return _evaluate([(k, Erlang(k, lam), cores) for k in ks], sim, workers)


def sweep_hyper_a(a_values, lam: float = 1.0, cores: int = 100, sim: SimConfig | None = None,
                  workers: int = 1):
    avals = sorted(float(a) for a in a_values)
    return _evaluate([(a, Hyperexponential(a, lam), cores) for a in avals], sim, workers)


def hyper_a_for_cv(cv: float) -> float:
    """Shape ``a >= 1`` of the two-branch hyperexponential with the given CV.

    Solves ``cv**2 + 1 = (1 + (2a - 1)**2) / a**2`` for its root ``>= 1``. The
    CV of this family approaches sqrt(3) as ``a`` grows, so ``cv`` must lie in
    ``[1, sqrt(3))``.
    """
    if not 1.0 <= cv < math.sqrt(3.0):
        raise ValueError(f"hyperexponential CV must lie in [1, sqrt(3)), got {cv}")
    c2 = cv * cv
    return (2.0 + math.sqrt(2.0) * math.sqrt(c2 - 1.0)) / (3.0 - c2)
