"""Predict and simulate the speedup of competitive (first-wins) parallel execution.

Identical copies of a task run on ``n`` cores and the first to finish wins, so
the run time is the minimum of ``n`` i.i.d. execution times. This package
computes the expected minimum and the resulting speedup analytically, estimates
them by Monte Carlo, and measures them with a real concurrent racing harness.
"""

from ._backend import BACKEND
from .distributions import (
    Distribution,
    DistributionSpecError,
    Erlang,
    Exponential,
    Hyperexponential,
    Uniform,
    parse_distribution,
)
from .monte_carlo import (
    SimConfig,
    SimResult,
    hyper_a_for_cv,
    simulate,
    sweep_cores,
    sweep_erlang_k,
    sweep_hyper_a,
)
from .order_stats import (
    CurvePoint,
    MinQuery,
    QuadratureError,
    expected_min,
    min_cdf,
    min_pdf,
    speedup,
    speedup_curve,
)
from .rng import Rng

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CurvePoint",
    "Distribution",
    "DistributionSpecError",
    "Erlang",
    "Exponential",
    "Hyperexponential",
    "MinQuery",
    "QuadratureError",
    "Rng",
    "SimConfig",
    "SimResult",
    "Uniform",
    "expected_min",
    "hyper_a_for_cv",
    "min_cdf",
    "min_pdf",
    "parse_distribution",
    "simulate",
    "speedup",
    "speedup_curve",
    "sweep_cores",
    "sweep_erlang_k",
    "sweep_hyper_a",
]
