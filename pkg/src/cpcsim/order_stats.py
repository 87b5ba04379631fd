"""Distribution of the fastest of ``n`` i.i.d. execution times.

``Y_n = min(X_1, ..., X_n)`` has survival ``S(y)**n``. The expected minimum is
available in closed form for the exponential, uniform and two-branch
hyperexponential laws. Everything else goes through the tail integral
``E[Y_n] = integral_0^inf S(y)**n dy``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .distributions import Distribution, Exponential, Hyperexponential, Uniform

__all__ = [
    "CurvePoint",
    "MAX_CLOSED_FORM_CORES",
    "MinExpectation",
    "MinQuery",
    "QuadratureError",
    "expected_min",
    "expected_min_details",
    "min_cdf",
    "min_pdf",
    "min_survival",
    "speedup",
    "speedup_curve",
]

#: beyond this core count the binomial sum is replaced by quadrature
MAX_CLOSED_FORM_CORES = 1_000_000

QUAD_RTOL = 1e-9
QUAD_ATOL = 1e-300


class QuadratureError(ArithmeticError):
    """Numerical integration did not reach the requested tolerance."""


@dataclass(frozen=True)
class MinQuery:
    dist: Distribution
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"core count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class CurvePoint:
    """One row of a sweep: swept value ``x`` (core count, Erlang ``k`` or
    hyperexponential ``a``) with the CV of the per-core law."""

    x: float
    cv: float
    analytic_speedup: float
    mc_speedup: float | None = None
    mc_stderr: float | None = None


@dataclass(frozen=True)
class MinExpectation:
    value: float
    abserr: float
    method: str  # "closed-form" or "quadrature"


def _pow_survival(dist: Distribution, n: int, y):
    """``S(y)**n`` computed as ``exp(n log S)``; zero where ``S = 0``."""
    with np.errstate(over="ignore", under="ignore"):
        return np.exp(n * np.asarray(dist.log_survival(y), dtype=float))


def min_survival(q: MinQuery, y):
    out = _pow_survival(q.dist, q.n, y)
    return float(out) if np.ndim(y) == 0 else out


def min_cdf(q: MinQuery, y):
    """``1 - (1 - F(y))**n``."""
    with np.errstate(over="ignore", under="ignore"):
        out = -np.expm1(q.n * np.asarray(q.dist.log_survival(y), dtype=float))
    return float(out) if np.ndim(y) == 0 else out


def min_pdf(q: MinQuery, y):
    """``n * S(y)**(n-1) * f(y)``."""
    dens = np.asarray(q.dist.pdf(y), dtype=float)
    if q.n == 1:
        out = dens
    else:
        out = q.n * _pow_survival(q.dist, q.n - 1, y) * dens
    return float(out) if np.ndim(y) == 0 else out


def _hyper_expected_min(d: Hyperexponential, n: int) -> float:
    # Condition on j cores taking the fast branch: the minimum is then
    # exponential with rate j*r1 + (n-j)*r2. Binomial weights are built by
    # ratio recurrence outward from the mode and normalised at the end, so
    # nothing overflows and all terms are positive.
    r1, r2 = d.rates
    mode = n // 2
    up = np.arange(mode, n, dtype=float)
    down = np.arange(mode, 0, -1, dtype=float)
    with np.errstate(under="ignore"):
        w_up = np.cumprod((n - up) / (up + 1.0))
        w_down = np.cumprod(down / (n - down + 1.0))
    weights = np.concatenate([w_down[::-1], [1.0], w_up])
    j = np.arange(n + 1, dtype=float)
    rates = j * r1 + (n - j) * r2
    return float(np.sum(weights / rates) / np.sum(weights))


def _integration_scale(dist: Distribution, n: int) -> float:
    """Median of ``Y_n``, used to stretch the [0, 1) integration variable."""
    target = math.log(0.5) / n
    lo, hi = dist.support()
    lo = max(lo, 0.0)
    if not math.isfinite(hi):
        hi = max(dist.mean(), 1e-300)
        while dist.log_survival(hi) > target:
            hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if dist.log_survival(mid) > target:
            lo = mid
        else:
            hi = mid
    return max(0.5 * (lo + hi), 1e-300)


def integrate_min_survival(dist: Distribution, n: int, rtol: float = QUAD_RTOL) -> MinExpectation:
    """``E[Y_n]`` by adaptive quadrature of ``S(y)**n`` over ``[0, inf)``.

    The half line is mapped onto ``[0, 1)`` via ``y = s t / (1 - t)`` with ``s``
    the median of ``Y_n``. Finite support endpoints are passed as breakpoints.

    Raises
    ------
    QuadratureError
        If the adaptive rule reports failure or the error estimate exceeds
        the requested tolerance.
    """
    scale = _integration_scale(dist, n)

    def integrand(t):
        if t >= 1.0:
            return 0.0
        y = scale * t / (1.0 - t)
        return float(_pow_survival(dist, n, y)) * scale / (1.0 - t) ** 2

    lo, hi = dist.support()
    points = sorted({v / (scale + v) for v in (lo, hi) if 0.0 < v < math.inf})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr, _, *failure = integrate.quad(
            integrand, 0.0, 1.0, epsabs=QUAD_ATOL, epsrel=rtol, limit=500,
            points=points or None, full_output=1,
        )
    if failure or not math.isfinite(value) or abserr > 10 * max(rtol * abs(value), QUAD_ATOL):
        reason = failure[0] if failure else "error estimate above tolerance"
        raise QuadratureError(
            f"quadrature for E[min of {n}] under {dist} did not converge: {reason} "
            f"(value={value!r}, abserr={abserr!r})"
        )
    return MinExpectation(float(value), float(abserr), "quadrature")


def expected_min_details(q: MinQuery, method: str = "auto") -> MinExpectation:
    """Expected minimum with its error estimate and the route taken.

    ``method`` is ``"auto"`` (closed form where one exists) or ``"quadrature"``.
    """
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    d, n = q.dist, q.n
    if method == "auto":
        if isinstance(d, Exponential):
            return MinExpectation(1.0 / (d.lam * n), 0.0, "closed-form")
        if isinstance(d, Uniform):
            return MinExpectation(d.lo + d.width / (n + 1), 0.0, "closed-form")
        if isinstance(d, Hyperexponential) and n <= MAX_CLOSED_FORM_CORES:
            value = _hyper_expected_min(d, n)
            return MinExpectation(value, float(value * (n + 1) * np.finfo(float).eps), "closed-form")
    return integrate_min_survival(d, n)


def expected_min(q: MinQuery, method: str = "auto") -> float:
    return expected_min_details(q, method).value


def speedup(q: MinQuery, method: str = "auto") -> float:
    """``E[Y_1] / E[Y_n]``; exactly 1 for a single core."""
    if q.n == 1:
        return 1.0
    return q.dist.mean() / expected_min(q, method)


def speedup_curve(dist: Distribution, n_values):
    """Analytic speedup at each core count."""
    n_values = list(n_values)
    if not n_values:
        raise ValueError("n_values must be nonempty")
    cv = dist.cv()
    return [CurvePoint(x=n, cv=cv, analytic_speedup=speedup(MinQuery(dist, n))) for n in n_values]
