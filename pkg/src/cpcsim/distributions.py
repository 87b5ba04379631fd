"""Execution-time laws for a single core: exponential, Erlang, two-branch
hyperexponential and uniform.

The three rate-based families are parametrised so that the mean is ``1/lam``
whatever the shape parameter, which makes the coefficient of variation the only
thing that changes across a sweep.

All density/CDF methods accept scalars or arrays and return the same shape.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import special

from .rng import Rng

__all__ = [
    "Distribution",
    "DistributionSpecError",
    "Erlang",
    "Exponential",
    "Hyperexponential",
    "Uniform",
    "parse_distribution",
]

# kernel family codes, mirrored in _kernels.pyx
EXPONENTIAL, ERLANG, HYPEREXPONENTIAL, UNIFORM = 0, 1, 2, 3


class DistributionSpecError(ValueError):
    """Malformed distribution text or invalid parameters."""


def _check_positive(name, value):
    if not (isinstance(value, numbers.Real) and math.isfinite(value) and value > 0):
        raise DistributionSpecError(f"{name} must be a finite number > 0, got {value!r}")


def _shaped(x, values):
    """Return a Python float for scalar input, else the array."""
    if np.ndim(x) == 0:
        return float(values)
    return values


def _fmt(v) -> str:
    return repr(float(v))


class Distribution:
    """Common interface. Subclasses are frozen dataclasses."""

    tag: ClassVar[str]
    #: uniforms consumed per draw by :meth:`from_uniforms`
    draws_per_sample: ClassVar[int] = 1

    def cdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def survival(self, x):
        raise NotImplementedError

    def log_survival(self, x):
        """``log(survival(x))``, accurate where survival is close to 1."""
        with np.errstate(divide="ignore"):
            return np.log(self.survival(x))

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def cv(self) -> float:
        return math.sqrt(self.variance()) / self.mean()

    def support(self) -> tuple[float, float]:
        return 0.0, math.inf

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Transform uniforms with trailing axis ``draws_per_sample`` into draws."""
        raise NotImplementedError

    def kernel_params(self) -> tuple[int, int, float, float]:
        """``(family code, phases, p0, p1)`` for the compiled sampler."""
        raise NotImplementedError

    def sample(self, rng: Rng, size=None):
        shape = () if size is None else ((size,) if np.isscalar(size) else tuple(size))
        draws = self.from_uniforms(rng.uniforms(shape + (self.draws_per_sample,)))
        return float(draws) if size is None else draws

    def spec(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.spec()


@dataclass(frozen=True)
class Exponential(Distribution):
    lam: float = 1.0

    tag: ClassVar[str] = "exp"

    def __post_init__(self):
        _check_positive("lambda", self.lam)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, np.where(x <= 0, 0.0, -np.expm1(-self.lam * np.maximum(x, 0.0))))

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, np.exp(-self.lam * np.maximum(x, 0.0)))

    def log_survival(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, -self.lam * np.maximum(x, 0.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, np.where(x < 0, 0.0, self.lam * np.exp(-self.lam * np.maximum(x, 0.0))))

    def mean(self):
        return 1.0 / self.lam

    def variance(self):
        return 1.0 / self.lam**2

    def cv(self):
        return 1.0

    def from_uniforms(self, u):
        return -np.log(u[..., 0]) / self.lam

    def kernel_params(self):
        return EXPONENTIAL, 1, float(self.lam), 0.0

    def spec(self):
        return f"exp:{_fmt(self.lam)}"


@dataclass(frozen=True)
class Erlang(Distribution):
    """Erlang law with ``k`` phases, each of rate ``k * lam`` (mean ``1/lam``)."""

    k: int = 1
    lam: float = 1.0

    tag: ClassVar[str] = "erlang"

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise DistributionSpecError(f"Erlang phase count must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        _check_positive("lambda", self.lam)

    @property
    def draws_per_sample(self):
        return self.k

    @property
    def phase_rate(self) -> float:
        return self.k * self.lam

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, special.gammainc(self.k, self.phase_rate * np.maximum(x, 0.0)))

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, special.gammaincc(self.k, self.phase_rate * np.maximum(x, 0.0)))

    def log_survival(self, x):
        x = np.asarray(x, dtype=float)
        z = self.phase_rate * np.maximum(x, 0.0)
        lower = special.gammainc(self.k, z)
        with np.errstate(divide="ignore"):
            # log1p(-F) keeps precision while the survival is near 1
            out = np.where(lower < 0.5, np.log1p(-lower), np.log(special.gammaincc(self.k, z)))
        return _shaped(x, out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        rate = self.phase_rate
        pos = np.maximum(x, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = self.k * math.log(rate) + special.xlogy(self.k - 1, pos) - rate * pos - special.gammaln(self.k)
        return _shaped(x, np.where(x < 0, 0.0, np.exp(logf)))

    def mean(self):
        return 1.0 / self.lam

    def variance(self):
        return 1.0 / (self.k * self.lam**2)

    def cv(self):
        return 1.0 / math.sqrt(self.k)

    def from_uniforms(self, u):
        return -np.log(u).sum(axis=-1) / self.phase_rate

    def kernel_params(self):
        return ERLANG, self.k, float(self.phase_rate), 0.0

    def spec(self):
        return f"erlang:{self.k}:{_fmt(self.lam)}"


@dataclass(frozen=True)
class Hyperexponential(Distribution):
    """Equal-weight mixture of two exponentials with rates ``a*lam`` and
    ``a*lam/(2a-1)``; the mean stays ``1/lam`` for every ``a > 1/2``.
    ``a = 1`` collapses to the exponential law.
    """

    a: float = 1.0
    lam: float = 1.0

    tag: ClassVar[str] = "hyper"
    draws_per_sample: ClassVar[int] = 2
    branch_weights: ClassVar[tuple[float, float]] = (0.5, 0.5)

    def __post_init__(self):
        if not (isinstance(self.a, numbers.Real) and math.isfinite(self.a) and self.a > 0.5):
            raise DistributionSpecError(f"hyperexponential shape a must be > 1/2, got {self.a!r}")
        _check_positive("lambda", self.lam)

    @property
    def rates(self) -> tuple[float, float]:
        return self.a * self.lam, self.a * self.lam / (2.0 * self.a - 1.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        r1, r2 = self.rates
        pos = np.maximum(x, 0.0)
        return _shaped(x, -0.5 * (np.expm1(-r1 * pos) + np.expm1(-r2 * pos)))

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        r1, r2 = self.rates
        pos = np.maximum(x, 0.0)
        return _shaped(x, 0.5 * (np.exp(-r1 * pos) + np.exp(-r2 * pos)))

    def log_survival(self, x):
        x = np.asarray(x, dtype=float)
        r1, r2 = self.rates
        pos = np.maximum(x, 0.0)
        return _shaped(x, np.logaddexp(-r1 * pos, -r2 * pos) - math.log(2.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        r1, r2 = self.rates
        pos = np.maximum(x, 0.0)
        dens = 0.5 * (r1 * np.exp(-r1 * pos) + r2 * np.exp(-r2 * pos))
        return _shaped(x, np.where(x < 0, 0.0, dens))

    def mean(self):
        return 1.0 / self.lam

    def second_moment(self) -> float:
        return (1.0 + (2.0 * self.a - 1.0) ** 2) / (self.a**2 * self.lam**2)

    def variance(self):
        return self.second_moment() - 1.0 / self.lam**2

    def cv(self):
        return math.sqrt(max(self.variance(), 0.0)) * self.lam

    def from_uniforms(self, u):
        r1, r2 = self.rates
        rate = np.where(u[..., 0] < 0.5, r1, r2)
        return -np.log(u[..., 1]) / rate

    def kernel_params(self):
        r1, r2 = self.rates
        return HYPEREXPONENTIAL, 2, float(r1), float(r2)

    def spec(self):
        return f"hyper:{_fmt(self.a)}:{_fmt(self.lam)}"


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: float = 0.0
    hi: float = 2.0

    tag: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not (isinstance(self.lo, numbers.Real) and math.isfinite(self.lo) and self.lo >= 0):
            raise DistributionSpecError(f"uniform lower bound must be finite and >= 0, got {self.lo!r}")
        if not (isinstance(self.hi, numbers.Real) and math.isfinite(self.hi) and self.hi > self.lo):
            raise DistributionSpecError(f"uniform upper bound must exceed {self.lo!r}, got {self.hi!r}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def support(self):
        return float(self.lo), float(self.hi)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, np.clip((x - self.lo) / self.width, 0.0, 1.0))

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, np.clip((self.hi - x) / self.width, 0.0, 1.0))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return _shaped(x, np.where(inside, 1.0 / self.width, 0.0))

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def variance(self):
        return self.width**2 / 12.0

    def cv(self):
        return self.width / (math.sqrt(3.0) * (self.hi + self.lo))

    def from_uniforms(self, u):
        return self.lo + self.width * u[..., 0]

    def kernel_params(self):
        return UNIFORM, 1, float(self.lo), float(self.hi)

    def spec(self):
        return f"uniform:{_fmt(self.lo)}:{_fmt(self.hi)}"


def _number(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DistributionSpecError(f"{what}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise DistributionSpecError(f"{what}: must be finite, got {text!r}")
    return value


def parse_distribution(text: str) -> Distribution:
    """Parse ``exp:<lambda>``, ``erlang:<k>:<lambda>``, ``hyper:<a>:<lambda>``
    or ``uniform:<lo>:<hi>``.

    >>> parse_distribution("hyper:5:1.0")
    Hyperexponential(a=5.0, lam=1.0)
    """
    parts = text.strip().split(":")
    family, args = parts[0].lower(), parts[1:]
    arity = {"exp": 1, "erlang": 2, "hyper": 2, "uniform": 2}
    if family not in arity:
        raise DistributionSpecError(f"unknown distribution family {parts[0]!r} in {text!r}")
    if len(args) != arity[family]:
        raise DistributionSpecError(f"{family} takes {arity[family]} parameter(s), got {len(args)} in {text!r}")
    if family == "exp":
        return Exponential(_number(args[0], "lambda"))
    if family == "erlang":
        try:
            k = int(args[0])
        except ValueError:
            raise DistributionSpecError(f"Erlang phase count must be an integer, got {args[0]!r}") from None
        return Erlang(k, _number(args[1], "lambda"))
    if family == "hyper":
        return Hyperexponential(_number(args[0], "a"), _number(args[1], "lambda"))
    return Uniform(_number(args[0], "lo"), _number(args[1], "hi"))
