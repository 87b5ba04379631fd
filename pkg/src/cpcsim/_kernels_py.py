"""NumPy implementation of the Monte Carlo kernel.

Consumes the raw stream in the same order as the compiled kernel
(step-major, then core, then per-draw uniforms) and reduces it the same way,
so both backends agree to rounding.
"""

import numpy as np

from .rng import raw_to_uniform

_CHUNK_WORDS = 1 << 22
ERLANG_GROUP = 16

EXPONENTIAL, ERLANG, HYPEREXPONENTIAL, UNIFORM = 0, 1, 2, 3


def _erlang_log_sum(u):
    acc = np.zeros(u.shape[:-1])
    for j in range(0, u.shape[-1], ERLANG_GROUP):
        acc += np.log(u[..., j:j + ERLANG_GROUP].prod(axis=-1))
    return acc


def _reduce(u, kind, p0, p1):
    """``u`` has shape ``(steps, cores, width)``; returns ``(minima, firsts)``."""
    if kind == EXPONENTIAL:
        u = u[..., 0]
        return -np.log(u.max(axis=1)) / p0, -np.log(u[:, 0]) / p0
    if kind == ERLANG:
        acc = _erlang_log_sum(u)
        return -acc.max(axis=1) / p0, -acc[:, 0] / p0
    if kind == HYPEREXPONENTIAL:
        is_fast = u[..., 0] < 0.5
        v = u[..., 1]
        fast = np.where(is_fast, v, 0.0).max(axis=1)
        slow = np.where(is_fast, 0.0, v).max(axis=1)
        with np.errstate(divide="ignore"):
            minima = np.minimum(-np.log(fast) / p0, -np.log(slow) / p1)
        firsts = -np.log(v[:, 0]) / np.where(is_fast[:, 0], p0, p1)
        return minima, firsts
    if kind == UNIFORM:
        u = u[..., 0]
        return p0 + (p1 - p0) * u.min(axis=1), p0 + (p1 - p0) * u[:, 0]
    raise ValueError(f"unknown family code {kind}")


def sample_minima(bit_generator, kind, k, p0, p1, steps, cores):
    """Return ``(minima, firsts)``: per step, the minimum of ``cores`` draws
    and the draw of core 0."""
    width = {EXPONENTIAL: 1, ERLANG: k, HYPEREXPONENTIAL: 2, UNIFORM: 1}.get(kind)
    if width is None:
        raise ValueError(f"unknown family code {kind}")
    minima = np.empty(steps)
    firsts = np.empty(steps)
    rows = max(1, _CHUNK_WORDS // (cores * width))
    for start in range(0, steps, rows):
        m = min(rows, steps - start)
        raw = bit_generator.random_raw(m * cores * width)
        lo, first = _reduce(raw_to_uniform(raw).reshape(m, cores, width), kind, p0, p1)
        minima[start:start + m] = lo
        firsts[start:start + m] = first
    return minima, firsts
