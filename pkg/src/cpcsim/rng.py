"""Seedable random stream shared by the samplers, simulations and the racer.

The stream is NumPy's PCG64 seeded through ``SeedSequence``. Uniform variates
are built from the raw 64-bit outputs as ``((raw >> 12) + 0.5) * 2**-52``. Both
extremes, ``2**-53`` and ``1 - 2**-53``, are exactly representable, so the
result lies strictly inside (0, 1); a 53-bit variant would round its top value
to 1.0. The compiled kernel consumes the same raw words in the same order, so
both kernel backends see identical uniforms.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_INV_2_52 = 1.0 / 4503599627370496.0


def derive_seed(seed: int, index: int) -> int:
    """Child seed for stream ``index`` of a base ``seed``.

    Computed as the first 64-bit word of ``SeedSequence([seed, index])``. This
    mapping is stable: changing it would change every published sweep.
    """
    ss = np.random.SeedSequence([seed & _MASK64, index & _MASK64])
    return int(ss.generate_state(1, np.uint64)[0])


def raw_to_uniform(raw: np.ndarray) -> np.ndarray:
    """Map raw uint64 words to doubles in the open interval (0, 1)."""
    return ((raw >> np.uint64(12)).astype(np.float64) + 0.5) * _INV_2_52


class Rng:
    """Deterministic uniform stream.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & _MASK64
        self.bit_generator = np.random.PCG64(np.random.SeedSequence(self.seed))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed})"

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def uniforms(self, size) -> np.ndarray:
        size = (size,) if np.isscalar(size) else tuple(size)
        count = int(np.prod(size, dtype=np.int64))
        return raw_to_uniform(self.bit_generator.random_raw(count)).reshape(size)

    def spawn(self, index: int) -> "Rng":
        return Rng(derive_seed(self.seed, index))
