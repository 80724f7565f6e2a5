"""Deterministic random number generation for reproducible experiments.

Every random choice in this package (splits, parameter initialization,
synthetic data) is driven by SplitMix64 so that a run is fully determined
by its 64-bit seed. The exact algorithm, so that any implementation can
reproduce the streams bit-for-bit:

* State update: ``state_{k} = (seed + k * 0x9E3779B97F4A7C15) mod 2**64``
  for k = 1, 2, ...; the k-th output is ``mix64(state_k)`` where ``mix64``
  is the finalizer ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31``.
* Uniform doubles: ``u = ((next_u64() >> 11) + 1) * 2**-53``, in (0, 1].
* Gaussians: Box-Muller on consecutive uniform pairs (u1, u2):
  ``z0 = sqrt(-2 ln u1) * cos(2 pi u2)``, ``z1 = sqrt(-2 ln u1) * sin(2 pi u2)``;
  outputs are interleaved (z0, z1, z0, z1, ...).
* Shuffle: Fisher-Yates from the last index down, ``j = next_u64() % (i + 1)``.

The closed-form state update makes the stream vectorizable: `uniforms` and
`gaussians` produce exactly the same values as repeated scalar calls.
"""

from __future__ import annotations

import numpy as np

_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = 0xFFFFFFFFFFFFFFFF
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK64
    z = (z ^ (z >> 30)) * _MIX1 & _MASK64
    z = (z ^ (z >> 27)) * _MIX2 & _MASK64
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    # numpy uint64 arithmetic wraps mod 2**64, matching mix64 exactly
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class SplitMix64(object):
    """A seeded SplitMix64 stream with scalar and vectorized draws.

    Vectorized draws consume the same underlying u64 sequence as scalar
    ones, so mixing the two access styles cannot change what comes next.
    """

    def __init__(self, seed: int):
        self._seed = int(seed) & _MASK64
        self._count = 0  # u64 outputs consumed so far

    def next_u64(self) -> int:
        self._count += 1
        return mix64((self._seed + self._count * _GAMMA) & _MASK64)

    def _raw_block(self, n: int) -> np.ndarray:
        ks = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        with np.errstate(over="ignore"):
            states = np.uint64(self._seed) + ks * np.uint64(_GAMMA)
        return _mix64_vec(states)

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform in (0, 1]."""
        raw = self._raw_block(n)
        return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53

    def gaussians(self, n: int) -> np.ndarray:
        """n standard normal doubles via Box-Muller (pairs; consumes 2*ceil(n/2) u64)."""
        m = (n + 1) // 2
        u = self.uniforms(2 * m)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        theta = 2.0 * np.pi * u[1::2]
        out = np.empty(2 * m, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]
