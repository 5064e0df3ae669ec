"""Deterministic multi-stream random number generation.

Every stochastic routine in this package draws from an :class:`RngStream`,
a xoshiro256++ generator whose state is derived purely from
``(master_seed, stream_id)``.  Replica ``i`` of an experiment always uses
stream ``i``, so results are reproducible bit-for-bit regardless of thread
scheduling or execution order.  The same generator is implemented inside
the numba kernels (see ``_kernels``); both implementations are checked
against each other in the test suite.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RngStream"]

_MASK = (1 << 64) - 1
_STREAM_GAMMA = 0xA3EC4E93C0A1B2D5


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_state(master_seed: int, stream_id: int) -> np.ndarray:
    """Initial xoshiro256++ state for stream ``stream_id`` of ``master_seed``."""
    s = np.empty(4, dtype=np.uint64)
    z = (master_seed & _MASK) ^ ((_STREAM_GAMMA * ((stream_id & _MASK) + 1)) & _MASK)
    for i in range(4):
        z = _splitmix64(z)
        s[i] = z
    if int(s[0]) | int(s[1]) | int(s[2]) | int(s[3]) == 0:
        s[0] = np.uint64(0x9E3779B97F4A7C15)
    return s


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class RngStream:
    """One deterministic random stream, addressed by (master_seed, stream_id).

    The state lives in a 4-word uint64 numpy array so that numba kernels can
    consume and advance the very same stream in place.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self.state = derive_state(master_seed, stream_id)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    # -- core draws --------------------------------------------------------

    def next_u64(self) -> int:
        s = self.state
        s0, s1, s2, s3 = (int(s[0]), int(s[1]), int(s[2]), int(s[3]))
        result = (_rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        s[0], s[1], s[2], s[3] = s0, s1, s2, s3
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def integer(self, n: int) -> int:
        """Exactly uniform integer in [0, n) via bitmask rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        m = n - 1
        m |= m >> 1
        m |= m >> 2
        m |= m >> 4
        m |= m >> 8
        m |= m >> 16
        m |= m >> 32
        while True:
            v = self.next_u64() & m
            if v < n:
                return v

    # -- convenience -------------------------------------------------------

    def geometric(self, p: float) -> int:
        """Geometric on {1, 2, ...} with success probability p (mean 1/p)."""
        if not 0.0 < p <= 1.0:
            raise ValueError("p must be in (0, 1]")
        k = 1
        while self.uniform() >= p:
            k += 1
        return k

    def choice(self, seq):
        return seq[self.integer(len(seq))]

    def permutation(self, n: int) -> np.ndarray:
        out = np.arange(n, dtype=np.int64)
        for i in range(n - 1, 0, -1):
            j = self.integer(i + 1)
            out[i], out[j] = out[j], out[i]
        return out

    def spawn(self, substream: int) -> "RngStream":
        """Independent child stream; deterministic in (parents' identity, substream)."""
        return RngStream(self.master_seed ^ _splitmix64(self.stream_id), substream)
