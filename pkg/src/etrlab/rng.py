"""Deterministic random streams.

Counter-based generator built on the splitmix64 finalizer: the i-th raw
word of a stream is ``mix64(base + (i+1) * GAMMA)`` where ``base`` is a
64-bit hash of (master_seed, stream_index). Every output is a pure
function of (master_seed, stream_index, position), so streams are
immutable values, trivially splittable, and bit-identical across
platforms. No platform RNG is used anywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15  # golden-ratio increment from splitmix64

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int, reduced mod 2^64."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 arrays wrap silently, matching the masked Python-int path
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class RandomStream:
    """Immutable handle on one deterministic scalar sequence."""

    master_seed: int
    stream_index: int = 0

    @property
    def _base(self) -> int:
        return mix64(mix64(self.master_seed) ^ mix64((self.stream_index + 1) * GAMMA))

    def as_seed(self) -> int:
        """64-bit seed for builders that take an integer seed."""
        return self._base

    def split(self, n: int) -> "RandomStream":
        """Derive the n-th child stream; children never collide in practice."""
        child = mix64(mix64(self.stream_index) + (n + 1) * GAMMA)
        return RandomStream(self.master_seed, child)

    def _words(self, count: int, offset: int) -> np.ndarray:
        base = np.uint64(self._base)
        idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
        return _mix64_array(base + idx * np.uint64(GAMMA))

    def uniforms(self, count: int, offset: int = 0) -> np.ndarray:
        """count i.i.d. uniforms in [0, 1), 53-bit resolution."""
        if count == 0:
            return np.zeros(0)
        return (self._words(count, offset) >> np.uint64(11)) * 2.0 ** -53

    def gaussians(self, count: int) -> np.ndarray:
        """count i.i.d. standard normals via the Box-Muller transform.

        Regenerates from the stream head, so repeated calls with equal
        arguments return identical values.
        """
        if count == 0:
            return np.zeros(0)
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        u1 = 1.0 - u[0::2]  # (0, 1]: keeps log finite
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:count]

    def integers_below(self, bounds) -> np.ndarray:
        """One integer in [0, b) for each b in bounds (floor of a uniform)."""
        bounds = np.asarray(bounds, dtype=np.int64)
        u = self.uniforms(len(bounds))
        return np.minimum((u * bounds).astype(np.int64), bounds - 1)

    def choose_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), uniform, via partial Fisher-Yates."""
        pool = np.arange(n)
        draws = self.integers_below(np.arange(n, n - k, -1))
        for i, r in enumerate(draws):
            j = i + int(r)
            pool[i], pool[j] = pool[j], pool[i]
        return np.sort(pool[:k])


def gaussian(stream: RandomStream, count: int) -> np.ndarray:
    """Standard normal variates; pure function of (stream, count)."""
    return stream.gaussians(count)
