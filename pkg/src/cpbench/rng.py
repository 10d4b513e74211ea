"""Deterministic randomness: splitmix64 and xoshiro256**.

All stochastic pieces of the library (randomization term u, dataset
shuffling, derived sub-seeds) draw from these two generators so results
are bit-reproducible across runs and platforms.  Per-sample draws are
keyed by (seed, sample index), which makes batches order-independent:
evaluating samples in any order, or in parallel, yields identical output.

Reference: the public-domain C implementations by Blackman & Vigna
(splitmix64.c, xoshiro256starstar.c).
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once. Returns (next_state, output)."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return state, z ^ (z >> 31)


def derive_seed(seed: int, stream: int) -> int:
    """The `stream`-th output (1-based) of the splitmix64 sequence at `seed`.

    Used to give independent sub-seeds to e.g. the calibration and test
    halves of a run without correlating their draws.
    """
    if stream < 1:
        raise ValueError("stream index must be >= 1")
    state = seed & MASK64
    for _ in range(stream):
        state, z = splitmix64(state)
    return z


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """xoshiro256** with its state filled from a 64-bit seed via splitmix64."""

    def __init__(self, seed: int):
        state = seed & MASK64
        s = []
        for _ in range(4):
            state, z = splitmix64(state)
            s.append(z)
        self._s = s

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def next_float(self) -> float:
        """Uniform draw in [0, 1) using the top 53 bits."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def next_below(self, bound: int) -> int:
        """Integer in [0, bound) via modulo reduction."""
        return self.next_uint64() % bound


def keyed_uniforms(seed: int, indices: np.ndarray) -> np.ndarray:
    """One uniform [0, 1) draw per index, keyed by (seed, index).

    Each index gets its own xoshiro256** state seeded from
    splitmix64(seed + (index + 1) * golden_gamma); a single output is
    taken per index.  Vectorized over uint64 arrays (wrapping arithmetic),
    and bit-identical to the scalar `keyed_uniform` below.
    """
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(seed & MASK64) + (idx + np.uint64(1)) * np.uint64(_GOLDEN)
        s = []
        for _ in range(4):
            state, z = _splitmix64_vec(state)
            s.append(z)
        out = _xoshiro_output(s[1])
    return (out >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _splitmix64_vec(state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    state = state + np.uint64(_GOLDEN)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return state, z ^ (z >> np.uint64(31))


def _xoshiro_output(s1: np.ndarray) -> np.ndarray:
    # First xoshiro256** output depends only on s[1].
    x = s1 * np.uint64(5)
    x = (x << np.uint64(7)) | (x >> np.uint64(57))
    return x * np.uint64(9)


def keyed_uniform(seed: int, index: int) -> float:
    """Scalar counterpart of `keyed_uniforms` (same value at the same key)."""
    base = (seed + (index + 1) * _GOLDEN) & MASK64
    return Xoshiro256StarStar(base).next_float()


def fisher_yates(n: int, seed: int) -> np.ndarray:
    """Deterministic permutation of range(n).

    Backward Fisher-Yates driven by xoshiro256** seeded via
    splitmix64(seed); swap index drawn as next_uint64() % (i + 1).
    """
    gen = Xoshiro256StarStar(seed)
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = gen.next_below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm
