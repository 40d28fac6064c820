"""Bit-exact keyed shuffle kernels.

The pure-Python functions below are the normative reference for the hashing
contract documented in HASHING.md. The numba kernels are a fast mirror; the
test suite asserts bit-equality between the two over many seeds, so either
path may serve detection and generation.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

# 2^-53, the spacing used to map a 64-bit draw onto (0, 1].
_U53 = 2.0 ** -53


def mix64(z: int) -> int:
    """3-round xor-shift/multiply avalanche mix (shifts 30, 27, 31)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_draw(seed: int, i: int) -> int:
    """i-th output (i >= 1) of the keyed stream: mix64(seed + i * GOLDEN)."""
    return mix64((seed + i * GOLDEN) & MASK64)


def permutation_py(seed: int, n: int) -> np.ndarray:
    """Reference Fisher-Yates shuffle of 0..n-1 driven by the keyed stream.

    Swap order is i = n-1 down to 1 with j = draw_i mod (i + 1), where draw_i
    is the (n - i)-th stream output.
    """
    perm = np.arange(n, dtype=np.int64)
    state = seed & MASK64
    for i in range(n - 1, 0, -1):
        state = (state + GOLDEN) & MASK64
        j = mix64(state) % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def uniform_py(seed: int, n: int) -> float:
    """Stream draw n mapped to (0, 1]: the first draw a length-n shuffle leaves unused."""
    return ((stream_draw(seed, n) >> 11) + 1) * _U53


def mix64_np(z: np.ndarray) -> np.ndarray:
    """Vectorized mix64 over a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX2)
    z ^= z >> np.uint64(31)
    return z


def uniforms_np(seeds: np.ndarray, n: int) -> np.ndarray:
    """Vectorized `uniform_py` for an array of seeds."""
    draw = mix64_np(seeds.astype(np.uint64) + np.uint64((n * GOLDEN) & MASK64))
    return ((draw >> np.uint64(11)).astype(np.float64) + 1.0) * _U53


try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


_GOLDEN_U = np.uint64(GOLDEN)
_MIX1_U = np.uint64(MIX1)
_MIX2_U = np.uint64(MIX2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True)
def _permutation_kernel(seed, n):  # pragma: no cover - thin numba mirror
    perm = np.arange(n, dtype=np.int64)
    state = seed
    for i in range(n - 1, 0, -1):
        state = state + _GOLDEN_U
        z = state
        z = (z ^ (z >> _S30)) * _MIX1_U
        z = (z ^ (z >> _S27)) * _MIX2_U
        z = z ^ (z >> _S31)
        j = np.int64(z % np.uint64(i + 1))
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return perm


@njit(cache=True)
def _green_rows_kernel(seeds, n, g, out):  # pragma: no cover - thin numba mirror
    for r in range(seeds.shape[0]):
        perm = _permutation_kernel(seeds[r], n)
        for k in range(g):
            out[r, perm[k]] = True


@njit(cache=True)
def _position_rows_kernel(seeds, n, out):  # pragma: no cover - thin numba mirror
    for r in range(seeds.shape[0]):
        perm = _permutation_kernel(seeds[r], n)
        for k in range(n):
            out[r, perm[k]] = k


def permutation(seed: int, n: int) -> np.ndarray:
    """Keyed shuffle of 0..n-1 (fast path when numba is available)."""
    if _HAVE_NUMBA:
        return _permutation_kernel(np.uint64(seed & MASK64), n)
    return permutation_py(seed, n)


def green_rows(seeds: np.ndarray, n: int, g: int) -> np.ndarray:
    """Boolean matrix: row r marks the first g shuffle slots for seeds[r]."""
    seeds = seeds.astype(np.uint64)
    out = np.zeros((seeds.shape[0], n), dtype=np.bool_)
    if _HAVE_NUMBA:
        _green_rows_kernel(seeds, n, g, out)
        return out
    for r, s in enumerate(seeds):
        out[r, permutation_py(int(s), n)[:g]] = True
    return out


def position_rows(seeds: np.ndarray, n: int) -> np.ndarray:
    """uint32 matrix: row r holds each token's slot in the seeds[r] shuffle."""
    seeds = seeds.astype(np.uint64)
    out = np.zeros((seeds.shape[0], n), dtype=np.uint32)
    if _HAVE_NUMBA:
        _position_rows_kernel(seeds, n, out)
        return out
    for r, s in enumerate(seeds):
        perm = permutation_py(int(s), n)
        out[r, perm] = np.arange(n, dtype=np.uint32)
    return out
