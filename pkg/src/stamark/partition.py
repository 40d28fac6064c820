"""Keyed green/red vocabulary splits and full vocabulary permutations.

Generation and detection both derive the step-t split from (key, token t-1)
alone, so the two sides agree bit-exactly without sharing anything but the
key. The hashing contract (constants, stream, shuffle order) is normative and
documented in HASHING.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _shuffle
from ._shuffle import GOLDEN, MASK64, mix64

__all__ = [
    "GOLDEN",
    "MASK64",
    "mix64",
    "check_key",
    "derive_seed",
    "derive_seeds",
    "permute_vocab",
    "rdw_uniform",
    "green_size",
    "PartitionContext",
    "GreenRedSplit",
    "green_red_split",
    "KeyedPartitioner",
]


def check_key(key: int) -> int:
    """Validate a watermark key as a 64-bit unsigned integer."""
    key = int(key)
    if not 0 <= key <= MASK64:
        raise ValueError(f"watermark key must fit in 64 bits, got {key}")
    return key


def derive_seed(key: int, prev_token: int) -> int:
    """Per-step partition seed: mix64(key XOR (prev_token * GOLDEN))."""
    key = check_key(key)
    if prev_token < 0:
        raise ValueError(f"token id must be non-negative, got {prev_token}")
    return mix64(key ^ ((prev_token * GOLDEN) & MASK64))


def derive_seeds(key: int, prev_tokens: np.ndarray) -> np.ndarray:
    """Vectorized `derive_seed` over an int array of previous tokens."""
    key = check_key(key)
    prev = np.asarray(prev_tokens).astype(np.uint64)
    return _shuffle.mix64_np(np.uint64(key) ^ (prev * np.uint64(GOLDEN)))


def permute_vocab(seed: int, n: int) -> np.ndarray:
    """Deterministic shuffle of token ids 0..n-1 driven by `seed`."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return _shuffle.permutation(seed, n)


def rdw_uniform(seed: int, n: int) -> float:
    """Keyed u in (0, 1] for inverse-transform sampling at one step.

    Drawn from the same stream as the shuffle, one position past the n-1
    draws the shuffle consumes, so (permutation, u) form one keyed unit.
    """
    return _shuffle.uniform_py(seed, n)


def green_size(n: int, gamma: float) -> int:
    """Green-list size ceil(gamma * n); must leave both lists nonempty."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    g = math.ceil(gamma * n)
    if g < 1 or g > n - 1:
        raise ValueError(f"green size ceil({gamma} * {n}) = {g} leaves an empty list")
    return g


@dataclass(frozen=True)
class PartitionContext:
    """Everything one step's split depends on: seed, vocab size, proportion."""

    seed: int
    n: int
    gamma: float

    def __post_init__(self):
        green_size(self.n, self.gamma)  # validates gamma against n

    @property
    def green_count(self) -> int:
        return green_size(self.n, self.gamma)


@dataclass(frozen=True)
class GreenRedSplit:
    """Fixed-size green list as a boolean mask over token ids."""

    green_mask: np.ndarray  # bool, shape (n,), read-only

    @property
    def n(self) -> int:
        return self.green_mask.shape[0]

    @property
    def green(self) -> np.ndarray:
        return np.flatnonzero(self.green_mask)

    @property
    def red(self) -> np.ndarray:
        return np.flatnonzero(~self.green_mask)

    def is_green(self, token: int) -> bool:
        return bool(self.green_mask[token])


def green_red_split(ctx: PartitionContext) -> GreenRedSplit:
    """Green list = first ceil(gamma*n) slots of the keyed shuffle."""
    perm = permute_vocab(ctx.seed, ctx.n)
    mask = np.zeros(ctx.n, dtype=np.bool_)
    mask[perm[: ctx.green_count]] = True
    mask.flags.writeable = False
    return GreenRedSplit(green_mask=mask)


class KeyedPartitioner:
    """Cached per-key view of splits, permutations and u draws.

    Within one key the step seed depends only on the previous token, so there
    are at most `n` distinct splits; rows are built lazily (in bulk, via the
    compiled kernels) and reused across sequences. This is what makes
    detection of many texts effectively O(tokens).
    """

    def __init__(self, key: int, n: int, gamma: float = 0.5):
        self.key = check_key(key)
        self.n = int(n)
        self.gamma = float(gamma)
        self.g = green_size(self.n, self.gamma)
        self._green = np.zeros((self.n, self.n), dtype=np.bool_)
        self._green_built = np.zeros(self.n, dtype=np.bool_)
        self._positions: np.ndarray | None = None
        self._pos_built: np.ndarray | None = None
        self._u: dict[int, float] = {}

    def seed(self, prev_token: int) -> int:
        return derive_seed(self.key, prev_token)

    def _ensure_green(self, prev_tokens: np.ndarray) -> None:
        need = np.unique(prev_tokens[~self._green_built[prev_tokens]])
        if need.size:
            seeds = derive_seeds(self.key, need)
            self._green[need] = _shuffle.green_rows(seeds, self.n, self.g)
            self._green_built[need] = True

    def green_mask(self, prev_token: int) -> np.ndarray:
        self._ensure_green(np.asarray([prev_token]))
        return self._green[prev_token]

    def split(self, prev_token: int) -> GreenRedSplit:
        mask = self.green_mask(prev_token).copy()
        mask.flags.writeable = False
        return GreenRedSplit(green_mask=mask)

    def green_lookup(self, prev_tokens: np.ndarray, tokens: np.ndarray) -> np.ndarray:
        """Vectorized membership: is tokens[i] green under split(prev_tokens[i])?"""
        prev = np.asarray(prev_tokens, dtype=np.int64)
        tok = np.asarray(tokens, dtype=np.int64)
        self._ensure_green(prev)
        return self._green[prev, tok]

    def _ensure_positions(self, prev_tokens: np.ndarray) -> None:
        if self._positions is None:
            self._positions = np.zeros((self.n, self.n), dtype=np.uint32)
            self._pos_built = np.zeros(self.n, dtype=np.bool_)
        need = np.unique(prev_tokens[~self._pos_built[prev_tokens]])
        if need.size:
            seeds = derive_seeds(self.key, need)
            self._positions[need] = _shuffle.position_rows(seeds, self.n)
            self._pos_built[need] = True

    def positions(self, prev_token: int) -> np.ndarray:
        """Slot of every token id in the shuffle seeded by `prev_token`."""
        self._ensure_positions(np.asarray([prev_token]))
        return self._positions[prev_token]

    def permutation(self, prev_token: int) -> np.ndarray:
        pos = self.positions(prev_token)
        perm = np.empty(self.n, dtype=np.int64)
        perm[pos] = np.arange(self.n, dtype=np.int64)
        return perm

    def position_lookup(self, prev_tokens: np.ndarray, tokens: np.ndarray) -> np.ndarray:
        prev = np.asarray(prev_tokens, dtype=np.int64)
        tok = np.asarray(tokens, dtype=np.int64)
        self._ensure_positions(prev)
        return self._positions[prev, tok].astype(np.int64)

    def rdw_u(self, prev_token: int) -> float:
        u = self._u.get(prev_token)
        if u is None:
            u = rdw_uniform(self.seed(prev_token), self.n)
            self._u[prev_token] = u
        return u
