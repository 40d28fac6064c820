"""Vocabulary and probability-vector primitives.

A "distribution" throughout this package is a 1-D float64 numpy array of
non-negative entries summing to 1. `as_distribution` is the single validation
choke point: it renormalizes sums that drift by less than SUM_TOL and rejects
anything worse, so downstream samplers never compound rounding drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Absolute tolerance on sum(p) == 1. Inputs inside the tolerance are
# renormalized, inputs outside it are rejected.
SUM_TOL = 1e-9


@dataclass(frozen=True)
class Vocabulary:
    """A token set of `size` ids 0..size-1, with optional surface forms."""

    size: int
    forms: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"vocabulary needs at least 2 tokens, got {self.size}")
        if self.forms is not None and len(self.forms) != self.size:
            raise ValueError(
                f"got {len(self.forms)} surface forms for {self.size} tokens"
            )

    def word(self, token: int) -> str:
        if self.forms is None:
            return str(token)
        return self.forms[token]


def as_distribution(probs: Sequence[float] | np.ndarray, tol: float = SUM_TOL) -> np.ndarray:
    """Validate `probs` as a probability vector and return it read-only.

    Entries must lie in [0, 1] and sum to 1 within `tol` (the vector is
    renormalized to kill sub-tolerance drift). Zero entries are allowed.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise ValueError(f"distribution must be a 1-D vector of length >= 2, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("distribution contains non-finite entries")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("distribution entries must lie in [0, 1]")
    total = float(p.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"distribution sums to {total!r}, outside tolerance {tol}")
    p = p / total
    p.flags.writeable = False
    return p


def entropy(probs: np.ndarray) -> float:
    """Shannon entropy -sum(p ln p) in nats, with 0 ln 0 := 0."""
    p = np.asarray(probs, dtype=np.float64)
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


def gini(probs: np.ndarray) -> float:
    """Gini index sum(p_i (1 - p_i)) = 1 - sum(p_i^2)."""
    p = np.asarray(probs, dtype=np.float64)
    return float((p * (1.0 - p)).sum())


def make_low_entropy(p_max: float, n: int, argmax_id: int) -> np.ndarray:
    """One token with mass `p_max`, the rest sharing 1 - p_max uniformly.

    Requires 1/n <= p_max <= 1 so the designated token really carries the
    maximum probability.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0 <= argmax_id < n:
        raise ValueError(f"argmax_id {argmax_id} out of range for n={n}")
    if p_max > 1.0 or p_max < 1.0 / n:
        raise ValueError(f"p_max must lie in [1/n, 1], got {p_max} for n={n}")
    p = np.full(n, (1.0 - p_max) / (n - 1), dtype=np.float64)
    p[argmax_id] = p_max
    return as_distribution(p)
