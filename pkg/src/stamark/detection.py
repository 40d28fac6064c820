"""Black-box watermark detection: green counting, z-scores, verdicts.

Detection sees only token ids and the key — never the prompt, the model or
any per-step distribution. Token t is scored against the split recomputed
from token t-1, so the first generated token is unscorable (the detector
does not know the prompt's last token) and the z-test runs on T-1 tokens.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .partition import KeyedPartitioner
from .sequences import TokenSequence


@dataclass(frozen=True)
class DetectionReport:
    scored_len: int
    green_count: int
    gamma: float
    z: float
    threshold: float
    verdict: bool
    elapsed: float  # seconds

    def to_dict(self) -> dict:
        return {
            "scored_len": self.scored_len,
            "green_count": self.green_count,
            "gamma": self.gamma,
            "z": self.z,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "elapsed_ms": self.elapsed * 1e3,
        }


def _generated_ids(tokens) -> np.ndarray:
    if isinstance(tokens, TokenSequence):
        tokens = tokens.generated
    arr = np.asarray(tokens, dtype=np.int64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need at least 2 generated tokens to score")
    return arr


def z_score(green_count: int, scored_len: int, gamma: float) -> float:
    """(|S|_G - gamma*T) / sqrt(gamma*(1-gamma)*T) with T = scored_len."""
    if scored_len < 1:
        raise ValueError("scored_len must be >= 1")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return (green_count - gamma * scored_len) / math.sqrt(gamma * (1.0 - gamma) * scored_len)


def count_green(tokens, key: int, gamma: float, partitioner: KeyedPartitioner | None = None):
    """(green_count, scored_len) over tokens 2..T, splits from each predecessor."""
    ids = _generated_ids(tokens)
    if partitioner is None:
        partitioner = KeyedPartitioner(key, int(ids.max()) + 1, gamma)
    hits = partitioner.green_lookup(ids[:-1], ids[1:])
    return int(hits.sum()), int(ids.size - 1)


def detect(
    tokens,
    key: int,
    gamma: float = 0.5,
    z_threshold: float = 2.0,
    partitioner: KeyedPartitioner | None = None,
) -> DetectionReport:
    """One-tailed z-test against the null green rate gamma; verdict is z >= threshold."""
    start = time.perf_counter()
    green, scored = count_green(tokens, key, gamma, partitioner)
    z = z_score(green, scored, gamma)
    elapsed = time.perf_counter() - start
    return DetectionReport(
        scored_len=scored,
        green_count=green,
        gamma=gamma,
        z=z,
        threshold=z_threshold,
        verdict=z >= z_threshold,
        elapsed=elapsed,
    )


def rank_hits(tokens, key: int, partitioner: KeyedPartitioner | None = None):
    """(hit_count, scored_len) counting tokens landing in the latter half.

    A token scores a hit when its slot in the keyed shuffle of the vocabulary
    (seeded by its predecessor) lies in the latter ceil(N/2) positions — the
    mass-doubled region of the permuted-interval reweights.
    """
    ids = _generated_ids(tokens)
    if partitioner is None:
        partitioner = KeyedPartitioner(key, int(ids.max()) + 1, 0.5)
    pos = partitioner.position_lookup(ids[:-1], ids[1:])
    cutoff = partitioner.n - (partitioner.n + 1) // 2  # first of the latter ceil(N/2) slots
    return int((pos >= cutoff).sum()), int(ids.size - 1)


def dipmark_score(
    tokens,
    key: int,
    z_threshold: float = 2.0,
    partitioner: KeyedPartitioner | None = None,
) -> DetectionReport:
    """Latter-half counting test for the permuted-interval reweights (gamma := 0.5)."""
    start = time.perf_counter()
    hits, scored = rank_hits(tokens, key, partitioner)
    z = z_score(hits, scored, 0.5)
    elapsed = time.perf_counter() - start
    return DetectionReport(
        scored_len=scored,
        green_count=hits,
        gamma=0.5,
        z=z,
        threshold=z_threshold,
        verdict=z >= z_threshold,
        elapsed=elapsed,
    )


class GreenListDetector(BaseEstimator):
    """sklearn-style wrapper around the green-count z-test.

    `decision_function` maps sequences to z-scores; `predict` applies the
    threshold. One instance caches splits for its key across all calls.
    """

    def __init__(self, key: int = 0, gamma: float = 0.5, z_threshold: float = 2.0, n_vocab: int | None = None):
        self.key = key
        self.gamma = gamma
        self.z_threshold = z_threshold
        self.n_vocab = n_vocab

    def fit(self, X=None, y=None):
        n = self.n_vocab
        if n is None:
            n = max(int(np.max(seq.generated if isinstance(seq, TokenSequence) else np.asarray(seq))) for seq in X) + 1
        self.partitioner_ = KeyedPartitioner(self.key, n, self.gamma)
        return self

    def _partitioner(self, X) -> KeyedPartitioner:
        if not hasattr(self, "partitioner_"):
            self.fit(X)
        return self.partitioner_

    def detect(self, tokens) -> DetectionReport:
        return detect(tokens, self.key, self.gamma, self.z_threshold, self._partitioner([tokens]))

    def decision_function(self, X) -> np.ndarray:
        part = self._partitioner(X)
        return np.array(
            [z_score(*count_green(seq, self.key, self.gamma, part), self.gamma) for seq in X]
        )

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X) >= self.z_threshold


class RankHalfDetector(BaseEstimator):
    """sklearn-style wrapper around the latter-half rank test."""

    def __init__(self, key: int = 0, z_threshold: float = 2.0, n_vocab: int | None = None):
        self.key = key
        self.z_threshold = z_threshold
        self.n_vocab = n_vocab

    def fit(self, X=None, y=None):
        n = self.n_vocab
        if n is None:
            n = max(int(np.max(seq.generated if isinstance(seq, TokenSequence) else np.asarray(seq))) for seq in X) + 1
        self.partitioner_ = KeyedPartitioner(self.key, n, 0.5)
        return self

    def _partitioner(self, X) -> KeyedPartitioner:
        if not hasattr(self, "partitioner_"):
            self.fit(X)
        return self.partitioner_

    def detect(self, tokens) -> DetectionReport:
        return dipmark_score(tokens, self.key, self.z_threshold, self._partitioner([tokens]))

    def decision_function(self, X) -> np.ndarray:
        part = self._partitioner(X)
        return np.array([z_score(*rank_hits(seq, self.key, part), 0.5) for seq in X])

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X) >= self.z_threshold
