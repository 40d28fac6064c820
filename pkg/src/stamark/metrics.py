"""Detection-quality metrics over positive/negative score pools."""

from __future__ import annotations

import numpy as np


def _pools(pos_scores, neg_scores):
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("score pools must be nonempty")
    return pos, neg


def roc_auc(pos_scores, neg_scores) -> float:
    """Mann-Whitney AUC: fraction of (pos, neg) pairs correctly ordered, ties half."""
    pos, neg = _pools(pos_scores, neg_scores)
    both = np.concatenate([pos, neg])
    order = np.argsort(both, kind="mergesort")
    ranks = np.empty(both.size, dtype=np.float64)
    ranks[order] = np.arange(1, both.size + 1)
    # average ranks within tied groups
    sorted_vals = both[order]
    tie_starts = np.flatnonzero(np.diff(sorted_vals) != 0) + 1
    boundaries = np.concatenate([[0], tie_starts, [both.size]])
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        if b - a > 1:
            ranks[order[a:b]] = 0.5 * (a + 1 + b)
    r_pos = ranks[: pos.size].sum()
    u = r_pos - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def f1_at_threshold(pos_scores, neg_scores, z_threshold: float) -> float:
    """F1 with predicted positives = scores >= threshold; 0 when degenerate."""
    pos, neg = _pools(pos_scores, neg_scores)
    tp = int((pos >= z_threshold).sum())
    fp = int((neg >= z_threshold).sum())
    fn = pos.size - tp
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2.0 * tp / denom


def tpr_at_fpr(pos_scores, neg_scores, fpr_level: float) -> float:
    """TPR above the (1 - fpr)-quantile of the negatives (higher interpolation)."""
    if not 0.0 < fpr_level < 1.0:
        raise ValueError(f"fpr_level must lie in (0, 1), got {fpr_level}")
    pos, neg = _pools(pos_scores, neg_scores)
    threshold = float(np.quantile(neg, 1.0 - fpr_level, method="higher"))
    return float((pos > threshold).mean())
