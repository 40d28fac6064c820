"""Closed-form risk/detection bounds and the oracles that verify them.

Closed forms: across-key variance of the top token's reweighted mass for the
peaked-protocol distribution (accept/resample, permuted-interval, inverse
transform), the green-count mean/variance bounds driven by a Gini floor, and
the resulting type-II upper bound. Oracles: exhaustive enumeration over all
fixed-size splits / vocabulary permutations at small N, and seeded Monte
Carlo at realistic N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np

from .distributions import as_distribution, gini, make_low_entropy
from .partition import GreenRedSplit, green_size
from .samplers import (
    Method,
    dipmark_reweight,
    rdw_sample,
    sta1_reweight,
    sta1_sample,
    stam_reweight,
)

ENUM_MAX_SPLIT_N = 8
ENUM_MAX_PERM_N = 6


@dataclass(frozen=True)
class BoundReport:
    """A closed-form theory value, optionally paired with an empirical estimate."""

    name: str
    inputs: dict = field(default_factory=dict)
    closed_form: float = float("nan")
    empirical: float | None = None
    n_trials: int | None = None


# ---------------------------------------------------------------------------
# Closed forms


def var_sta1(p_max: float, gamma: float, n: int) -> float:
    """Across-key variance of the top token's mass under accept/resample:
    p^2 (1-p)^2 gamma (1-gamma) N^2 / (N-1)^2."""
    _check_pmax(p_max)
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    return p_max**2 * (1.0 - p_max) ** 2 * gamma * (1.0 - gamma) * n**2 / (n - 1) ** 2


def var_dipmark(p_max: float, n: int, alpha: float | None = None) -> float:
    """Across-key variance under the permuted-interval reweight:
    (1-p)^2 (N+1) / (3 (N-1)); independent of alpha in the regime
    1 - alpha <= p_max < 1."""
    _check_pmax(p_max)
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if alpha is not None and not (1.0 - alpha <= p_max):
        raise ValueError(
            f"variance formula assumes 1 - alpha <= p_max; got alpha={alpha}, p_max={p_max}"
        )
    return (1.0 - p_max) ** 2 * (n + 1) / (3.0 * (n - 1))


def var_rdw(p_max: float) -> float:
    """Across-key variance under inverse-transform sampling: p (1-p)."""
    _check_pmax(p_max)
    return p_max * (1.0 - p_max)


def _check_pmax(p_max: float) -> None:
    if not 0.0 < p_max < 1.0:
        raise ValueError(f"p_max must lie in (0, 1), got {p_max}")


def gini_mean_lower(gamma: float, t: int, gini_star: float) -> float:
    """Lower bound on the expected green count: gamma*T + (1-gamma)*gamma*T*Gini*."""
    _check_gini_args(gamma, t, gini_star)
    return gamma * t + (1.0 - gamma) * gamma * t * gini_star


def gini_var_upper(gamma: float, t: int, gini_star: float) -> float:
    """Upper bound on the green-count variance, valid when the boosted green
    rate gamma + (1-gamma)*gamma*Gini* is at least 0.5."""
    _check_gini_args(gamma, t, gini_star)
    rate = gamma + (1.0 - gamma) * gamma * gini_star
    if rate < 0.5:
        raise ValueError(
            f"variance bound needs gamma + (1-gamma)*gamma*Gini* >= 0.5, got {rate:.6g}"
        )
    return t * rate * (1.0 - rate)


def type2_upper(gamma: float, t: int, gini_star: float, z_threshold: float) -> float:
    """Upper bound on the miss rate of the one-tailed z-test at threshold z.

    Requires Gini* > z / sqrt(gamma (1-gamma) T) (strictly) so the mean bound
    clears the decision boundary; inherits the variance-bound assumption.
    """
    sd = math.sqrt(gamma * (1.0 - gamma) * t)
    if not gini_star > z_threshold / sd:
        raise ValueError(
            f"bound needs Gini* > z/sqrt(gamma(1-gamma)T) = {z_threshold / sd:.6g}, "
            f"got Gini* = {gini_star}"
        )
    e_low = gini_mean_lower(gamma, t, gini_star)
    v_up = gini_var_upper(gamma, t, gini_star)
    offset = e_low - gamma * t - z_threshold * sd
    return v_up / (v_up + offset**2)


def _check_gini_args(gamma: float, t: int, gini_star: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if t < 1:
        raise ValueError(f"need t >= 1, got {t}")
    if not 0.0 <= gini_star < 1.0:
        raise ValueError(f"Gini* must lie in [0, 1), got {gini_star}")


def protocol_pmax_for_gini(gini_value: float, n: int) -> float:
    """p_max of the peaked-protocol distribution with the requested Gini index."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    max_gini = 1.0 - 1.0 / n
    if not 0.0 <= gini_value <= max_gini:
        raise ValueError(f"Gini must lie in [0, {max_gini:.6g}] for n={n}")
    disc = 1.0 - n + n * (n - 1) * (1.0 - gini_value)
    return (1.0 + math.sqrt(disc)) / n


# ---------------------------------------------------------------------------
# Exact enumeration oracles


def iter_green_masks(n: int, g: int):
    """All C(n, g) fixed-size green masks, in lexicographic order."""
    for ids in combinations(range(n), g):
        mask = np.zeros(n, dtype=np.bool_)
        mask[list(ids)] = True
        yield mask


def exact_expected_reweight(
    probs,
    gamma: float = 0.5,
    method: Method = Method.STA1,
    m: int = 1,
    alpha: float = 0.5,
) -> np.ndarray:
    """Key-averaged induced distribution by exhaustive enumeration.

    Split-based methods average over all fixed-size green lists (n <= 8);
    permutation-based methods over all n! orders (n <= 6), with the
    inverse-transform u integrated analytically through segment lengths.
    """
    p = as_distribution(probs)
    n = p.size
    if method in (Method.STA1, Method.STAM):
        if n > ENUM_MAX_SPLIT_N:
            raise ValueError(f"split enumeration capped at n <= {ENUM_MAX_SPLIT_N}, got {n}")
        g = green_size(n, gamma)
        acc = np.zeros(n)
        count = 0
        for mask in iter_green_masks(n, g):
            if method is Method.STA1:
                acc += sta1_reweight(p, mask)
            else:
                acc += stam_reweight(p, mask, m)
            count += 1
        return acc / count
    if method in (Method.DIPMARK, Method.GAMMA_REWEIGHT, Method.RDW):
        if n > ENUM_MAX_PERM_N:
            raise ValueError(f"permutation enumeration capped at n <= {ENUM_MAX_PERM_N}, got {n}")
        if method is Method.GAMMA_REWEIGHT:
            alpha = 0.5
        acc = np.zeros(n)
        count = 0
        for order in permutations(range(n)):
            perm = np.array(order, dtype=np.int64)
            if method is Method.RDW:
                # integrate u analytically: each permuted slot is hit with
                # probability equal to its segment length
                seg = np.diff(np.cumsum(p[perm]), prepend=0.0)
                contrib = np.zeros(n)
                contrib[perm] = seg
                acc += contrib
            else:
                acc += dipmark_reweight(p, perm, alpha)
            count += 1
        return acc / count
    raise ValueError(f"no enumeration oracle for method {method!r}")


def enum_variance(
    probs,
    method: Method,
    gamma: float = 0.5,
    alpha: float = 0.5,
    m: int = 1,
    token: int | None = None,
) -> float:
    """Exact across-key variance of one token's reweighted mass (default: argmax)."""
    p = as_distribution(probs)
    n = p.size
    x = int(np.argmax(p)) if token is None else int(token)
    vals: list[float] = []
    weights: list[float] = []
    if method in (Method.STA1, Method.STAM):
        if n > ENUM_MAX_SPLIT_N:
            raise ValueError(f"split enumeration capped at n <= {ENUM_MAX_SPLIT_N}, got {n}")
        g = green_size(n, gamma)
        for mask in iter_green_masks(n, g):
            q = sta1_reweight(p, mask) if method is Method.STA1 else stam_reweight(p, mask, m)
            vals.append(float(q[x]))
            weights.append(1.0)
    elif method in (Method.DIPMARK, Method.GAMMA_REWEIGHT):
        if n > ENUM_MAX_PERM_N:
            raise ValueError(f"permutation enumeration capped at n <= {ENUM_MAX_PERM_N}, got {n}")
        if method is Method.GAMMA_REWEIGHT:
            alpha = 0.5
        for order in permutations(range(n)):
            q = dipmark_reweight(p, np.array(order, dtype=np.int64), alpha)
            vals.append(float(q[x]))
            weights.append(1.0)
    elif method is Method.RDW:
        if n > ENUM_MAX_PERM_N:
            raise ValueError(f"permutation enumeration capped at n <= {ENUM_MAX_PERM_N}, got {n}")
        # per permutation the token's mass becomes 1 w.p. p[x] and 0 otherwise
        for _ in permutations(range(n)):
            vals.extend([1.0, 0.0])
            weights.extend([float(p[x]), float(1.0 - p[x])])
    else:
        raise ValueError(f"no enumeration oracle for method {method!r}")
    vals_arr = np.array(vals)
    w = np.array(weights)
    w = w / w.sum()
    mean = float((w * vals_arr).sum())
    return float((w * (vals_arr - mean) ** 2).sum())


# ---------------------------------------------------------------------------
# Monte Carlo


def mc_variance(
    probs,
    gamma: float,
    method: Method,
    trials: int = 100_000,
    seed: int = 0,
    alpha: float = 0.5,
) -> BoundReport:
    """Sample variance of the top token's reweighted mass over random keys.

    Splits/permutations (and u) are drawn fresh per trial from a seeded
    generator; deterministic in `seed`.
    """
    if trials < 1_000:
        raise ValueError(f"need trials >= 1000, got {trials}")
    p = as_distribution(probs)
    n = p.size
    x = int(np.argmax(p))
    rng = np.random.default_rng(seed)
    vals = np.empty(trials)
    if method is Method.STA1:
        g = green_size(n, gamma)
        for i in range(trials):
            mask = np.zeros(n, dtype=np.bool_)
            mask[rng.choice(n, g, replace=False)] = True
            red = 1.0 - float(p[mask].sum())
            vals[i] = p[x] + red * p[x] if mask[x] else red * p[x]
    elif method in (Method.DIPMARK, Method.GAMMA_REWEIGHT):
        if method is Method.GAMMA_REWEIGHT:
            alpha = 0.5
        for i in range(trials):
            vals[i] = dipmark_reweight(p, rng.permutation(n), alpha)[x]
    elif method is Method.RDW:
        for i in range(trials):
            u = 1.0 - rng.random()  # in (0, 1]
            vals[i] = 1.0 if rdw_sample(p, rng.permutation(n), u).token == x else 0.0
    else:
        raise ValueError(f"no Monte Carlo estimator for method {method!r}")

    closed = float("nan")
    if _is_protocol(p, x):
        if method is Method.STA1:
            closed = var_sta1(float(p[x]), gamma, n)
        elif method in (Method.DIPMARK, Method.GAMMA_REWEIGHT):
            closed = var_dipmark(float(p[x]), n)
        else:
            closed = var_rdw(float(p[x]))
    return BoundReport(
        name=f"var_{method.value}",
        inputs={"p_max": float(p[x]), "gamma": gamma, "n": n},
        closed_form=closed,
        empirical=float(np.var(vals, ddof=1)),
        n_trials=trials,
    )


def _is_protocol(p: np.ndarray, x: int) -> bool:
    rest = np.delete(p, x)
    return rest.size > 0 and float(np.ptp(rest)) < 1e-12 and p[x] >= rest[0]


def simulate_sta1_counts(
    gamma: float = 0.5,
    t: int = 200,
    n_sequences: int = 1000,
    gini_star: float = 0.5,
    n: int = 1000,
    seed: int = 0,
) -> np.ndarray:
    """Green counts of simulated accept/resample sequences over the protocol
    distribution with per-step Gini exactly `gini_star`.

    Each step draws a fresh uniformly random fixed-size split (the regime the
    mean/variance bounds are stated for) and runs the real sampling rule.
    """
    p = make_low_entropy(protocol_pmax_for_gini(gini_star, n), n, 0)
    assert abs(gini(p) - gini_star) < 1e-9
    g = green_size(n, gamma)
    rng = np.random.default_rng(seed)
    counts = np.empty(n_sequences, dtype=np.int64)
    for s in range(n_sequences):
        hits = 0
        for _ in range(t):
            mask = np.zeros(n, dtype=np.bool_)
            mask[rng.choice(n, g, replace=False)] = True
            out = sta1_sample(p, GreenRedSplit(green_mask=mask), rng)
            hits += int(mask[out.token])
        counts[s] = hits
    return counts


def bootstrap_stat(values, stat, n_boot: int = 2000, seed: int = 0) -> np.ndarray:
    """Distribution of `stat` over seeded bootstrap resamples of `values`."""
    values = np.asarray(values, dtype=np.float64)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, values.size, size=(n_boot, values.size))
    return np.array([stat(values[row]) for row in idx])


# ---------------------------------------------------------------------------
# Report assembly for the CLI


def bounds_table(
    gamma: float,
    t: int,
    gini_star: float,
    z_thresholds,
    p_max: float,
    n: int,
    trials: int = 0,
    seed: int = 0,
) -> list[BoundReport]:
    """The standard set of closed-form rows, optionally backed by Monte Carlo."""
    rows: list[BoundReport] = []
    risk = {"p_max": p_max, "gamma": gamma, "n": n}
    if trials:
        proto = make_low_entropy(p_max, n, 0)
        rows.append(mc_variance(proto, gamma, Method.STA1, trials, seed))
        rows.append(mc_variance(proto, gamma, Method.DIPMARK, trials, seed + 1))
        rows.append(mc_variance(proto, gamma, Method.RDW, trials, seed + 2))
    else:
        rows.append(BoundReport("var_sta1", risk, var_sta1(p_max, gamma, n)))
        rows.append(BoundReport("var_dipmark", risk, var_dipmark(p_max, n)))
        rows.append(BoundReport("var_rdw", {"p_max": p_max}, var_rdw(p_max)))
    hypo = {"gamma": gamma, "t": t, "gini_star": gini_star}
    rows.append(BoundReport("green_mean_lower", hypo, gini_mean_lower(gamma, t, gini_star)))
    rows.append(BoundReport("green_var_upper", hypo, gini_var_upper(gamma, t, gini_star)))
    for z in z_thresholds:
        rows.append(
            BoundReport(
                f"type2_upper@z={z:g}",
                dict(hypo, z_threshold=z),
                type2_upper(gamma, t, gini_star, z),
            )
        )
    return rows
