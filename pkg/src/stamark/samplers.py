"""Watermark sampling strategies behind one per-step interface.

Implements the accept/resample samplers (single-accept and the M-resample
variant), the green-logit boost, the permuted-interval reweight family, and
keyed inverse-transform sampling. Each strategy exposes the exact induced
per-step distribution where one exists, so enumeration oracles can check
unbiasedness without touching any RNG.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import as_distribution, entropy
from .partition import GreenRedSplit, KeyedPartitioner


class Method(str, enum.Enum):
    NONE = "none"
    STA1 = "sta1"
    STAM = "stam"
    KGW = "kgw"
    DIPMARK = "dipmark"
    GAMMA_REWEIGHT = "gamma_reweight"
    RDW = "rdw"


# Methods detected by green-list counting vs. permutation-rank counting.
GREENLIST_METHODS = {Method.NONE, Method.STA1, Method.STAM, Method.KGW}
RANK_METHODS = {Method.DIPMARK, Method.GAMMA_REWEIGHT}


@dataclass(frozen=True)
class SamplerConfig:
    """Method choice plus its parameters and the sampler's own RNG seed.

    The rng_seed drives only the sampler's stochastic draws; the watermark
    key never seeds them.
    """

    method: Method
    gamma: float = 0.5
    delta: float = 2.0
    alpha: float = 0.5
    m: int = 1
    tau: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if not 0.0 <= self.alpha <= 0.5:
            raise ValueError(f"alpha must lie in [0, 0.5], got {self.alpha}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.method is Method.GAMMA_REWEIGHT and self.alpha != 0.5:
            object.__setattr__(self, "alpha", 0.5)

    @property
    def effective_alpha(self) -> float:
        return 0.5 if self.method is Method.GAMMA_REWEIGHT else self.alpha

    def with_seed(self, rng_seed: int) -> "SamplerConfig":
        return replace(self, rng_seed=rng_seed)

    @classmethod
    def parse(cls, spec: str, **defaults) -> "SamplerConfig":
        """Parse strings like "sta1", "stam(m=16,tau=1.35)", "dipmark(alpha=0.3)"."""
        m = re.fullmatch(r"\s*([a-zA-Z_0-9]+)\s*(?:\((.*)\))?\s*", spec)
        if not m:
            raise ValueError(f"cannot parse sampler spec {spec!r}")
        name, args = m.group(1).lower(), m.group(2)
        try:
            method = Method(name)
        except ValueError:
            raise ValueError(f"unknown sampler method {name!r}") from None
        kwargs = dict(defaults)
        if args:
            for item in args.split(","):
                if not item.strip():
                    continue
                k, _, v = item.partition("=")
                k = k.strip().lower()
                if k not in ("gamma", "delta", "alpha", "m", "tau", "rng_seed"):
                    raise ValueError(f"unknown sampler parameter {k!r} in {spec!r}")
                kwargs[k] = int(v) if k in ("m", "rng_seed") else float(v)
        return cls(method=method, **kwargs)

    def label(self) -> str:
        if self.method is Method.STAM:
            return f"sta{self.m}(tau={self.tau:g})"
        if self.method in RANK_METHODS:
            return f"{self.method.value}(alpha={self.effective_alpha:g})"
        if self.method is Method.KGW:
            return f"kgw(delta={self.delta:g})"
        return self.method.value


@dataclass(frozen=True)
class StepOutcome:
    """One emitted token plus telemetry used by tests and reports."""

    token: int
    draws_used: int
    was_green: bool | None = None
    reweighted: np.ndarray | None = field(default=None, repr=False)


def categorical(probs: np.ndarray, rng) -> int:
    """Inverse-CDF draw: smallest j with cumsum(p)[j] > u, u = rng.random()."""
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(idx, len(probs) - 1)


def sta1_sample(probs: np.ndarray, split: GreenRedSplit, rng) -> StepOutcome:
    """Sample once; keep a green candidate, otherwise take one forced resample.

    The forced resample draws from the full distribution (not just the red
    list); that reading is what makes the scheme unbiased.
    """
    candidate = categorical(probs, rng)
    if split.green_mask[candidate]:
        return StepOutcome(token=candidate, draws_used=1, was_green=True)
    token = categorical(probs, rng)
    return StepOutcome(token=token, draws_used=2, was_green=bool(split.green_mask[token]))


def sta1_reweight(probs: np.ndarray, green_mask: np.ndarray) -> np.ndarray:
    """Exact per-step distribution induced by the accept/resample rule.

    p'_j = p_j + R p_j for green j, p'_j = R p_j for red j, with R the total
    red mass.
    """
    p = np.asarray(probs, dtype=np.float64)
    red_mass = float(p[~green_mask].sum())
    out = p * red_mass
    out[green_mask] += p[green_mask]
    return as_distribution(out)


def stam_sample(probs: np.ndarray, split: GreenRedSplit, m: int, tau: float, rng) -> StepOutcome:
    """Up to m candidate draws at high-entropy steps, first green accepted.

    Below the entropy threshold the step collapses to m=1, which is exactly
    `sta1_sample` (same draws from the same stream). If every candidate is
    red, one final unconditional draw decides the token.
    """
    m_t = 1 if entropy(probs) < tau else m
    for draw in range(1, m_t + 1):
        candidate = categorical(probs, rng)
        if split.green_mask[candidate]:
            return StepOutcome(token=candidate, draws_used=draw, was_green=True)
    token = categorical(probs, rng)
    return StepOutcome(
        token=token, draws_used=m_t + 1, was_green=bool(split.green_mask[token])
    )


def stam_reweight(probs: np.ndarray, green_mask: np.ndarray, m: int) -> np.ndarray:
    """Induced distribution of the m-resample branch under a fixed split.

    Green j: p_j * sum_{i=0..m} R^i; red j: p_j * R^m. Reduces to
    `sta1_reweight` at m=1; biased for m >= 2.
    """
    p = np.asarray(probs, dtype=np.float64)
    red_mass = float(p[~green_mask].sum())
    if red_mass >= 1.0:
        geom = float(m + 1)
    else:
        geom = (1.0 - red_mass ** (m + 1)) / (1.0 - red_mass)
    out = np.where(green_mask, p * geom, p * red_mass**m)
    return as_distribution(out)


def kgw_reweight(logits: np.ndarray, green_mask: np.ndarray, delta: float) -> np.ndarray:
    """Softmax after adding `delta` to green-token logits."""
    shifted = np.asarray(logits, dtype=np.float64).copy()
    if not np.any(shifted > -np.inf):
        raise ValueError("all logits are -inf")
    shifted[green_mask] += delta
    shifted -= shifted.max()
    w = np.exp(shifted)
    return as_distribution(w / w.sum())


def dipmark_reweight(probs: np.ndarray, perm: np.ndarray, alpha: float) -> np.ndarray:
    """Permuted-interval reweight: zero [0, a], keep (a, 1-a], double (1-a, 1].

    Token in permuted slot j receives F(j) - F(j-1) with
    F(c) = max(cum_j - a, 0) + max(cum_j - (1 - a), 0). alpha = 0.5 is the
    fully-doubling variant.
    """
    if not 0.0 <= alpha <= 0.5:
        raise ValueError(f"alpha must lie in [0, 0.5], got {alpha}")
    p = np.asarray(probs, dtype=np.float64)
    cum = np.cumsum(p[perm])
    f = np.maximum(cum - alpha, 0.0) + np.maximum(cum - (1.0 - alpha), 0.0)
    q = np.diff(f, prepend=0.0)
    np.maximum(q, 0.0, out=q)
    out = np.empty_like(q)
    out[perm] = q
    return as_distribution(out)


def rdw_sample(probs: np.ndarray, perm: np.ndarray, u: float) -> StepOutcome:
    """Inverse-transform draw: first permuted slot whose cumulative mass reaches u.

    The sampled token's probability is effectively reweighted to 1, all
    others to 0.
    """
    if not 0.0 < u <= 1.0:
        raise ValueError(f"u must lie in (0, 1], got {u}")
    p = np.asarray(probs, dtype=np.float64)
    shuffled = p[perm]
    cum = np.cumsum(shuffled)
    idx = int(np.searchsorted(cum, u, side="left"))
    if idx >= len(perm):  # float drift at u ~ 1: take the last nonzero-mass slot
        idx = int(np.flatnonzero(shuffled > 0.0)[-1])
    token = int(perm[idx])
    out = np.zeros_like(p)
    out[token] = 1.0
    return StepOutcome(token=token, draws_used=1, reweighted=as_distribution(out))


def build_stepper(config: SamplerConfig, partitioner: KeyedPartitioner | None):
    """Bind a config to a partitioner, returning step(probs, prev_token, rng).

    `partitioner` may be None only for the unwatermarked method.
    """
    method = config.method
    if method is Method.NONE:

        def step(probs, prev_token, rng):
            return StepOutcome(token=categorical(probs, rng), draws_used=1)

        return step
    if partitioner is None:
        raise ValueError(f"method {method.value} needs a keyed partitioner")

    if method is Method.STA1:

        def step(probs, prev_token, rng):
            return sta1_sample(probs, partitioner.split(prev_token), rng)

    elif method is Method.STAM:

        def step(probs, prev_token, rng):
            return stam_sample(probs, partitioner.split(prev_token), config.m, config.tau, rng)

    elif method is Method.KGW:

        def step(probs, prev_token, rng):
            with np.errstate(divide="ignore"):
                logits = np.log(probs)
            mask = partitioner.green_mask(prev_token)
            q = kgw_reweight(logits, mask, config.delta)
            token = categorical(q, rng)
            return StepOutcome(
                token=token, draws_used=1, was_green=bool(mask[token]), reweighted=q
            )

    elif method in RANK_METHODS:
        alpha = config.effective_alpha

        def step(probs, prev_token, rng):
            perm = partitioner.permutation(prev_token)
            q = dipmark_reweight(probs, perm, alpha)
            return StepOutcome(token=categorical(q, rng), draws_used=1, reweighted=q)

    elif method is Method.RDW:

        def step(probs, prev_token, rng):
            perm = partitioner.permutation(prev_token)
            return rdw_sample(probs, perm, partitioner.rdw_u(prev_token))

    else:  # pragma: no cover
        raise ValueError(f"unhandled method {method!r}")

    return step
