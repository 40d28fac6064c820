"""Watermark-removal attacks for robustness experiments.

Both attacks preserve sequence length and are deterministic in their seed.
The copy-paste attack splices in donor tokens at the same positions,
mirroring the "replace with unwatermarked text from the same prompt" recipe;
random substitution is a cheap paraphrase stand-in.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

import numpy as np

from .sequences import TokenSequence


class AttackKind(str, enum.Enum):
    COPY_PASTE = "copy_paste"
    RANDOM_SUBSTITUTE = "random_substitute"


@dataclass(frozen=True)
class AttackConfig:
    kind: AttackKind
    fraction: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {self.fraction}")

    @classmethod
    def parse(cls, spec: str, seed: int = 0) -> "AttackConfig":
        """Parse strings like "copy_paste(fraction=0.25)" or "random_substitute(0.1)"."""
        m = re.fullmatch(r"\s*([a-zA-Z_]+)\s*(?:\(\s*(?:fraction\s*=\s*)?([^)]*)\))?\s*", spec)
        if not m:
            raise ValueError(f"cannot parse attack spec {spec!r}")
        kind = AttackKind(m.group(1).lower())
        fraction = float(m.group(2)) if m.group(2) else 0.25
        return cls(kind=kind, fraction=fraction, seed=seed)

    def label(self) -> str:
        return f"{self.kind.value}({self.fraction:g})"


def _replacement_positions(t: int, fraction: float, rng) -> np.ndarray:
    count = math.ceil(fraction * t)
    if count == 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(t, size=min(count, t), replace=False)


def copy_paste(
    wm: TokenSequence, donor: TokenSequence, fraction: float, seed: int = 0
) -> TokenSequence:
    """Replace ceil(fraction*T) positions with the donor token at the same index.

    Positions are drawn without repetition; a shorter donor is clipped to its
    last token.
    """
    if wm.vocab_size != donor.vocab_size:
        raise ValueError("watermarked and donor sequences use different vocabularies")
    rng = np.random.default_rng(seed)
    out = wm.generated.copy()
    pos = _replacement_positions(wm.t, fraction, rng)
    donor_idx = np.minimum(pos, donor.t - 1)
    out[pos] = donor.generated[donor_idx]
    return wm.with_generated(out)


def random_substitute(
    tokens: TokenSequence, fraction: float, vocab_size: int | None = None, seed: int = 0
) -> TokenSequence:
    """Replace ceil(fraction*T) positions with uniform random vocabulary tokens."""
    n = tokens.vocab_size if vocab_size is None else vocab_size
    rng = np.random.default_rng(seed)
    out = tokens.generated.copy()
    pos = _replacement_positions(tokens.t, fraction, rng)
    out[pos] = rng.integers(0, n, size=pos.size)
    return tokens.with_generated(out)


def apply_attack(
    config: AttackConfig, tokens: TokenSequence, donor: TokenSequence | None = None
) -> TokenSequence:
    if config.kind is AttackKind.COPY_PASTE:
        if donor is None:
            raise ValueError("copy_paste needs a donor sequence")
        return copy_paste(tokens, donor, config.fraction, config.seed)
    return random_substitute(tokens, config.fraction, seed=config.seed)
