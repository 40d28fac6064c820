"""Deterministic synthetic training corpus.

The bundled fixture (data/corpus.txt) is machine-generated text from a seeded
Markov chain over pronounceable pseudo-words: each context token has its own
Zipf-shaped successor ranking, so conditional distributions are peaked enough
to sharpen strongly at low temperature while the marginal token frequencies
stay diffuse. Being machine-generated, the fixture carries no copyright and
ships with the package. `synth_corpus` reproduces it bit-for-bit.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

_SYLLABLES = [
    "ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du",
    "fa", "fe", "fi", "fo", "ga", "ge", "gi", "go", "ka", "ke",
    "ki", "ko", "la", "le", "li", "lo", "ma", "me", "mi", "mo",
    "na", "ne", "ni", "no", "pa", "pe", "pi", "po", "ra", "re",
    "ri", "ro", "sa", "se", "si", "so", "ta", "te", "ti", "to",
    "va", "ve", "vi", "vo", "za", "ze", "zi", "zo",
]

DEFAULT_SEED = 20240501
DEFAULT_TYPES = 2400
DEFAULT_TOKENS = 220_000


def word_for_rank(rank: int) -> str:
    """Unique pseudo-word for a vocabulary rank (base-len(syllables) digits)."""
    base = len(_SYLLABLES)
    digits = [rank % base]
    rank //= base
    while rank:
        digits.append(rank % base)
        rank //= base
    return "".join(_SYLLABLES[d] for d in reversed(digits)) + _SYLLABLES[sum(digits) % base]


def synth_corpus(
    n_tokens: int = DEFAULT_TOKENS,
    n_types: int = DEFAULT_TYPES,
    seed: int = DEFAULT_SEED,
    zipf_s: float = 1.15,
    restart_prob: float = 0.1,
) -> str:
    """Generate the corpus text (whitespace-separated words, wrapped lines)."""
    if n_tokens < 1 or n_types < 2:
        raise ValueError("need n_tokens >= 1 and n_types >= 2")
    words = [word_for_rank(r) for r in range(n_types)]

    ranks = np.arange(1, n_types + 1, dtype=np.float64)
    step_cum = np.cumsum(ranks**-zipf_s)
    step_cum /= step_cum[-1]
    restart_cum = np.cumsum(ranks**-0.8)
    restart_cum /= restart_cum[-1]

    # Per-context successor order, materialized lazily.
    orders: dict[int, np.ndarray] = {}

    def successor_order(ctx: int) -> np.ndarray:
        order = orders.get(ctx)
        if order is None:
            order = np.random.default_rng(np.random.SeedSequence([seed, ctx])).permutation(n_types)
            orders[ctx] = order
        return order

    rng = np.random.default_rng(np.random.SeedSequence([seed, n_types, n_tokens]))
    state = int(rng.integers(n_types))
    out = [state]
    for _ in range(n_tokens - 1):
        if rng.random() < restart_prob:
            state = int(np.searchsorted(restart_cum, rng.random(), side="right"))
        else:
            r = int(np.searchsorted(step_cum, rng.random(), side="right"))
            state = int(successor_order(state)[min(r, n_types - 1)])
        out.append(state)

    lines = []
    for i in range(0, len(out), 16):
        lines.append(" ".join(words[t] for t in out[i : i + 16]))
    return "\n".join(lines) + "\n"


def default_corpus_path() -> str:
    """Filesystem path of the bundled corpus fixture."""
    return str(resources.files("stamark").joinpath("data/corpus.txt"))


def load_default_corpus() -> str:
    return resources.files("stamark").joinpath("data/corpus.txt").read_text()
