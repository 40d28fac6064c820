"""Interpolated additive-smoothed n-gram language model and generation loop.

A small autoregressive model standing in for the LLM: word-level vocabulary
capped at the most frequent `max_vocab` types (plus <unk> when the cap
binds), per-order additive smoothing, linear interpolation across orders,
and a temperature knob that moves the per-step entropy regime.
"""

from __future__ import annotations

import math
import pickle

import numpy as np
from sklearn.base import BaseEstimator

from .distributions import Vocabulary
from .partition import KeyedPartitioner
from .samplers import Method, SamplerConfig, StepOutcome, build_stepper
from .sequences import TokenSequence

UNK = "<unk>"

_DEFAULT_WEIGHTS = {1: (1.0,), 2: (0.2, 0.8), 3: (0.1, 0.3, 0.6)}


class NgramLanguageModel(BaseEstimator):
    """Autoregressive n-gram model with fit/next_dist/perplexity.

    Parameters
    ----------
    order : 1, 2 or 3.
    smoothing_k : additive smoothing constant, must be > 0 so no token ever
        has probability zero.
    interpolation : simplex weights over orders 1..order (defaults depend on
        order); lower orders absorb the weight when context is short.
    max_vocab : cap on word types; an <unk> token is appended only when the
        cap actually binds.
    """

    def __init__(self, order=2, smoothing_k=0.1, interpolation=None, max_vocab=2000):
        self.order = order
        self.smoothing_k = smoothing_k
        self.interpolation = interpolation
        self.max_vocab = max_vocab

    def _validated_weights(self) -> np.ndarray:
        if self.order not in (1, 2, 3):
            raise ValueError(f"order must be 1, 2 or 3, got {self.order}")
        if not self.smoothing_k > 0.0:
            raise ValueError(f"smoothing_k must be > 0, got {self.smoothing_k}")
        w = self.interpolation
        if w is None:
            w = _DEFAULT_WEIGHTS[self.order]
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.order,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(
                f"interpolation must be {self.order} non-negative weights summing to 1"
            )
        return w

    def fit(self, corpus, y=None):
        """Count n-grams over a text (str) or an iterable of word strings."""
        weights = self._validated_weights()
        words = corpus.split() if isinstance(corpus, str) else list(corpus)
        if not words:
            raise ValueError("corpus is empty")

        counts: dict[str, int] = {}
        for w in words:
            counts[w] = counts.get(w, 0) + 1
        ranked = sorted(counts, key=lambda w: (-counts[w], w))
        if len(ranked) > self.max_vocab:
            kept = ranked[: self.max_vocab] + [UNK]
        else:
            kept = ranked
        if len(kept) < 2:
            raise ValueError("corpus must contain at least 2 distinct token types")
        self.word_to_id_ = {w: i for i, w in enumerate(kept)}
        self.vocab_ = Vocabulary(size=len(kept), forms=tuple(kept))
        self.n_ = self.vocab_.size
        self.weights_ = weights

        unk_id = self.word_to_id_.get(UNK, -1)
        ids = np.array([self.word_to_id_.get(w, unk_id) for w in words], dtype=np.int64)
        if ids.min() < 0:
            raise ValueError("token id out of range")  # unreachable once vocab is built
        self.corpus_ids_ = ids

        n = self.n_
        self._unigram = np.bincount(ids, minlength=n).astype(np.float64)
        if self.order >= 2:
            self._bigram = np.zeros((n, n), dtype=np.int32)
            np.add.at(self._bigram, (ids[:-1], ids[1:]), 1)
            self._bigram_totals = self._bigram.sum(axis=1).astype(np.float64)
        if self.order >= 3:
            tri: dict[tuple[int, int], dict[int, int]] = {}
            for a, b, c in zip(ids[:-2], ids[1:-1], ids[2:]):
                row = tri.setdefault((int(a), int(b)), {})
                row[int(c)] = row.get(int(c), 0) + 1
            self._trigram = tri
        self._dist_cache: dict[tuple, np.ndarray] = {}
        return self

    def _check_fitted(self):
        if not hasattr(self, "n_"):
            raise RuntimeError("model is not fitted; call fit() first")

    def encode(self, words) -> np.ndarray:
        self._check_fitted()
        if isinstance(words, str):
            words = words.split()
        unk_id = self.word_to_id_.get(UNK)
        out = []
        for w in words:
            tid = self.word_to_id_.get(w, unk_id)
            if tid is None:
                raise ValueError(f"word {w!r} not in vocabulary (no <unk> present)")
            out.append(tid)
        return np.array(out, dtype=np.int64)

    def decode(self, ids) -> str:
        self._check_fitted()
        return " ".join(self.vocab_.forms[int(i)] for i in ids)

    def _order_dist(self, o: int, context: tuple[int, ...]) -> np.ndarray:
        """Additive-smoothed conditional for one order, given its context."""
        k, n = self.smoothing_k, self.n_
        if o == 1:
            row, total = self._unigram, self._unigram.sum()
        elif o == 2:
            prev = context[-1]
            row, total = self._bigram[prev].astype(np.float64), self._bigram_totals[prev]
        else:
            sparse = self._trigram.get((context[-2], context[-1]), {})
            row = np.zeros(n, dtype=np.float64)
            for tok, cnt in sparse.items():
                row[tok] = cnt
            total = row.sum()
        return (row + k) / (total + k * n)

    def next_dist(self, context, temperature: float = 1.0) -> np.ndarray:
        """Interpolated smoothed distribution, sharpened to 1/temperature."""
        self._check_fitted()
        if not temperature > 0.0:
            raise ValueError(f"temperature must be > 0, got {temperature}")
        context = tuple(int(t) for t in context)
        used = context[-(self.order - 1) :] if self.order > 1 else ()
        key = (used, float(temperature))
        cached = self._dist_cache.get(key)
        if cached is not None:
            return cached

        p = np.zeros(self.n_, dtype=np.float64)
        live = 0.0
        for o in range(1, self.order + 1):
            w = self.weights_[o - 1]
            if w == 0.0 or len(context) < o - 1:
                continue
            p += w * self._order_dist(o, used)
            live += w
        p /= live
        if temperature != 1.0:
            logp = np.log(p) / temperature
            logp -= logp.max()
            p = np.exp(logp)
            p /= p.sum()
        p.flags.writeable = False
        self._dist_cache[key] = p
        return p

    def perplexity(self, seq: TokenSequence) -> float:
        """exp(mean NLL) of the generated tokens under the raw model (temperature 1)."""
        self._check_fitted()
        ctx = list(seq.prompt)
        nll = 0.0
        for tok in seq.generated:
            p = self.next_dist(ctx, 1.0)
            nll -= math.log(float(p[int(tok)]))
            ctx.append(int(tok))
        return math.exp(nll / seq.t)

    def sample_prompt(self, rng, length: int = 2) -> np.ndarray:
        """A contiguous window of the training stream, as a prompt."""
        self._check_fitted()
        if length < 1 or length > len(self.corpus_ids_):
            raise ValueError(f"prompt length {length} out of range")
        start = int(rng.integers(0, len(self.corpus_ids_) - length + 1))
        return self.corpus_ids_[start : start + length].copy()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            pickle.dump(self, fh)

    @classmethod
    def load(cls, path) -> "NgramLanguageModel":
        with open(path, "rb") as fh:
            model = pickle.load(fh)
        if not isinstance(model, cls):
            raise ValueError(f"{path} does not contain a {cls.__name__}")
        return model


def train(corpus, order=2, smoothing_k=0.1, interpolation=None, max_vocab=2000) -> NgramLanguageModel:
    """Functional wrapper: fit a model on a corpus."""
    return NgramLanguageModel(
        order=order,
        smoothing_k=smoothing_k,
        interpolation=interpolation,
        max_vocab=max_vocab,
    ).fit(corpus)


def generate(
    model: NgramLanguageModel,
    prompt,
    t: int,
    config: SamplerConfig,
    key: int = 0,
    temperature: float = 1.0,
    partitioner: KeyedPartitioner | None = None,
    rng=None,
    collect_outcomes: bool = False,
) -> TokenSequence | tuple[TokenSequence, list[StepOutcome]]:
    """Autoregressive generation of `t` tokens under a sampler config.

    The step-t partition seed derives from token t-1 (the prompt's last token
    at t=1). Pass a shared `partitioner` to reuse split caches across
    sequences generated under the same key.
    """
    prompt = np.asarray(prompt, dtype=np.int64)
    if prompt.size < 1:
        raise ValueError("prompt must contain at least one token")
    if t < 1:
        raise ValueError(f"need t >= 1, got {t}")
    if config.method is not Method.NONE and partitioner is None:
        partitioner = KeyedPartitioner(key, model.n_, config.gamma)
    stepper = build_stepper(config, partitioner)
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)

    ctx = [int(x) for x in prompt]
    generated: list[int] = []
    outcomes: list[StepOutcome] = []
    for _ in range(t):
        p = model.next_dist(ctx, temperature)
        out = stepper(p, ctx[-1], rng)
        generated.append(out.token)
        ctx.append(out.token)
        if collect_outcomes:
            outcomes.append(out)
    seq = TokenSequence(prompt=prompt, generated=np.array(generated, dtype=np.int64), vocab_size=model.n_)
    return (seq, outcomes) if collect_outcomes else seq
