"""Token sequences and their on-disk interchange format.

A sequence file is a header line "N N_p T" (vocab size, prompt length minus
one, generated length) followed by whitespace-separated integer ids: the
N_p + 1 prompt tokens, then the T generated tokens. This is the contract
between the generate, attack and detect commands.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TokenSequence:
    prompt: np.ndarray  # int64 ids, length n_p + 1
    generated: np.ndarray  # int64 ids, length t
    vocab_size: int

    def __post_init__(self):
        prompt = np.asarray(self.prompt, dtype=np.int64)
        generated = np.asarray(self.generated, dtype=np.int64)
        object.__setattr__(self, "prompt", prompt)
        object.__setattr__(self, "generated", generated)
        if prompt.size < 1:
            raise ValueError("prompt must contain at least one token")
        if generated.size < 1:
            raise ValueError("generated part must contain at least one token")
        for name, arr in (("prompt", prompt), ("generated", generated)):
            if arr.min() < 0 or arr.max() >= self.vocab_size:
                raise ValueError(f"{name} contains ids outside 0..{self.vocab_size - 1}")

    @property
    def n_p(self) -> int:
        return len(self.prompt) - 1

    @property
    def t(self) -> int:
        return len(self.generated)

    @property
    def full(self) -> np.ndarray:
        return np.concatenate([self.prompt, self.generated])

    def with_generated(self, generated: np.ndarray) -> "TokenSequence":
        return TokenSequence(self.prompt, generated, self.vocab_size)


def write_sequence(seq: TokenSequence, path) -> None:
    with open(path, "w") as fh:
        dump_sequence(seq, fh)


def dump_sequence(seq: TokenSequence, fh: io.TextIOBase) -> None:
    fh.write(f"{seq.vocab_size} {seq.n_p} {seq.t}\n")
    fh.write(" ".join(str(t) for t in seq.prompt) + "\n")
    fh.write(" ".join(str(t) for t in seq.generated) + "\n")


def read_sequence(path) -> TokenSequence:
    with open(path) as fh:
        return parse_sequence(fh.read(), source=str(path))


def parse_sequence(text: str, source: str = "<string>") -> TokenSequence:
    fields = text.split()
    if len(fields) < 3:
        raise ValueError(f"{source}: truncated sequence file")
    n, n_p, t = (int(x) for x in fields[:3])
    ids = fields[3:]
    expected = n_p + 1 + t
    if len(ids) != expected:
        raise ValueError(
            f"{source}: header promises {expected} token ids, file carries {len(ids)}"
        )
    ids = np.array([int(x) for x in ids], dtype=np.int64)
    return TokenSequence(prompt=ids[: n_p + 1], generated=ids[n_p + 1 :], vocab_size=n)
