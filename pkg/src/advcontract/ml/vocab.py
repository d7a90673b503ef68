"""Token vocabulary over PSCFT documents."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from advcontract.pscft.serialize import tokenize

PAD, UNK, CLS = 0, 1, 2
RESERVED = ("<pad>", "<unk>", "<cls>")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class TokenVocabulary:
    tokens: tuple[str, ...]  # index = id, reserved entries first
    min_frequency: int = 1
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.tokens[: len(RESERVED)] != RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self.index.get(token, UNK)

    def encode(self, doc: str | list[str], max_len: int | None = None) -> list[int]:
        toks = tokenize(doc) if isinstance(doc, str) else doc
        ids = [CLS] + [self.id_of(t) for t in toks]
        return ids[:max_len] if max_len else ids

    def batch(self, docs: list, max_len: int) -> np.ndarray:
        """Right-padded (n, L) id matrix, L = longest encoded doc (capped by max_len)."""
        seqs = [self.encode(d, max_len) for d in docs]
        width = max((len(s) for s in seqs), default=1)
        out = np.full((len(seqs), width), PAD, dtype=np.int64)
        for i, s in enumerate(seqs):
            out[i, : len(s)] = s
        return out

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "min_frequency": self.min_frequency, "tokens": list(self.tokens)}

    @classmethod
    def from_dict(cls, d: dict) -> "TokenVocabulary":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported vocabulary format {d.get('format_version')!r}")
        return cls(tuple(d["tokens"]), int(d["min_frequency"]))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def build_vocab(corpus, min_frequency: int = 1) -> TokenVocabulary:
    docs = list(corpus)
    if not docs:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    counts: Counter[str] = Counter()
    for d in docs:
        counts.update(tokenize(d) if isinstance(d, str) else d)
    for r in RESERVED:
        counts.pop(r, None)
    kept = sorted((t for t, c in counts.items() if c >= min_frequency), key=lambda t: (-counts[t], t))
    return TokenVocabulary(RESERVED + tuple(kept), min_frequency)
