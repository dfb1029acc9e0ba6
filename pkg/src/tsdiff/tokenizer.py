"""Word-level tokenization for query texts.

The vocabulary is built from the training query pool, which the generation
grammar keeps finite. Ids 0..2 are reserved: a sequence-summary token
prepended to every sentence, an unknown-word id, and padding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

SUM_ID = 0
UNK_ID = 1
PAD_ID = 2
SPECIALS = ("<sum>", "<unk>", "<pad>")

_NON_WORD = re.compile(r"[^a-z0-9]+")


def normalize_words(text: str) -> list[str]:
    """Lowercase, punctuation to spaces, whitespace split."""
    return [w for w in _NON_WORD.split(text.lower()) if w]


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]
    _ids: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if tuple(self.tokens[:3]) != SPECIALS:
            raise ValueError("vocabulary must start with the reserved tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        object.__setattr__(self, "_ids", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, word: str) -> int:
        return self._ids.get(word, UNK_ID)


def build_vocab(texts: list[str]) -> Vocab:
    words = set()
    for text in texts:
        words.update(normalize_words(text))
    return Vocab(tokens=SPECIALS + tuple(sorted(words)))


def tokenize(text: str, vocab: Vocab) -> list[int]:
    """Summary id followed by per-word ids (unknowns map to UNK_ID)."""
    return [SUM_ID] + [vocab.id_of(w) for w in normalize_words(text)]
