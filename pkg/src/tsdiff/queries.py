"""Labeled natural-language query generation.

Queries describe how the target series differs from the reference series.
Instead of calling an external paraphrasing service, a small production
grammar (frames x subjects x comparatives x characteristic synonyms x
intensifiers) enumerates unique sentences per label. The synonym tables are
disjoint across characteristics and directions, so every generated sentence
decodes back to exactly one label; decode_query is the proof of that.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .perturb import Characteristic, PerturbLevel, label_of, label_to_characteristic_level


@dataclass(frozen=True)
class QueryText:
    text: str
    label: int
    query_id: str

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"{self.query_id}: empty query text")
        if not 1 <= self.label <= 12:
            raise ValueError(f"{self.query_id}: label {self.label} outside 1..12")


@dataclass(frozen=True)
class BoundDataset:
    items: list  # list[tuple[PairSample, QueryText]]
    split: str

    def __post_init__(self):
        for pair, query in self.items:
            if pair.label != query.label:
                raise ValueError(f"{pair.pair_id} bound to off-label query {query.query_id}")


_CANONICAL_PHRASE = {
    Characteristic.UPWARD_TREND: "upward trend",
    Characteristic.DOWNWARD_TREND: "downward trend",
    Characteristic.SPIKE: "spike",
    Characteristic.DROPOUT: "dropout",
    Characteristic.NOISE: "noise",
    Characteristic.BASELINE: "baseline",
}

# Synonym phrases per characteristic. Phrase sets are pairwise disjoint and no
# phrase occurs inside the grammar's frame text, which is what makes
# decode_query well defined. countable=False switches to mass-noun phrasing.
_NOUNS: dict[Characteristic, tuple[bool, tuple[str, ...]]] = {
    Characteristic.UPWARD_TREND: (True, ("upward trend", "rising trend", "trend of increase", "upward drift")),
    Characteristic.DOWNWARD_TREND: (True, ("downward trend", "falling trend", "trend of decrease", "downward drift")),
    Characteristic.SPIKE: (True, ("spike", "surge", "sudden peak")),
    Characteristic.DROPOUT: (True, ("dropout", "sudden drop", "dip")),
    Characteristic.NOISE: (False, ("noise", "distortion", "random fluctuation", "jitter")),
    Characteristic.BASELINE: (True, ("baseline", "baseline offset", "baseline shift")),
}

_COMPARATIVES = {
    PerturbLevel.LARGER: ("larger", "greater", "higher", "stronger", "more pronounced"),
    PerturbLevel.SMALLER: ("smaller", "lower", "weaker", "less pronounced", "milder"),
}

_INTENSIFIERS = ("", "significantly", "noticeably", "slightly", "considerably", "somewhat")

_SUBJECTS = ("data", "series", "signal", "dataset", "sequence")

_VERBS = ("has", "shows", "contains", "exhibits", "displays")


def instantiate_template(characteristic: Characteristic, direction: PerturbLevel) -> str:
    """The base sentence every paraphrase preserves the meaning of."""
    word = "larger" if direction is PerturbLevel.LARGER else "smaller"
    return f"The target data has {word} {_CANONICAL_PHRASE[characteristic]} than the reference data."


def _comparative_phrases(level: PerturbLevel) -> list[str]:
    out = []
    for cmp_word in _COMPARATIVES[level]:
        for adv in _INTENSIFIERS:
            out.append(f"{adv} {cmp_word}".strip())
    return out


def _noun_phrases(characteristic: Characteristic, cmp_phrase: str) -> list[str]:
    countable, nouns = _NOUNS[characteristic]
    out = []
    for noun in nouns:
        if countable:
            article = "an" if cmp_phrase[0] in "aeiou" else "a"
            out.append(f"{article} {cmp_phrase} {noun}")
        else:
            out.append(f"{cmp_phrase} {noun}")
            out.append(f"a {cmp_phrase} degree of {noun}")
            out.append(f"a {cmp_phrase} level of {noun}")
    return out


def enumerate_label_strings(label: int) -> list[str]:
    """All sentences the grammar can produce for one label, in a fixed order."""
    characteristic, level = label_to_characteristic_level(label)
    _, nouns = _NOUNS[characteristic]
    out = []
    for subject in _SUBJECTS:
        tgt = f"the target {subject}"
        ref = f"the reference {subject}"
        for cmp_phrase in _comparative_phrases(level):
            for np_ in _noun_phrases(characteristic, cmp_phrase):
                for verb in _VERBS:
                    out.append(f"{tgt} {verb} {np_} than {ref}.")
                    out.append(f"compared to {ref}, {tgt} {verb} {np_}.")
                    out.append(f"relative to {ref}, {tgt} {verb} {np_}.")
            for noun in nouns:
                out.append(f"the {noun} present in {tgt} is {cmp_phrase} than in {ref}.")
                out.append(f"the {noun} in {tgt} is {cmp_phrase} compared with {ref}.")
    return [s[0].upper() + s[1:] for s in out]


def grammar_capacity(label: int) -> int:
    return len(enumerate_label_strings(label))


def paraphrase_pool(label: int, count: int, rng: np.random.Generator) -> list[QueryText]:
    """Draw `count` distinct sentences for the label, seeded order."""
    universe = enumerate_label_strings(label)
    if count > len(universe):
        raise ValueError(f"label {label}: requested {count} queries, grammar capacity is {len(universe)}")
    picked = rng.permutation(len(universe))[:count]
    return [QueryText(text=universe[j], label=label, query_id=f"q{label:02d}-{i:05d}") for i, j in enumerate(picked)]


def _phrase_pattern(phrases: tuple[str, ...]) -> re.Pattern:
    ordered = sorted(phrases, key=len, reverse=True)
    return re.compile(r"\b(?:" + "|".join(re.escape(p) for p in ordered) + r")\b")


_NOUN_PATTERNS = {c: _phrase_pattern(nouns) for c, (_, nouns) in _NOUNS.items()}
_CMP_PATTERNS = {lvl: _phrase_pattern(words) for lvl, words in _COMPARATIVES.items()}


def decode_query(text: str) -> tuple[Characteristic, PerturbLevel]:
    """Recover (characteristic, target level) from a generated sentence.

    Raises if zero or multiple characteristics (or directions) match, so a
    successful decode certifies the sentence is unambiguous under the grammar.
    """
    lowered = text.lower()
    chars = [c for c, pat in _NOUN_PATTERNS.items() if pat.search(lowered)]
    if Characteristic.UPWARD_TREND in chars and Characteristic.DOWNWARD_TREND in chars:
        raise ValueError(f"ambiguous characteristic in {text!r}")
    if len(chars) != 1:
        raise ValueError(f"expected one characteristic mention in {text!r}, found {len(chars)}")
    # "more pronounced"/"less pronounced" share a word, so test full phrases.
    levels = [lvl for lvl, pat in _CMP_PATTERNS.items() if pat.search(lowered)]
    if len(levels) != 1:
        raise ValueError(f"expected one direction mention in {text!r}, found {len(levels)}")
    return chars[0], levels[0]


def label_of_text(text: str) -> int:
    return label_of(*decode_query(text))


def split_queries(pool: list[QueryText], rng: np.random.Generator) -> tuple[list[QueryText], list[QueryText]]:
    """Per-label 90/10 train/test split, disjoint, order seeded."""
    by_label: dict[int, list[QueryText]] = {}
    for q in pool:
        by_label.setdefault(q.label, []).append(q)
    train: list[QueryText] = []
    test: list[QueryText] = []
    for label in sorted(by_label):
        group = by_label[label]
        order = rng.permutation(len(group))
        n_test = len(group) // 10
        test.extend(group[j] for j in order[:n_test])
        train.extend(group[j] for j in order[n_test:])
    return train, test


def bind_queries(pairs, queries: list[QueryText], rng: np.random.Generator, split: str = "train") -> BoundDataset:
    """Attach a uniformly drawn same-label query to every pair."""
    by_label: dict[int, list[QueryText]] = {}
    for q in queries:
        by_label.setdefault(q.label, []).append(q)
    items = []
    for pair in pairs:
        group = by_label.get(pair.label)
        if not group:
            raise ValueError(f"{pair.pair_id}: no queries available for label {pair.label}")
        items.append((pair, group[int(rng.integers(0, len(group)))]))
    return BoundDataset(items=items, split=split)
