"""Frequency-cropped vocabularies over node values.

Only node values are cropped; node types pass through downstream modules
untouched. Entries are stored in escaped form (see ``placeholders``), so a
vocabulary can never contain a name that collides with ``var1..varM`` or a
special token. Membership of a raw corpus value is therefore tested after
escaping it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .corpus import Corpus
from .placeholders import SPECIAL_TOKENS, escape_value


@dataclass(frozen=True)
class Vocabulary:
    """Top-N node values with their corpus frequencies, descending."""

    entries: tuple[tuple[str, int], ...]
    size_limit: int
    special_tokens: tuple[str, ...] = SPECIAL_TOKENS
    _entry_set: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.entries) > self.size_limit:
            raise ValueError("entries exceed size_limit")
        for (_, a), (_, b) in zip(self.entries, self.entries[1:]):
            if a < b:
                raise ValueError("entry frequencies must be nonincreasing")
        object.__setattr__(self, "_entry_set", frozenset(v for v, _ in self.entries))
        if self._entry_set & set(self.special_tokens):
            raise ValueError("special tokens may not appear among entries")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, escaped_value: str) -> bool:
        return escaped_value in self._entry_set

    def covers(self, raw_value: str) -> bool:
        """Membership test for a raw (unescaped) corpus value."""
        return escape_value(raw_value) in self._entry_set


EMPTY_VOCABULARY = Vocabulary(entries=(), size_limit=0)


def count_values(corpus: Corpus) -> Counter[str]:
    """Occurrence counts of every present node value (raw, unescaped)."""
    counts: Counter[str] = Counter()
    for snippet in corpus:
        counts.update(snippet.values())
    return counts


def build_vocabulary(freq: Counter[str] | dict[str, int], n: int) -> Vocabulary:
    """Top-n values by frequency; ties broken lexicographically by value.

    Keys are escaped and special-token collisions dropped, so the result
    never overlaps the placeholder or special-token namespaces. n=0 yields
    the empty vocabulary (the full-anonymization regime).
    """
    if n < 0:
        raise ValueError("vocabulary size must be >= 0")
    escaped = ((escape_value(v), c) for v, c in freq.items() if v not in SPECIAL_TOKENS)
    ranked = sorted(escaped, key=lambda item: (-item[1], item[0]))
    return Vocabulary(entries=tuple(ranked[:n]), size_limit=n)


def crop(vocab: Vocabulary, n: int) -> Vocabulary:
    """Shrink to the top-n entries. Entries are already escaped and ranked,
    so re-cropping a stored vocabulary never re-escapes them."""
    if n < 0:
        raise ValueError("vocabulary size must be >= 0")
    return Vocabulary(entries=vocab.entries[:n], size_limit=n)


def coverage(vocab: Vocabulary, corpus: Corpus) -> float:
    """Fraction of the corpus's unique values present in the vocabulary;
    1.0 for a corpus with no values at all."""
    unique: set[str] = set()
    for snippet in corpus:
        unique.update(snippet.values())
    if not unique:
        return 1.0
    return sum(1 for v in unique if vocab.covers(v)) / len(unique)


def write_vocabulary(vocab: Vocabulary, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for value, count in vocab.entries:
            f.write(f"{value}\t{count}\n")


def read_vocabulary(path: str, size_limit: int | None = None) -> Vocabulary:
    entries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            value, sep, count = line.rpartition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'value<TAB>frequency'")
            entries.append((value, int(count)))
    return Vocabulary(entries=tuple(entries),
                      size_limit=len(entries) if size_limit is None else size_limit)


def token_id_layout(vocab: Vocabulary, placeholder_budget: int) -> dict[str, int]:
    """Fixed integer id layout consumed by model harnesses:
    0=PAD, 1=UNK, 2=EOS, 3..3+M-1 = var1..varM, then entries in file order."""
    from .placeholders import EOS, PAD, UNK, placeholder_name

    ids = {PAD: 0, UNK: 1, EOS: 2}
    for k in range(1, placeholder_budget + 1):
        ids[placeholder_name(k)] = 2 + k
    base = 3 + placeholder_budget
    for i, (value, _) in enumerate(vocab.entries):
        ids[value] = base + i
    return ids
