"""The three identifier-handling regimes and exact de-anonymization.

* ``oov-anon``: every out-of-vocabulary value is rewritten to a placeholder
  ``var<k>``; all occurrences of one value share one placeholder, distinct
  values get distinct placeholders, and in-vocabulary values keep their
  names. Placeholder indices are a random injection into [1..M] so all M
  placeholders see roughly equal training frequency; DETERMINISTIC mode
  assigns 1, 2, ... in first-occurrence order instead.
* ``full-anon``: the same rule under an empty vocabulary, so every value is
  anonymized.
* ``unk``: every OOV value collapses to the single UNK token. This regime is
  lossy (it destroys which positions held equal values) and cannot be
  inverted.

In-vocabulary values pass through in escaped form (see ``placeholders``), so
the output value space never aliases a placeholder name; de-anonymization
undoes both the map and the escaping, reproducing the input field-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .corpus import Node, Snippet
from .errors import CapacityError, CorruptionError, NotInvertibleError
from .placeholders import (
    UNK,
    escape_value,
    parse_placeholder,
    placeholder_name,
    unescape_value,
)
from .rng import SplitMix64
from .vocab import EMPTY_VOCABULARY, Vocabulary

DEFAULT_PLACEHOLDER_BUDGET = 1000
CHUNK_PLACEHOLDER_BUDGET = 500

DETERMINISTIC = "DETERMINISTIC"


class Regime(str, Enum):
    OOV_ANON = "oov-anon"
    FULL_ANON = "full-anon"
    UNK_REPLACE = "unk"


@dataclass(frozen=True)
class AnonymizationMap:
    """Injection from unique OOV values to placeholder indices, ordered by
    first occurrence in the snippet."""

    pairs: tuple[tuple[str, int], ...]
    placeholder_budget: int

    def __post_init__(self):
        originals = [v for v, _ in self.pairs]
        indices = [i for _, i in self.pairs]
        if len(set(originals)) != len(originals):
            raise ValueError("original values must be pairwise distinct")
        if len(set(indices)) != len(indices):
            raise ValueError("placeholder indices must be pairwise distinct")
        for _, i in self.pairs:
            if not 1 <= i <= self.placeholder_budget:
                raise ValueError(f"placeholder index {i} outside [1, {self.placeholder_budget}]")

    def by_index(self) -> dict[int, str]:
        return {i: v for v, i in self.pairs}


@dataclass(frozen=True)
class AnonymizedSnippet:
    snippet: Snippet
    map: AnonymizationMap
    regime: Regime


def collect_oov(snippet: Snippet, vocab: Vocabulary) -> list[str]:
    """Unique out-of-vocabulary values in first-occurrence order."""
    seen: set[str] = set()
    out: list[str] = []
    for value in snippet.values():
        if value in seen:
            continue
        seen.add(value)
        if not vocab.covers(value):
            out.append(value)
    return out


def sample_injection(k: int, budget: int, seed: int | str) -> list[int]:
    """k distinct placeholder indices in [1..budget].

    Seeded mode draws the first k entries of a uniform permutation
    (partial Fisher-Yates over SplitMix64); DETERMINISTIC mode returns
    [1, 2, ..., k].
    """
    if k > budget:
        raise CapacityError(
            f"snippet has {k} unique OOV values but the placeholder budget is {budget}"
        )
    if seed == DETERMINISTIC:
        return list(range(1, k + 1))
    return SplitMix64(int(seed)).partial_permutation(k, budget)


def _rewrite(snippet: Snippet, mapping: dict[str, str]) -> Snippet:
    nodes = tuple(
        Node(n.node_type, mapping.get(n.node_value, n.node_value))
        if n.node_value is not None else n
        for n in snippet.nodes
    )
    return Snippet(id=snippet.id, repository=snippet.repository, path=snippet.path,
                   nodes=nodes, subtree_sizes=snippet.subtree_sizes)


def anonymize_oov(snippet: Snippet, vocab: Vocabulary,
                  budget: int = DEFAULT_PLACEHOLDER_BUDGET,
                  seed: int | str = DETERMINISTIC,
                  regime: Regime = Regime.OOV_ANON) -> AnonymizedSnippet:
    """Rewrite every OOV value to its placeholder; keep in-vocabulary values
    (escaped) and all node types; record the injection."""
    oov = collect_oov(snippet, vocab)
    indices = sample_injection(len(oov), budget, seed)
    mapping = {v: placeholder_name(i) for v, i in zip(oov, indices)}
    for value in set(snippet.values()):
        if value not in mapping:
            mapping[value] = escape_value(value)
    return AnonymizedSnippet(
        snippet=_rewrite(snippet, mapping),
        map=AnonymizationMap(pairs=tuple(zip(oov, indices)), placeholder_budget=budget),
        regime=regime,
    )


def anonymize_all(snippet: Snippet, budget: int = DEFAULT_PLACEHOLDER_BUDGET,
                  seed: int | str = DETERMINISTIC) -> AnonymizedSnippet:
    """Zero-vocabulary regime: every value is anonymized."""
    return anonymize_oov(snippet, EMPTY_VOCABULARY, budget, seed, regime=Regime.FULL_ANON)


def replace_unk(snippet: Snippet, vocab: Vocabulary,
                budget: int = DEFAULT_PLACEHOLDER_BUDGET) -> AnonymizedSnippet:
    """Collapse every OOV value to the UNK token (lossy baseline regime)."""
    mapping = {
        value: escape_value(value) if vocab.covers(value) else UNK
        for value in set(snippet.values())
    }
    return AnonymizedSnippet(
        snippet=_rewrite(snippet, mapping),
        map=AnonymizationMap(pairs=(), placeholder_budget=budget),
        regime=Regime.UNK_REPLACE,
    )


def deanonymize(anon: AnonymizedSnippet) -> Snippet:
    """Invert the map and the escape rule; exact inverse of anonymize_oov
    and anonymize_all. UNK replacement is lossy and rejected."""
    if anon.regime is Regime.UNK_REPLACE:
        raise NotInvertibleError("unk regime collapses distinct values; cannot invert")
    originals = anon.map.by_index()

    def restore(value: str) -> str:
        index = parse_placeholder(value)
        if index is not None and index <= anon.map.placeholder_budget:
            if index not in originals:
                raise CorruptionError(f"placeholder var{index} is absent from the map")
            return originals[index]
        return unescape_value(value)

    snippet = anon.snippet
    nodes = tuple(
        Node(n.node_type, restore(n.node_value)) if n.node_value is not None else n
        for n in snippet.nodes
    )
    return Snippet(id=snippet.id, repository=snippet.repository, path=snippet.path,
                   nodes=nodes, subtree_sizes=snippet.subtree_sizes)
