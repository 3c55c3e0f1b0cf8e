"""Construction of the two task datasets.

Code completion: snippets are cut into overlapping windows of at most
``max_len`` nodes; within every window after the first, positions before
``loss_start`` are context only, so each snippet position is scored exactly
once across its windows.

Variable misuse: eligible functions receive synthetic bugs by overwriting
one variable occurrence with a different variable from the same function.
Pointer positions in examples and on disk are 1-based; position 0 is the
reserved no-bug slot.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass

from .anonymize import (
    DEFAULT_PLACEHOLDER_BUDGET,
    Regime,
    anonymize_all,
    anonymize_oov,
    replace_unk,
)
from .corpus import Corpus, Node, Snippet
from .errors import InjectionError, SplitError, StructuralError
from .rng import SplitMix64, derive_seed
from .vocab import Vocabulary, token_id_layout

log = logging.getLogger(__name__)

NO_BUG = 0

DEFAULT_MAX_CHUNK_LEN = 500
DEFAULT_CHUNK_STRIDE = 250

DEFAULT_VARIABLE_NODE_TYPES = frozenset({"NameLoad", "NameStore", "NameParam"})
FUNCTION_NODE_TYPES = frozenset({"FunctionDef", "AsyncFunctionDef"})

MAX_FUNCTION_NODES = 250
MIN_VARIABLE_POSITIONS = 3
MIN_DISTINCT_VARIABLES = 3


@dataclass(frozen=True)
class CompletionChunk:
    """One completion window; positions before loss_start are context only."""

    snippet_id: str
    nodes: tuple[Node, ...]
    start_offset: int
    loss_start: int

    def __post_init__(self):
        if not 0 <= self.loss_start < len(self.nodes):
            raise ValueError("loss_start must satisfy 0 <= loss_start < len(nodes)")
        if self.start_offset < 0:
            raise ValueError("start_offset must be >= 0")

    def scored_positions(self) -> range:
        """1-based positions that this chunk scores."""
        return range(self.loss_start + 1, len(self.nodes) + 1)


@dataclass(frozen=True)
class VarMisuseExample:
    """A function with an injected wrong-variable bug, or a clean copy.

    ``bug_location`` and ``repair_positions`` are 1-based node positions;
    0 means no bug. Any position holding the original value counts as a
    valid repair target.
    """

    function_id: str
    nodes: tuple[Node, ...]
    is_buggy: bool
    bug_location: int
    repair_positions: frozenset[int]
    original_value: str

    def __post_init__(self):
        if self.is_buggy:
            if not 1 <= self.bug_location <= len(self.nodes):
                raise ValueError("buggy example needs a bug_location in [1, len(nodes)]")
            if not self.repair_positions:
                raise ValueError("buggy example needs at least one repair position")
            if not self.original_value:
                raise ValueError("buggy example needs the overwritten value")
            for pos in self.repair_positions:
                if not 1 <= pos <= len(self.nodes) or pos == self.bug_location:
                    raise ValueError(f"repair position {pos} out of range")
                if self.nodes[pos - 1].node_value != self.original_value:
                    raise ValueError(f"repair position {pos} does not hold the original value")
        else:
            if self.bug_location != NO_BUG or self.repair_positions or self.original_value:
                raise ValueError("non-buggy example must have no bug metadata")


@dataclass(frozen=True)
class PointerTarget:
    """Supervision for one scored completion position: the value's vocabulary
    id (None when OOV) and every earlier in-chunk position holding it."""

    position: int
    vocab_id: int | None
    copy_positions: frozenset[int]

    def __post_init__(self):
        for j in self.copy_positions:
            if not 1 <= j < self.position:
                raise ValueError("copy positions must precede the target position")


def dedup(corpus: Corpus) -> Corpus:
    """Drop exact duplicate token sequences, keeping first occurrences."""
    seen: set[tuple] = set()
    kept = []
    for snippet in corpus:
        key = tuple((n.node_type, n.node_value) for n in snippet.nodes)
        if key in seen:
            continue
        seen.add(key)
        kept.append(snippet)
    removed = len(corpus) - len(kept)
    if removed:
        log.info("dedup removed %d of %d snippets", removed, len(corpus))
    return Corpus(snippets=tuple(kept), provenance=corpus.provenance)


def split_by_repository(corpus: Corpus, test_fraction: float,
                        seed: int) -> tuple[Corpus, Corpus]:
    """Partition whole repositories: a seeded shuffle of the repository list
    is greedily assigned to the test side until its snippet share reaches
    test_fraction. No repository ever lands on both sides."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    counts = Counter(s.repository for s in corpus)
    repos = list(counts)
    if len(repos) < 2:
        raise SplitError("cannot split a corpus with fewer than two repositories")
    SplitMix64(derive_seed(seed, "repo-split")).shuffle(repos)

    total = len(corpus)
    test_repos: set[str] = set()
    assigned = 0
    for repo in repos:
        if assigned / total >= test_fraction:
            break
        test_repos.add(repo)
        assigned += counts[repo]
    if len(test_repos) == len(repos):
        raise SplitError(
            f"test fraction {test_fraction} consumes every repository; nothing left to train on"
        )
    train = tuple(s for s in corpus if s.repository not in test_repos)
    test = tuple(s for s in corpus if s.repository in test_repos)
    return (Corpus(train, provenance=f"{corpus.provenance} [train]"),
            Corpus(test, provenance=f"{corpus.provenance} [test]"))


def chunk(snippet: Snippet, max_len: int = DEFAULT_MAX_CHUNK_LEN,
          stride: int = DEFAULT_CHUNK_STRIDE) -> list[CompletionChunk]:
    """Overlapping windows; every snippet position is scored exactly once."""
    if not 0 < stride <= max_len:
        raise ValueError("stride must satisfy 0 < stride <= max_len")
    total = len(snippet.nodes)
    chunks = [CompletionChunk(snippet_id=snippet.id, nodes=snippet.nodes[:max_len],
                              start_offset=0, loss_start=0)]
    offset = stride
    while offset + (max_len - stride) < total:
        chunks.append(CompletionChunk(
            snippet_id=snippet.id,
            nodes=snippet.nodes[offset:offset + max_len],
            start_offset=offset,
            loss_start=max_len - stride,
        ))
        offset += stride
    return chunks


def extract_functions(corpus: Corpus,
                      variable_node_types: frozenset[str] = DEFAULT_VARIABLE_NODE_TYPES,
                      ) -> list[Snippet]:
    """Outermost function subtrees (module level and inside classes, but not
    nested in other functions) passing the size and variable-diversity
    filters. Requires tree-parsed input for subtree extents."""
    functions = []
    for snippet in corpus:
        if snippet.subtree_sizes is None:
            raise StructuralError(
                f"snippet {snippet.id!r} lacks tree structure; "
                "function extraction needs ast-json input"
            )
        i = 0
        while i < len(snippet.nodes):
            if snippet.nodes[i].node_type in FUNCTION_NODE_TYPES:
                size = snippet.subtree_sizes[i]
                fn = Snippet(
                    id=f"{snippet.id}#f{i}",
                    repository=snippet.repository,
                    path=snippet.path,
                    nodes=snippet.nodes[i:i + size],
                    subtree_sizes=snippet.subtree_sizes[i:i + size],
                )
                if _passes_function_filters(fn, variable_node_types):
                    functions.append(fn)
                i += size
            else:
                i += 1
    return functions


def _variable_positions(nodes: tuple[Node, ...],
                        variable_node_types: frozenset[str]) -> list[int]:
    return [i for i, n in enumerate(nodes)
            if n.node_type in variable_node_types and n.node_value is not None]


def _passes_function_filters(fn: Snippet, variable_node_types: frozenset[str]) -> bool:
    if len(fn.nodes) > MAX_FUNCTION_NODES:
        return False
    positions = _variable_positions(fn.nodes, variable_node_types)
    if len(positions) < MIN_VARIABLE_POSITIONS:
        return False
    distinct = {fn.nodes[i].node_value for i in positions}
    return len(distinct) >= MIN_DISTINCT_VARIABLES


def inject_bug(function: Snippet,
               variable_node_types: frozenset[str] = DEFAULT_VARIABLE_NODE_TYPES,
               seed: int = 0) -> VarMisuseExample:
    """Overwrite one variable position with a different variable's value.

    The pair (bug position, wrong-value source) is drawn uniformly over all
    eligible pairs: both are variable positions with different values, and
    the overwritten value must survive somewhere else in the function so the
    bug stays repairable.
    """
    nodes = function.nodes
    var_positions = _variable_positions(nodes, variable_node_types)
    value_occurrences = Counter(function.values())

    eligible = [
        (p, q)
        for p in var_positions
        if value_occurrences[nodes[p].node_value] >= 2
        for q in var_positions
        if nodes[q].node_value != nodes[p].node_value
    ]
    if not eligible:
        raise InjectionError(
            f"function {function.id!r} has no repairable bug/fix position pair"
        )
    p, q = eligible[SplitMix64(seed).randrange(len(eligible))]

    original = nodes[p].node_value
    wrong = nodes[q].node_value
    assert original is not None and wrong is not None and original != wrong
    mutated = list(nodes)
    mutated[p] = Node(nodes[p].node_type, wrong)
    repair = frozenset(
        i + 1 for i, n in enumerate(nodes) if i != p and n.node_value == original
    )
    return VarMisuseExample(
        function_id=function.id,
        nodes=tuple(mutated),
        is_buggy=True,
        bug_location=p + 1,
        repair_positions=repair,
        original_value=original,
    )


def make_varmisuse_dataset(functions: list[Snippet],
                           variable_node_types: frozenset[str] = DEFAULT_VARIABLE_NODE_TYPES,
                           copies_buggy: int = 3, copies_clean: int = 3,
                           seed: int = 0) -> list[VarMisuseExample]:
    """Up to copies_buggy distinct buggy copies plus copies_clean clean copies
    per function, shuffled. Colliding bug draws are deduplicated, so a
    function can yield fewer buggy copies than requested."""
    examples: list[VarMisuseExample] = []
    for fn in functions:
        drawn: list[VarMisuseExample] = []
        seen_bugs: set[tuple[int, str | None]] = set()
        for i in range(copies_buggy):
            try:
                ex = inject_bug(fn, variable_node_types, derive_seed(seed, fn.id, "bug", i))
            except InjectionError:
                log.info("function %s: no repairable bug pair; emitting clean copies only", fn.id)
                break
            bug_key = (ex.bug_location, ex.nodes[ex.bug_location - 1].node_value)
            if bug_key in seen_bugs:
                continue
            seen_bugs.add(bug_key)
            drawn.append(ex)
        for j, ex in enumerate(drawn):
            examples.append(VarMisuseExample(
                function_id=f"{fn.id}#b{j}", nodes=ex.nodes, is_buggy=True,
                bug_location=ex.bug_location, repair_positions=ex.repair_positions,
                original_value=ex.original_value,
            ))
        for j in range(copies_clean):
            examples.append(VarMisuseExample(
                function_id=f"{fn.id}#c{j}", nodes=fn.nodes, is_buggy=False,
                bug_location=NO_BUG, repair_positions=frozenset(), original_value="",
            ))
    SplitMix64(derive_seed(seed, "varmisuse-shuffle")).shuffle(examples)
    return examples


def apply_regime_to_example(example: VarMisuseExample, regime: Regime | None,
                            vocab: Vocabulary, budget: int = DEFAULT_PLACEHOLDER_BUDGET,
                            seed: int | str = 0) -> VarMisuseExample:
    """Rewrite an example's values under an identifier regime.

    Regimes are per-value maps, so repair positions still hold the (rewritten)
    original value afterwards. Under unk the bug value and the original may
    both collapse to UNK.
    """
    if regime is None:
        return example
    carrier = Snippet(id=example.function_id, repository="", path="", nodes=example.nodes)
    if regime is Regime.OOV_ANON:
        rewritten = anonymize_oov(carrier, vocab, budget, seed).snippet
    elif regime is Regime.FULL_ANON:
        rewritten = anonymize_all(carrier, budget, seed).snippet
    elif regime is Regime.UNK_REPLACE:
        rewritten = replace_unk(carrier, vocab, budget).snippet
    else:
        raise ValueError(f"unknown regime: {regime!r}")
    original = ""
    if example.is_buggy:
        first_repair = min(example.repair_positions)
        original = rewritten.nodes[first_repair - 1].node_value or ""
    return VarMisuseExample(
        function_id=example.function_id,
        nodes=rewritten.nodes,
        is_buggy=example.is_buggy,
        bug_location=example.bug_location,
        repair_positions=example.repair_positions,
        original_value=original,
    )


def pointer_targets(completion_chunk: CompletionChunk, vocab: Vocabulary,
                    placeholder_budget: int = DEFAULT_PLACEHOLDER_BUDGET,
                    layout: dict[str, int] | None = None) -> list[PointerTarget]:
    """Per scored position: vocabulary id (None when OOV, PAD for valueless
    nodes) and all earlier in-chunk positions holding the same value.

    Chunk values are interpreted in the post-regime space: a bare ``var<k>``
    is a placeholder. Feed regime-processed corpora through this step.
    """
    if layout is None:
        layout = token_id_layout(vocab, placeholder_budget)
    earlier: dict[str, list[int]] = {}
    targets = []
    for idx, node in enumerate(completion_chunk.nodes):
        pos = idx + 1
        value = node.node_value
        if idx >= completion_chunk.loss_start:
            if value is None:
                vocab_id: int | None = layout["PAD"]
                copies: frozenset[int] = frozenset()
            else:
                vocab_id = layout.get(value)
                copies = frozenset(earlier.get(value, ()))
            targets.append(PointerTarget(position=pos, vocab_id=vocab_id,
                                         copy_positions=copies))
        if value is not None:
            earlier.setdefault(value, []).append(pos)
    return targets


# --- on-disk encodings ----------------------------------------------------

def chunk_to_json(c: CompletionChunk) -> str:
    obj = {"sid": c.snippet_id, "off": c.start_offset, "loss_start": c.loss_start,
           "nodes": [[n.node_type, n.node_value] for n in c.nodes]}
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def chunk_from_json(line: str) -> CompletionChunk:
    obj = json.loads(line)
    return CompletionChunk(
        snippet_id=obj["sid"],
        nodes=tuple(Node(t, v) for t, v in obj["nodes"]),
        start_offset=obj["off"],
        loss_start=obj["loss_start"],
    )


def varmisuse_to_json(ex: VarMisuseExample) -> str:
    obj = {"fid": ex.function_id,
           "nodes": [[n.node_type, n.node_value] for n in ex.nodes],
           "buggy": ex.is_buggy, "bug_pos": ex.bug_location,
           "repair_pos": sorted(ex.repair_positions), "orig": ex.original_value}
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def varmisuse_from_json(line: str) -> VarMisuseExample:
    obj = json.loads(line)
    return VarMisuseExample(
        function_id=obj["fid"],
        nodes=tuple(Node(t, v) for t, v in obj["nodes"]),
        is_buggy=obj["buggy"],
        bug_location=obj["bug_pos"],
        repair_positions=frozenset(obj["repair_pos"]),
        original_value=obj["orig"],
    )


def pointer_target_to_json(snippet_id: str, start_offset: int, t: PointerTarget) -> str:
    obj = {"sid": snippet_id, "off": start_offset, "pos": t.position,
           "vocab_id": t.vocab_id, "copy": sorted(t.copy_positions)}
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))
