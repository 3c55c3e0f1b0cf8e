"""Canonical representation of code snippets as depth-first AST traversals.

A snippet is an ordered sequence of (node type, node value) pairs obtained by
pre-order traversal of a serialized AST. Two on-disk encodings are accepted:

* ``ast-json``: one rooted tree per line, as a JSON array of node objects
  ``{"type": str, "value": str?, "children": [int]?}`` with children given
  by index (the py150 family layout). A trailing integer ``0`` sentinel,
  present in some published dumps, is tolerated and ignored.
* ``token-jsonl``: one flattened snippet per line,
  ``{"id", "repo", "path", "nodes": [[type, value-or-null], ...]}``.

Flattening is lossy for tree shape, so snippets parsed from ``ast-json``
additionally carry per-node subtree sizes (pre-order slice extents). That
field is in-memory only: it is not serialized and does not participate in
equality.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import ParseError, StructuralError

log = logging.getLogger(__name__)

FORMAT_AST_JSON = "ast-json"
FORMAT_TOKEN_JSONL = "token-jsonl"


@dataclass(frozen=True)
class Node:
    """One (node type, node value) pair; value is absent for structural nodes."""

    node_type: str
    node_value: str | None = None

    def __post_init__(self):
        if not self.node_type:
            raise ValueError("node_type must be nonempty")
        if self.node_value is not None and not self.node_value:
            raise ValueError("node_value, when present, must be nonempty")


@dataclass(frozen=True)
class Snippet:
    """A traversal with provenance. ``subtree_sizes[i]`` is the pre-order
    extent of the subtree rooted at node i (only known for tree-parsed input)."""

    id: str
    repository: str
    path: str
    nodes: tuple[Node, ...]
    subtree_sizes: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("snippet must contain at least one node")
        if self.subtree_sizes is not None and len(self.subtree_sizes) != len(self.nodes):
            raise ValueError("subtree_sizes length must match nodes")

    def values(self) -> Iterator[str]:
        """Present node values, in sequence order."""
        return (n.node_value for n in self.nodes if n.node_value is not None)


@dataclass(frozen=True)
class Corpus:
    snippets: tuple[Snippet, ...]
    provenance: str = ""

    def __post_init__(self):
        ids = [s.id for s in self.snippets]
        if len(set(ids)) != len(ids):
            seen, dup = set(), None
            for i in ids:
                if i in seen:
                    dup = i
                    break
                seen.add(i)
            raise ValueError(f"duplicate snippet id: {dup!r}")

    def __len__(self) -> int:
        return len(self.snippets)

    def __iter__(self) -> Iterator[Snippet]:
        return iter(self.snippets)


def parse_ast_record(record: str, snippet_id: str = "", repository: str = "",
                     path: str = "") -> Snippet:
    """Parse one ast-json line into its pre-order depth-first traversal."""
    try:
        raw = json.loads(record)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON at column {e.colno}: {e.msg}") from e
    if not isinstance(raw, list):
        raise ParseError("record must be a JSON array of node objects")
    if raw and raw[-1] == 0:  # trailing sentinel used by some dataset dumps
        raw = raw[:-1]
    if not raw:
        raise StructuralError("record contains no nodes")

    for i, obj in enumerate(raw):
        if not isinstance(obj, dict) or "type" not in obj:
            raise ParseError(f"node {i} is not an object with a 'type' field")

    order: list[int] = []
    state = [0] * len(raw)  # 0 unvisited, 1 on stack path, 2 done
    sizes = [0] * len(raw)
    # iterative pre-order with explicit post-visit frames for subtree sizes
    stack: list[tuple[int, bool]] = [(0, False)]
    while stack:
        idx, done = stack.pop()
        if done:
            state[idx] = 2
            sizes[idx] = 1 + sum(sizes[c] for c in _children(raw, idx))
            continue
        if not isinstance(idx, int) or idx < 0 or idx >= len(raw):
            raise StructuralError(f"child index {idx} out of range")
        if state[idx] == 1:
            raise StructuralError(f"cycle detected through node {idx}")
        if state[idx] == 2:
            raise StructuralError(f"node {idx} has multiple parents")
        state[idx] = 1
        order.append(idx)
        stack.append((idx, True))
        for child in reversed(_children(raw, idx)):
            stack.append((child, False))

    if len(order) != len(raw):
        missing = next(i for i in range(len(raw)) if state[i] == 0)
        raise StructuralError(f"node {missing} unreachable from root")

    nodes = []
    for idx in order:
        value = raw[idx].get("value")
        if value is not None and not isinstance(value, str):
            value = str(value)
        try:
            nodes.append(Node(str(raw[idx]["type"]), value if value else None))
        except ValueError as e:
            raise ParseError(f"node {idx}: {e}") from e
    return Snippet(
        id=snippet_id,
        repository=repository,
        path=path,
        nodes=tuple(nodes),
        subtree_sizes=tuple(sizes[idx] for idx in order),
    )


def _children(raw: list, idx: int) -> list[int]:
    children = raw[idx].get("children", [])
    if not isinstance(children, list):
        raise ParseError(f"node {idx} has a non-list 'children' field")
    for c in children:
        if not isinstance(c, int):
            raise ParseError(f"node {idx} has a non-integer child index")
    return children


def parse_token_record(record: str, fallback_id: str = "") -> Snippet:
    """Parse one token-jsonl line."""
    try:
        raw = json.loads(record)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON at column {e.colno}: {e.msg}") from e
    if not isinstance(raw, dict) or "nodes" not in raw:
        raise ParseError("record must be an object with a 'nodes' field")
    nodes = []
    try:
        for pair in raw["nodes"]:
            if not isinstance(pair, list) or len(pair) != 2:
                raise ParseError(f"node entry {pair!r} is not a [type, value] pair")
            t, v = pair
            nodes.append(Node(str(t), str(v) if v is not None else None))
        return Snippet(
            id=str(raw.get("id") or fallback_id),
            repository=str(raw.get("repo", "")),
            path=str(raw.get("path", "")),
            nodes=tuple(nodes),
        )
    except ValueError as e:
        raise ParseError(str(e)) from e


def repo_from_path(file_path: str) -> str:
    """Repository name from a dataset file path: first two components,
    skipping a leading ``data/`` prefix when present."""
    parts = [p for p in file_path.strip().split("/") if p]
    if parts and parts[0] == "data":
        parts = parts[1:]
    if not parts:
        return ""
    return "/".join(parts[:2]) if len(parts) >= 2 else parts[0]


def iter_corpus_lines(path: str, format: str, on_error: str = "raise",
                      paths: list[str] | None = None) -> Iterator[tuple[int, str, Snippet]]:
    """Yield (line_number, raw_line, snippet) for each parseable line.

    ``on_error='skip'`` logs and drops bad lines instead of raising. For
    ast-json input, ``paths`` optionally supplies per-line file paths (the
    usual sidecar listing) from which repository names are derived.
    """
    if format not in (FORMAT_AST_JSON, FORMAT_TOKEN_JSONL):
        raise ValueError(f"unknown corpus format: {format!r}")
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            raw = line.rstrip("\n")
            if not raw.strip():
                continue
            fallback = f"{path}:{lineno}"
            try:
                if format == FORMAT_AST_JSON:
                    src = ""
                    if paths is not None:
                        if lineno > len(paths):
                            raise ParseError("paths file has fewer lines than the corpus")
                        src = paths[lineno - 1]
                    snippet = parse_ast_record(
                        raw, snippet_id=fallback,
                        repository=repo_from_path(src), path=src or str(path),
                    )
                else:
                    snippet = parse_token_record(raw, fallback_id=fallback)
            except (ParseError, StructuralError) as e:
                if on_error == "skip":
                    log.warning("%s:%d: skipped (%s)", path, lineno, e)
                    continue
                raise type(e)(f"{path}:{lineno}: {e}") from e
            yield lineno, raw, snippet


def read_corpus(path: str, format: str = FORMAT_TOKEN_JSONL, on_error: str = "raise",
                paths_file: str | None = None) -> Corpus:
    paths = None
    if paths_file:
        with open(paths_file, encoding="utf-8") as f:
            paths = [ln.rstrip("\n") for ln in f]
    snippets = [s for _, _, s in iter_corpus_lines(path, format, on_error, paths)]
    return Corpus(snippets=tuple(snippets), provenance=f"{path} [{format}]")


def snippet_to_json(snippet: Snippet) -> str:
    obj = {
        "id": snippet.id,
        "repo": snippet.repository,
        "path": snippet.path,
        "nodes": [[n.node_type, n.node_value] for n in snippet.nodes],
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_corpus(corpus: Corpus | Iterable[Snippet], path: str) -> None:
    """Write token-jsonl; read_corpus(write_corpus(c)) reproduces c exactly."""
    with open(path, "w", encoding="utf-8") as f:
        for snippet in corpus:
            f.write(snippet_to_json(snippet))
            f.write("\n")
