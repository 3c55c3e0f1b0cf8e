"""Readers for the exported jsonl formats and tensor batch assembly."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import torch

from .vocab_ids import PAD_ID, TypeTable, ValueTable


def read_jsonl(path: str) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(json.loads(line))
    return out


def read_token_corpus(path: str) -> list[dict]:
    """token-jsonl: {"id", "repo", "path", "nodes"}. Treated downstream as
    single chunks with everything scored."""
    return [{"sid": r["id"], "off": 0, "loss_start": 0, "nodes": r["nodes"]}
            for r in read_jsonl(path)]


def read_chunks(path: str) -> list[dict]:
    """completion-chunk-jsonl: {"sid", "off", "loss_start", "nodes"}."""
    return read_jsonl(path)


def read_varmisuse(path: str) -> list[dict]:
    """varmisuse-jsonl: {"fid", "nodes", "buggy", "bug_pos", "repair_pos", "orig"}."""
    return read_jsonl(path)


def collect_types(*datasets: list[dict]) -> TypeTable:
    types: set[str] = set()
    for records in datasets:
        for r in records:
            types.update(t for t, _ in r["nodes"])
    return TypeTable(types)


@dataclass
class CompletionBatch:
    """Shifted next-node batch: position i holds input node i and targets
    node i+1; loss_mask selects targets inside the chunk's scored region."""

    types: torch.Tensor          # [B, L] int
    values: torch.Tensor         # [B, L] int
    target_types: torch.Tensor   # [B, L] int
    target_values: torch.Tensor  # [B, L] int
    loss_mask: torch.Tensor      # [B, L] bool
    copy_match: torch.Tensor     # [B, L, L] bool; [i, j] = value(n_{i+1}) == value(n_j)
    meta: list[dict]             # per-row {"sid", "off", "positions": [abs 1-based]}


def completion_batch(chunks: list[dict], types: TypeTable, values: ValueTable,
                     max_len: int, with_copy: bool = False) -> CompletionBatch:
    rows = len(chunks)
    width = min(max(len(c["nodes"]) for c in chunks) - 1, max_len)
    width = max(width, 1)
    t = np.zeros((rows, width), dtype=np.int64)
    v = np.zeros((rows, width), dtype=np.int64)
    tt = np.zeros((rows, width), dtype=np.int64)
    tv = np.zeros((rows, width), dtype=np.int64)
    mask = np.zeros((rows, width), dtype=bool)
    match = np.zeros((rows, width, width), dtype=bool) if with_copy else None
    meta = []
    for b, c in enumerate(chunks):
        nodes = c["nodes"][: width + 1]
        n_in = len(nodes) - 1
        first_scored = max(c["loss_start"], 1)
        positions = []
        raw_values = [val for _, val in nodes]
        for i in range(n_in):
            t[b, i] = types.encode(nodes[i][0])
            v[b, i] = values.encode(nodes[i][1])
            tt[b, i] = types.encode(nodes[i + 1][0])
            tv[b, i] = values.encode(nodes[i + 1][1])
            if i + 1 >= first_scored:
                mask[b, i] = True
                positions.append(c["off"] + i + 2)  # 1-based position of node i+1
        if with_copy:
            for i in range(n_in):
                target = raw_values[i + 1]
                if target is None:
                    continue
                for j in range(i + 1):
                    if raw_values[j] == target:
                        match[b, i, j] = True
        meta.append({"sid": c["sid"], "off": c["off"], "positions": positions})
    return CompletionBatch(
        types=torch.from_numpy(t), values=torch.from_numpy(v),
        target_types=torch.from_numpy(tt), target_values=torch.from_numpy(tv),
        loss_mask=torch.from_numpy(mask),
        copy_match=torch.from_numpy(match) if with_copy else torch.zeros(0),
        meta=meta,
    )


@dataclass
class VarMisuseBatch:
    types: torch.Tensor        # [B, L] int
    values: torch.Tensor       # [B, L] int
    pad_mask: torch.Tensor     # [B, L] bool, True on real nodes
    bug_target: torch.Tensor   # [B] int, 0 = no-bug slot
    repair_mask: torch.Tensor  # [B, L+1] bool over slot+positions
    is_buggy: torch.Tensor     # [B] bool
    example_ids: list[str]


def varmisuse_batch(examples: list[dict], types: TypeTable, values: ValueTable,
                    max_len: int) -> VarMisuseBatch:
    rows = len(examples)
    width = min(max(len(e["nodes"]) for e in examples), max_len)
    t = np.zeros((rows, width), dtype=np.int64)
    v = np.zeros((rows, width), dtype=np.int64)
    pad = np.zeros((rows, width), dtype=bool)
    bug = np.zeros(rows, dtype=np.int64)
    repair = np.zeros((rows, width + 1), dtype=bool)
    buggy = np.zeros(rows, dtype=bool)
    ids = []
    for b, e in enumerate(examples):
        if len(e["nodes"]) > width:
            raise ValueError(f"example {e['fid']} longer than seq_len {max_len}")
        for i, (nt, nv) in enumerate(e["nodes"]):
            t[b, i] = types.encode(nt)
            v[b, i] = values.encode(nv)
            pad[b, i] = True
        bug[b] = e["bug_pos"]
        buggy[b] = e["buggy"]
        for r in e["repair_pos"]:
            repair[b, r] = True
        ids.append(e["fid"])
    return VarMisuseBatch(
        types=torch.from_numpy(t), values=torch.from_numpy(v),
        pad_mask=torch.from_numpy(pad), bug_target=torch.from_numpy(bug),
        repair_mask=torch.from_numpy(repair), is_buggy=torch.from_numpy(buggy),
        example_ids=ids,
    )


def batches_of(records: list, size: int):
    for start in range(0, len(records), size):
        yield records[start:start + size]


__all__ = [
    "CompletionBatch", "VarMisuseBatch", "completion_batch", "varmisuse_batch",
    "read_jsonl", "read_token_corpus", "read_chunks", "read_varmisuse",
    "collect_types", "batches_of", "PAD_ID",
]
