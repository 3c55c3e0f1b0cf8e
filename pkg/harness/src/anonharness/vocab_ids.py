"""Token tables over the exported vocabulary file.

Value ids follow the fixed layout of the vocabulary file's contract:
0=PAD, 1=UNK, 2=EOS, 3..3+M-1 = placeholders var1..varM, then file entries
in order. Types are never cropped; their table is built from the training
data (sorted), with PAD at id 0.
"""

from __future__ import annotations

import re

PAD, UNK, EOS = "PAD", "UNK", "EOS"
PAD_ID, UNK_ID, EOS_ID = 0, 1, 2

_PLACEHOLDER = re.compile(r"var([1-9][0-9]*)\Z")


class ValueTable:
    def __init__(self, entries: list[str], placeholder_budget: int):
        self.placeholder_budget = placeholder_budget
        self.entries = list(entries)
        self.id_of = {PAD: PAD_ID, UNK: UNK_ID, EOS: EOS_ID}
        for k in range(1, placeholder_budget + 1):
            self.id_of[f"var{k}"] = 2 + k
        base = 3 + placeholder_budget
        for i, value in enumerate(self.entries):
            self.id_of[value] = base + i
        self.token_of = [None] * self.size
        for token, idx in self.id_of.items():
            self.token_of[idx] = token

    @classmethod
    def from_vocab_file(cls, path: str, placeholder_budget: int) -> "ValueTable":
        entries = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if line:
                    entries.append(line.rpartition("\t")[0])
        return cls(entries, placeholder_budget)

    @property
    def size(self) -> int:
        return 3 + self.placeholder_budget + len(self.entries)

    def encode(self, value: str | None) -> int:
        if value is None:
            return PAD_ID
        got = self.id_of.get(value)
        if got is not None:
            return got
        m = _PLACEHOLDER.match(value)
        if m:  # placeholder beyond our budget: the dataset was built with a larger M
            raise ValueError(
                f"placeholder {value!r} exceeds the configured budget "
                f"{self.placeholder_budget}")
        return UNK_ID

    def decode(self, idx: int) -> str:
        return self.token_of[idx]


class TypeTable:
    def __init__(self, types: set[str]):
        self.types = [PAD] + sorted(types)
        self.id_of = {t: i for i, t in enumerate(self.types)}

    @property
    def size(self) -> int:
        return len(self.types)

    def encode(self, node_type: str) -> int:
        got = self.id_of.get(node_type)
        if got is None:
            raise ValueError(f"node type {node_type!r} not in the training table")
        return got
