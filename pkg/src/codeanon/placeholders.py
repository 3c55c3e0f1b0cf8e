"""Placeholder naming and the escape rule that keeps it collision-free.

Placeholders are ``var1``, ``var2``, ... ``var<M>`` (lowercase, no padding).
Corpus values that already look like a placeholder, or like an escaped one,
get one ``_orig`` suffix appended before any vocabulary or anonymization
processing and have it stripped again on de-anonymization. The rule is
applied to every ``var<k>`` regardless of budget so that vocabulary
construction and anonymization can never disagree about the escape set;
chaining (``var3_orig`` -> ``var3_orig_orig``) keeps it injective even when
a corpus already contains escaped-looking names.
"""

from __future__ import annotations

import re

UNK = "UNK"
PAD = "PAD"
EOS = "EOS"
SPECIAL_TOKENS = (UNK, PAD, EOS)

_PLACEHOLDER_RE = re.compile(r"var([1-9][0-9]*)\Z")
_ESCAPABLE_RE = re.compile(r"var[1-9][0-9]*(_orig)*\Z")
_ESCAPED_RE = re.compile(r"var[1-9][0-9]*(_orig)+\Z")


def placeholder_name(index: int) -> str:
    if index < 1:
        raise ValueError(f"placeholder index must be >= 1, got {index}")
    return f"var{index}"


def parse_placeholder(value: str) -> int | None:
    """Placeholder index for a bare ``var<k>`` value, else None."""
    m = _PLACEHOLDER_RE.match(value)
    return int(m.group(1)) if m else None


def escape_value(value: str) -> str:
    if _ESCAPABLE_RE.match(value):
        return value + "_orig"
    return value


def unescape_value(value: str) -> str:
    if _ESCAPED_RE.match(value):
        return value[: -len("_orig")]
    return value
