"""Pointer mixture over the extended vocabulary and the generation switch.

The next-value distribution mixes the fixed-vocabulary softmax with a copy
distribution over input positions:

    p(a) = p_gen * p_model(a) + (1 - p_gen) * sum_{j: x_j = a} p_copy(j)

and the switch is a sigmoid over the decoder state and the current input
embedding:

    p_gen(x, h) = sigmoid(w_h . h + w_i . x + b)
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import torch
from torch import nn

SUM_TOLERANCE = 1e-6


def pointer_mixture(p_model: np.ndarray, vocab_tokens: Sequence[str],
                    p_copy: np.ndarray, p_gen: float,
                    values_at_positions: Sequence[str]) -> dict[str, float]:
    """Extended-vocabulary distribution as a token -> probability map.

    Both inputs must be normalized within 1e-6; the output is normalized to
    the same tolerance by construction.
    """
    p_model = np.asarray(p_model, dtype=np.float64)
    p_copy = np.asarray(p_copy, dtype=np.float64)
    if len(p_model) != len(vocab_tokens):
        raise ValueError("p_model and vocab_tokens disagree on vocabulary size")
    if len(p_copy) != len(values_at_positions):
        raise ValueError("p_copy and values_at_positions disagree on length")
    if abs(p_model.sum() - 1.0) > SUM_TOLERANCE:
        raise ValueError(f"p_model sums to {p_model.sum()!r}, not 1")
    if abs(p_copy.sum() - 1.0) > SUM_TOLERANCE:
        raise ValueError(f"p_copy sums to {p_copy.sum()!r}, not 1")
    if not 0.0 <= p_gen <= 1.0:
        raise ValueError(f"p_gen outside [0, 1]: {p_gen}")
    out: dict[str, float] = {}
    for token, p in zip(vocab_tokens, p_model):
        out[token] = out.get(token, 0.0) + p_gen * float(p)
    for value, p in zip(values_at_positions, p_copy):
        out[value] = out.get(value, 0.0) + (1.0 - p_gen) * float(p)
    return out


def gen_switch(w_h: np.ndarray, w_i: np.ndarray, b: float,
               h: np.ndarray, x: np.ndarray) -> float:
    """Scalar reference implementation of the switch probability."""
    w_h, w_i = np.asarray(w_h, dtype=np.float64), np.asarray(w_i, dtype=np.float64)
    h, x = np.asarray(h, dtype=np.float64), np.asarray(x, dtype=np.float64)
    if w_h.shape != h.shape or w_i.shape != x.shape:
        raise ValueError("weight/input dimension mismatch")
    z = float(w_h @ h + w_i @ x + b)
    return 1.0 / (1.0 + np.exp(-z))


class GenSwitch(nn.Module):
    """p_gen head over (decoder state, input embedding) pairs."""

    def __init__(self, width: int):
        super().__init__()
        self.w_h = nn.Parameter(torch.zeros(width))
        self.w_i = nn.Parameter(torch.zeros(width))
        self.b = nn.Parameter(torch.zeros(()))

    def forward(self, h: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
        """h, x: [..., width] -> p_gen [...]."""
        return torch.sigmoid((h * self.w_h).sum(-1) + (x * self.w_i).sum(-1) + self.b)
