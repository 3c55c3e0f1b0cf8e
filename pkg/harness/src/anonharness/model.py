"""Toy Transformer with clipped relative attention and the two task heads.

Completion uses a causal decoder predicting next node type and value (summed
cross-entropy), optionally extended with a copy pointer. Variable misuse uses
the same backbone without the causal mask, a learned no-bug slot prepended at
position 0, and two position-wise heads softmaxed over positions.
"""

from __future__ import annotations

import math

import torch
from torch import nn
from torch.nn import functional as F

from .configs import ModelConfig
from .pointer import GenSwitch
from .vocab_ids import PAD_ID


class RelativeSelfAttention(nn.Module):
    """Multi-head attention with learned, distance-clipped relative key biases:
    logits[i,j] = (q_i . k_j + q_i . rel[clip(j - i)]) / sqrt(d_head)."""

    def __init__(self, width: int, heads: int, max_distance: int, dropout: float):
        super().__init__()
        self.heads = heads
        self.d_head = width // heads
        self.max_distance = max_distance
        self.qkv = nn.Linear(width, 3 * width)
        self.out = nn.Linear(width, width)
        self.rel_key = nn.Embedding(2 * max_distance + 1, self.d_head)
        self.drop = nn.Dropout(dropout)

    def relative_ids(self, length: int, device) -> torch.Tensor:
        pos = torch.arange(length, device=device)
        dist = pos[None, :] - pos[:, None]
        return dist.clamp(-self.max_distance, self.max_distance) + self.max_distance

    def forward(self, x: torch.Tensor, causal: bool,
                pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        bsz, length, width = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        shape = (bsz, length, self.heads, self.d_head)
        q = q.view(shape).transpose(1, 2)  # [B, H, L, d]
        k = k.view(shape).transpose(1, 2)
        v = v.view(shape).transpose(1, 2)

        logits = q @ k.transpose(-2, -1)
        rel = self.rel_key(self.relative_ids(length, x.device))      # [L, L, d]
        logits = logits + torch.einsum("bhid,ijd->bhij", q, rel)
        logits = logits / math.sqrt(self.d_head)

        if causal:
            future = torch.triu(torch.ones(length, length, dtype=torch.bool,
                                           device=x.device), diagonal=1)
            logits = logits.masked_fill(future, float("-inf"))
        if pad_mask is not None:
            logits = logits.masked_fill(~pad_mask[:, None, None, :], float("-inf"))
        attn = self.drop(torch.softmax(logits, dim=-1))
        mixed = (attn @ v).transpose(1, 2).reshape(bsz, length, width)
        return self.out(mixed)


class Block(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.norm1 = nn.LayerNorm(config.model_width)
        self.attn = RelativeSelfAttention(config.model_width, config.heads,
                                          config.rel_max_distance, config.dropout)
        self.norm2 = nn.LayerNorm(config.model_width)
        self.ffn = nn.Sequential(
            nn.Linear(config.model_width, config.ffn_width), nn.GELU(),
            nn.Linear(config.ffn_width, config.model_width))
        self.drop = nn.Dropout(config.dropout)

    def forward(self, x, causal, pad_mask=None):
        x = x + self.drop(self.attn(self.norm1(x), causal, pad_mask))
        return x + self.drop(self.ffn(self.norm2(x)))


class Backbone(nn.Module):
    def __init__(self, config: ModelConfig, n_types: int, n_values: int):
        super().__init__()
        self.type_emb = nn.Embedding(n_types, config.model_width)
        self.value_emb = nn.Embedding(n_values, config.model_width)
        self.blocks = nn.ModuleList(Block(config) for _ in range(config.layers))
        self.norm = nn.LayerNorm(config.model_width)

    def embed(self, types, values):
        return self.type_emb(types) + self.value_emb(values)

    def encode(self, x, causal, pad_mask=None):
        for block in self.blocks:
            x = block(x, causal, pad_mask)
        return self.norm(x)


class CompletionModel(nn.Module):
    """Next type/value heads; the value head is tied to the value embedding."""

    def __init__(self, config: ModelConfig, n_types: int, n_values: int):
        super().__init__()
        self.config = config
        self.backbone = Backbone(config, n_types, n_values)
        self.type_head = nn.Linear(config.model_width, n_types)
        self.value_head = nn.Linear(config.model_width, n_values, bias=False)
        self.value_head.weight = self.backbone.value_emb.weight
        if config.pointer_enabled:
            self.copy_q = nn.Linear(config.model_width, config.model_width)
            self.copy_k = nn.Linear(config.model_width, config.model_width)
            self.switch = GenSwitch(config.model_width)

    def forward(self, types, values):
        x = self.backbone.embed(types, values)
        h = self.backbone.encode(x, causal=True)
        # tied head: rescale keeps initial logits O(1) despite LayerNorm-sized h
        scale = 1.0 / math.sqrt(h.shape[-1])
        out = {"h": h, "x": x,
               "type_logits": self.type_head(h),
               "value_logits": self.value_head(h) * scale}
        if self.config.pointer_enabled:
            length = h.shape[1]
            scores = self.copy_q(h) @ self.copy_k(h).transpose(-2, -1)
            scores = scores / math.sqrt(h.shape[-1])
            future = torch.triu(torch.ones(length, length, dtype=torch.bool,
                                           device=h.device), diagonal=1)
            scores = scores.masked_fill(future, float("-inf"))
            out["p_copy"] = torch.softmax(scores, dim=-1)     # [B, L, L], over j <= i
            out["p_gen"] = self.switch(h, x)                  # [B, L]
        return out

    def loss(self, batch) -> torch.Tensor:
        out = self.forward(batch.types, batch.values)
        mask = batch.loss_mask
        if not mask.any():
            raise ValueError("batch has no scored positions")
        type_nll = F.cross_entropy(
            out["type_logits"].transpose(1, 2), batch.target_types, reduction="none")
        if self.config.pointer_enabled:
            value_nll = self._pointer_nll(out, batch)
        else:
            value_nll = F.cross_entropy(
                out["value_logits"].transpose(1, 2), batch.target_values,
                reduction="none")
        per_pos = (type_nll + value_nll) * mask
        return per_pos.sum() / mask.sum()

    def _pointer_nll(self, out, batch) -> torch.Tensor:
        """-log of the extended-vocabulary probability of the true value; the
        copy mass sums over every earlier position holding that value."""
        p_model = torch.softmax(out["value_logits"], dim=-1)
        p_true_model = p_model.gather(-1, batch.target_values[..., None]).squeeze(-1)
        p_true_copy = (out["p_copy"] * batch.copy_match).sum(-1)
        p_gen = out["p_gen"]
        p_true = p_gen * p_true_model + (1.0 - p_gen) * p_true_copy
        return -torch.log(p_true.clamp_min(1e-9))


class VarMisuseModel(nn.Module):
    """Two position-wise pointer heads over [no-bug slot] + positions."""

    def __init__(self, config: ModelConfig, n_types: int, n_values: int):
        super().__init__()
        self.config = config
        self.backbone = Backbone(config, n_types, n_values)
        self.slot = nn.Parameter(torch.zeros(config.model_width))
        self.loc_head = nn.Sequential(
            nn.Linear(config.model_width, config.model_width), nn.GELU(),
            nn.Linear(config.model_width, 1))
        self.repair_head = nn.Sequential(
            nn.Linear(config.model_width, config.model_width), nn.GELU(),
            nn.Linear(config.model_width, 1))

    def forward(self, types, values, pad_mask):
        bsz = types.shape[0]
        x = self.backbone.embed(types, values)
        slot = self.slot.expand(bsz, 1, -1)
        x = torch.cat([slot, x], dim=1)                       # [B, L+1, d]
        full_mask = torch.cat([torch.ones(bsz, 1, dtype=torch.bool,
                                          device=types.device), pad_mask], dim=1)
        h = self.backbone.encode(x, causal=False, pad_mask=full_mask)
        neg_inf = float("-inf")
        loc_logits = self.loc_head(h).squeeze(-1).masked_fill(~full_mask, neg_inf)
        repair_logits = self.repair_head(h).squeeze(-1).masked_fill(~full_mask, neg_inf)
        repair_logits[:, 0] = neg_inf                         # slot is never a repair
        return loc_logits, repair_logits

    def loss(self, batch) -> torch.Tensor:
        loc_logits, repair_logits = self.forward(batch.types, batch.values,
                                                 batch.pad_mask)
        loc_nll = F.cross_entropy(loc_logits, batch.bug_target, reduction="none")
        # repair: any position holding the original value is correct, so the
        # loss rewards the total probability mass over all of them
        p_repair = torch.softmax(repair_logits, dim=-1)
        mass = (p_repair * batch.repair_mask).sum(-1)
        repair_nll = -torch.log(mass.clamp_min(1e-9)) * batch.is_buggy
        return (loc_nll + repair_nll).mean()

    @torch.no_grad()
    def predict(self, batch) -> list[tuple[str, int, int]]:
        loc_logits, repair_logits = self.forward(batch.types, batch.values,
                                                 batch.pad_mask)
        bug = loc_logits.argmax(-1)
        fix = repair_logits.argmax(-1)
        return [(eid, int(b), int(f))
                for eid, b, f in zip(batch.example_ids, bug, fix)]
