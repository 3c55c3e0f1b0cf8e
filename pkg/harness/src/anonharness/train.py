"""Training loops, prediction writers, and the regime-comparison experiment."""

from __future__ import annotations

import json
import logging
import math

import numpy as np
import torch

from .configs import ModelConfig
from .data import (
    batches_of,
    collect_types,
    completion_batch,
    varmisuse_batch,
)
from .model import CompletionModel, VarMisuseModel
from .vocab_ids import PAD_ID, UNK_ID, TypeTable, ValueTable

log = logging.getLogger(__name__)


def seed_everything(seed: int) -> np.random.Generator:
    torch.manual_seed(seed)
    return np.random.default_rng(seed)


def make_optimizer(model: torch.nn.Module, config: ModelConfig, total_steps: int):
    opt = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    def lr_at(step: int) -> float:
        if config.warmup_steps and step < config.warmup_steps:
            return (step + 1) / config.warmup_steps
        if not config.cosine_schedule:
            return 1.0
        span = max(total_steps - config.warmup_steps, 1)
        progress = min((step - config.warmup_steps) / span, 1.0)
        return 0.5 * (1.0 + math.cos(math.pi * progress))

    return opt, torch.optim.lr_scheduler.LambdaLR(opt, lr_at)


def total_steps_for(config: ModelConfig, n_records: int) -> int:
    if config.epochs:
        return config.epochs * math.ceil(n_records / config.batch_size)
    return config.steps


def _train(model, config: ModelConfig, records: list, make_batch) -> list[float]:
    rng = seed_everything(config.seed)
    steps = total_steps_for(config, len(records))
    opt, sched = make_optimizer(model, config, steps)
    order = np.arange(len(records))
    losses: list[float] = []
    model.train()
    cursor = len(order)  # force an initial shuffle
    for _ in range(steps):
        if cursor + config.batch_size > len(order):
            rng.shuffle(order)
            cursor = 0
        take = order[cursor:cursor + config.batch_size]
        cursor += config.batch_size
        batch = make_batch([records[i] for i in take])
        loss = model.loss(batch)
        if not torch.isfinite(loss):
            raise RuntimeError(f"non-finite loss at step {len(losses)}: {loss}")
        opt.zero_grad()
        loss.backward()
        if config.grad_clip:
            torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
        opt.step()
        sched.step()
        losses.append(float(loss.detach()))
    return losses


def train_completion(config: ModelConfig, chunks: list[dict],
                     types: TypeTable, values: ValueTable
                     ) -> tuple[CompletionModel, list[float]]:
    seed_everything(config.seed)
    model = CompletionModel(config, types.size, values.size)

    def make_batch(rows):
        return completion_batch(rows, types, values, config.seq_len,
                                with_copy=config.pointer_enabled)

    losses = _train(model, config, chunks, make_batch)
    return model, losses


def train_varmisuse(config: ModelConfig, examples: list[dict],
                    types: TypeTable, values: ValueTable
                    ) -> tuple[VarMisuseModel, list[float]]:
    seed_everything(config.seed)
    model = VarMisuseModel(config, types.size, values.size)

    def make_batch(rows):
        return varmisuse_batch(rows, types, values, config.seq_len)

    losses = _train(model, config, examples, make_batch)
    return model, losses


@torch.no_grad()
def next_value_accuracy(model: CompletionModel, chunks: list[dict],
                        types: TypeTable, values: ValueTable,
                        batch_size: int = 32) -> float:
    """Top-1 accuracy over valued positions; a position whose true value is
    UNK scores zero, mirroring the MRR rule for the UNK baseline."""
    model.eval()
    hits = total = 0
    for rows in batches_of(chunks, batch_size):
        batch = completion_batch(rows, types, values, model.config.seq_len)
        out = model.forward(batch.types, batch.values)
        pred = out["value_logits"].argmax(-1)
        scored = batch.loss_mask & (batch.target_values != PAD_ID)
        correct = scored & (pred == batch.target_values) & \
            (batch.target_values != UNK_ID)
        hits += int(correct.sum())
        total += int(scored.sum())
    return hits / total if total else 0.0


@torch.no_grad()
def write_completion_predictions(model: CompletionModel, chunks: list[dict],
                                 types: TypeTable, values: ValueTable,
                                 path: str, top_k: int = 10,
                                 batch_size: int = 32) -> int:
    """Top-k candidate values per scored position, in the predictions-jsonl
    shape {"sid", "pos", "cands"} with snippet-absolute 1-based positions."""
    model.eval()
    written = 0
    with open(path, "w", encoding="utf-8") as f:
        for rows in batches_of(chunks, batch_size):
            batch = completion_batch(rows, types, values, model.config.seq_len)
            out = model.forward(batch.types, batch.values)
            ranked = out["value_logits"].topk(top_k, dim=-1).indices
            for b, info in enumerate(batch.meta):
                scored = [i for i in range(batch.loss_mask.shape[1])
                          if batch.loss_mask[b, i]]
                for pos, i in zip(info["positions"], scored):
                    cands = [values.decode(int(c)) for c in ranked[b, i]]
                    f.write(json.dumps({"sid": info["sid"], "pos": pos,
                                        "cands": cands}) + "\n")
                    written += 1
    return written


@torch.no_grad()
def write_varmisuse_predictions(model: VarMisuseModel, examples: list[dict],
                                types: TypeTable, values: ValueTable,
                                path: str, batch_size: int = 32) -> int:
    model.eval()
    written = 0
    with open(path, "w", encoding="utf-8") as f:
        for rows in batches_of(examples, batch_size):
            batch = varmisuse_batch(rows, types, values, model.config.seq_len)
            for eid, bug, fix in model.predict(batch):
                f.write(json.dumps({"eid": eid, "bug": bug, "fix": fix}) + "\n")
                written += 1
    return written


def save_checkpoint(model, config: ModelConfig, types: TypeTable,
                    values_entries: list[str], path: str) -> None:
    torch.save({"state_dict": model.state_dict(),
                "config": config.__dict__,
                "types": types.types[1:],
                "vocab_entries": values_entries}, path)


def compare_regimes(train_sets: dict[str, list[dict]],
                    eval_sets: dict[str, list[dict]],
                    values_tables: dict[str, ValueTable],
                    config: ModelConfig) -> dict[str, float]:
    """Train one completion model per regime on its own preprocessed data and
    report next-value accuracy; identical architecture, steps, and seed."""
    types = collect_types(*train_sets.values(), *eval_sets.values())
    scores = {}
    for regime, chunks in train_sets.items():
        values = values_tables[regime]
        model, losses = train_completion(config, chunks, types, values)
        acc = next_value_accuracy(model, eval_sets[regime], types, values)
        log.info("regime %s: final loss %.3f, next-value accuracy %.3f",
                 regime, losses[-1], acc)
        scores[regime] = acc
    return scores
