"""Model and training configuration.

The "toy" presets are the test targets; the "full-scale" presets keep the
full-size hyperparameters (6 layers, 512/384 width, 50K/100K value vocab,
Adam 1e-5/1e-4, batch 32, 20 epochs, relative-attention distance 32) for
runs on real hardware and are not exercised by the test suite.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass


@dataclass
class ModelConfig:
    task: str = "completion"            # completion | varmisuse
    layers: int = 2
    heads: int = 2
    model_width: int = 64
    ffn_width: int = 128
    rel_max_distance: int = 32
    dropout: float = 0.0
    placeholder_budget: int = 64
    vocab_size: int = 0                 # vocabulary entries (without specials/placeholders)
    seq_len: int = 128
    pointer_enabled: bool = False
    learning_rate: float = 1e-3
    warmup_steps: int = 0
    cosine_schedule: bool = False
    grad_clip: float = 0.2
    batch_size: int = 32
    steps: int = 1000
    epochs: int = 0       # when > 0, overrides steps as epochs * ceil(n / batch)
    seed: int = 0

    def __post_init__(self):
        if self.model_width % self.heads:
            raise ValueError("model_width must be divisible by heads")
        if self.task not in ("completion", "varmisuse"):
            raise ValueError(f"unknown task {self.task!r}")

    def to_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(dataclasses.asdict(self), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def from_json(cls, path: str) -> "ModelConfig":
        with open(path, encoding="utf-8") as f:
            return cls(**json.load(f))


def toy_completion(**overrides) -> ModelConfig:
    return ModelConfig(task="completion", **overrides)


def toy_varmisuse(**overrides) -> ModelConfig:
    overrides.setdefault("seq_len", 256)
    return ModelConfig(task="varmisuse", **overrides)


def fullscale_completion(**overrides) -> ModelConfig:
    base = dict(task="completion", layers=6, heads=6, model_width=384,
                ffn_width=1536, dropout=0.1, placeholder_budget=500,
                vocab_size=100_000, seq_len=500, learning_rate=1e-4,
                warmup_steps=2000, cosine_schedule=True, grad_clip=0.2,
                batch_size=32, epochs=20)
    base.update(overrides)
    return ModelConfig(**base)


def fullscale_varmisuse(**overrides) -> ModelConfig:
    base = dict(task="varmisuse", layers=6, heads=8, model_width=512,
                ffn_width=2048, dropout=0.2, placeholder_budget=1000,
                vocab_size=50_000, seq_len=250, learning_rate=1e-5,
                batch_size=32, epochs=20)
    base.update(overrides)
    return ModelConfig(**base)
