"""Desk-scale Transformer harness over the codeanon dataset formats."""

from .configs import (
    ModelConfig,
    fullscale_completion,
    fullscale_varmisuse,
    toy_completion,
    toy_varmisuse,
)
from .model import CompletionModel, VarMisuseModel
from .pointer import GenSwitch, gen_switch, pointer_mixture
from .vocab_ids import TypeTable, ValueTable

__all__ = [
    "ModelConfig", "fullscale_completion", "fullscale_varmisuse", "toy_completion",
    "toy_varmisuse", "CompletionModel", "VarMisuseModel", "GenSwitch",
    "gen_switch", "pointer_mixture", "TypeTable", "ValueTable",
]
