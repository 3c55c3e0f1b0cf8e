"""Evaluation metrics for code completion and variable misuse.

Completion is scored with mean reciprocal rank: each position contributes
1/rank of the true value in the model's ranking, zero when the truth is not
in the top k (k=10 by default), and optionally zero whenever the truth is
the UNK token, since predicting UNK says nothing about the real identifier.

Variable misuse is scored over buggy examples: localization requires the
exact bug position, repair accepts any position holding the original value,
and the joint metric requires both. Non-buggy examples are tallied
separately (no-bug slot predicted) and kept out of the headline accuracies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .dataset import NO_BUG, VarMisuseExample
from .errors import EvalError
from .placeholders import UNK


@dataclass(frozen=True)
class RankedPrediction:
    position: int
    candidates: tuple[str, ...]

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("a ranked prediction needs at least one candidate")
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError("candidates must be pairwise distinct")


@dataclass(frozen=True)
class VarMisusePrediction:
    example_id: str
    predicted_bug_pos: int
    predicted_repair_pos: int


@dataclass(frozen=True)
class MetricsReport:
    mrr: float | None = None
    localization_accuracy: float | None = None
    repair_accuracy: float | None = None
    joint_accuracy: float | None = None
    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("mrr", "localization_accuracy", "repair_accuracy", "joint_accuracy"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} outside [0, 1]: {v}")
        if self.joint_accuracy is not None:
            bound = min(x for x in (self.localization_accuracy, self.repair_accuracy)
                        if x is not None)
            if self.joint_accuracy > bound + 1e-12:
                raise ValueError("joint accuracy cannot exceed localization or repair")

    def to_dict(self) -> dict:
        out: dict = {}
        for name in ("mrr", "localization_accuracy", "repair_accuracy", "joint_accuracy"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        out["counts"] = dict(sorted(self.counts.items()))
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def table(self) -> str:
        rows = [(k, f"{getattr(self, k):.4f}")
                for k in ("mrr", "localization_accuracy", "repair_accuracy", "joint_accuracy")
                if getattr(self, k) is not None]
        rows += [(k, str(v)) for k, v in sorted(self.counts.items())]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def mrr_at_k(predictions: list[RankedPrediction], truths: list[str],
             k: int | None = 10, unk_scores_zero: bool = False) -> float:
    """Mean reciprocal rank with a top-k cutoff.

    k=None disables the cutoff (classical MRR). With unk_scores_zero, a
    position whose true token is UNK scores zero regardless of rank.
    """
    if len(predictions) != len(truths):
        raise EvalError(f"{len(predictions)} predictions vs {len(truths)} truths")
    if not predictions:
        raise EvalError("nothing to score")
    cutoff = math.inf if k is None else k
    total = 0.0
    for pred, truth in zip(predictions, truths):
        if unk_scores_zero and truth == UNK:
            continue
        for rank, candidate in enumerate(pred.candidates, start=1):
            if rank > cutoff:
                break
            if candidate == truth:
                total += 1.0 / rank
                break
    return total / len(predictions)


def varmisuse_scores(predictions: list[VarMisusePrediction],
                     examples: list[VarMisuseExample]) -> MetricsReport:
    """Localization / repair / joint accuracy over buggy examples; non-buggy
    examples contribute only to the no-bug classification counts."""
    by_id: dict[str, VarMisusePrediction] = {}
    for p in predictions:
        if p.example_id in by_id:
            raise EvalError(f"duplicate prediction for example {p.example_id!r}")
        by_id[p.example_id] = p
    known = {ex.function_id for ex in examples}
    if len(known) != len(examples):
        raise EvalError("duplicate example ids in ground truth")
    for eid in by_id:
        if eid not in known:
            raise EvalError(f"prediction for unknown example {eid!r}")

    buggy = loc_hits = rep_hits = joint_hits = 0
    non_buggy = no_bug_hits = 0
    for ex in examples:
        pred = by_id.get(ex.function_id)
        if pred is None:
            raise EvalError(f"missing prediction for example {ex.function_id!r}")
        length = len(ex.nodes)
        if not 0 <= pred.predicted_bug_pos <= length:
            raise EvalError(f"{ex.function_id!r}: bug position "
                            f"{pred.predicted_bug_pos} outside [0, {length}]")
        if not 1 <= pred.predicted_repair_pos <= length:
            raise EvalError(f"{ex.function_id!r}: repair position "
                            f"{pred.predicted_repair_pos} outside [1, {length}]")
        if ex.is_buggy:
            buggy += 1
            loc = pred.predicted_bug_pos == ex.bug_location
            rep = pred.predicted_repair_pos in ex.repair_positions
            loc_hits += loc
            rep_hits += rep
            joint_hits += loc and rep
        else:
            non_buggy += 1
            no_bug_hits += pred.predicted_bug_pos == NO_BUG

    return MetricsReport(
        localization_accuracy=loc_hits / buggy if buggy else None,
        repair_accuracy=rep_hits / buggy if buggy else None,
        joint_accuracy=joint_hits / buggy if buggy else None,
        counts={
            "buggy_examples": buggy,
            "non_buggy_examples": non_buggy,
            "localization_hits": loc_hits,
            "repair_hits": rep_hits,
            "joint_hits": joint_hits,
            "no_bug_hits": no_bug_hits,
        },
    )


def aggregate_reports(reports: list[dict]) -> dict:
    """Mean and standard deviation per metric across report dicts."""
    if not reports:
        raise EvalError("no reports to aggregate")
    keys = ("mrr", "localization_accuracy", "repair_accuracy", "joint_accuracy")
    out: dict = {"n_reports": len(reports)}
    for key in keys:
        values = [r[key] for r in reports if key in r]
        if not values:
            continue
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        out[key] = {"mean": mean, "std": math.sqrt(var), "n": len(values)}
    return out
