"""Synthetic identifier-repetition language and the regime-gap experiment.

Every snippet declares fresh, corpus-unique identifiers and immediately
reuses each one, so every value is out-of-vocabulary and the only way to
predict a reused value is to recognize the repetition. Anonymization keeps
repetitions visible as repeated placeholders; UNK replacement erases them.
The preprocessing itself (vocabulary build and the regimes) is driven
through the codeanon CLI, exactly like a real dataset.
"""

from __future__ import annotations

import json
import logging
import pathlib
import statistics
import subprocess
import sys

import numpy as np

from .configs import ModelConfig, toy_completion
from .data import read_token_corpus
from .train import compare_regimes
from .vocab_ids import ValueTable

log = logging.getLogger(__name__)


def repetition_corpus(n_snippets: int, pairs_per_snippet: int, seed: int,
                      tag: str) -> list[str]:
    """token-jsonl lines: [Decl v_k, Use v_k] blocks with fresh identifiers."""
    rng = np.random.default_rng(seed)
    lines = []
    for s in range(n_snippets):
        nodes = []
        for k in range(pairs_per_snippet):
            ident = f"{tag}_{s}_{k}_{rng.integers(1 << 48):012x}"
            nodes.append(["Decl", ident])
            nodes.append(["Use", ident])
        lines.append(json.dumps({"id": f"{tag}{s}", "repo": f"repo{s % 20}",
                                 "path": f"{tag}.py", "nodes": nodes},
                                separators=(",", ":")))
    return lines


def run_codeanon(*args) -> None:
    cmd = [sys.executable, "-m", "codeanon", *map(str, args)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"codeanon failed: {' '.join(cmd)}\n{proc.stderr}")


def prepare_regime_data(workdir: str | pathlib.Path, n_train: int = 5000,
                        n_eval: int = 1000, pairs: int = 16,
                        budget: int = 64, seed: int = 0) -> dict:
    """Generate the language, then vocab/anonymize through the codeanon CLI."""
    work = pathlib.Path(workdir)
    work.mkdir(parents=True, exist_ok=True)
    (work / "train.jsonl").write_text(
        "\n".join(repetition_corpus(n_train, pairs, seed * 2 + 1, "tr")) + "\n")
    (work / "eval.jsonl").write_text(
        "\n".join(repetition_corpus(n_eval, pairs, seed * 2 + 2, "ev")) + "\n")

    vocab = work / "vocab.tsv"
    run_codeanon("vocab", "--input", work / "train.jsonl", "--vocab-size", 0,
                 "--output", vocab)
    paths = {}
    for side in ("train", "eval"):
        for regime in ("oov", "unk"):
            out = work / f"{side}_{regime}.jsonl"
            run_codeanon("--seed", seed, "anonymize", "--input",
                         work / f"{side}.jsonl", "--regime", regime,
                         "--vocab", vocab, "--placeholders", budget,
                         "--output", out)
            paths[(side, regime)] = out
    return {"vocab": vocab, "paths": paths, "budget": budget}


def regime_gap(workdir: str | pathlib.Path, seed: int,
               config: ModelConfig | None = None, **corpus_kwargs) -> dict[str, float]:
    """Next-value accuracy for oov-anon vs unk on identically sized models."""
    prep = prepare_regime_data(workdir, seed=seed, **corpus_kwargs)
    table = ValueTable.from_vocab_file(str(prep["vocab"]), prep["budget"])
    if config is None:
        config = toy_completion(seq_len=64, placeholder_budget=prep["budget"],
                                steps=2000, seed=seed)
    train_sets, eval_sets = {}, {}
    for regime in ("oov", "unk"):
        train_sets[regime] = read_token_corpus(str(prep["paths"][("train", regime)]))
        eval_sets[regime] = read_token_corpus(str(prep["paths"][("eval", regime)]))
    scores = compare_regimes(train_sets, eval_sets,
                             {r: table for r in train_sets}, config)
    scores["gap"] = scores["oov"] - scores["unk"]
    return scores


def median_regime_gap(workdir: str | pathlib.Path, seeds=(0, 1, 2),
                      config_for_seed=None, **corpus_kwargs) -> dict:
    """The regime comparison across seeds; the headline number is the median
    accuracy gap (oov-anon minus unk)."""
    runs = []
    for seed in seeds:
        cfg = config_for_seed(seed) if config_for_seed else None
        subdir = pathlib.Path(workdir) / f"seed{seed}"
        scores = regime_gap(subdir, seed=seed, config=cfg, **corpus_kwargs)
        log.info("seed %d: oov %.3f, unk %.3f, gap %.3f",
                 seed, scores["oov"], scores["unk"], scores["gap"])
        runs.append(scores)
    return {
        "runs": runs,
        "median_gap": statistics.median(r["gap"] for r in runs),
        "median_oov": statistics.median(r["oov"] for r in runs),
        "median_unk": statistics.median(r["unk"] for r in runs),
    }
