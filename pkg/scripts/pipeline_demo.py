#!/usr/bin/env python3
"""Synthesize a toy ast-json corpus and drive the whole CLI pipeline over it:

    dedup -> split -> vocab -> anonymize -> chunk -> pointer-targets
                                         -> varmisuse

Artifacts land in --workdir (default ./pipeline_demo_out).
"""

import argparse
import json
import pathlib
import subprocess
import sys

from codeanon.rng import SplitMix64


def synth_corpus(rng: SplitMix64, n_repos: int, files_per_repo: int):
    lines, paths = [], []
    common = ["np", "sin", "len", "range", "print"]
    for r in range(n_repos):
        for i in range(files_per_repo):
            n_vars = 3 + rng.randrange(4)
            local = [f"r{r}f{i}_v{k}" for k in range(n_vars)]
            children = []
            nodes = [{"type": "FunctionDef", "value": f"fn_{r}_{i}", "children": children}]
            for _ in range(6 + rng.randrange(30)):
                children.append(len(nodes))
                if rng.randrange(3) == 0:
                    nodes.append({"type": "NameLoad",
                                  "value": common[rng.randrange(len(common))]})
                else:
                    t = ["NameLoad", "NameStore", "NameParam"][rng.randrange(3)]
                    nodes.append({"type": t, "value": local[rng.randrange(n_vars)]})
            lines.append(json.dumps([{"type": "Module", "children": [1]}] +
                                    [{**n, "children": [c + 1 for c in n.get("children", [])]}
                                     if "children" in n else n for n in nodes]))
            paths.append(f"data/owner{r}/repo{r}/file{i}.py")
    return lines, paths


def run(*args):
    cmd = [sys.executable, "-m", "codeanon", *map(str, args)]
    proc = subprocess.run(cmd, check=True, capture_output=True, text=True)
    print(proc.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="pipeline_demo_out")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repos", type=int, default=12)
    parser.add_argument("--files-per-repo", type=int, default=6)
    args = parser.parse_args()

    work = pathlib.Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    lines, paths = synth_corpus(SplitMix64(args.seed), args.repos, args.files_per_repo)
    (work / "raw.json").write_text("\n".join(lines) + "\n")
    (work / "paths.txt").write_text("\n".join(paths) + "\n")

    run("dedup", "--input", work / "raw.json", "--format", "ast-json",
        "--output", work / "dedup.json")
    run("--seed", args.seed, "split", "--input", work / "dedup.json",
        "--format", "ast-json", "--paths-file", work / "paths.txt",
        "--test-fraction", 0.3,
        "--output-train", work / "train.json", "--output-test", work / "test.json")
    run("vocab", "--input", work / "train.json", "--format", "ast-json",
        "--vocab-size", 8, "--output", work / "vocab.tsv")
    for side in ("train", "test"):
        run("--seed", args.seed, "anonymize", "--input", work / f"{side}.json",
            "--format", "ast-json", "--regime", "oov", "--vocab", work / "vocab.tsv",
            "--placeholders", 64, "--output", work / f"{side}_oov.jsonl")
    run("chunk", "--input", work / "train_oov.jsonl", "--max-len", 32,
        "--stride", 16, "--output", work / "train_chunks.jsonl")
    run("pointer-targets", "--input", work / "train_chunks.jsonl",
        "--vocab", work / "vocab.tsv", "--placeholders", 64,
        "--output", work / "train_targets.jsonl")
    run("--seed", args.seed, "varmisuse", "--input", work / "train.json",
        "--format", "ast-json", "--regime", "oov", "--vocab", work / "vocab.tsv",
        "--placeholders", 64, "--output", work / "train_varmisuse.jsonl")
    run("stats", "--vocab", work / "vocab.tsv", "--format", "ast-json",
        work / "train.json")
    print(f"artifacts in {work}/")


if __name__ == "__main__":
    main()
