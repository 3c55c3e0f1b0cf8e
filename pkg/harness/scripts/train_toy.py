#!/usr/bin/env python3
"""Train a toy model on exported dataset files and score it through the
codeanon eval subcommand.

Completion example:
    python scripts/train_toy.py --task completion \
        --train train_chunks.jsonl --eval eval_chunks.jsonl \
        --vocab vocab.tsv --placeholders 500 --steps 500 --workdir out/

Variable misuse example:
    python scripts/train_toy.py --task varmisuse \
        --train train_vm.jsonl --eval eval_vm.jsonl \
        --vocab vocab.tsv --placeholders 1000 --steps 500 --workdir out/
"""

import argparse
import json
import logging
import pathlib
import subprocess
import sys

from anonharness.configs import ModelConfig, toy_completion, toy_varmisuse
from anonharness.data import (
    collect_types,
    read_chunks,
    read_token_corpus,
    read_varmisuse,
)
from anonharness.train import (
    save_checkpoint,
    train_completion,
    train_varmisuse,
    write_completion_predictions,
    write_varmisuse_predictions,
)
from anonharness.vocab_ids import ValueTable

log = logging.getLogger("train_toy")


def main():
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--task", choices=["completion", "varmisuse"], required=True)
    parser.add_argument("--train", required=True)
    parser.add_argument("--eval", required=True)
    parser.add_argument("--vocab", required=True)
    parser.add_argument("--placeholders", type=int, default=64)
    parser.add_argument("--config", help="ModelConfig JSON; overrides the toy preset")
    parser.add_argument("--steps", type=int, default=500)
    parser.add_argument("--pointer", action="store_true")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--token-jsonl", action="store_true",
                        help="train/eval files are raw token-jsonl, not chunks")
    parser.add_argument("--workdir", default="train_toy_out")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    work = pathlib.Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    values = ValueTable.from_vocab_file(args.vocab, args.placeholders)

    if args.config:
        config = ModelConfig.from_json(args.config)
    elif args.task == "completion":
        config = toy_completion(steps=args.steps, seed=args.seed,
                                placeholder_budget=args.placeholders,
                                pointer_enabled=args.pointer)
    else:
        config = toy_varmisuse(steps=args.steps, seed=args.seed,
                               placeholder_budget=args.placeholders)
    config.to_json(str(work / "config.json"))

    preds = work / "predictions.jsonl"
    if args.task == "completion":
        reader = read_token_corpus if args.token_jsonl else read_chunks
        train_data, eval_data = reader(args.train), reader(args.eval)
        types = collect_types(train_data, eval_data)
        model, losses = train_completion(config, train_data, types, values)
        n = write_completion_predictions(model, eval_data, types, values, str(preds))
        eval_args = ["--task", "completion", "--unk-zero"]
        dataset = args.eval
    else:
        train_data, eval_data = read_varmisuse(args.train), read_varmisuse(args.eval)
        types = collect_types(train_data, eval_data)
        model, losses = train_varmisuse(config, train_data, types, values)
        n = write_varmisuse_predictions(model, eval_data, types, values, str(preds))
        eval_args = ["--task", "varmisuse"]
        dataset = args.eval
    log.info("trained %d steps, loss %.3f -> %.3f, wrote %d predictions",
             len(losses), losses[0], losses[-1], n)
    save_checkpoint(model, config, types, values.entries, str(work / "model.pt"))

    if args.token_jsonl:
        log.info("token-jsonl eval data has no chunk form; skipping codeanon eval")
        return
    report = work / "report.json"
    proc = subprocess.run(
        [sys.executable, "-m", "codeanon", "eval", *eval_args,
         "--predictions", str(preds), "--dataset", dataset,
         "--output", str(report)],
        capture_output=True, text=True)
    if proc.returncode != 0:
        raise SystemExit(f"codeanon eval failed:\n{proc.stderr}")
    print(json.dumps(json.loads(proc.stdout.splitlines()[-1]), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
