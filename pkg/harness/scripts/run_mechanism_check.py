#!/usr/bin/env python3
"""Regime-gap experiment on the synthetic identifier-repetition language.

Trains identically sized toy models on oov-anon vs unk preprocessed data
(preprocessing via the codeanon CLI) and reports next-value accuracy per
seed plus the median gap.
"""

import argparse
import json
import logging

from anonharness.configs import toy_completion
from anonharness.synth import median_regime_gap


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="mechanism_out")
    parser.add_argument("--train-snippets", type=int, default=5000)
    parser.add_argument("--eval-snippets", type=int, default=1000)
    parser.add_argument("--pairs", type=int, default=16)
    parser.add_argument("--budget", type=int, default=64)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    def config_for_seed(seed):
        return toy_completion(seq_len=4 * args.pairs, placeholder_budget=args.budget,
                              steps=args.steps, seed=seed)

    result = median_regime_gap(
        args.workdir, seeds=tuple(args.seeds), config_for_seed=config_for_seed,
        n_train=args.train_snippets, n_eval=args.eval_snippets,
        pairs=args.pairs, budget=args.budget)
    print(json.dumps(result, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
