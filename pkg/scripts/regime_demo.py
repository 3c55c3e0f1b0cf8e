#!/usr/bin/env python3
"""Show the three identifier regimes side by side on one snippet.

Usage: python scripts/regime_demo.py [--seed 38]
"""

import argparse

from codeanon.anonymize import DETERMINISTIC, anonymize_all, anonymize_oov, replace_unk
from codeanon.corpus import Node, Snippet
from codeanon.vocab import Vocabulary

SNIPPET = Snippet(
    id="demo", repository="demo", path="demo.py",
    nodes=(
        Node("NameStore", "my_y"),
        Node("NameLoad", "np"), Node("attr", "sin"),
        Node("NameLoad", "my_x"), Node("NameLoad", "my_x"),
    ),
)
VOCAB = Vocabulary(entries=(("np", 4), ("sin", 4)), size_limit=2)
TEMPLATE = "{} = {}.{}({}) + {}"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, help="seeded placeholder injection "
                        "(default: deterministic first-occurrence order)")
    args = parser.parse_args()
    seed = args.seed if args.seed is not None else DETERMINISTIC

    print("vocabulary:", [v for v, _ in VOCAB.entries])
    print("input:     ", TEMPLATE.format(*SNIPPET.values()))
    unk = replace_unk(SNIPPET, VOCAB)
    print("unk:       ", TEMPLATE.format(*unk.snippet.values()))
    oov = anonymize_oov(SNIPPET, VOCAB, budget=1000, seed=seed)
    print("oov-anon:  ", TEMPLATE.format(*oov.snippet.values()),
          "  map:", dict(oov.map.pairs))
    full = anonymize_all(SNIPPET, budget=1000, seed=seed)
    print("full-anon: ", TEMPLATE.format(*full.snippet.values()))


if __name__ == "__main__":
    main()
