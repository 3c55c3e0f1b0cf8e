"""Command-line entry point wiring the pipeline stages together.

Every subcommand writes its outputs atomically (temp file + rename) and
prints one machine-readable JSON summary line to stdout. Reruns with the
same inputs, seed, and flags produce byte-identical outputs regardless of
--jobs. The default seed comes from the CODEANON_SEED environment variable.

Exit codes: 0 success, 1 data error (message names file and line), 2 usage.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import contextlib
import json
import logging
import os
import sys
import tempfile

from . import anonymize as anon
from . import dataset, metrics
from . import vocab as vocablib
from .corpus import (
    FORMAT_AST_JSON,
    FORMAT_TOKEN_JSONL,
    Corpus,
    iter_corpus_lines,
    snippet_to_json,
)
from .errors import CodeAnonError, EvalError
from .rng import derive_seed

log = logging.getLogger("codeanon")

REGIMES = {
    "oov": anon.Regime.OOV_ANON,
    "full": anon.Regime.FULL_ANON,
    "unk": anon.Regime.UNK_REPLACE,
    "none": None,
}


@contextlib.contextmanager
def atomic_output(path: str):
    """Write to a sibling temp file, rename into place on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".codeanon-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _read_paths_file(path: str | None) -> list[str] | None:
    if path is None:
        return None
    with open(path, encoding="utf-8") as f:
        return [ln.rstrip("\n") for ln in f]


def _load_corpus_with_lines(args) -> tuple[Corpus, list[str]]:
    paths = _read_paths_file(getattr(args, "paths_file", None))
    on_error = "skip" if getattr(args, "skip_bad_lines", False) else "raise"
    snippets, lines = [], []
    for _, raw, snippet in iter_corpus_lines(args.input, args.format, on_error, paths):
        snippets.append(snippet)
        lines.append(raw)
    return Corpus(tuple(snippets), provenance=args.input), lines


def _load_vocab(args, required: bool) -> vocablib.Vocabulary:
    path = getattr(args, "vocab", None)
    if path is None:
        if required:
            raise CodeAnonError(f"--vocab is required for regime {args.regime!r}")
        return vocablib.EMPTY_VOCABULARY
    return vocablib.read_vocabulary(path)


def _summary(**fields) -> int:
    print(json.dumps(fields, sort_keys=True))
    return 0


# --- subcommand handlers ----------------------------------------------------

def cmd_vocab(args) -> int:
    corpus, _ = _load_corpus_with_lines(args)
    counts = vocablib.count_values(corpus)
    built = vocablib.build_vocabulary(counts, args.vocab_size)
    with atomic_output(args.output) as f:
        for value, count in built.entries:
            f.write(f"{value}\t{count}\n")
    return _summary(subcommand="vocab", input=args.input, output=args.output,
                    snippets=len(corpus), unique_values=len(counts),
                    entries=len(built), coverage=vocablib.coverage(built, corpus))


def _anonymize_one(snippet, regime, vocab, budget, seed, deterministic) -> str:
    if regime is None:
        return snippet_to_json(snippet)
    snippet_seed = "DETERMINISTIC" if deterministic else derive_seed(seed, snippet.id)
    if regime is anon.Regime.OOV_ANON:
        result = anon.anonymize_oov(snippet, vocab, budget, snippet_seed)
    elif regime is anon.Regime.FULL_ANON:
        result = anon.anonymize_all(snippet, budget, snippet_seed)
    else:
        result = anon.replace_unk(snippet, vocab, budget)
    obj = json.loads(snippet_to_json(result.snippet))
    obj["map"] = [[orig, idx] for orig, idx in result.map.pairs]
    obj["regime"] = result.regime.value
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


_WORKER_STATE: dict = {}


def _init_worker(regime_name, vocab_entries, budget, seed, deterministic):
    _WORKER_STATE["regime"] = REGIMES[regime_name]
    _WORKER_STATE["vocab"] = vocablib.Vocabulary(entries=vocab_entries,
                                                 size_limit=len(vocab_entries))
    _WORKER_STATE["budget"] = budget
    _WORKER_STATE["seed"] = seed
    _WORKER_STATE["deterministic"] = deterministic


def _worker_anonymize(snippet) -> str:
    s = _WORKER_STATE
    return _anonymize_one(snippet, s["regime"], s["vocab"], s["budget"],
                          s["seed"], s["deterministic"])


def cmd_anonymize(args) -> int:
    regime = REGIMES[args.regime]
    vocab = _load_vocab(args, required=args.regime in ("oov", "unk"))
    corpus, _ = _load_corpus_with_lines(args)
    if args.jobs > 1 and regime is not None:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=args.jobs, initializer=_init_worker,
            initargs=(args.regime, vocab.entries, args.placeholders,
                      args.seed, args.deterministic),
        ) as pool:
            lines = list(pool.map(_worker_anonymize, corpus.snippets, chunksize=64))
    else:
        lines = [_anonymize_one(s, regime, vocab, args.placeholders,
                                args.seed, args.deterministic) for s in corpus]
    with atomic_output(args.output) as f:
        for line in lines:
            f.write(line + "\n")
    return _summary(subcommand="anonymize", input=args.input, output=args.output,
                    regime=args.regime, snippets=len(corpus),
                    placeholders=args.placeholders,
                    seed=None if args.deterministic else args.seed)


def cmd_dedup(args) -> int:
    corpus, lines = _load_corpus_with_lines(args)
    deduped = dataset.dedup(corpus)
    survivors = {s.id for s in deduped}
    with atomic_output(args.output) as f:
        for snippet, raw in zip(corpus.snippets, lines):
            if snippet.id in survivors:
                f.write(raw + "\n")
    return _summary(subcommand="dedup", input=args.input, output=args.output,
                    kept=len(deduped), removed=len(corpus) - len(deduped))


def cmd_split(args) -> int:
    if not 0 < args.test_fraction < 1:
        raise CodeAnonError("--test-fraction must be strictly between 0 and 1")
    if args.format == FORMAT_AST_JSON and not args.paths_file:
        raise CodeAnonError("split on ast-json input needs --paths-file "
                            "to know repository names")
    corpus, lines = _load_corpus_with_lines(args)
    train, test = dataset.split_by_repository(corpus, args.test_fraction, args.seed)
    test_ids = {s.id for s in test}
    with atomic_output(args.output_train) as f:
        for snippet, raw in zip(corpus.snippets, lines):
            if snippet.id not in test_ids:
                f.write(raw + "\n")
    with atomic_output(args.output_test) as f:
        for snippet, raw in zip(corpus.snippets, lines):
            if snippet.id in test_ids:
                f.write(raw + "\n")
    return _summary(subcommand="split", input=args.input,
                    output_train=args.output_train, output_test=args.output_test,
                    train_snippets=len(train), test_snippets=len(test),
                    train_repos=len({s.repository for s in train}),
                    test_repos=len({s.repository for s in test}), seed=args.seed)


def cmd_chunk(args) -> int:
    corpus, _ = _load_corpus_with_lines(args)
    n_chunks = 0
    with atomic_output(args.output) as f:
        for snippet in corpus:
            for c in dataset.chunk(snippet, args.max_len, args.stride):
                f.write(dataset.chunk_to_json(c) + "\n")
                n_chunks += 1
    return _summary(subcommand="chunk", input=args.input, output=args.output,
                    snippets=len(corpus), chunks=n_chunks,
                    max_len=args.max_len, stride=args.stride)


def cmd_varmisuse(args) -> int:
    regime = REGIMES[args.regime]
    vocab = _load_vocab(args, required=args.regime in ("oov", "unk"))
    corpus, _ = _load_corpus_with_lines(args)
    vtypes = frozenset(args.variable_types.split(","))
    functions = dataset.extract_functions(corpus, vtypes)
    examples = dataset.make_varmisuse_dataset(
        functions, vtypes, args.copies_buggy, args.copies_clean, args.seed)
    with atomic_output(args.output) as f:
        for ex in examples:
            seed = ("DETERMINISTIC" if args.deterministic
                    else derive_seed(args.seed, ex.function_id, "regime"))
            ex = dataset.apply_regime_to_example(ex, regime, vocab,
                                                 args.placeholders, seed)
            f.write(dataset.varmisuse_to_json(ex) + "\n")
    n_buggy = sum(ex.is_buggy for ex in examples)
    return _summary(subcommand="varmisuse", input=args.input, output=args.output,
                    functions=len(functions), examples=len(examples),
                    buggy=n_buggy, clean=len(examples) - n_buggy,
                    regime=args.regime, seed=args.seed)


def cmd_pointer_targets(args) -> int:
    vocab = _load_vocab(args, required=True)
    layout = vocablib.token_id_layout(vocab, args.placeholders)
    n = 0
    with open(args.input, encoding="utf-8") as src, atomic_output(args.output) as f:
        for line in src:
            if not line.strip():
                continue
            c = dataset.chunk_from_json(line)
            for t in dataset.pointer_targets(c, vocab, args.placeholders, layout):
                f.write(dataset.pointer_target_to_json(c.snippet_id, c.start_offset, t) + "\n")
                n += 1
    return _summary(subcommand="pointer-targets", input=args.input,
                    output=args.output, targets=n, placeholders=args.placeholders)


def _eval_completion(args) -> metrics.MetricsReport:
    truths: dict[tuple[str, int], str | None] = {}
    with open(args.dataset, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            c = dataset.chunk_from_json(line)
            for pos in c.scored_positions():
                truths[(c.snippet_id, c.start_offset + pos)] = c.nodes[pos - 1].node_value
    preds, gold = [], []
    seen: set[tuple[str, int]] = set()
    with open(args.predictions, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            key = (obj["sid"], obj["pos"])
            if key not in truths:
                raise EvalError(
                    f"{args.predictions}:{lineno}: position {key} is not scored by the dataset")
            if key in seen:
                raise EvalError(
                    f"{args.predictions}:{lineno}: duplicate prediction for {key}")
            seen.add(key)
            truth = truths[key]
            if truth is None:
                continue  # valueless node: next-value prediction not scored
            preds.append(metrics.RankedPrediction(position=obj["pos"],
                                                  candidates=tuple(obj["cands"])))
            gold.append(truth)
    return metrics.MetricsReport(
        mrr=metrics.mrr_at_k(preds, gold, args.k, args.unk_zero),
        counts={"scored_positions": len(gold)},
    )


def _eval_varmisuse(args) -> metrics.MetricsReport:
    examples = []
    with open(args.dataset, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                examples.append(dataset.varmisuse_from_json(line))
    preds = []
    with open(args.predictions, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            preds.append(metrics.VarMisusePrediction(
                example_id=obj["eid"], predicted_bug_pos=obj["bug"],
                predicted_repair_pos=obj["fix"]))
    return metrics.varmisuse_scores(preds, examples)


def cmd_eval(args) -> int:
    report = _eval_completion(args) if args.task == "completion" else _eval_varmisuse(args)
    print(report.table(), file=sys.stderr)
    if args.output:
        with atomic_output(args.output) as f:
            f.write(report.to_json() + "\n")
    print(report.to_json())
    return 0


def cmd_stats(args) -> int:
    if args.kind == "reports":
        reports = []
        for path in args.inputs:
            with open(path, encoding="utf-8") as f:
                reports.append(json.load(f))
        return _summary(subcommand="stats", kind="reports",
                        **metrics.aggregate_reports(reports))
    total_snippets = total_nodes = 0
    unique: set[str] = set()
    merged = []
    for path in args.inputs:
        corpus, _ = _load_corpus_with_lines(argparse.Namespace(
            input=path, format=args.format, paths_file=None, skip_bad_lines=False))
        total_snippets += len(corpus)
        for s in corpus:
            total_nodes += len(s.nodes)
            unique.update(s.values())
        merged.extend(corpus.snippets)
    fields = dict(subcommand="stats", kind="corpus", snippets=total_snippets,
                  nodes=total_nodes, unique_values=len(unique))
    if args.vocab:
        built = vocablib.read_vocabulary(args.vocab)
        covered = sum(1 for v in unique if built.covers(v))
        fields["coverage"] = covered / len(unique) if unique else 1.0
        fields["vocab_entries"] = len(built)
    return _summary(**fields)


# --- argument parsing -------------------------------------------------------

def _add_io(p, output=True):
    p.add_argument("--input", required=True, help="input corpus file")
    p.add_argument("--format", choices=[FORMAT_TOKEN_JSONL, FORMAT_AST_JSON],
                   default=FORMAT_TOKEN_JSONL)
    p.add_argument("--paths-file",
                   help="sidecar listing one source path per ast-json line (repo metadata)")
    p.add_argument("--skip-bad-lines", action="store_true",
                   help="log and skip unparseable lines instead of failing")
    if output:
        p.add_argument("--output", required=True)


def _add_regime(p):
    p.add_argument("--regime", choices=list(REGIMES), default="oov")
    p.add_argument("--vocab", help="vocabulary file (value<TAB>frequency)")
    p.add_argument("--placeholders", type=int,
                   default=anon.DEFAULT_PLACEHOLDER_BUDGET,
                   help="placeholder budget M")
    p.add_argument("--deterministic", action="store_true",
                   help="assign var1, var2, ... in first-occurrence order")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codeanon",
        description="Preprocessing and evaluation toolkit for OOV identifier "
                    "anonymization over AST token sequences.")
    parser.add_argument("--seed", type=int,
                        default=int(os.environ.get("CODEANON_SEED", "0")),
                        help="global seed (default: $CODEANON_SEED or 0)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes; output is identical for any value")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("vocab", help="build a frequency-cropped vocabulary")
    _add_io(p)
    p.add_argument("--vocab-size", type=int, required=True)
    p.set_defaults(handler=cmd_vocab)

    p = sub.add_parser("anonymize", help="rewrite values under a regime")
    _add_io(p)
    _add_regime(p)
    p.set_defaults(handler=cmd_anonymize)

    p = sub.add_parser("dedup", help="drop exact duplicate snippets")
    _add_io(p)
    p.set_defaults(handler=cmd_dedup)

    p = sub.add_parser("split", help="repository-level train/test split")
    _add_io(p, output=False)
    p.add_argument("--test-fraction", type=float, required=True)
    p.add_argument("--output-train", required=True)
    p.add_argument("--output-test", required=True)
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser("chunk", help="cut snippets into overlapping windows")
    _add_io(p)
    p.add_argument("--max-len", type=int, default=dataset.DEFAULT_MAX_CHUNK_LEN)
    p.add_argument("--stride", type=int, default=dataset.DEFAULT_CHUNK_STRIDE)
    p.set_defaults(handler=cmd_chunk)

    p = sub.add_parser("varmisuse", help="build the variable-misuse dataset")
    _add_io(p)
    _add_regime(p)
    p.add_argument("--variable-types", default=",".join(sorted(dataset.DEFAULT_VARIABLE_NODE_TYPES)),
                   help="comma-separated node types that hold user variables")
    p.add_argument("--copies-buggy", type=int, default=3)
    p.add_argument("--copies-clean", type=int, default=3)
    p.set_defaults(handler=cmd_varmisuse)

    p = sub.add_parser("pointer-targets", help="vocabulary ids and copy positions per chunk position")
    _add_io(p)
    p.add_argument("--vocab", required=True)
    p.add_argument("--placeholders", type=int, default=anon.CHUNK_PLACEHOLDER_BUDGET)
    p.set_defaults(handler=cmd_pointer_targets)

    p = sub.add_parser("eval", help="score a predictions file")
    p.add_argument("--task", choices=["completion", "varmisuse"], required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", type=int, default=10, help="rank cutoff for MRR")
    p.add_argument("--unk-zero", action="store_true",
                   help="score zero whenever the true token is UNK")
    p.add_argument("--output", help="also write the report JSON here")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("stats", help="corpus statistics or report aggregation")
    p.add_argument("--kind", choices=["corpus", "reports"], default="corpus")
    p.add_argument("--format", choices=[FORMAT_TOKEN_JSONL, FORMAT_AST_JSON],
                   default=FORMAT_TOKEN_JSONL)
    p.add_argument("--vocab", help="vocabulary file for coverage")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(handler=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr,
                        level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (CodeAnonError, OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"codeanon {args.subcommand}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
