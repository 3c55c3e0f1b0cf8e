"""Preprocessing and evaluation toolkit for out-of-vocabulary identifier
anonymization over AST token sequences."""

from .anonymize import (
    AnonymizationMap,
    AnonymizedSnippet,
    Regime,
    anonymize_all,
    anonymize_oov,
    collect_oov,
    deanonymize,
    replace_unk,
    sample_injection,
)
from .corpus import Corpus, Node, Snippet, parse_ast_record, read_corpus, write_corpus
from .dataset import (
    CompletionChunk,
    PointerTarget,
    VarMisuseExample,
    chunk,
    dedup,
    extract_functions,
    inject_bug,
    make_varmisuse_dataset,
    pointer_targets,
    split_by_repository,
)
from .metrics import (
    MetricsReport,
    RankedPrediction,
    VarMisusePrediction,
    mrr_at_k,
    varmisuse_scores,
)
from .vocab import Vocabulary, build_vocabulary, count_values, coverage

__version__ = "0.1.0"

__all__ = [
    "AnonymizationMap", "AnonymizedSnippet", "Regime", "anonymize_all",
    "anonymize_oov", "collect_oov", "deanonymize", "replace_unk",
    "sample_injection", "Corpus", "Node", "Snippet", "parse_ast_record",
    "read_corpus", "write_corpus", "CompletionChunk", "PointerTarget",
    "VarMisuseExample", "chunk", "dedup", "extract_functions", "inject_bug",
    "make_varmisuse_dataset", "pointer_targets", "split_by_repository",
    "MetricsReport", "RankedPrediction", "VarMisusePrediction", "mrr_at_k",
    "varmisuse_scores", "Vocabulary", "build_vocabulary", "count_values",
    "coverage",
]
