"""FactKB corpus synthesis, dataset adapters and factuality metrics."""

from ._core import (
    CorpusRecord,
    KnowledgeBase,
    LabeledPair,
    balanced_accuracy,
    format_pair_input,
    load_pairs,
    micro_f1,
    pearson,
    read_corpus,
    read_pairs,
    run_cli,
    spearman,
    synthesize,
    unmask,
    write_corpus,
    write_pairs,
)

__all__ = [
    "CorpusRecord",
    "KnowledgeBase",
    "LabeledPair",
    "balanced_accuracy",
    "format_pair_input",
    "load_pairs",
    "micro_f1",
    "pearson",
    "read_corpus",
    "read_pairs",
    "run_cli",
    "spearman",
    "synthesize",
    "unmask",
    "write_corpus",
    "write_pairs",
]
