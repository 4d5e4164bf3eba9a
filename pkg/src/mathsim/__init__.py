"""Bag-of-words representations of math-rich documents and similarity benchmarking."""

from .bow import RepresentationConfig, build_bow, tokenize_text
from .config import ExperimentConfig, load_config
from .evaluate import break_even, cross_validate, max_f1, pr_curve, reference_matrix
from .ingest import Document, Formula, load_corpus, filter_corpus, shuffle_once
from .models import build_dictionary, lda_train, lsi_train, pairwise_similarity, tfidf_transform
from .mterms import (
    MathNode,
    WeightScheme,
    canonical_order,
    derive_subformulae,
    encode_mterm,
    formula_to_weighted_mterms,
    mathml_to_node,
    parse_mterm,
)

__version__ = "0.1.0"

__all__ = [
    "Document",
    "ExperimentConfig",
    "Formula",
    "MathNode",
    "RepresentationConfig",
    "WeightScheme",
    "break_even",
    "build_bow",
    "build_dictionary",
    "canonical_order",
    "cross_validate",
    "derive_subformulae",
    "encode_mterm",
    "filter_corpus",
    "formula_to_weighted_mterms",
    "lda_train",
    "load_config",
    "load_corpus",
    "lsi_train",
    "mathml_to_node",
    "max_f1",
    "pairwise_similarity",
    "parse_mterm",
    "pr_curve",
    "reference_matrix",
    "shuffle_once",
    "tfidf_transform",
    "tokenize_text",
    "__version__",
]
