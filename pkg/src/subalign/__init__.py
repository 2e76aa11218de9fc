"""Word alignment by sampling and voting over subword segmentations."""

__version__ = "0.1.0"

from .aligner import AlignerConfig, align_bidirectional, train, train_diag_model2, train_model1, viterbi_align
from .bpe import WORD, MergeTable, SegmentationScheme, learn_bpe, segment, segment_corpus
from .corpus import (AlignmentSet, GoldAlignment, Link, ParallelCorpus, attach_evaluation_set, load_parallel,
                     read_gold_naacl, read_pharaoh, subsample, write_pharaoh)
from .estimators import SubwordSamplingAligner, WordAligner, check_corpus, check_gold
from .external import AdapterError, ExternalAligner, external_align
from .linkops import aggregate, project_to_words, symmetrize
from .metrics import Metrics, score
from .optimizer import OptimizerConfig, OptimizerState, SearchSpace, apply_transfer, run_iterative_sampling
from .pipeline import SchemePipeline, evaluate_configuration
from .synthetic import synthetic_pair

__all__ = [
    "AdapterError", "AlignerConfig", "AlignmentSet", "ExternalAligner", "GoldAlignment", "Link", "MergeTable",
    "Metrics", "OptimizerConfig", "OptimizerState", "ParallelCorpus", "SchemePipeline", "SearchSpace",
    "SegmentationScheme", "SubwordSamplingAligner", "WORD", "WordAligner", "aggregate", "align_bidirectional",
    "apply_transfer", "attach_evaluation_set", "check_corpus", "check_gold", "evaluate_configuration",
    "external_align", "learn_bpe", "load_parallel", "project_to_words", "read_gold_naacl", "read_pharaoh",
    "run_iterative_sampling", "score", "segment", "segment_corpus", "subsample", "symmetrize", "synthetic_pair", "train",
    "train_diag_model2", "train_model1", "viterbi_align", "write_pharaoh",
]
