"""scikit-learn style estimators over parallel corpora.

``X`` is a :class:`~subalign.corpus.ParallelCorpus` or anything
:func:`check_corpus` accepts (a sequence of ``(source, target)`` pairs, each
side a whitespace-tokenized string or a token sequence). ``y`` is a
:class:`~subalign.corpus.GoldAlignment`. Predictions are word-level
:class:`~subalign.corpus.AlignmentSet` objects.
"""
from __future__ import annotations

from typing import Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .aligner import AlignerConfig, Bitext, FORWARD, REVERSE, train, viterbi_align
from .bpe import WORD, MergeTable, SegmentationScheme, learn_bpe
from .corpus import AlignmentSet, CorpusError, GoldAlignment, ParallelCorpus
from .linkops import METHODS, VoteTally, project_to_words, symmetrize, tally
from .metrics import score
from .optimizer import OptimizerConfig, OptimizerState, SearchSpace, clamp_schemes, run_iterative_sampling
from .pipeline import SchemePipeline

_ALIGNER_PARAMS = ("model1_iterations", "model2_iterations", "null_probability", "diagonal_tension",
                   "tension_updates_per_iter", "smoothing_alpha")


def check_corpus(X) -> ParallelCorpus:
    """Coerce ``X`` to a non-empty :class:`ParallelCorpus`."""
    if isinstance(X, ParallelCorpus):
        corpus = X
    else:
        try:
            pairs = list(X)
        except TypeError:
            raise TypeError(f"expected a ParallelCorpus or a sequence of (source, target) pairs, "
                            f"got {type(X).__name__}") from None
        src, tgt = [], []
        for n, pair in enumerate(pairs):
            if len(pair) != 2:
                raise CorpusError(f"item {n} is not a (source, target) pair")
            s, t = (side.split() if isinstance(side, str) else tuple(side) for side in pair)
            src.append(s)
            tgt.append(t)
        corpus = ParallelCorpus.from_token_lists(src, tgt)
    if corpus.size == 0:
        raise CorpusError("corpus has no sentence pairs")
    return corpus


def check_gold(y, corpus: ParallelCorpus) -> GoldAlignment:
    """Validate that ``y`` is a gold standard with sure links, all inside ``corpus``."""
    if not isinstance(y, GoldAlignment):
        raise TypeError(f"expected a GoldAlignment, got {type(y).__name__}")
    if len(y.sure) == 0:
        raise CorpusError("gold standard has no sure links")
    beyond = [s for s in y.covered_sentences if not 0 <= s < corpus.size]
    if beyond:
        raise CorpusError(f"gold covers sentence {max(beyond)} but the corpus has {corpus.size} pairs")
    s, i, j = y.possible.arrays()
    n = [len(p.source_tokens) for p in corpus.pairs]
    m = [len(p.target_tokens) for p in corpus.pairs]
    for a, b, c in zip(s.tolist(), i.tolist(), j.tolist()):
        if b >= n[a] or c >= m[a]:
            raise CorpusError(f"gold link ({a},{b},{c}) outside sentence lengths ({n[a]},{m[a]}); "
                              "check the one-based/zero-based setting")
    return y


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


class _AlignerParams:
    def _aligner_config(self) -> AlignerConfig:
        return AlignerConfig(**{k: getattr(self, k) for k in _ALIGNER_PARAMS}, seed=self.random_state)


class WordAligner(_AlignerParams, BaseEstimator):
    """Bidirectional Model 1 + diagonal Model 2 aligner at one segmentation scheme.

    ``source_merges``/``target_merges`` are BPE merge counts or ``"WORD"``.
    BPE tables are learned on the training corpus unless given in ``tables``.
    """

    def __init__(self, source_merges=WORD, target_merges=WORD, method: str = "intersection",
                 model1_iterations: int = 5, model2_iterations: int = 5, null_probability: float = 0.08,
                 diagonal_tension: float = 4.0, tension_updates_per_iter: int = 8, smoothing_alpha: float = 0.01,
                 max_merges: int = 100_000, tables: tuple[MergeTable, MergeTable] | None = None,
                 random_state: int = 0):
        self.source_merges = source_merges
        self.target_merges = target_merges
        self.method = method
        self.model1_iterations = model1_iterations
        self.model2_iterations = model2_iterations
        self.null_probability = null_probability
        self.diagonal_tension = diagonal_tension
        self.tension_updates_per_iter = tension_updates_per_iter
        self.smoothing_alpha = smoothing_alpha
        self.max_merges = max_merges
        self.tables = tables
        self.random_state = random_state

    def _segment(self, corpus: ParallelCorpus):
        pipe = SchemePipeline(corpus, self.tables_, self.config_)
        src_enc, src_maps, _ = pipe._side(0, self.scheme_.source_size)
        tgt_enc, tgt_maps, _ = pipe._side(1, self.scheme_.target_size)
        return Bitext(src_enc, tgt_enc), src_maps, tgt_maps

    def fit(self, X, y=None):
        _check_method(self.method)
        corpus = check_corpus(X)
        self.config_ = self._aligner_config()
        if self.tables is not None:
            self.tables_ = tuple(self.tables)
        else:
            self.tables_ = tuple(
                learn_bpe(side, 0 if k == WORD else self.max_merges)
                for side, k in ((corpus.source_sentences, self.source_merges),
                                (corpus.target_sentences, self.target_merges)))
        self.scheme_ = SegmentationScheme(self.source_merges, self.target_merges)
        self.scheme_.validate(*self.tables_)
        bitext, _, _ = self._segment(corpus)
        self.forward_model_ = train(bitext, self.config_)
        self.reverse_model_ = train(bitext.swapped(), self.config_)
        return self

    def predict(self, X) -> AlignmentSet:
        """Symmetrized word links for every pair of ``X``."""
        check_is_fitted(self, "forward_model_")
        corpus = check_corpus(X)
        bitext, src_maps, tgt_maps = self._segment(corpus)
        fwd = viterbi_align(bitext, self.forward_model_, FORWARD)
        rev = viterbi_align(bitext, self.reverse_model_, REVERSE)
        return project_to_words(symmetrize(fwd, rev, self.method), src_maps, tgt_maps)

    def fit_predict(self, X, y=None) -> AlignmentSet:
        return self.fit(X).predict(X)

    def score(self, X, y) -> float:
        corpus = check_corpus(X)
        return score(self.predict(corpus), check_gold(y, corpus)).f1


class SubwordSamplingAligner(_AlignerParams, BaseEstimator):
    """Selects segmentation cells and a vote threshold against gold, then aligns.

    ``fit(X, y)`` runs the greedy Bayesian-optimization loop on ``X`` (which
    should contain the gold-annotated pairs) and stores the best prefix of
    selected cells in ``xi_star_`` and its threshold in ``lambda_star_``.
    ``predict(X)`` re-uses the cached alignments when ``X`` is the training
    corpus and otherwise transfers the settings to ``X``.
    """

    def __init__(self, budget: int = 30, random_init: int = 10, early_stopping: int = 3,
                 max_iterations: int | None = None, n_candidates: int = 1000, surrogate: str = "tpe",
                 method: str = "intersection", max_merges: int = 100_000,
                 source_range: tuple[int, int] | None = None, target_range: tuple[int, int] | None = None,
                 include_word: bool = True, lambda_range: tuple[float, float] = (0.0, 1.0),
                 model1_iterations: int = 5, model2_iterations: int = 5, null_probability: float = 0.08,
                 diagonal_tension: float = 4.0, tension_updates_per_iter: int = 8, smoothing_alpha: float = 0.01,
                 random_state: int = 0):
        self.budget = budget
        self.random_init = random_init
        self.early_stopping = early_stopping
        self.max_iterations = max_iterations
        self.n_candidates = n_candidates
        self.surrogate = surrogate
        self.method = method
        self.max_merges = max_merges
        self.source_range = source_range
        self.target_range = target_range
        self.include_word = include_word
        self.lambda_range = lambda_range
        self.model1_iterations = model1_iterations
        self.model2_iterations = model2_iterations
        self.null_probability = null_probability
        self.diagonal_tension = diagonal_tension
        self.tension_updates_per_iter = tension_updates_per_iter
        self.smoothing_alpha = smoothing_alpha
        self.random_state = random_state

    def _learn_tables(self, corpus: ParallelCorpus) -> tuple[MergeTable, MergeTable]:
        return (learn_bpe(corpus.source_sentences, self.max_merges),
                learn_bpe(corpus.target_sentences, self.max_merges))

    def fit(self, X, y, state: OptimizerState | None = None):
        _check_method(self.method)
        corpus = check_corpus(X)
        gold = check_gold(y, corpus)
        opt_config = OptimizerConfig(self.budget, self.random_init, self.early_stopping, self.random_state,
                                     self.max_iterations, self.n_candidates, self.surrogate)
        self.config_ = self._aligner_config()
        self.tables_ = self._learn_tables(corpus)
        self.space_ = SearchSpace.from_tables(self.tables_, self.source_range, self.target_range,
                                              self.include_word, self.lambda_range)
        self.pipeline_ = SchemePipeline(corpus, self.tables_, self.config_, self.method)
        self.state_, self.alignment_ = run_iterative_sampling(corpus, gold, self.tables_, self.space_, opt_config,
                                                              self.config_, self.pipeline_, state)
        self.corpus_ = corpus
        self.xi_star_ = self.state_.xi_star
        self.lambda_star_ = self.state_.lambda_star
        self.best_f1_ = self.state_.best_f1
        return self

    def _pipeline_for(self, X) -> tuple[SchemePipeline, list[SegmentationScheme]]:
        check_is_fitted(self, "state_")
        if not self.xi_star_:
            raise ValueError("the optimizer selected no cells; nothing to apply")
        if X is None or X is self.corpus_:
            return self.pipeline_, list(self.xi_star_)
        corpus = check_corpus(X)
        if corpus == self.corpus_:
            return self.pipeline_, list(self.xi_star_)
        tables = self._learn_tables(corpus)
        return SchemePipeline(corpus, tables, self.config_, self.method), clamp_schemes(self.xi_star_, tables)

    def predict(self, X=None) -> AlignmentSet:
        pipeline, schemes = self._pipeline_for(X)
        return pipeline.aligned(schemes, self.lambda_star_)

    def transform(self, X=None) -> VoteTally:
        """Per word link, the number of selected cells that produced it."""
        pipeline, schemes = self._pipeline_for(X)
        return tally([pipeline.word_links(s) for s in schemes])

    def score(self, X, y) -> float:
        corpus = check_corpus(X)
        return score(self.predict(corpus), check_gold(y, corpus)).f1


def baseline_f1(X, y, **aligner_params) -> float:
    """Word-level F1 of the plain bidirectional aligner on ``X``."""
    corpus = check_corpus(X)
    est = WordAligner(**aligner_params)
    return score(est.fit_predict(corpus), check_gold(y, corpus)).f1


__all__: Sequence[str] = ("check_corpus", "check_gold", "WordAligner", "SubwordSamplingAligner", "baseline_f1")
