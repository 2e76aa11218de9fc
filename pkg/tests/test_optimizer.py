import json
import logging
import math

import numpy as np
import pytest

from subalign.aligner import AlignerConfig, align_bidirectional
from subalign.bpe import WORD, WORD_SCHEME, MergeTable, SegmentationScheme, segment_corpus
from subalign.corpus import GoldAlignment, ParallelCorpus
from subalign.linkops import aggregate, project_to_words, symmetrize
from subalign.metrics import score
from subalign.optimizer import (OptimizerConfig, OptimizerState, SearchSpace, SearchSpaceExhausted, Trial,
                                apply_transfer, clamp_schemes, propose_trials, run_iterative_sampling)
from subalign.pipeline import SchemePipeline, evaluate_configuration

FAST = OptimizerConfig(budget=6, random_init=3, early_stopping=2, seed=0, max_iterations=3)


class TestEvaluateConfiguration:
    def test_word_scheme_is_baseline(self, small):
        pipe = SchemePipeline(small.corpus, small.tables)
        m = evaluate_configuration(small.corpus, small.gold, small.tables, [WORD_SCHEME], 0.3, pipeline=pipe)
        # the same steps spelled out by hand
        seg = segment_corpus(small.corpus, WORD_SCHEME, small.tables)
        fwd, rev = align_bidirectional(seg, AlignerConfig())
        src_maps = [s.word_of_token for s in seg.source]
        tgt_maps = [t.word_of_token for t in seg.target]
        direct = score(project_to_words(symmetrize(fwd, rev), src_maps, tgt_maps), small.gold)
        assert m == direct
        assert pipe.evaluate([WORD_SCHEME], 1.0, small.gold) == m

    def test_cache_transparency(self, small):
        pipe = SchemePipeline(small.corpus, small.tables)
        schemes = [WORD_SCHEME, SegmentationScheme(50, 80)]
        first = pipe.evaluate(schemes, 0.5, small.gold)
        runs = pipe.n_aligner_runs
        assert pipe.evaluate(schemes, 0.5, small.gold) == first
        assert pipe.n_aligner_runs == runs == 2
        fresh = evaluate_configuration(small.corpus, small.gold, small.tables, schemes, 0.5)
        assert fresh == first

    def test_subword_cell_beats_word_level(self, small):
        pipe = SchemePipeline(small.corpus, small.tables)
        base = pipe.evaluate([WORD_SCHEME], 1.0, small.gold).f1
        # a mid-size target vocabulary splits fused compounds and suffixes into their parts
        k = min(200, small.tables[1].max_merges)
        better = pipe.evaluate([WORD_SCHEME, SegmentationScheme(WORD, k)], 0.5, small.gold).f1
        assert better > base

    def test_empty_schemes_rejected(self, small):
        with pytest.raises(ValueError):
            SchemePipeline(small.corpus, small.tables).evaluate([], 0.5, small.gold)


class TestSearchSpace:
    def test_log_prior_median(self):
        space = SearchSpace((0, 10000), (0, 10000), include_word=False)
        draws = space.sample_prior(np.random.default_rng(0), 10_000)
        assert np.median([s.source_size for s, _ in draws]) < 1000
        assert np.median([s.target_size for s, _ in draws]) < 1000

    def test_word_probability(self):
        space = SearchSpace((0, 8), (0, 8))
        draws = space.sample_prior(np.random.default_rng(1), 40_000)
        frac = np.mean([s.source_size == WORD for s, _ in draws])
        assert frac == pytest.approx(1 / 10, abs=0.01)

    def test_prior_within_range(self):
        space = SearchSpace((5, 40), (0, 3))
        for s, lam in space.sample_prior(np.random.default_rng(2), 2000):
            assert space.contains(s) and 0 <= lam <= 1

    def test_invalid_ranges(self):
        with pytest.raises(ValueError):
            SearchSpace((5, 4), (0, 1))
        with pytest.raises(ValueError):
            SearchSpace((0, 4), (0, 1), lambda_range=(0.5, 1.5))

    def test_from_tables_clamps(self):
        tables = (MergeTable((("a", "b"),)), MergeTable(()))
        space = SearchSpace.from_tables(tables, (0, 50), None)
        assert space.source_range == (0, 1) and space.target_range == (0, 0)

    def test_json(self):
        space = SearchSpace((1, 9), (0, 4), False, (0.2, 0.8))
        assert SearchSpace.from_json(json.loads(json.dumps(space.to_json()))) == space


class TestProposeTrials:
    space = SearchSpace((0, 5000), (0, 5000))

    def test_cold_start(self):
        batch = propose_trials(OptimizerState(), self.space, budget=5, random_init=5, seed=0)
        assert len(batch) == 5

    def test_surrogate_after_random_init(self):
        state = OptimizerState()
        for k, (s, lam) in enumerate(propose_trials(state, self.space, 10, 4, seed=0)):
            state.all_trials.append(Trial(s, lam, 0.1 * k, 0))
        batch = propose_trials(state, self.space, 10, 4, seed=0)
        assert len(batch) == 1

    @pytest.mark.parametrize("surrogate", ["tpe", "gp"])
    @pytest.mark.parametrize("seed", range(4))
    def test_surrogates_prefer_good_region(self, surrogate, seed):
        # the objective peaks at v_src = 30 on the log scale; the other features are noise
        rng = np.random.default_rng(seed)
        state = OptimizerState()
        for s, lam in self.space.sample_prior(rng, 25):
            v = 0 if s.source_size == WORD else s.source_size
            state.all_trials.append(Trial(s, lam, math.exp(-abs(math.log(v + 1) - math.log(30)) ** 2), 0))
        (best, _), = propose_trials(state, self.space, 30, 25, seed=seed, surrogate=surrogate)
        assert best.source_size != WORD and 3 <= best.source_size <= 300

    def test_forced_choice(self):
        space = SearchSpace((0, 1), (0, 0), include_word=False)
        state = OptimizerState(xi_history=[SegmentationScheme(0, 0)], lambda_history=[0.5], f1_trace=[0.5],
                               deltas=[0.5])
        for budget, init in ((1, 1), (5, 1)):
            batch = propose_trials(state, space, budget, init, seed=3)
            assert {s for s, _ in batch} == {SegmentationScheme(1, 0)}

    def test_exhausted(self):
        space = SearchSpace((0, 0), (0, 0), include_word=False)
        state = OptimizerState(xi_history=[SegmentationScheme(0, 0)])
        with pytest.raises(SearchSpaceExhausted):
            propose_trials(state, space, 3, 1, seed=0)

    def test_excludes_history(self):
        space = SearchSpace((0, 2), (0, 2))
        used = [SegmentationScheme(a, b) for a in (0, 1, 2) for b in (0, 1)]
        state = OptimizerState(xi_history=used)
        for s, _ in propose_trials(state, space, 20, 20, seed=0):
            assert s not in used

    def test_rejects_bad_budget(self):
        with pytest.raises(ValueError):
            propose_trials(OptimizerState(), self.space, 3, 4, seed=0)


def _run(small, config=FAST, **kw):
    space = SearchSpace.from_tables(small.tables)
    return run_iterative_sampling(small.corpus, small.gold, small.tables, space, config, **kw)


class TestIterativeSampling:
    def test_bookkeeping(self, small):
        state, alignment = _run(small)
        n = state.n_iterations
        assert len(state.f1_trace) == len(state.lambda_history) == len(state.deltas) == n
        assert len(set(state.xi_history)) == n
        best_so_far = np.maximum.accumulate(state.f1_trace)
        assert (np.diff(best_so_far) >= 0).all()
        assert state.best_f1 == max(state.f1_trace)
        assert score(alignment, small.gold).f1 == state.f1_trace[state.best_prefix_len - 1]
        assert all(0 <= t.f1 <= 1 for t in state.all_trials)
        assert len(state.trials_of(0)) == FAST.budget

    def test_deterministic(self, small):
        a, _ = _run(small)
        b, _ = _run(small)
        assert a.to_json() == b.to_json()

    def test_resume_equivalence(self, small):
        full, _ = _run(small)
        part, _ = _run(small, OptimizerConfig(6, 3, 2, 0, max_iterations=2))
        resumed, _ = _run(small, FAST, state=OptimizerState.from_json(part.to_json()))
        assert resumed.to_json() == full.to_json()

    def test_resume_seed_mismatch(self, small):
        with pytest.raises(ValueError):
            _run(small, FAST, state=OptimizerState(seed=5))

    def test_early_stop_without_improvement(self):
        # word-level alignment of one-word sentences is already perfect, so nothing can improve on it
        src = [[w] for w in ("ab", "cd", "ef", "ab", "cd", "ef")]
        tgt = [[w] for w in ("xy", "zw", "uv", "xy", "zw", "uv")]
        corpus = ParallelCorpus.from_token_lists(src, tgt)
        gold = GoldAlignment.from_links([(s, 0, 0) for s in range(6)])
        tables = (MergeTable(()), MergeTable(()))
        space = SearchSpace.from_tables(tables)
        state, alignment = run_iterative_sampling(corpus, gold, tables, space,
                                                  OptimizerConfig(budget=3, random_init=3, early_stopping=1))
        # the first iteration always improves on the initial f1_prev = 0; the next one cannot
        assert state.n_iterations == 2 and state.stop_reason == "early_stopping"
        assert state.best_prefix_len == 1 and state.best_f1 == 1.0
        assert score(alignment, gold).f1 == 1.0

    def test_patience_bound(self, small):
        state, _ = _run(small, OptimizerConfig(budget=4, random_init=2, early_stopping=1, seed=2, max_iterations=6))
        improving = [k for k, d in enumerate(state.deltas) if d > 0]
        assert state.n_iterations <= improving[-1] + 1 + 1

    def test_space_exhaustion(self, small):
        space = SearchSpace((0, 0), (0, 0), include_word=False)
        state, _ = run_iterative_sampling(small.corpus, small.gold, small.tables, space,
                                          OptimizerConfig(budget=3, random_init=1, early_stopping=3))
        assert state.xi_history == [SegmentationScheme(0, 0)]
        assert state.stop_reason == "space_exhausted"

    def test_bad_config(self):
        with pytest.raises(ValueError):
            OptimizerConfig(early_stopping=0)
        with pytest.raises(ValueError):
            OptimizerConfig(budget=2, random_init=3)

    def test_state_json_and_csv(self, small):
        state, _ = _run(small)
        back = OptimizerState.from_json(state.to_json())
        assert back.to_json() == state.to_json()
        rows = state.trace_csv().splitlines()
        assert rows[0] == "iteration,v_p,v_q,lambda,f1" and len(rows) == state.n_iterations + 1
        assert len(state.exploration_csv().splitlines()) == len(state.all_trials) + 1
        assert len(state.selected_csv().splitlines()) == state.n_iterations + 1
        with pytest.raises(ValueError):
            OptimizerState.from_json('{"format": "other"}')


class TestTransfer:
    def test_identity_transfer(self, small_b):
        pipe = SchemePipeline(small_b.corpus, small_b.tables)
        out = apply_transfer(small_b.corpus, small_b.tables, [WORD_SCHEME], 0.5)
        assert out == pipe.word_links(WORD_SCHEME)

    def test_clamping(self, caplog):
        tables = (MergeTable(tuple((f"a{k}", "b") for k in range(8))), MergeTable(tuple((f"c{k}", "d") for k in range(8))))
        with caplog.at_level(logging.WARNING, logger="subalign.optimizer"):
            out = clamp_schemes([SegmentationScheme(50000, 2), SegmentationScheme(9, 2), SegmentationScheme(WORD, 3)],
                                tables)
        assert out == [SegmentationScheme(8, 2), SegmentationScheme(WORD, 3)]
        assert "clamped" in caplog.text

    def test_empty_xi_rejected(self, small):
        with pytest.raises(ValueError):
            apply_transfer(small.corpus, small.tables, [], 0.5)
