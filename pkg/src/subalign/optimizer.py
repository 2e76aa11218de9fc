"""Greedy iterative selection of segmentation schemes by Bayesian optimization.

Each iteration searches one new cell of the granularity grid (plus a vote
threshold) that, added to the cells already selected, maximizes gold F1.
Iterations stop once the last ``early_stopping`` ones brought no gain over
their predecessor.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .aligner import AlignerConfig
from .bpe import WORD, MergeTable, SegmentationScheme
from .corpus import AlignmentSet, GoldAlignment, ParallelCorpus
from .pipeline import SchemePipeline, clamp_scheme, unique_in_order
from .surrogate import SURROGATES

log = logging.getLogger(__name__)

STATE_FORMAT = "subalign.optimizer-state/1"


class SearchSpaceExhausted(Exception):
    """Every cell of the search space has already been selected."""


@dataclass(frozen=True)
class SearchSpace:
    source_range: tuple[int, int]
    target_range: tuple[int, int]
    include_word: bool = True
    lambda_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        for name, (lo, hi) in (("source", self.source_range), ("target", self.target_range)):
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} range [{lo}, {hi}] is empty or negative")
        lo, hi = self.lambda_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"lambda range [{lo}, {hi}] must be a non-empty subrange of [0, 1]")

    @classmethod
    def from_tables(cls, tables: tuple[MergeTable, MergeTable], source_range=None, target_range=None,
                    include_word: bool = True, lambda_range=(0.0, 1.0)) -> "SearchSpace":
        def fit(rng, table):
            lo, hi = rng if rng is not None else (0, table.max_merges)
            return (min(lo, table.max_merges), min(hi, table.max_merges))
        return cls(fit(source_range, tables[0]), fit(target_range, tables[1]), include_word, tuple(lambda_range))

    def side_values(self, side: int) -> int:
        lo, hi = (self.source_range, self.target_range)[side]
        return hi - lo + 1 + int(self.include_word)

    @property
    def n_cells(self) -> int:
        return self.side_values(0) * self.side_values(1)

    def contains(self, scheme: SegmentationScheme) -> bool:
        for k, (lo, hi) in ((scheme.source_size, self.source_range), (scheme.target_size, self.target_range)):
            if k == WORD:
                if not self.include_word:
                    return False
            elif not lo <= k <= hi:
                return False
        return True

    def cells(self):
        def values(lo, hi):
            return list(range(lo, hi + 1)) + ([WORD] if self.include_word else [])
        for a in values(*self.source_range):
            for b in values(*self.target_range):
                yield SegmentationScheme(a, b)

    def _sample_side(self, rng: np.random.Generator, lo: int, hi: int, size: int) -> list:
        # log-uniform over integers: exp(U[log(lo+1), log(hi+2))) - 1, floored
        u = rng.uniform(math.log(lo + 1), math.log(hi + 2), size=size)
        vals = np.clip(np.floor(np.exp(u)).astype(np.int64) - 1, lo, hi)
        out: list = vals.tolist()
        if self.include_word:
            word = rng.random(size) < 1.0 / (hi - lo + 2)
            out = [WORD if w else v for v, w in zip(out, word.tolist())]
        return out

    def sample_prior(self, rng: np.random.Generator, size: int) -> list[tuple[SegmentationScheme, float]]:
        src = self._sample_side(rng, *self.source_range, size)
        tgt = self._sample_side(rng, *self.target_range, size)
        lams = rng.uniform(*self.lambda_range, size=size).tolist()
        return [(SegmentationScheme(a, b), lam) for a, b, lam in zip(src, tgt, lams)]

    def features(self, schemes: Sequence[SegmentationScheme], lams: Sequence[float]) -> np.ndarray:
        """``(log(v_src + 1), log(v_tgt + 1), lambda)``; WORD maps just past the range top."""
        def f(k, hi):
            return math.log((hi + 1 if k == WORD else k) + 1)
        return np.array([[f(s.source_size, self.source_range[1]), f(s.target_size, self.target_range[1]), lam]
                         for s, lam in zip(schemes, lams)], dtype=float).reshape(-1, 3)

    def bounds(self) -> list[tuple[float, float]]:
        top = int(self.include_word)
        return [(math.log(self.source_range[0] + 1), math.log(self.source_range[1] + 1 + top + 1)),
                (math.log(self.target_range[0] + 1), math.log(self.target_range[1] + 1 + top + 1)),
                tuple(self.lambda_range)]

    def to_json(self) -> dict:
        return {"source_range": list(self.source_range), "target_range": list(self.target_range),
                "include_word": self.include_word, "lambda_range": list(self.lambda_range)}

    @classmethod
    def from_json(cls, d: dict) -> "SearchSpace":
        return cls(tuple(d["source_range"]), tuple(d["target_range"]), bool(d["include_word"]),
                   tuple(d["lambda_range"]))


@dataclass(frozen=True)
class Trial:
    scheme: SegmentationScheme
    lam: float
    f1: float
    iteration: int

    def to_json(self) -> dict:
        return {"scheme": self.scheme.to_json(), "lambda": self.lam, "f1": self.f1, "iteration": self.iteration}

    @classmethod
    def from_json(cls, d: dict) -> "Trial":
        return cls(SegmentationScheme.from_json(d["scheme"]), float(d["lambda"]), float(d["f1"]), int(d["iteration"]))


@dataclass
class OptimizerState:
    seed: int = 0
    xi_history: list[SegmentationScheme] = field(default_factory=list)
    lambda_history: list[float] = field(default_factory=list)
    f1_trace: list[float] = field(default_factory=list)
    deltas: list[float] = field(default_factory=list)
    all_trials: list[Trial] = field(default_factory=list)
    stop_reason: str | None = None

    @property
    def n_iterations(self) -> int:
        return len(self.xi_history)

    @property
    def best_prefix_len(self) -> int:
        if not self.f1_trace:
            return 0
        return int(np.argmax(self.f1_trace)) + 1

    @property
    def best_f1(self) -> float:
        return self.f1_trace[self.best_prefix_len - 1] if self.f1_trace else 0.0

    @property
    def xi_star(self) -> list[SegmentationScheme]:
        return self.xi_history[: self.best_prefix_len]

    @property
    def lambda_star(self) -> float:
        return self.lambda_history[self.best_prefix_len - 1] if self.lambda_history else 1.0

    def trials_of(self, iteration: int) -> list[Trial]:
        return [t for t in self.all_trials if t.iteration == iteration]

    def to_json(self) -> str:
        doc = {
            "format": STATE_FORMAT,
            "seed": self.seed,
            "xi_history": [s.to_json() for s in self.xi_history],
            "lambda_history": self.lambda_history,
            "f1_trace": self.f1_trace,
            "deltas": self.deltas,
            "best_prefix_len": self.best_prefix_len,
            "xi_star": [s.to_json() for s in self.xi_star],
            "lambda_star": self.lambda_star,
            "stop_reason": self.stop_reason,
            "all_trials": [t.to_json() for t in self.all_trials],
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "OptimizerState":
        d = json.loads(text)
        if d.get("format") != STATE_FORMAT:
            raise ValueError(f"not an optimizer state document (format={d.get('format')!r})")
        return cls(
            seed=int(d["seed"]),
            xi_history=[SegmentationScheme.from_json(s) for s in d["xi_history"]],
            lambda_history=[float(x) for x in d["lambda_history"]],
            f1_trace=[float(x) for x in d["f1_trace"]],
            deltas=[float(x) for x in d["deltas"]],
            all_trials=[Trial.from_json(t) for t in d["all_trials"]],
            stop_reason=d.get("stop_reason"),
        )

    def trace_csv(self) -> str:
        """One row per executed iteration: the accepted cell, its lambda and F1."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "v_p", "v_q", "lambda", "f1"])
        for n, (s, lam, f1) in enumerate(zip(self.xi_history, self.lambda_history, self.f1_trace)):
            w.writerow([n, s.source_size, s.target_size, repr(lam), repr(f1)])
        return buf.getvalue()

    def exploration_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "trial", "v_p", "v_q", "lambda", "f1"])
        counters: dict[int, int] = {}
        for t in self.all_trials:
            k = counters.get(t.iteration, 0)
            counters[t.iteration] = k + 1
            w.writerow([t.iteration, k, t.scheme.source_size, t.scheme.target_size, repr(t.lam), repr(t.f1)])
        return buf.getvalue()

    def selected_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "v_p", "v_q", "lambda", "in_best_prefix"])
        for n, (s, lam) in enumerate(zip(self.xi_history, self.lambda_history)):
            w.writerow([n, s.source_size, s.target_size, repr(lam), int(n < self.best_prefix_len)])
        return buf.getvalue()


@dataclass(frozen=True)
class OptimizerConfig:
    budget: int = 30
    random_init: int = 10
    early_stopping: int = 3
    seed: int = 0
    max_iterations: int | None = None
    n_candidates: int = 1000
    surrogate: str = "tpe"

    def __post_init__(self):
        if self.early_stopping < 1:
            raise ValueError("early_stopping (E) must be >= 1")
        if not self.budget >= self.random_init >= 1:
            raise ValueError("need budget >= random_init >= 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.surrogate not in SURROGATES:
            raise ValueError(f"unknown surrogate {self.surrogate!r}; choose from {sorted(SURROGATES)}")


def _unused_cells(state: OptimizerState, space: SearchSpace, limit: int) -> list[SegmentationScheme] | None:
    """All unused cells when there are at most ``limit`` of them, else None."""
    used = {s for s in state.xi_history if space.contains(s)}
    n_unused = space.n_cells - len(used)
    if n_unused <= 0:
        raise SearchSpaceExhausted("all cells of the search space are selected")
    if n_unused > limit:
        return None
    return [c for c in space.cells() if c not in used]


def _draw(space: SearchSpace, rng: np.random.Generator, excluded: set, size: int,
          pool: list[SegmentationScheme] | None) -> list[tuple[SegmentationScheme, float]]:
    if pool is not None:
        picks = rng.integers(0, len(pool), size=size).tolist()
        lams = rng.uniform(*space.lambda_range, size=size).tolist()
        return [(pool[p], lam) for p, lam in zip(picks, lams)]
    out: list[tuple[SegmentationScheme, float]] = []
    while len(out) < size:
        out.extend(c for c in space.sample_prior(rng, 2 * (size - len(out)) + 8) if c[0] not in excluded)
    return out[:size]


def propose_trials(state: OptimizerState, space: SearchSpace, budget: int, random_init: int, seed: int,
                   n_candidates: int = 1000, surrogate: str = "tpe") -> list[tuple[SegmentationScheme, float]]:
    """Next candidates for the current iteration.

    While fewer than ``random_init`` trials exist for this iteration the
    missing ones are drawn from the log-uniform prior; afterwards one
    candidate is returned, the acquisition maximizer over ``n_candidates``
    prior draws. Cells already in the selection history are never proposed.
    """
    if not budget >= random_init >= 1:
        raise ValueError("need budget >= random_init >= 1")
    iteration = state.n_iterations
    done = state.trials_of(iteration)
    if len(done) >= budget:
        return []
    pool = _unused_cells(state, space, n_candidates)
    excluded = set(state.xi_history)
    rng = np.random.default_rng([seed, iteration, len(done)])
    if len(done) < random_init:
        return _draw(space, rng, excluded, min(random_init, budget) - len(done), pool)

    if pool is not None:
        candidates = [(c, lam) for c, lam in zip(pool, rng.uniform(*space.lambda_range, size=len(pool)).tolist())]
    else:
        candidates = _draw(space, rng, excluded, n_candidates, None)
    if len(candidates) == 1:
        return candidates
    X = space.features([t.scheme for t in done], [t.lam for t in done])
    y = np.array([t.f1 for t in done])
    C = space.features([c for c, _ in candidates], [lam for _, lam in candidates])
    model = SURROGATES[surrogate]() if surrogate != "gp" else SURROGATES[surrogate](random_state=seed)
    acq = model.acquisition(X, y, C, space.bounds())
    return [candidates[int(np.argmax(acq))]]


def _should_continue(deltas: Sequence[float], early_stopping: int) -> bool:
    # with fewer than E iterations the initial delta of +inf is still in the window
    if len(deltas) < early_stopping:
        return True
    return any(d > 0 for d in deltas[-early_stopping:])


def run_iterative_sampling(corpus: ParallelCorpus, gold: GoldAlignment, tables: tuple[MergeTable, MergeTable],
                           space: SearchSpace, config: OptimizerConfig = OptimizerConfig(),
                           aligner_config: AlignerConfig = AlignerConfig(),
                           pipeline: SchemePipeline | None = None, state: OptimizerState | None = None,
                           on_iteration: Callable[[OptimizerState], None] | None = None,
                           ) -> tuple[OptimizerState, AlignmentSet]:
    """Greedy scheme selection; returns the state and the best prefix's alignment.

    ``state`` resumes a previous run (its seed must match ``config.seed``).
    """
    if len(gold.sure) == 0:
        raise ValueError("gold standard has no sure links")
    pipeline = pipeline or SchemePipeline(corpus, tables, aligner_config)
    if state is None:
        state = OptimizerState(seed=config.seed)
    elif state.seed != config.seed:
        raise ValueError(f"resumed state has seed {state.seed}, config has {config.seed}")
    state.stop_reason = None
    f1_prev = state.f1_trace[-1] if state.f1_trace else 0.0

    while True:
        if not _should_continue(state.deltas, config.early_stopping):
            state.stop_reason = "early_stopping"
            break
        if config.max_iterations is not None and state.n_iterations >= config.max_iterations:
            state.stop_reason = "max_iterations"
            break
        iteration = state.n_iterations
        try:
            while True:
                batch = propose_trials(state, space, config.budget, config.random_init, config.seed,
                                       config.n_candidates, config.surrogate)
                if not batch:
                    break
                for scheme, lam in batch:
                    metrics = pipeline.evaluate(state.xi_history + [scheme], lam, gold)
                    state.all_trials.append(Trial(scheme, float(lam), metrics.f1, iteration))
        except SearchSpaceExhausted:
            state.stop_reason = "space_exhausted"
        trials = state.trials_of(iteration)
        if not trials:
            state.stop_reason = state.stop_reason or "space_exhausted"
            break
        best = max(range(len(trials)), key=lambda k: (trials[k].f1, -k))
        chosen = trials[best]
        state.xi_history.append(chosen.scheme)
        state.lambda_history.append(chosen.lam)
        state.f1_trace.append(chosen.f1)
        state.deltas.append(chosen.f1 - f1_prev)
        f1_prev = chosen.f1
        log.info("iteration %d: cell %s lambda %.3f F1 %.4f (%d aligner runs so far)", iteration, chosen.scheme,
                 chosen.lam, chosen.f1, pipeline.n_aligner_runs)
        if on_iteration is not None:
            on_iteration(state)
        if state.stop_reason == "space_exhausted":
            break

    if not state.xi_history:
        return state, AlignmentSet()
    return state, pipeline.aligned(state.xi_star, state.lambda_star)


def clamp_schemes(xi: Sequence[SegmentationScheme], tables: tuple[MergeTable, MergeTable]) -> list[SegmentationScheme]:
    clamped = []
    for s in xi:
        c = clamp_scheme(s, tables)
        if c != s:
            log.warning("transferred cell %s clamped to %s (new merge tables have %d/%d merges)", s, c,
                        tables[0].max_merges, tables[1].max_merges)
        clamped.append(c)
    return unique_in_order(clamped)


def apply_transfer(corpus_new: ParallelCorpus, tables_new: tuple[MergeTable, MergeTable],
                   xi_star: Sequence[SegmentationScheme], lambda_star: float,
                   aligner_config: AlignerConfig = AlignerConfig(),
                   pipeline: SchemePipeline | None = None) -> AlignmentSet:
    """Align a new pair with cells and threshold chosen elsewhere."""
    if not xi_star:
        raise ValueError("xi_star must contain at least one cell")
    schemes = clamp_schemes(xi_star, tables_new)
    pipeline = pipeline or SchemePipeline(corpus_new, tables_new, aligner_config)
    return pipeline.aligned(schemes, lambda_star)
