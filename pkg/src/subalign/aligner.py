"""IBM Model 1 and a diagonally reparameterized Model 2, trained by EM.

Model 2 here follows the fast_align parameterization: the prior over source
positions for target position ``j`` is proportional to
``exp(-tension * |i/n - j/m|)`` (1-based positions) with a fixed NULL mass.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .bpe import SegmentedCorpus
from .corpus import AlignmentSet, ParallelCorpus

log = logging.getLogger(__name__)

FORWARD = "forward"
REVERSE = "reverse"
TENSION_BOUNDS = (0.5, 20.0)
TENSION_STEP = 20.0
_NO_ALPHA_FLOOR = 1e-12
_DENSE_KEY_SPACE = 1 << 24


@dataclass(frozen=True)
class AlignerConfig:
    model1_iterations: int = 5
    model2_iterations: int = 5
    null_probability: float = 0.08
    diagonal_tension: float = 4.0
    tension_updates_per_iter: int = 8
    smoothing_alpha: float = 0.01
    seed: int = 0

    def __post_init__(self):
        for name in ("model1_iterations", "model2_iterations", "tension_updates_per_iter"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        # p0 = 0 is allowed for exact-arithmetic checks; training code treats it as "no NULL"
        if not 0.0 <= self.null_probability < 1.0:
            raise ValueError("null_probability must lie in [0, 1)")
        if self.diagonal_tension <= 0:
            raise ValueError("diagonal_tension must be positive")
        if self.smoothing_alpha < 0:
            raise ValueError("smoothing_alpha must be >= 0")


class EncodedSide:
    """One side of a bitext as flat integer ids plus sentence offsets."""

    def __init__(self, sentences: Iterable[Sequence[str]], vocab: Sequence[str] | None = None):
        sentences = list(sentences)
        if vocab is None:
            index: dict[str, int] = {}
            for sent in sentences:
                for tok in sent:
                    if tok not in index:
                        index[tok] = len(index)
            vocab = list(index)
        else:
            index = {tok: n for n, tok in enumerate(vocab)}
        self.vocab = tuple(vocab)
        self.index = index
        lengths = np.fromiter((len(s) for s in sentences), dtype=np.int64, count=len(sentences))
        if lengths.size and lengths.min() == 0:
            raise ValueError("empty sentence in bitext")
        self.offsets = np.zeros(len(sentences) + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.offsets[1:])
        self.ids = np.fromiter((index.get(tok, -1) for sent in sentences for tok in sent),
                               dtype=np.int64, count=int(self.offsets[-1]))

    def __len__(self) -> int:
        return self.offsets.size - 1

    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets)


@dataclass
class _Cells:
    cell_off: np.ndarray
    cell_pair: np.ndarray
    pair_keys: np.ndarray
    pair_src: np.ndarray
    row_size: np.ndarray


class Bitext:
    """Directional view: ``source`` generates ``target``."""

    def __init__(self, source: EncodedSide, target: EncodedSide):
        if len(source) != len(target):
            raise ValueError(f"bitext sides differ in length: {len(source)} vs {len(target)}")
        self.source = source
        self.target = target

    @classmethod
    def from_tokens(cls, source: Iterable[Sequence[str]], target: Iterable[Sequence[str]]) -> "Bitext":
        return cls(EncodedSide(source), EncodedSide(target))

    def __len__(self) -> int:
        return len(self.source)

    def swapped(self) -> "Bitext":
        return Bitext(self.target, self.source)

    @cached_property
    def cell_off(self) -> np.ndarray:
        return K.cell_offsets(self.source.offsets, self.target.offsets)

    @cached_property
    def cells(self) -> _Cells:
        n_tgt = max(len(self.target.vocab), 1)
        keys = K.cell_keys(self.source.ids, self.source.offsets, self.target.ids, self.target.offsets,
                           self.cell_off, n_tgt)
        key_space = (len(self.source.vocab) + 1) * n_tgt
        if key_space <= _DENSE_KEY_SPACE:
            pair_keys, cell_pair = K.dense_unique_inverse(keys, key_space)
        else:
            pair_keys, cell_pair = np.unique(keys, return_inverse=True)
        pair_src = pair_keys // n_tgt - 1
        row_size = np.bincount(pair_src + 1, minlength=len(self.source.vocab) + 1)
        return _Cells(self.cell_off, cell_pair.astype(np.int64).ravel(), pair_keys, pair_src, row_size)

    @cached_property
    def row_shapes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Distinct ``(n, m, j)`` target-row shapes and the shape index of every row."""
        n_s, m_s = self.source.lengths(), self.target.lengths()
        n_row, m_row = np.repeat(n_s, m_s), np.repeat(m_s, m_s)
        j_row = np.arange(m_row.size, dtype=np.int64) - np.repeat(self.target.offsets[:-1], m_s)
        top = int(max(n_s.max(initial=0), m_s.max(initial=0))) + 1
        packed = (n_row * top + m_row) * top + j_row
        uniq, row_shape = np.unique(packed, return_inverse=True)
        return uniq // (top * top), (uniq // top) % top, uniq % top, row_shape.astype(np.int64).ravel()


def as_bitext(corpus) -> Bitext:
    if isinstance(corpus, Bitext):
        return corpus
    if isinstance(corpus, SegmentedCorpus):
        src, tgt = corpus.token_lists()
        return Bitext.from_tokens(src, tgt)
    if isinstance(corpus, ParallelCorpus):
        return Bitext.from_tokens(corpus.source_sentences, corpus.target_sentences)
    src, tgt = zip(*corpus)
    return Bitext.from_tokens(src, tgt)


@dataclass(frozen=True, eq=False)
class TranslationTable:
    """Sparse ``t(target | source)`` over co-occurring pairs; ``None`` is NULL."""

    source_vocab: tuple[str, ...]
    target_vocab: tuple[str, ...]
    pair_keys: np.ndarray
    probs: np.ndarray
    floor: np.ndarray
    loglik_history: tuple[float, ...] = ()

    @cached_property
    def _src_index(self) -> dict:
        return {tok: n for n, tok in enumerate(self.source_vocab)}

    @cached_property
    def _tgt_index(self) -> dict:
        return {tok: n for n, tok in enumerate(self.target_vocab)}

    def _key(self, target: str, source: str | None) -> int | None:
        f = self._tgt_index.get(target)
        e = -1 if source is None else self._src_index.get(source)
        if f is None or e is None:
            return None
        return (e + 1) * max(len(self.target_vocab), 1) + f

    def prob(self, target: str, source: str | None) -> float:
        """``t(target | source)``; unseen pairs get the row's smoothing floor."""
        key = self._key(target, source)
        if key is not None:
            pos = np.searchsorted(self.pair_keys, key)
            if pos < self.pair_keys.size and self.pair_keys[pos] == key:
                return float(self.probs[pos])
        e = -1 if source is None else self._src_index.get(source)
        return float(self.floor[e + 1]) if e is not None else float(self.floor.min())

    def row(self, source: str | None) -> dict[str, float]:
        n_tgt = max(len(self.target_vocab), 1)
        e = -1 if source is None else self._src_index[source]
        lo = np.searchsorted(self.pair_keys, (e + 1) * n_tgt)
        hi = np.searchsorted(self.pair_keys, (e + 2) * n_tgt)
        return {self.target_vocab[k % n_tgt]: float(p)
                for k, p in zip(self.pair_keys[lo:hi].tolist(), self.probs[lo:hi].tolist())}

    def row_sums(self) -> np.ndarray:
        n_tgt = max(len(self.target_vocab), 1)
        return np.bincount(self.pair_keys // n_tgt, weights=self.probs, minlength=len(self.source_vocab) + 1)

    def lookup(self, keys: np.ndarray, src_of_key: np.ndarray) -> np.ndarray:
        """Vectorized probability lookup with floor fallback for unseen keys."""
        pos = np.searchsorted(self.pair_keys, keys)
        pos_c = np.minimum(pos, self.pair_keys.size - 1)
        found = (self.pair_keys.size > 0) & (self.pair_keys[pos_c] == keys) if self.pair_keys.size else np.zeros(keys.size, bool)
        fallback = np.where(src_of_key >= -1, self.floor[np.clip(src_of_key + 1, 0, None)], self.floor.min())
        return np.where(found, self.probs[pos_c] if self.pair_keys.size else 0.0, fallback)


@dataclass(frozen=True, eq=False)
class AlignmentModel:
    table: TranslationTable
    null_probability: float
    diagonal: bool = False
    tension: float = 0.0


def _m_step(cells: _Cells, acc: np.ndarray, alpha: float, previous: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    row = cells.pair_src + 1
    totals = np.bincount(row, weights=acc, minlength=cells.row_size.size)
    denom = totals + alpha * cells.row_size
    safe = np.where(denom > 0, denom, 1.0)
    probs = np.where(denom[row] > 0, (acc + alpha) / safe[row], previous)
    floor = np.where(denom > 0, alpha / safe, 0.0) if alpha > 0 else np.zeros_like(denom)
    floor = np.where(floor > 0, floor, _NO_ALPHA_FLOOR)
    return probs, floor


def _uniform(cells: _Cells) -> np.ndarray:
    return 1.0 / cells.row_size[cells.pair_src + 1]


def _make_table(bitext: Bitext, cells: _Cells, probs, floor, history) -> TranslationTable:
    return TranslationTable(bitext.source.vocab, bitext.target.vocab, cells.pair_keys, probs, floor,
                            tuple(history))


def _init_probs(bitext: Bitext, init: TranslationTable | None) -> np.ndarray:
    cells = bitext.cells
    if init is None:
        return _uniform(cells)
    if init.pair_keys is cells.pair_keys or np.array_equal(init.pair_keys, cells.pair_keys):
        return np.asarray(init.probs, dtype=np.float64).copy()
    return init.lookup(cells.pair_keys, cells.pair_src)


def train_model1(corpus, config: AlignerConfig = AlignerConfig(), init: TranslationTable | None = None) -> TranslationTable:
    """EM for IBM Model 1 with a fixed NULL mass ``p0``."""
    bitext = as_bitext(corpus)
    if len(bitext) == 0:
        raise ValueError("cannot train on an empty corpus")
    cells = bitext.cells
    probs = _init_probs(bitext, init)
    floor = np.full(cells.row_size.size, _NO_ALPHA_FLOOR)
    history = []
    dummy = np.empty(0)
    for _ in range(config.model1_iterations):
        acc = np.zeros(probs.size)
        comp = np.zeros(probs.size)
        ll = K.e_step(bitext.source.offsets, bitext.target.offsets, cells.cell_off, cells.cell_pair, probs,
                      config.null_probability, False, 0.0, acc, comp, dummy, False)
        history.append(ll)
        probs, floor = _m_step(cells, acc, config.smoothing_alpha, probs)
    return _make_table(bitext, cells, probs, floor, history)


def expected_prior_loglik(corpus, posteriors: np.ndarray, tension: float) -> tuple[float, float]:
    """Expected log positional prior for fixed flat cell posteriors, and its tension derivative."""
    bitext = as_bitext(corpus)
    return K.tension_objective(bitext.source.offsets, bitext.target.offsets, bitext.cell_off,
                               np.asarray(posteriors, dtype=np.float64), float(tension))


def tension_gradient(corpus, posteriors: np.ndarray, tension: float) -> float:
    """Derivative of the expected log positional prior, via per-row-shape sums."""
    bitext = as_bitext(corpus)
    shape_n, shape_m, shape_j, row_shape = bitext.row_shapes
    mass, emp = K.posterior_row_stats(bitext.source.offsets, bitext.target.offsets, bitext.cell_off,
                                      np.asarray(posteriors, dtype=np.float64))
    weight = np.bincount(row_shape, weights=mass, minlength=shape_n.size)
    _, _, mean_h = K.row_shape_priors(shape_n, shape_m, shape_j, float(tension))
    return float(weight @ mean_h - emp)


def update_tension(bitext: Bitext, posteriors: np.ndarray, tension: float, steps: int) -> float:
    """``steps`` clamped gradient-ascent steps on the expected log prior."""
    n_tokens = max(int(bitext.target.offsets[-1]), 1)
    lo, hi = TENSION_BOUNDS
    shape_n, shape_m, shape_j, row_shape = bitext.row_shapes
    mass, emp = K.posterior_row_stats(bitext.source.offsets, bitext.target.offsets, bitext.cell_off, posteriors)
    weight = np.bincount(row_shape, weights=mass, minlength=shape_n.size)
    for _ in range(steps):
        _, _, mean_h = K.row_shape_priors(shape_n, shape_m, shape_j, tension)
        grad = float(weight @ mean_h - emp)
        tension = min(hi, max(lo, tension + TENSION_STEP * grad / n_tokens))
    return tension


def train_diag_model2(corpus, config: AlignerConfig = AlignerConfig(),
                      init: TranslationTable | None = None) -> tuple[TranslationTable, float]:
    """EM for the diagonal-prior Model 2, starting from Model 1 parameters."""
    bitext = as_bitext(corpus)
    if len(bitext) == 0:
        raise ValueError("cannot train on an empty corpus")
    cells = bitext.cells
    probs = _init_probs(bitext, init)
    floor = init.floor.copy() if init is not None and init.floor.size == cells.row_size.size else \
        np.full(cells.row_size.size, _NO_ALPHA_FLOOR)
    tension = float(config.diagonal_tension)
    history = []
    post = np.empty(cells.cell_pair.size)
    for _ in range(config.model2_iterations):
        acc = np.zeros(probs.size)
        comp = np.zeros(probs.size)
        shape_n, shape_m, shape_j, row_shape = bitext.row_shapes
        pri, pri_off, _ = K.row_shape_priors(shape_n, shape_m, shape_j, tension)
        ll = K.e_step_shaped(bitext.source.offsets, bitext.target.offsets, cells.cell_off, cells.cell_pair, probs,
                             config.null_probability, row_shape, pri, pri_off, acc, comp, post, True)
        history.append(ll)
        probs, floor = _m_step(cells, acc, config.smoothing_alpha, probs)
        tension = update_tension(bitext, post, tension, config.tension_updates_per_iter)
    return _make_table(bitext, cells, probs, floor, history), tension


def train(corpus, config: AlignerConfig = AlignerConfig()) -> AlignmentModel:
    """Model 1 followed by diagonal Model 2; the usual single-direction pipeline."""
    bitext = as_bitext(corpus)
    table = train_model1(bitext, config)
    if config.model2_iterations == 0:
        return AlignmentModel(table, config.null_probability, False, 0.0)
    table, tension = train_diag_model2(bitext, config, table)
    return AlignmentModel(table, config.null_probability, True, tension)


def _cell_probs(bitext: Bitext, table: TranslationTable) -> np.ndarray:
    if bitext.source.vocab == table.source_vocab and bitext.target.vocab == table.target_vocab:
        cells = bitext.cells
        if cells.pair_keys is table.pair_keys or np.array_equal(cells.pair_keys, table.pair_keys):
            return table.probs[cells.cell_pair]
    # re-encode against the model vocabulary; unknown tokens fall back to the floor
    src_map = np.array([table._src_index.get(tok, -2) for tok in bitext.source.vocab] + [-2], dtype=np.int64)
    tgt_map = np.array([table._tgt_index.get(tok, -1) for tok in bitext.target.vocab] + [-1], dtype=np.int64)
    cell_src, cell_tgt = K.cell_sides(src_map[bitext.source.ids], bitext.source.offsets,
                                      tgt_map[bitext.target.ids], bitext.target.offsets, bitext.cell_off)
    known = (cell_src >= -1) & (cell_tgt >= 0)
    n_tgt = max(len(table.target_vocab), 1)
    keys = np.where(known, (cell_src + 1) * n_tgt + cell_tgt, -1)
    return table.lookup(keys, cell_src)


def posteriors(corpus, model: AlignmentModel) -> list[np.ndarray]:
    """Per sentence an ``m x (n + 1)`` matrix of ``p(a_j = i)``; column 0 is NULL."""
    bitext = as_bitext(corpus)
    tcell = _cell_probs(bitext, model.table)
    n_cells = tcell.size
    ident = np.arange(n_cells, dtype=np.int64)
    acc = np.zeros(n_cells)
    comp = np.zeros(n_cells)
    post = np.empty(n_cells)
    K.e_step(bitext.source.offsets, bitext.target.offsets, bitext.cell_off, ident, tcell,
             model.null_probability, model.diagonal, model.tension, acc, comp, post, True)
    out = []
    n_len, m_len = bitext.source.lengths(), bitext.target.lengths()
    for s in range(len(bitext)):
        a, b = bitext.cell_off[s], bitext.cell_off[s + 1]
        out.append(post[a:b].reshape(m_len[s], n_len[s] + 1))
    return out


@dataclass(frozen=True, eq=False)
class DirectionalAlignment:
    """Per generated token the chosen generating position (-1 = NULL).

    For ``forward`` the generated side is the target; for ``reverse`` it is the
    source. ``links`` is always in (source, target) orientation.
    """

    direction: str
    assignments: np.ndarray
    offsets: np.ndarray
    links: AlignmentSet = field(repr=False)

    def per_sentence(self) -> list[list[int | None]]:
        return [[None if a < 0 else int(a) for a in self.assignments[self.offsets[s]:self.offsets[s + 1]]]
                for s in range(self.offsets.size - 1)]


def viterbi_align(corpus, model: AlignmentModel, direction: str = FORWARD) -> DirectionalAlignment:
    """Decode the best position per generated token. For ``reverse`` the model
    must have been trained on the side-swapped bitext."""
    if direction not in (FORWARD, REVERSE):
        raise ValueError(f"direction must be {FORWARD!r} or {REVERSE!r}")
    bitext = as_bitext(corpus)
    view = bitext if direction == FORWARD else bitext.swapped()
    tcell = _cell_probs(view, model.table)
    a = K.viterbi(view.source.offsets, view.target.offsets, view.cell_off, tcell,
                  model.null_probability, model.diagonal, model.tension)
    sent = np.repeat(np.arange(len(view), dtype=np.int64), view.target.lengths())
    pos = np.arange(a.size, dtype=np.int64) - view.target.offsets[sent]
    keep = a >= 0
    if direction == FORWARD:
        links = AlignmentSet.from_arrays(sent[keep], a[keep], pos[keep])
    else:
        links = AlignmentSet.from_arrays(sent[keep], pos[keep], a[keep])
    return DirectionalAlignment(direction, a, view.target.offsets, links)


def align_bidirectional(corpus, config: AlignerConfig = AlignerConfig()) -> tuple[DirectionalAlignment, DirectionalAlignment]:
    bitext = as_bitext(corpus)
    fwd = viterbi_align(bitext, train(bitext, config), FORWARD)
    rev = viterbi_align(bitext, train(bitext.swapped(), config), REVERSE)
    return fwd, rev
