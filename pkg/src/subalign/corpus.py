"""Parallel corpora, gold standards and alignment link sets.

Everything here is indexed from 0. Links are stored as packed ``int64`` keys
so that set algebra over hundreds of thousands of links stays in numpy.
"""
from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence, TextIO

import numpy as np

_INDEX_BITS = 20
_INDEX_MASK = (1 << _INDEX_BITS) - 1
MAX_INDEX = _INDEX_MASK
MAX_SENTENCES = 1 << (63 - 2 * _INDEX_BITS)


class CorpusError(ValueError):
    """Raised for malformed corpus, gold or alignment input."""


class Link(NamedTuple):
    sentence_id: int
    source_index: int
    target_index: int


def encode_links(sentence, source, target) -> np.ndarray:
    s = np.asarray(sentence, dtype=np.int64)
    i = np.asarray(source, dtype=np.int64)
    j = np.asarray(target, dtype=np.int64)
    if s.size and (i.max() > MAX_INDEX or j.max() > MAX_INDEX or i.min() < 0 or j.min() < 0):
        raise CorpusError(f"link index outside [0, {MAX_INDEX}]")
    return (s << (2 * _INDEX_BITS)) | (i << _INDEX_BITS) | j


def decode_links(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    keys = np.asarray(keys, dtype=np.int64)
    return keys >> (2 * _INDEX_BITS), (keys >> _INDEX_BITS) & _INDEX_MASK, keys & _INDEX_MASK


class AlignmentSet:
    """Immutable set of :class:`Link` backed by a sorted array of packed keys."""

    __slots__ = ("_keys",)

    def __init__(self, links: Iterable[Sequence[int]] = ()):
        links = list(links)
        if links:
            arr = np.asarray(links, dtype=np.int64).reshape(-1, 3)
            if arr.min() < 0:
                raise CorpusError("negative index in link")
            keys = encode_links(arr[:, 0], arr[:, 1], arr[:, 2])
        else:
            keys = np.empty(0, dtype=np.int64)
        self._keys = np.unique(keys)
        self._keys.setflags(write=False)

    @classmethod
    def from_keys(cls, keys: np.ndarray, *, assume_unique: bool = False) -> "AlignmentSet":
        obj = cls.__new__(cls)
        keys = np.asarray(keys, dtype=np.int64)
        obj._keys = keys.copy() if assume_unique else np.unique(keys)
        obj._keys.setflags(write=False)
        return obj

    @classmethod
    def from_arrays(cls, sentence, source, target) -> "AlignmentSet":
        return cls.from_keys(encode_links(sentence, source, target))

    @property
    def keys(self) -> np.ndarray:
        return self._keys

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return decode_links(self._keys)

    def sentence_ids(self) -> np.ndarray:
        return np.unique(self._keys >> (2 * _INDEX_BITS))

    def restrict(self, sentence_ids: Iterable[int]) -> "AlignmentSet":
        """Links whose sentence id is in ``sentence_ids``."""
        ids = np.fromiter(sentence_ids, dtype=np.int64) if not isinstance(sentence_ids, np.ndarray) else sentence_ids
        mask = np.isin(self._keys >> (2 * _INDEX_BITS), ids)
        return AlignmentSet.from_keys(self._keys[mask], assume_unique=True)

    def shift(self, offset: int) -> "AlignmentSet":
        return AlignmentSet.from_keys(self._keys + (np.int64(offset) << (2 * _INDEX_BITS)), assume_unique=True)

    def transpose(self) -> "AlignmentSet":
        s, i, j = self.arrays()
        return AlignmentSet.from_arrays(s, j, i)

    def by_sentence(self) -> dict[int, list[tuple[int, int]]]:
        out: dict[int, list[tuple[int, int]]] = {}
        for s, i, j in zip(*(a.tolist() for a in self.arrays())):
            out.setdefault(s, []).append((i, j))
        return out

    def __len__(self) -> int:
        return int(self._keys.size)

    def __iter__(self) -> Iterator[Link]:
        s, i, j = self.arrays()
        for a, b, c in zip(s.tolist(), i.tolist(), j.tolist()):
            yield Link(a, b, c)

    def __contains__(self, link) -> bool:
        key = int(encode_links([link[0]], [link[1]], [link[2]])[0])
        pos = np.searchsorted(self._keys, key)
        return bool(pos < self._keys.size and self._keys[pos] == key)

    def __eq__(self, other) -> bool:
        if isinstance(other, AlignmentSet):
            return np.array_equal(self._keys, other._keys)
        if isinstance(other, (set, frozenset)):
            return self == AlignmentSet(other)
        return NotImplemented

    def __hash__(self):
        return hash(self._keys.tobytes())

    def __or__(self, other: "AlignmentSet") -> "AlignmentSet":
        return AlignmentSet.from_keys(np.union1d(self._keys, other._keys), assume_unique=True)

    def __and__(self, other: "AlignmentSet") -> "AlignmentSet":
        return AlignmentSet.from_keys(np.intersect1d(self._keys, other._keys, assume_unique=True), assume_unique=True)

    def __sub__(self, other: "AlignmentSet") -> "AlignmentSet":
        return AlignmentSet.from_keys(np.setdiff1d(self._keys, other._keys, assume_unique=True), assume_unique=True)

    def __le__(self, other: "AlignmentSet") -> bool:
        return bool(np.isin(self._keys, other._keys, assume_unique=True).all())

    def __ge__(self, other: "AlignmentSet") -> bool:
        return other <= self

    def __repr__(self) -> str:
        shown = ", ".join(f"({l.sentence_id},{l.source_index},{l.target_index})" for _, l in zip(range(6), self))
        more = ", ..." if len(self) > 6 else ""
        return f"AlignmentSet({{{shown}{more}}})"


@dataclass(frozen=True)
class SentencePair:
    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    pair_id: int

    def __post_init__(self):
        for side, toks in (("source", self.source_tokens), ("target", self.target_tokens)):
            if not toks:
                raise CorpusError(f"pair {self.pair_id}: empty {side} sentence")
            for tok in toks:
                if not tok or any(ch.isspace() for ch in tok):
                    raise CorpusError(f"pair {self.pair_id}: invalid {side} token {tok!r}")


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple[SentencePair, ...] = ()

    def __post_init__(self):
        for n, pair in enumerate(self.pairs):
            if pair.pair_id != n:
                raise CorpusError(f"pair_id {pair.pair_id} at position {n}; ids must be 0..N-1")

    @classmethod
    def from_token_lists(cls, source: Iterable[Sequence[str]], target: Iterable[Sequence[str]]) -> "ParallelCorpus":
        source, target = list(source), list(target)
        if len(source) != len(target):
            raise CorpusError(f"source has {len(source)} sentences, target has {len(target)}")
        return cls(tuple(SentencePair(tuple(s), tuple(t), n) for n, (s, t) in enumerate(zip(source, target))))

    @property
    def size(self) -> int:
        return len(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)

    def __getitem__(self, idx: int) -> SentencePair:
        return self.pairs[idx]

    @property
    def source_sentences(self) -> list[tuple[str, ...]]:
        return [p.source_tokens for p in self.pairs]

    @property
    def target_sentences(self) -> list[tuple[str, ...]]:
        return [p.target_tokens for p in self.pairs]

    def swapped(self) -> "ParallelCorpus":
        return ParallelCorpus(tuple(SentencePair(p.target_tokens, p.source_tokens, p.pair_id) for p in self.pairs))

    def __add__(self, other: "ParallelCorpus") -> "ParallelCorpus":
        n = self.size
        shifted = tuple(SentencePair(p.source_tokens, p.target_tokens, p.pair_id + n) for p in other.pairs)
        return ParallelCorpus(self.pairs + shifted)


@dataclass(frozen=True)
class GoldAlignment:
    sure: AlignmentSet
    possible: AlignmentSet
    covered_sentences: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.sure <= self.possible:
            raise CorpusError("gold sure links must be a subset of possible links")
        missing = set(self.possible.sentence_ids().tolist()) - set(self.covered_sentences)
        if missing:
            raise CorpusError(f"possible links on uncovered sentences {sorted(missing)[:5]}")

    @classmethod
    def from_links(cls, sure: Iterable, possible: Iterable = (), covered: Iterable[int] | None = None) -> "GoldAlignment":
        s = sure if isinstance(sure, AlignmentSet) else AlignmentSet(sure)
        p = possible if isinstance(possible, AlignmentSet) else AlignmentSet(possible)
        p = p | s
        cov = frozenset(int(x) for x in p.sentence_ids()) if covered is None else frozenset(covered) | frozenset(
            int(x) for x in p.sentence_ids())
        return cls(s, p, cov)

    def shift(self, offset: int) -> "GoldAlignment":
        return GoldAlignment(self.sure.shift(offset), self.possible.shift(offset),
                             frozenset(s + offset for s in self.covered_sentences))


def _read_lines(stream: TextIO | str | Iterable[str]) -> list[str]:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    return [line.rstrip("\r\n") for line in stream]


def load_parallel(source_text, target_text) -> ParallelCorpus:
    """Build a corpus from two line streams (or strings) of pre-tokenized text."""
    src, tgt = _read_lines(source_text), _read_lines(target_text)
    if len(src) != len(tgt):
        raise CorpusError(f"line count mismatch: source has {len(src)} lines, target has {len(tgt)}")
    pairs = []
    for n, (s, t) in enumerate(zip(src, tgt)):
        for side, line in (("source", s), ("target", t)):
            if not line.strip():
                raise CorpusError(f"empty {side} line {n + 1}")
        pairs.append(SentencePair(tuple(s.split()), tuple(t.split()), n))
    return ParallelCorpus(tuple(pairs))


def subsample(corpus: ParallelCorpus, n: int, seed: int) -> ParallelCorpus:
    """Uniformly pick ``n`` pairs without replacement, keeping their original order."""
    if n < 1:
        raise ValueError(f"subsample size must be >= 1, got {n}")
    if n >= corpus.size:
        return corpus
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(corpus.size, size=n, replace=False))
    return ParallelCorpus(tuple(
        SentencePair(corpus.pairs[k].source_tokens, corpus.pairs[k].target_tokens, new_id)
        for new_id, k in enumerate(chosen.tolist())))


def attach_evaluation_set(train: ParallelCorpus, eval_corpus: ParallelCorpus,
                          gold: GoldAlignment) -> tuple[ParallelCorpus, GoldAlignment]:
    """Append the gold-annotated sentences to the training corpus and shift gold ids."""
    bad = [s for s in gold.covered_sentences if s >= eval_corpus.size or s < 0]
    if bad:
        raise CorpusError(f"gold references sentence {max(bad)} but evaluation corpus has {eval_corpus.size}")
    return train + eval_corpus, gold.shift(train.size)


_GOLD_LINE = re.compile(r"^\s*(\d+)\s+(\d+)\s+(\d+)(?:\s+(\S+))?(?:\s+\S+)?\s*$")


def read_gold_naacl(stream, one_based: bool = True) -> GoldAlignment:
    """Parse ``sentID srcPos tgtPos [S|P]`` lines; a missing label means S."""
    sure, possible, covered = [], [], set()
    shift = 1 if one_based else 0
    for lineno, line in enumerate(_read_lines(stream), start=1):
        if not line.strip():
            continue
        m = _GOLD_LINE.match(line)
        if not m:
            raise CorpusError(f"gold line {lineno}: cannot parse {line!r}")
        s, i, j = (int(m.group(k)) for k in (1, 2, 3))
        label = (m.group(4) or "S").upper()
        if label not in ("S", "P"):
            raise CorpusError(f"gold line {lineno}: unknown label {m.group(4)!r}")
        if one_based and min(s, i, j) < 1:
            raise CorpusError(f"gold line {lineno}: non-positive index under 1-based numbering")
        link = (s - shift, i - shift, j - shift)
        covered.add(link[0])
        possible.append(link)
        if label == "S":
            sure.append(link)
    return GoldAlignment.from_links(sure, possible, covered)


def write_gold_naacl(gold: GoldAlignment, one_based: bool = True) -> str:
    shift = 1 if one_based else 0
    lines = []
    for link in gold.possible:
        label = "S" if link in gold.sure else "P"
        lines.append(f"{link[0] + shift} {link[1] + shift} {link[2] + shift} {label}")
    return "".join(line + "\n" for line in lines)


_PHARAOH_TOKEN = re.compile(r"^(\d+)-(\d+)$")


def read_pharaoh(stream) -> AlignmentSet:
    """Read one line of ``i-j`` links per sentence; line ``n`` is sentence ``n``."""
    s_ids, src, tgt = [], [], []
    for n, line in enumerate(_read_lines(stream)):
        for tok in line.split():
            m = _PHARAOH_TOKEN.match(tok)
            if not m:
                raise CorpusError(f"pharaoh line {n + 1}: bad link token {tok!r}")
            s_ids.append(n)
            src.append(int(m.group(1)))
            tgt.append(int(m.group(2)))
    return AlignmentSet.from_arrays(s_ids, src, tgt)


def write_pharaoh(alignment: AlignmentSet, n_sentences: int) -> str:
    by_sent = alignment.by_sentence()
    if by_sent and max(by_sent) >= n_sentences:
        raise CorpusError(f"alignment has sentence {max(by_sent)} but only {n_sentences} sentences requested")
    lines = (" ".join(f"{i}-{j}" for i, j in by_sent.get(n, ())) for n in range(n_sentences))
    return "".join(line + "\n" for line in lines)


def out_of_range_links(alignment: AlignmentSet, corpus: ParallelCorpus) -> int:
    """Count links whose indices do not fit the sentence lengths of ``corpus``."""
    s, i, j = alignment.arrays()
    if not s.size:
        return 0
    n = np.array([len(p.source_tokens) for p in corpus.pairs] + [0], dtype=np.int64)
    m = np.array([len(p.target_tokens) for p in corpus.pairs] + [0], dtype=np.int64)
    s_clip = np.minimum(s, corpus.size)
    bad = (s >= corpus.size) | (i >= n[s_clip]) | (j >= m[s_clip])
    return int(bad.sum())
