"""Byte-pair encoding merge tables and granularity-controlled segmentation.

A merge table is learned once per language side; any prefix of its merges
defines one segmentation granularity. ``segment(..., k)`` applies the first
``k`` merges, ``WORD`` keeps whole words.
"""
from __future__ import annotations

import csv
import heapq
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .corpus import ParallelCorpus

END_OF_WORD = "\ue000"  # private-use code point, never produced by tokenizers
CONTINUATION = "@@"
WORD = "WORD"

Size = Union[int, str]


@dataclass(frozen=True)
class MergeTable:
    merges: tuple[tuple[str, str], ...]
    affected: tuple[int, ...] = ()
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.merges)) != len(self.merges):
            raise ValueError("duplicate merge in table")
        if self.affected and len(self.affected) != len(self.merges):
            raise ValueError("affected counts must match merges one to one")
        if any(a < 1 for a in self.affected):
            raise ValueError("every merge must affect at least one sentence")
        object.__setattr__(self, "_ranks", {pair: r for r, pair in enumerate(self.merges)})

    @property
    def max_merges(self) -> int:
        return len(self.merges)

    def __len__(self) -> int:
        return len(self.merges)

    def segment_word(self, word: str, k: int) -> tuple[str, ...]:
        """Subwords of ``word`` after the first ``k`` merges (continuation-marked)."""
        key = (word, k)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        symbols = _apply_merges(list(word) + [END_OF_WORD], self._ranks, k)
        pieces = [s[: -len(END_OF_WORD)] if s.endswith(END_OF_WORD) else s for s in symbols]
        pieces = [p for p in pieces if p]
        out = tuple(p + CONTINUATION for p in pieces[:-1]) + (pieces[-1],)
        if len(self._cache) > 2_000_000:
            self._cache.clear()
        self._cache[key] = out
        return out

    def to_text(self) -> str:
        lines = [str(self.max_merges)] + [f"{a} {b}" for a, b in self.merges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, affected: Sequence[int] = ()) -> "MergeTable":
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty merge table file")
        try:
            declared = int(lines[0].strip())
        except ValueError:
            raise ValueError(f"merge table header must be the merge count, got {lines[0]!r}") from None
        merges = []
        for n, line in enumerate(lines[1:], start=2):
            parts = line.split(" ")
            if len(parts) != 2 or not all(parts):
                raise ValueError(f"merge table line {n}: expected 'left right', got {line!r}")
            merges.append((parts[0], parts[1]))
        if len(merges) != declared:
            raise ValueError(f"merge table declares {declared} merges but lists {len(merges)}")
        return cls(tuple(merges), tuple(affected))


def _apply_merges(symbols: list[str], ranks: dict, k: int) -> list[str]:
    # Lowest-rank-first is equivalent to replaying merges 1..k in order:
    # a merge can only create pairs of higher rank than itself.
    while len(symbols) > 1:
        best, best_rank = None, k
        for pair in zip(symbols, symbols[1:]):
            r = ranks.get(pair)
            if r is not None and r < best_rank:
                best, best_rank = pair, r
        if best is None:
            break
        symbols = _merge_pair(symbols, best)
    return symbols


def _merge_pair(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    a, b = pair
    out, i, n = [], 0, len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == a and symbols[i + 1] == b:
            out.append(a + b)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def learn_bpe(corpus_side: Iterable[Sequence[str]], max_merges: int, min_frequency: int = 2) -> MergeTable:
    """Learn BPE merges over one side of a corpus.

    Each word starts as its characters plus an end-of-word symbol; the most
    frequent adjacent pair is merged until ``max_merges`` merges were made or
    the best pair occurs fewer than ``min_frequency`` times. Ties go to the
    lexicographically smallest ``(left, right)``. Alongside every merge the
    number of sentences containing the pair at that moment is recorded.
    """
    sentences = [list(s) for s in corpus_side]
    if not sentences:
        raise ValueError("cannot learn BPE on an empty corpus")
    if max_merges < 0:
        raise ValueError("max_merges must be non-negative")

    freq: Counter = Counter()
    sent_of_word: dict[str, set] = defaultdict(set)
    for sid, sent in enumerate(sentences):
        for w in sent:
            freq[w] += 1
            sent_of_word[w].add(sid)
    words = sorted(freq)
    wfreq = [freq[w] for w in words]
    wsents = [sent_of_word[w] for w in words]
    symbols = [list(w) + [END_OF_WORD] for w in words]

    stats: Counter = Counter()
    index: dict[tuple[str, str], set] = defaultdict(set)
    for wi, sym in enumerate(symbols):
        for pair in zip(sym, sym[1:]):
            stats[pair] += wfreq[wi]
            index[pair].add(wi)
    heap = [(-c, a, b) for (a, b), c in stats.items()]
    heapq.heapify(heap)

    merges: list[tuple[str, str]] = []
    affected: list[int] = []
    while heap and len(merges) < max_merges:
        negc, a, b = heapq.heappop(heap)
        pair = (a, b)
        if stats.get(pair, 0) != -negc:
            continue
        if -negc < min_frequency:
            break
        members = sorted(index.pop(pair, ()))
        touched = set()
        for wi in members:
            touched.update(wsents[wi])
        merges.append(pair)
        affected.append(len(touched))

        changed = set()
        for wi in members:
            old = symbols[wi]
            new = _merge_pair(old, pair)
            old_pairs = Counter(zip(old, old[1:]))
            new_pairs = Counter(zip(new, new[1:]))
            for p in old_pairs.keys() | new_pairs.keys():
                delta = new_pairs[p] - old_pairs[p]
                if delta:
                    stats[p] += delta * wfreq[wi]
                    changed.add(p)
                    if stats[p] <= 0:
                        del stats[p]
                if new_pairs[p]:
                    index[p].add(wi)
                elif p in index:
                    index[p].discard(wi)
            symbols[wi] = new
        stats.pop(pair, None)
        for p in changed:
            c = stats.get(p, 0)
            if c > 0 and p != pair:
                heapq.heappush(heap, (-c, p[0], p[1]))
    return MergeTable(tuple(merges), tuple(affected))


@dataclass(frozen=True)
class SegmentedSentence:
    subword_tokens: tuple[str, ...]
    word_of_token: tuple[int, ...]


@dataclass(frozen=True)
class SegmentationScheme:
    """One cell of the source-by-target granularity grid."""

    source_size: Size
    target_size: Size

    def validate(self, source_table: MergeTable, target_table: MergeTable) -> None:
        for side, size, table in (("source", self.source_size, source_table),
                                  ("target", self.target_size, target_table)):
            _check_size(size, table, side)

    def to_json(self) -> list:
        return [self.source_size, self.target_size]

    @classmethod
    def from_json(cls, value) -> "SegmentationScheme":
        return cls(*(v if v == WORD else int(v) for v in value))

    def sort_key(self) -> tuple:
        return tuple((1, 0) if v == WORD else (0, v) for v in (self.source_size, self.target_size))

    def __str__(self) -> str:
        return f"({self.source_size},{self.target_size})"


WORD_SCHEME = SegmentationScheme(WORD, WORD)


def _check_size(k: Size, table: MergeTable, side: str = "") -> None:
    if k == WORD:
        return
    if isinstance(k, bool) or not isinstance(k, int):
        raise ValueError(f"{side} merge count must be an int or WORD, got {k!r}".strip())
    if k < 0 or k > table.max_merges:
        raise ValueError(f"{side} merge count {k} outside [0, {table.max_merges}]".strip())


def segment(sentence_tokens: Sequence[str], table: MergeTable, k: Size) -> SegmentedSentence:
    _check_size(k, table)
    if k == WORD:
        return SegmentedSentence(tuple(sentence_tokens), tuple(range(len(sentence_tokens))))
    toks: list[str] = []
    owner: list[int] = []
    for w, word in enumerate(sentence_tokens):
        pieces = table.segment_word(word, k)
        toks.extend(pieces)
        owner.extend([w] * len(pieces))
    return SegmentedSentence(tuple(toks), tuple(owner))


def strip_continuation(tokens: Sequence[str]) -> str:
    return "".join(t[: -len(CONTINUATION)] if t.endswith(CONTINUATION) else t for t in tokens[:-1]) + tokens[-1]


@dataclass(frozen=True)
class SegmentedCorpus:
    scheme: SegmentationScheme
    source: tuple[SegmentedSentence, ...]
    target: tuple[SegmentedSentence, ...]

    def __len__(self) -> int:
        return len(self.source)

    def token_lists(self) -> tuple[list[tuple[str, ...]], list[tuple[str, ...]]]:
        return [s.subword_tokens for s in self.source], [t.subword_tokens for t in self.target]


def segment_side(sentences: Iterable[Sequence[str]], table: MergeTable, k: Size) -> tuple[SegmentedSentence, ...]:
    _check_size(k, table)
    return tuple(segment(s, table, k) for s in sentences)


def segment_corpus(corpus: ParallelCorpus, scheme: SegmentationScheme,
                   tables: tuple[MergeTable, MergeTable]) -> SegmentedCorpus:
    src_table, tgt_table = tables
    scheme.validate(src_table, tgt_table)
    return SegmentedCorpus(
        scheme,
        segment_side(corpus.source_sentences, src_table, scheme.source_size),
        segment_side(corpus.target_sentences, tgt_table, scheme.target_size),
    )


def affected_curve(table: MergeTable) -> list[tuple[int, int]]:
    """Per-merge affected-sentence counts as ``(k, count)`` with ``k`` from 1."""
    return [(k, c) for k, c in enumerate(table.affected, start=1)]


def curve_to_csv(curve: Sequence[tuple[int, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "affected_sentences"])
    writer.writerows(curve)
    return buf.getvalue()


def curve_from_csv(text: str) -> list[int]:
    rows = list(csv.reader(io.StringIO(text)))
    return [int(r[1]) for r in rows[1:] if r]
