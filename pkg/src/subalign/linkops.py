"""Symmetrization, subword-to-word projection and threshold voting."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bpe import SegmentationScheme
from .corpus import AlignmentSet, Link, decode_links

INTERSECTION = "intersection"
UNION = "union"
GDFA = "gdfa"
METHODS = (INTERSECTION, UNION, GDFA)

_NEIGHBORS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


def _links(x) -> AlignmentSet:
    if isinstance(x, AlignmentSet):
        return x
    links = getattr(x, "links", None)
    if isinstance(links, AlignmentSet):
        return links
    return AlignmentSet(x)


def symmetrize(forward, reverse, method: str = INTERSECTION) -> AlignmentSet:
    fwd, rev = _links(forward), _links(reverse)
    if method == INTERSECTION:
        return fwd & rev
    if method == UNION:
        return fwd | rev
    if method == GDFA:
        return _grow_diag_final_and(fwd, rev)
    raise ValueError(f"unknown symmetrization method {method!r}; expected one of {METHODS}")


def _grow_diag_final_and(fwd: AlignmentSet, rev: AlignmentSet) -> AlignmentSet:
    f_by, r_by = fwd.by_sentence(), rev.by_sentence()
    out: list[tuple[int, int, int]] = []
    for s in sorted(f_by.keys() | r_by.keys()):
        e2f, f2e = set(f_by.get(s, ())), set(r_by.get(s, ()))
        out.extend((s, i, j) for i, j in gdfa_sentence(e2f, f2e))
    return AlignmentSet(out)


def gdfa_sentence(e2f: set[tuple[int, int]], f2e: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """grow-diag-final-and for one sentence, in the Moses formulation."""
    union = e2f | f2e
    alignment = e2f & f2e
    src_aligned = {i for i, _ in alignment}
    tgt_aligned = {j for _, j in alignment}
    if union:
        src_range = range(max(i for i, _ in union) + 1)
        tgt_range = range(max(j for _, j in union) + 1)
    else:
        src_range = tgt_range = range(0)

    added = True
    while added:
        added = False
        for i in src_range:
            for j in tgt_range:
                if (i, j) not in alignment:
                    continue
                for di, dj in _NEIGHBORS:
                    ni, nj = i + di, j + dj
                    if (ni not in src_aligned or nj not in tgt_aligned) and (ni, nj) in union \
                            and (ni, nj) not in alignment:
                        alignment.add((ni, nj))
                        src_aligned.add(ni)
                        tgt_aligned.add(nj)
                        added = True

    for direction in (e2f, f2e):
        for i in src_range:
            for j in tgt_range:
                if i not in src_aligned and j not in tgt_aligned and (i, j) in direction:
                    alignment.add((i, j))
                    src_aligned.add(i)
                    tgt_aligned.add(j)
    return alignment


class ProjectionError(ValueError):
    """A subword link points outside the word map it is projected through."""


def flatten_maps(maps: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.fromiter((len(m) for m in maps), dtype=np.int64, count=len(maps))
    offsets = np.zeros(len(maps) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    flat = np.fromiter((w for m in maps for w in m), dtype=np.int64, count=int(offsets[-1]))
    return flat, offsets


def project_to_words(subword_alignment: AlignmentSet, source_maps, target_maps) -> AlignmentSet:
    """Map each subword link through the per-sentence word-of-token maps.

    ``source_maps``/``target_maps`` are either sequences of per-sentence maps
    or pre-flattened ``(flat, offsets)`` pairs.
    """
    src_flat, src_off = source_maps if isinstance(source_maps, tuple) and len(source_maps) == 2 \
        and isinstance(source_maps[0], np.ndarray) else flatten_maps(source_maps)
    tgt_flat, tgt_off = target_maps if isinstance(target_maps, tuple) and len(target_maps) == 2 \
        and isinstance(target_maps[0], np.ndarray) else flatten_maps(target_maps)
    s, i, j = _links(subword_alignment).arrays()
    if not s.size:
        return AlignmentSet()
    n_sent = src_off.size - 1
    if s.max() >= n_sent or s.max() >= tgt_off.size - 1:
        raise ProjectionError(f"link on sentence {int(s.max())} but maps cover {n_sent} sentences")
    src_len = src_off[s + 1] - src_off[s]
    tgt_len = tgt_off[s + 1] - tgt_off[s]
    bad = (i >= src_len) | (j >= tgt_len)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise ProjectionError(f"subword link {(int(s[k]), int(i[k]), int(j[k]))} outside the word map "
                              f"(lengths {int(src_len[k])}, {int(tgt_len[k])})")
    return AlignmentSet.from_arrays(s, src_flat[src_off[s] + i], tgt_flat[tgt_off[s] + j])


@dataclass(frozen=True)
class SchemeAlignment:
    scheme: SegmentationScheme
    word_links: AlignmentSet


@dataclass(frozen=True, eq=False)
class VoteTally:
    """Number of schemes supporting each word link, out of ``total_schemes``."""

    keys: np.ndarray
    counts: np.ndarray
    total_schemes: int

    def __len__(self) -> int:
        return int(self.keys.size)

    def items(self):
        s, i, j = decode_links(self.keys)
        for a, b, c, n in zip(s.tolist(), i.tolist(), j.tolist(), self.counts.tolist()):
            yield Link(a, b, c), n

    def threshold(self, lam: float) -> AlignmentSet:
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        keep = (self.counts >= 1) & (self.counts / self.total_schemes >= lam)
        return AlignmentSet.from_keys(self.keys[keep], assume_unique=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sentence", "i", "j", "count", "T"])
        for link, n in self.items():
            writer.writerow([link.sentence_id, link.source_index, link.target_index, n, self.total_schemes])
        return buf.getvalue()


def tally(scheme_alignments: Sequence[SchemeAlignment | AlignmentSet]) -> VoteTally:
    if len(scheme_alignments) == 0:
        raise ValueError("cannot aggregate zero schemes")
    sets = [a.word_links if isinstance(a, SchemeAlignment) else _links(a) for a in scheme_alignments]
    # each AlignmentSet is already unique, so one scheme contributes one vote per link
    keys, counts = np.unique(np.concatenate([a.keys for a in sets]), return_counts=True)
    return VoteTally(keys, counts, len(sets))


def aggregate(scheme_alignments: Sequence[SchemeAlignment | AlignmentSet], lam: float) -> AlignmentSet:
    """Keep a word link when at least a fraction ``lam`` of the schemes contain it."""
    return tally(scheme_alignments).threshold(lam)
