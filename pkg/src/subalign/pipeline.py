"""Segment, align, symmetrize and project one scheme at a time, with caching."""
from __future__ import annotations

import logging
from typing import Callable, Iterable, Sequence

import numpy as np

from .aligner import AlignerConfig, Bitext, EncodedSide, align_bidirectional
from .bpe import WORD, MergeTable, SegmentationScheme, SegmentedCorpus, segment_side
from .corpus import AlignmentSet, GoldAlignment, ParallelCorpus
from .linkops import INTERSECTION, aggregate, project_to_words, symmetrize
from .metrics import Metrics, score

log = logging.getLogger(__name__)

SOURCE, TARGET = 0, 1

# (segmented corpus) -> (forward links, reverse links) in subword coordinates
Aligner = Callable[[SegmentedCorpus], tuple[AlignmentSet, AlignmentSet]]


class SchemePipeline:
    """Word-level alignments of one corpus under many segmentation schemes.

    Each scheme is aligned at most once; later requests for it, and every
    aggregation over a set of schemes, reuse the cached word links.
    """

    def __init__(self, corpus: ParallelCorpus, tables: tuple[MergeTable, MergeTable],
                 aligner_config: AlignerConfig = AlignerConfig(), method: str = INTERSECTION,
                 external: Aligner | None = None):
        if corpus.size == 0:
            raise ValueError("empty corpus")
        self.corpus = corpus
        self.tables = tuple(tables)
        self.aligner_config = aligner_config
        self.method = method
        self.external = external
        self._sentences = (corpus.source_sentences, corpus.target_sentences)
        self._sides: dict[tuple[int, object], tuple] = {}
        self._links: dict[SegmentationScheme, AlignmentSet] = {}
        self._restricted: dict[tuple[SegmentationScheme, int], AlignmentSet] = {}
        self.n_aligner_runs = 0

    def _side(self, which: int, k):
        key = (which, k)
        hit = self._sides.get(key)
        if hit is None:
            segs = segment_side(self._sentences[which], self.tables[which], k)
            tokens = [s.subword_tokens for s in segs]
            maps = np.fromiter((w for s in segs for w in s.word_of_token), dtype=np.int64)
            enc = EncodedSide(tokens)
            hit = (enc, (maps, enc.offsets), segs)
            self._sides[key] = hit
        return hit

    def segmented(self, scheme: SegmentationScheme) -> SegmentedCorpus:
        scheme.validate(*self.tables)
        return SegmentedCorpus(scheme, self._side(SOURCE, scheme.source_size)[2],
                               self._side(TARGET, scheme.target_size)[2])

    def word_links(self, scheme: SegmentationScheme) -> AlignmentSet:
        """Symmetrized word-level links of a single scheme (cached)."""
        hit = self._links.get(scheme)
        if hit is not None:
            return hit
        scheme.validate(*self.tables)
        src_enc, src_maps, _ = self._side(SOURCE, scheme.source_size)
        tgt_enc, tgt_maps, _ = self._side(TARGET, scheme.target_size)
        if self.external is not None:
            fwd, rev = self.external(self.segmented(scheme))
        else:
            fwd, rev = align_bidirectional(Bitext(src_enc, tgt_enc), self.aligner_config)
        self.n_aligner_runs += 1
        sym = symmetrize(fwd, rev, self.method)
        links = project_to_words(sym, src_maps, tgt_maps)
        self._links[scheme] = links
        log.debug("aligned scheme %s: %d word links", scheme, len(links))
        return links

    def _restricted_links(self, scheme: SegmentationScheme, gold: GoldAlignment) -> AlignmentSet:
        key = (scheme, id(gold))
        hit = self._restricted.get(key)
        if hit is None:
            covered = np.fromiter(gold.covered_sentences, dtype=np.int64, count=len(gold.covered_sentences))
            hit = self.word_links(scheme).restrict(covered)
            self._restricted[key] = hit
        return hit

    def aligned(self, schemes: Sequence[SegmentationScheme], lam: float) -> AlignmentSet:
        if not schemes:
            raise ValueError("at least one scheme is required")
        return aggregate([self.word_links(s) for s in schemes], lam)

    def evaluate(self, schemes: Sequence[SegmentationScheme], lam: float, gold: GoldAlignment) -> Metrics:
        if not schemes:
            raise ValueError("at least one scheme is required")
        # scoring only looks at covered sentences, so aggregate just those
        return score(aggregate([self._restricted_links(s, gold) for s in schemes], lam), gold)

    @property
    def cached_schemes(self) -> list[SegmentationScheme]:
        return list(self._links)


def evaluate_configuration(corpus: ParallelCorpus, gold: GoldAlignment, tables: tuple[MergeTable, MergeTable],
                           schemes: Sequence[SegmentationScheme], lam: float,
                           aligner_config: AlignerConfig = AlignerConfig(),
                           pipeline: SchemePipeline | None = None) -> Metrics:
    """F1 of the ``lam``-vote over ``schemes``; pass ``pipeline`` to reuse cached alignments."""
    pipeline = pipeline or SchemePipeline(corpus, tables, aligner_config)
    return pipeline.evaluate(list(schemes), lam, gold)


def clamp_scheme(scheme: SegmentationScheme, tables: tuple[MergeTable, MergeTable]) -> SegmentationScheme:
    sizes = []
    for k, table in zip((scheme.source_size, scheme.target_size), tables):
        sizes.append(k if k == WORD else min(int(k), table.max_merges))
    return SegmentationScheme(*sizes)


def unique_in_order(items: Iterable) -> list:
    seen, out = set(), []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out
