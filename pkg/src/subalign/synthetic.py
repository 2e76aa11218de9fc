"""Synthetic bitexts with agglutinative targets and exact gold links.

The source side is a sequence of independent random words. The target side
translates each word through a random bijective lexicon, but fuses some
adjacent word pairs into single compound tokens and attaches the
translation of a source function word as a suffix to the following content
word. Every target token is gold-aligned (sure) to all source words it
realizes, so word-level aligners lose recall exactly where fused forms are
rare.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import GoldAlignment, ParallelCorpus, attach_evaluation_set, write_gold_naacl

_CONSONANTS = "bcdfghjklmnpqrstvwxz"
_VOWELS = "aeiouy"


@dataclass(frozen=True)
class MorphologyFamily:
    """Generator settings shared by every language pair of one family."""

    n_content: int = 1500
    n_function: int = 8
    zipf_exponent: float = 1.1
    min_len: int = 4
    max_len: int = 10
    compound_prob: float = 0.3
    suffix_prob: float = 0.6
    function_rate: float = 0.25
    swap_prob: float = 0.05


def _make_word(rng: np.random.Generator, n_syllables: int) -> str:
    return "".join(_CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
                   for _ in range(n_syllables))


def _lexicon(rng: np.random.Generator, size: int, syllables: tuple[int, int], taken: set) -> list[str]:
    words: list[str] = []
    while len(words) < size:
        w = _make_word(rng, int(rng.integers(syllables[0], syllables[1] + 1)))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


@dataclass(frozen=True)
class SyntheticPair:
    train: ParallelCorpus
    eval_corpus: ParallelCorpus
    eval_gold: GoldAlignment

    def combined(self) -> tuple[ParallelCorpus, GoldAlignment]:
        """Training pairs followed by the gold-annotated pairs, gold ids shifted."""
        return attach_evaluation_set(self.train, self.eval_corpus, self.eval_gold)


class SyntheticGenerator:
    def __init__(self, family: MorphologyFamily = MorphologyFamily(), seed: int = 0):
        self.family = family
        self.seed = seed
        rng = np.random.default_rng([seed, 0])
        fam = family
        taken: set = set()
        self.src_content = _lexicon(rng, fam.n_content, (2, 3), taken)
        self.src_function = _lexicon(rng, fam.n_function, (1, 1), taken)
        taken_t: set = set()
        self.tgt_content = _lexicon(rng, fam.n_content, (2, 3), taken_t)
        # suffixes are single syllables distinct from each other
        self.tgt_suffix = _lexicon(rng, fam.n_function, (1, 1), taken_t)
        ranks = np.arange(1, fam.n_content + 1, dtype=float)
        weights = ranks ** (-fam.zipf_exponent)
        self.content_p = weights / weights.sum()

    def sentence(self, rng: np.random.Generator):
        fam = self.family
        length = int(rng.integers(fam.min_len, fam.max_len + 1))
        src: list[str] = []
        kinds: list[tuple[str, int]] = []
        while len(src) < length:
            if rng.random() < fam.function_rate and len(src) < length - 1:
                f = int(rng.integers(fam.n_function))
                src.append(self.src_function[f])
                kinds.append(("f", f))
            c = int(rng.choice(fam.n_content, p=self.content_p))
            src.append(self.src_content[c])
            kinds.append(("c", c))

        units: list[tuple[str, list[int]]] = []
        i = 0
        while i < len(src):
            kind, idx = kinds[i]
            if kind == "f":
                # function word followed by its content word
                c = kinds[i + 1][1]
                if rng.random() < fam.suffix_prob:
                    units.append((self.tgt_content[c] + self.tgt_suffix[idx], [i, i + 1]))
                else:
                    units.append((self.tgt_suffix[idx], [i]))
                    units.append((self.tgt_content[c], [i + 1]))
                i += 2
                continue
            if i + 1 < len(src) and kinds[i + 1][0] == "c" and rng.random() < fam.compound_prob:
                units.append((self.tgt_content[idx] + self.tgt_content[kinds[i + 1][1]], [i, i + 1]))
                i += 2
                continue
            units.append((self.tgt_content[idx], [i]))
            i += 1
        for k in range(len(units) - 1):
            if rng.random() < fam.swap_prob:
                units[k], units[k + 1] = units[k + 1], units[k]
        tgt = [u[0] for u in units]
        links = [(s, j) for j, (_, srcs) in enumerate(units) for s in srcs]
        return src, tgt, links

    def generate(self, n: int, seed_offset: int = 1):
        rng = np.random.default_rng([self.seed, seed_offset])
        src, tgt, links = [], [], []
        for sid in range(n):
            s, t, l = self.sentence(rng)
            src.append(s)
            tgt.append(t)
            links.extend((sid, i, j) for i, j in l)
        return ParallelCorpus.from_token_lists(src, tgt), links

    def pair(self, n_train: int = 5000, n_eval: int = 500) -> SyntheticPair:
        train, _ = self.generate(n_train, seed_offset=1)
        eval_corpus, links = self.generate(n_eval, seed_offset=2)
        gold = GoldAlignment.from_links(links, links, range(n_eval))
        return SyntheticPair(train, eval_corpus, gold)


def synthetic_pair(n_train: int = 5000, n_eval: int = 500, seed: int = 0,
                   family: MorphologyFamily = MorphologyFamily()) -> SyntheticPair:
    return SyntheticGenerator(family, seed).pair(n_train, n_eval)


def write_fixture(directory, n_train: int = 5000, n_eval: int = 500, seed: int = 0,
                  family: MorphologyFamily = MorphologyFamily()) -> dict[str, Path]:
    """Write a synthetic pair as plain files: train/eval sides and a 1-based NAACL gold file."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    pair = synthetic_pair(n_train, n_eval, seed, family)
    paths = {name: out / name for name in ("train.src", "train.tgt", "eval.src", "eval.tgt", "eval.gold")}
    for corpus, src, tgt in ((pair.train, "train.src", "train.tgt"), (pair.eval_corpus, "eval.src", "eval.tgt")):
        paths[src].write_text("".join(" ".join(s) + "\n" for s in corpus.source_sentences), encoding="utf-8")
        paths[tgt].write_text("".join(" ".join(t) + "\n" for t in corpus.target_sentences), encoding="utf-8")
    paths["eval.gold"].write_text(write_gold_naacl(pair.eval_gold, one_based=True), encoding="utf-8")
    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Write a synthetic agglutinative bitext with gold links.")
    parser.add_argument("out_dir")
    parser.add_argument("--n-train", type=int, default=5000)
    parser.add_argument("--n-eval", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    for path in write_fixture(args.out_dir, args.n_train, args.n_eval, args.seed).values():
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
