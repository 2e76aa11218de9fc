"""Slow, direct reference implementations used only as test oracles.

None of these import package internals; they are written from the textbook
definitions so that agreement with the package is meaningful.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict

NULL = None
EOW = "\ue000"  # must sort like the package marker for tie-breaks to agree


# ------------------------------------------------------------------ IBM Model 1 by enumeration

def _prior(i, n, p0):
    return p0 if i is NULL else (1.0 - p0) / n


def model1_em(corpus, iterations, p0, alpha):
    """EM for Model 1 where every E-step enumerates all alignment vectors.

    ``corpus`` is a list of (source tokens, target tokens). Returns the table
    ``t[(f, e)]`` (``e`` may be NULL) after the given number of iterations.
    """
    cooc = defaultdict(set)
    for src, tgt in corpus:
        for e in list(src) + [NULL]:
            cooc[e].update(tgt)
    t = {(f, e): 1.0 / len(fs) for e, fs in cooc.items() for f in fs}
    for _ in range(iterations):
        counts = defaultdict(float)
        for src, tgt in corpus:
            positions = [NULL] + list(range(len(src)))
            joint = {}
            for a in itertools.product(positions, repeat=len(tgt)):
                p = 1.0
                for j, i in enumerate(a):
                    e = NULL if i is NULL else src[i]
                    p *= _prior(i, len(src), p0) * t[(tgt[j], e)]
                joint[a] = p
            z = sum(joint.values())
            if z == 0:
                continue
            for a, p in joint.items():
                for j, i in enumerate(a):
                    e = NULL if i is NULL else src[i]
                    counts[(tgt[j], e)] += p / z
        new_t = {}
        for e, fs in cooc.items():
            total = sum(counts[(f, e)] for f in fs) + alpha * len(fs)
            for f in fs:
                new_t[(f, e)] = (counts[(f, e)] + alpha) / total if total > 0 else t[(f, e)]
        t = new_t
    return t


def model1_posteriors(src, tgt, t, p0):
    """``post[j][k]`` with k = 0 for NULL and k = i + 1 for source position i, by enumeration."""
    positions = [NULL] + list(range(len(src)))
    marg = [[0.0] * (len(src) + 1) for _ in tgt]
    z = 0.0
    for a in itertools.product(positions, repeat=len(tgt)):
        p = 1.0
        for j, i in enumerate(a):
            e = NULL if i is NULL else src[i]
            p *= _prior(i, len(src), p0) * t[(tgt[j], e)]
        z += p
        for j, i in enumerate(a):
            marg[j][0 if i is NULL else i + 1] += p
    return [[x / z for x in row] for row in marg]


def model1_viterbi(src, tgt, t, p0, tie_tolerance=1e-12):
    """Best full alignment vector by enumeration; ties prefer smaller source indices, NULL last.

    Scores within a relative ``tie_tolerance`` of the best count as tied: in exact
    arithmetic they are equal, and summation order alone can split them by an ulp.
    """
    order = list(range(len(src))) + [NULL]
    scored = []
    for a in itertools.product(order, repeat=len(tgt)):
        p = 1.0
        for j, i in enumerate(a):
            e = NULL if i is NULL else src[i]
            p *= _prior(i, len(src), p0) * t[(tgt[j], e)]
        scored.append((a, p))
    best_p = max(p for _, p in scored)
    return next(a for a, p in scored if p >= best_p * (1 - tie_tolerance))


# ------------------------------------------------------------------ diagonal prior

def expected_log_prior(sentences, posteriors, tension):
    """sum_s sum_j sum_{i real} gamma_ij * log(exp(-tension h_ij) / Z_j), 1-based positions."""
    total = 0.0
    for (n, m), post in zip(sentences, posteriors):
        for j in range(1, m + 1):
            hs = [abs(i / n - j / m) for i in range(1, n + 1)]
            log_z = math.log(sum(math.exp(-tension * h) for h in hs))
            for i in range(1, n + 1):
                total += post[j - 1][i] * (-tension * hs[i - 1] - log_z)
    return total


# ------------------------------------------------------------------ BPE

def bpe_learn(sentences, max_merges, min_frequency=2):
    """Textbook BPE: recount every pair from scratch before each merge."""
    words = Counter(w for s in sentences for w in s)
    segs = {w: tuple(w) + (EOW,) for w in words}
    merges, affected = [], []
    for _ in range(max_merges):
        pairs = Counter()
        for w, c in words.items():
            sym = segs[w]
            for p in zip(sym, sym[1:]):
                pairs[p] += c
        if not pairs:
            break
        best_count = max(pairs.values())
        if best_count < min_frequency:
            break
        best = min(p for p, c in pairs.items() if c == best_count)
        n_sent = sum(1 for s in sentences if any(best in zip(segs[w], segs[w][1:]) for w in s))
        merges.append(best)
        affected.append(n_sent)
        for w in words:
            segs[w] = _merge(segs[w], best)
    return merges, affected


def _merge(sym, pair):
    out, i = [], 0
    while i < len(sym):
        if i + 1 < len(sym) and (sym[i], sym[i + 1]) == pair:
            out.append(sym[i] + sym[i + 1])
            i += 2
        else:
            out.append(sym[i])
            i += 1
    return tuple(out)


def bpe_replay(word, merges, k):
    """Apply merges 1..k literally, one after the other, to a single word."""
    sym = tuple(word) + (EOW,)
    for pair in merges[:k]:
        sym = _merge(sym, pair)
    pieces = [s[: -len(EOW)] if s.endswith(EOW) else s for s in sym]
    return [p for p in pieces if p]


# ------------------------------------------------------------------ grow-diag-final-and

def grow_diag_final_and(e2f, f2e):
    """Moses-style symmetrization (grow-diag, then final-and), transcribed from the heuristic."""
    neighbors = [(-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)]
    union = set(e2f) | set(f2e)
    alignment = set(e2f) & set(f2e)
    e_len = max((i for i, _ in union), default=-1) + 1
    f_len = max((j for _, j in union), default=-1) + 1

    def e_aligned(i):
        return any(a == i for a, _ in alignment)

    def f_aligned(j):
        return any(b == j for _, b in alignment)

    added = True
    while added:
        added = False
        for e in range(e_len):
            for f in range(f_len):
                if (e, f) not in alignment:
                    continue
                for de, df in neighbors:
                    ne, nf = e + de, f + df
                    if (ne, nf) in union and (ne, nf) not in alignment and (not e_aligned(ne) or not f_aligned(nf)):
                        alignment.add((ne, nf))
                        added = True
    for direction in (e2f, f2e):
        for e in range(e_len):
            for f in range(f_len):
                if (e, f) in direction and (e, f) not in alignment and not e_aligned(e) and not f_aligned(f):
                    alignment.add((e, f))
    return alignment
