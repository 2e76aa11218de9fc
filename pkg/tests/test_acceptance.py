"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
The real-data interop check runs when SUBALIGN_WPT_DIR (train.src, train.tgt,
eval.src, eval.tgt, eval.gold) and SUBALIGN_EXTERNAL_CMD are set; otherwise the
same pipeline runs against a bundled stub aligner on synthetic data.
"""
import itertools
import json
import os
import random
import shlex
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from subalign.aligner import AlignerConfig, AlignmentModel, posteriors, tension_gradient, train_model1, viterbi_align
from subalign.bpe import WORD_SCHEME, learn_bpe, segment, strip_continuation
from subalign.cli import main as cli_main
from subalign.corpus import AlignmentSet, read_pharaoh
from subalign.linkops import GDFA, INTERSECTION, UNION, aggregate, symmetrize
from subalign.metrics import Metrics
from subalign.metrics import score
from subalign.optimizer import OptimizerConfig, SearchSpace, apply_transfer, run_iterative_sampling
from subalign.pipeline import SchemePipeline
from subalign.synthetic import synthetic_pair, write_fixture

sys.path.insert(0, str(Path(__file__).parent))
from oracles import NULL, expected_log_prior, model1_em, model1_posteriors, model1_viterbi  # noqa: E402

RESULTS = []
N_TRAIN, N_EVAL = 5000, 500
OPT = OptimizerConfig(budget=30, random_init=10, early_stopping=3, seed=0, max_iterations=5)


def record(name, passed, detail):
    RESULTS.append((name, bool(passed), detail))
    print(f"\n[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"{name}: {detail}"


class Run:
    """One optimization on a synthetic pair, with its word-level baseline."""

    def __init__(self, seed):
        self.pair = synthetic_pair(N_TRAIN, N_EVAL, seed)
        self.corpus, self.gold = self.pair.combined()
        self.tables = (learn_bpe(self.corpus.source_sentences, 100_000),
                       learn_bpe(self.corpus.target_sentences, 100_000))
        self.baseline = SchemePipeline(self.corpus, self.tables).evaluate([WORD_SCHEME], 1.0, self.gold).f1

    def optimize(self):
        t0 = time.perf_counter()
        space = SearchSpace.from_tables(self.tables)
        state, alignment = run_iterative_sampling(self.corpus, self.gold, self.tables, space, OPT)
        return state, alignment, time.perf_counter() - t0


@pytest.fixture(scope="module")
def run_a():
    run = Run(seed=0)
    run.state, run.alignment, run.seconds = run.optimize()
    return run


# ---------------------------------------------------------------- 1

def test_formula_exactness():
    m = Metrics.from_counts(4, 3, 2, 3)
    ok = abs(m.precision - 0.75) <= 1e-6 and abs(m.recall - 0.666667) <= 1e-6 and abs(m.f1 - 0.705882) <= 1e-6
    record("formula exactness", ok, f"P={m.precision:.6f} R={m.recall:.6f} F1={m.f1:.6f}")


# ---------------------------------------------------------------- 2

def _enumerable_corpora():
    """All one-pair corpora over {a,b}x{x,y} with 1-3 tokens per side, all two-pair corpora over
    length-1/2 sentences, and a seeded sample of three-pair corpora."""
    def sents(alpha, max_len):
        return [s for n in range(1, max_len + 1) for s in itertools.product(alpha, repeat=n)]
    src3, tgt3 = sents("ab", 3), sents("xy", 3)
    singles = [(s, t) for s in src3 for t in tgt3]
    out = [[p] for p in singles]
    short = [(s, t) for s in sents("ab", 2) for t in sents("xy", 2)]
    out += [list(c) for c in itertools.combinations(short, 2)]
    rng = random.Random(0)
    out += [[rng.choice(singles) for _ in range(3)] for _ in range(300)]
    return out


def test_em_oracle():
    p0, alpha, iterations = 0.08, 0.01, 5
    corpora = _enumerable_corpora()
    worst, vit_mismatch, t_pkg = 0.0, 0, 0.0
    for corpus in corpora:
        t0 = time.perf_counter()
        table = train_model1(corpus, AlignerConfig(model1_iterations=iterations, null_probability=p0,
                                                   smoothing_alpha=alpha))
        model = AlignmentModel(table, p0)
        post = posteriors(corpus, model)
        vit = viterbi_align(corpus, model).per_sentence()
        t_pkg += time.perf_counter() - t0
        ref = model1_em(corpus, iterations, p0, alpha)
        for (f, e), p in ref.items():
            worst = max(worst, abs(table.prob(f, e) - p))
        for (s, t), got_p, got_v in zip(corpus, post, vit):
            worst = max(worst, float(np.abs(got_p - model1_posteriors(s, t, ref, p0)).max()))
            expected = [None if a is NULL else a for a in model1_viterbi(s, t, ref, p0)]
            vit_mismatch += got_v != expected
    ok = worst <= 1e-9 and vit_mismatch == 0 and t_pkg < 10
    record("EM oracle", ok, f"{len(corpora)} corpora, max |diff|={worst:.2e}, Viterbi mismatches={vit_mismatch}, "
                            f"aligner time {t_pkg:.2f}s")


# ---------------------------------------------------------------- 3

def test_tension_gradient():
    from subalign.aligner import Bitext
    worst = 0.0
    for case in range(20):
        rng = np.random.default_rng(1000 + case)
        n_sent = int(rng.integers(1, 8))
        src = [[f"s{rng.integers(6)}" for _ in range(rng.integers(1, 7))] for _ in range(n_sent)]
        tgt = [[f"t{rng.integers(6)}" for _ in range(rng.integers(1, 7))] for _ in range(n_sent)]
        bitext = Bitext.from_tokens(src, tgt)
        mats = [rng.dirichlet(np.ones(len(s) + 1), size=len(t)) for s, t in zip(src, tgt)]
        flat = np.concatenate([m.ravel() for m in mats])
        shapes = [(len(s), len(t)) for s, t in zip(src, tgt)]
        tension, eps = float(rng.uniform(0.5, 20.0)), 1e-5
        fd = (expected_log_prior(shapes, mats, tension + eps) - expected_log_prior(shapes, mats, tension - eps)) / (2 * eps)
        worst = max(worst, abs(tension_gradient(bitext, flat, tension) - fd) / max(abs(fd), 1e-8))
    record("tension gradient", worst <= 1e-4, f"max relative error {worst:.2e} over 20 corpora")


# ---------------------------------------------------------------- 4

def _random_links(rng, n=40):
    return AlignmentSet({(int(rng.integers(4)), int(rng.integers(7)), int(rng.integers(7)))
                         for _ in range(int(rng.integers(0, n)))})


def test_set_laws():
    rng = np.random.default_rng(7)
    failures = {"chain": 0, "antitone": 0, "lambda0": 0, "lambda1": 0, "round_trip": 0, "monotone_k": 0}
    for _ in range(1000):
        f, r = _random_links(rng), _random_links(rng)
        inter, gdfa, union = (symmetrize(f, r, m) for m in (INTERSECTION, GDFA, UNION))
        failures["chain"] += not (inter <= gdfa <= union)

        schemes = [_random_links(rng) for _ in range(int(rng.integers(1, 7)))]
        lo, hi = sorted(rng.uniform(0, 1, 2))
        failures["antitone"] += not aggregate(schemes, hi) <= aggregate(schemes, lo)
        u, i = schemes[0], schemes[0]
        for s in schemes[1:]:
            u, i = u | s, i & s
        failures["lambda0"] += aggregate(schemes, 0.0) != u
        failures["lambda1"] += aggregate(schemes, 1.0) != i

        corpus = [["".join(rng.choice(list("abcde"), size=int(rng.integers(1, 9)))) for _ in range(rng.integers(1, 6))]
                  for _ in range(int(rng.integers(1, 12)))]
        table = learn_bpe(corpus, 60)
        k = int(rng.integers(0, len(table) + 1))
        for sent in corpus:
            seg = segment(sent, table, k)
            for w, word in enumerate(sent):
                pieces = [t for t, o in zip(seg.subword_tokens, seg.word_of_token) if o == w]
                failures["round_trip"] += strip_continuation(pieces) != word
            coarser = segment(sent, table, min(k + 1, len(table)))
            failures["monotone_k"] += len(coarser.subword_tokens) > len(seg.subword_tokens)
    record("set laws", not any(failures.values()), f"1000 cases each, failures {failures}")


# ---------------------------------------------------------------- 5

def test_algorithm_contract(run_a):
    state = run_a.state
    best = np.maximum.accumulate(state.f1_trace)
    monotone = bool((np.diff(best) >= 0).all())
    improving = [k for k, d in enumerate(state.deltas) if d > 0]
    within_patience = state.n_iterations <= improving[-1] + 1 + OPT.early_stopping
    again, _, _ = run_a.optimize()
    identical = again.to_json() == state.to_json()
    ok = monotone and within_patience and identical and run_a.seconds < 300
    record("optimizer contract", ok,
           f"{state.n_iterations} iterations ({state.stop_reason}), non-decreasing={monotone}, "
           f"within E={within_patience}, byte-identical rerun={identical}, runtime {run_a.seconds:.0f}s")


# ---------------------------------------------------------------- 6

def test_synthetic_reproduction(run_a):
    gain = 100 * (run_a.state.best_f1 - run_a.baseline)
    rescored = score(run_a.alignment, run_a.gold).f1
    ok = gain >= 2.0 and rescored == run_a.state.best_f1 and run_a.seconds <= 600
    record("synthetic reproduction", ok,
           f"word-level F1 {run_a.baseline:.4f} -> subword sampling {run_a.state.best_f1:.4f} "
           f"(+{gain:.1f} points, {len(run_a.state.xi_star)} cells, lambda {run_a.state.lambda_star:.3f}), "
           f"runtime {run_a.seconds:.0f}s")


# ---------------------------------------------------------------- 7

def test_transfer(run_a):
    b = Run(seed=1)
    links = apply_transfer(b.corpus, b.tables, run_a.state.xi_star, run_a.state.lambda_star)
    f1 = score(links, b.gold).f1
    gain = 100 * (f1 - b.baseline)
    record("transfer", gain >= 1.0, f"pair B word-level F1 {b.baseline:.4f} -> transferred {f1:.4f} (+{gain:.1f} points)")


# ---------------------------------------------------------------- 8

STUB = f"{shlex.quote(sys.executable)} {shlex.quote(str(Path(__file__).with_name('stub_aligner.py')))} {{input}} {{output}}"


def _interop_f1(paths, command, out):
    corpus = ["--source", str(paths["train.src"]), "--target", str(paths["train.tgt"]),
              "--eval-source", str(paths["eval.src"]), "--eval-target", str(paths["eval.tgt"])]
    gold = ["--gold", str(paths["eval.gold"])]
    codes = [cli_main(["align", *corpus, "--external", command, "--output", str(out / "word.pharaoh")]),
             cli_main(["evaluate", "--alignment", str(out / "word.pharaoh"), *gold, "--output", str(out / "word.json")]),
             cli_main(["optimize", *corpus, *gold, "--external", command, "--budget", "8", "--random-init", "4",
                       "--early-stopping", "1", "--max-iterations", "3", "--max-merges", "20000",
                       "--out-dir", str(out / "opt")]),
             cli_main(["evaluate", "--alignment", str(out / "opt" / "alignment.pharaoh"), *gold,
                       "--output", str(out / "opt.json")])]
    if any(codes):
        return None, None, codes
    word = json.loads((out / "word.json").read_text())["f1"]
    sampled = json.loads((out / "opt.json").read_text())["f1"]
    return word, sampled, codes


def test_interop(tmp_path):
    data_dir, command = os.environ.get("SUBALIGN_WPT_DIR"), os.environ.get("SUBALIGN_EXTERNAL_CMD")
    if data_dir and command:
        paths = {n: Path(data_dir) / n for n in ("train.src", "train.tgt", "eval.src", "eval.tgt", "eval.gold")}
        source = f"user data in {data_dir} with {command!r}"
    else:
        paths = write_fixture(tmp_path / "data", n_train=1000, n_eval=200, seed=5)
        command = STUB
        source = "synthetic data with the bundled stub aligner (real-data check not run: SUBALIGN_WPT_DIR unset)"
    word, sampled, codes = _interop_f1(paths, command, tmp_path)
    ok = word is not None and sampled >= word
    detail = f"exit codes {codes}" if word is None else f"word-level F1 {word:.4f}, subword sampling F1 {sampled:.4f}"
    record("interop", ok, f"{detail}; {source}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
