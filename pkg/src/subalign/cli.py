"""Command-line interface.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines whose
keys are long option names (``budget = 30``, ``max-merges = 8000``); options
given on the command line win over the file. Exit status is 0 on success,
1 when the pipeline fails and 2 for usage or input validation errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .aligner import AlignerConfig
from .bpe import WORD, MergeTable, SegmentationScheme, affected_curve, curve_from_csv, curve_to_csv, learn_bpe, \
    segment_corpus
from .corpus import AlignmentSet, CorpusError, GoldAlignment, ParallelCorpus, load_parallel, out_of_range_links, \
    read_gold_naacl, read_pharaoh, subsample, write_pharaoh
from .external import AdapterError, ExternalAligner
from .linkops import METHODS, ProjectionError, aggregate, tally
from .metrics import InvalidGoldError, score
from .optimizer import OptimizerConfig, OptimizerState, SearchSpace, clamp_schemes, run_iterative_sampling
from .pipeline import SchemePipeline

log = logging.getLogger("subalign")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
DEFAULT_MAX_MERGES = 100_000


class UsageError(Exception):
    """Bad arguments or unusable input files (exit status 2)."""


# ---------------------------------------------------------------- helpers

def _read_text(path: str | Path) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {p}")
    return p.read_text(encoding="utf-8")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _write_json(path: Path, doc: dict) -> None:
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def _parse_size(text: str):
    text = text.strip()
    if text.upper() == WORD:
        return WORD
    try:
        k = int(text)
    except ValueError:
        raise UsageError(f"merge count must be an integer or WORD, got {text!r}") from None
    if k < 0:
        raise UsageError(f"merge count must be >= 0, got {k}")
    return k


def parse_scheme(text: str) -> SegmentationScheme:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"scheme must look like 'SRC,TGT' (e.g. WORD,500), got {text!r}")
    return SegmentationScheme(_parse_size(parts[0]), _parse_size(parts[1]))


def _parse_range(text: str | None, kind=int):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"range must look like 'LO,HI', got {text!r}")
    try:
        return kind(parts[0]), kind(parts[1])
    except ValueError:
        raise UsageError(f"range bounds must be numbers, got {text!r}") from None


def load_corpus(args) -> tuple[ParallelCorpus, int]:
    """Training corpus (optionally subsampled) plus appended evaluation pairs.

    Returns the corpus and the id of the first evaluation pair (the gold offset).
    """
    corpus = load_parallel(_read_text(args.source).splitlines(), _read_text(args.target).splitlines())
    if args.subsample is not None:
        corpus = subsample(corpus, args.subsample, args.seed)
    offset = corpus.size
    if bool(args.eval_source) != bool(args.eval_target):
        raise UsageError("--eval-source and --eval-target must be given together")
    if args.eval_source:
        extra = load_parallel(_read_text(args.eval_source).splitlines(), _read_text(args.eval_target).splitlines())
        corpus = corpus + extra
    elif getattr(args, "gold", None):
        offset = 0
    return corpus, offset


def load_gold(args, corpus: ParallelCorpus, offset: int) -> GoldAlignment:
    gold = read_gold_naacl(_read_text(args.gold).splitlines(), one_based=not args.zero_based)
    if offset:
        n_eval = corpus.size - offset
        bad = [s for s in gold.covered_sentences if s >= n_eval]
        if bad:
            raise UsageError(f"gold references sentence {max(bad) + 1} but the evaluation set has {n_eval} pairs")
        gold = gold.shift(offset)
    bad_links = out_of_range_links(gold.possible, corpus)
    if bad_links:
        raise UsageError(f"{bad_links} gold links fall outside their sentences; "
                         "is --zero-based set correctly?")
    return gold


def save_tables(out_dir: Path, tables: tuple[MergeTable, MergeTable]) -> None:
    for name, table in zip(("source", "target"), tables):
        _write(out_dir / f"{name}.merges", table.to_text())
        _write(out_dir / f"{name}.affected.csv", curve_to_csv(affected_curve(table)))


def load_tables(merges_dir: str | Path) -> tuple[MergeTable, MergeTable]:
    d = Path(merges_dir)
    tables = []
    for name in ("source", "target"):
        text = _read_text(d / f"{name}.merges")
        curve = d / f"{name}.affected.csv"
        affected = curve_from_csv(curve.read_text(encoding="utf-8")) if curve.is_file() else ()
        try:
            tables.append(MergeTable.from_text(text, affected))
        except ValueError as exc:
            raise UsageError(f"{d / (name + '.merges')}: {exc}") from None
    return tables[0], tables[1]


def tables_for(args, corpus: ParallelCorpus) -> tuple[MergeTable, MergeTable]:
    if args.merges_dir:
        return load_tables(args.merges_dir)
    log.info("learning BPE tables (max %d merges per side)", args.max_merges)
    return learn_bpe(corpus.source_sentences, args.max_merges), learn_bpe(corpus.target_sentences, args.max_merges)


def aligner_config(args) -> AlignerConfig:
    try:
        return AlignerConfig(args.model1_iterations, args.model2_iterations, args.null_probability,
                             args.diagonal_tension, args.tension_updates, args.smoothing_alpha, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def make_pipeline(args, corpus, tables) -> SchemePipeline:
    external = ExternalAligner(args.external) if args.external else None
    return SchemePipeline(corpus, tables, aligner_config(args), args.method, external)


def _meta(args, command: str, **extra) -> dict:
    return {"tool": "subalign", "version": __version__, "command": command, "seed": args.seed, **extra}


def _write_alignment(path: Path, alignment: AlignmentSet, n_sentences: int, meta: dict) -> None:
    _write(path, write_pharaoh(alignment, n_sentences))
    _write_json(_sidecar(path), {**meta, "n_sentences": n_sentences, "n_links": len(alignment)})


# ---------------------------------------------------------------- commands

def cmd_learn_bpe(args) -> int:
    corpus, _ = load_corpus(args)
    tables = learn_bpe(corpus.source_sentences, args.max_merges), learn_bpe(corpus.target_sentences, args.max_merges)
    out = Path(args.out_dir)
    save_tables(out, tables)
    _write_json(out / "bpe.meta.json", _meta(args, "learn-bpe", max_merges=args.max_merges,
                                             n_sentences=corpus.size,
                                             learned=[tables[0].max_merges, tables[1].max_merges]))
    return EXIT_OK


def cmd_segment(args) -> int:
    corpus, _ = load_corpus(args)
    tables = tables_for(args, corpus)
    scheme = parse_scheme(args.scheme)
    try:
        seg = segment_corpus(corpus, scheme, tables)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out_dir)
    for name, side in (("source", seg.source), ("target", seg.target)):
        _write(out / f"{name}.seg", "".join(" ".join(s.subword_tokens) + "\n" for s in side))
        _write(out / f"{name}.wordmap", "".join(" ".join(map(str, s.word_of_token)) + "\n" for s in side))
    _write_json(out / "segment.meta.json", _meta(args, "segment", scheme=scheme.to_json()))
    return EXIT_OK


def cmd_align(args) -> int:
    corpus, offset = load_corpus(args)
    scheme = parse_scheme(args.scheme)
    if scheme.source_size == WORD and scheme.target_size == WORD and not args.merges_dir:
        tables = (MergeTable(()), MergeTable(()))
    else:
        tables = tables_for(args, corpus)
    try:
        scheme.validate(*tables)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    links = make_pipeline(args, corpus, tables).word_links(scheme)
    _write_alignment(Path(args.output), links, corpus.size,
                     _meta(args, "align", scheme=scheme.to_json(), method=args.method, eval_offset=offset,
                           external=args.external))
    return EXIT_OK


def cmd_aggregate(args) -> int:
    sets, n_sentences = [], 0
    for path in args.inputs:
        lines = _read_text(path).splitlines()
        n_sentences = max(n_sentences, len(lines))
        sets.append(read_pharaoh(lines))
    if not 0.0 <= args.lam <= 1.0:
        raise UsageError(f"--lam must lie in [0, 1], got {args.lam}")
    # carry the gold offset through so evaluate can line the gold up with the aggregate
    offsets = set()
    for path in args.inputs:
        meta = _sidecar(Path(path))
        if meta.is_file():
            offsets.add(json.loads(meta.read_text(encoding="utf-8")).get("eval_offset", 0))
    if len(offsets) > 1:
        raise UsageError(f"inputs disagree on the gold sentence offset: {sorted(offsets)}")
    out = Path(args.output)
    _write_alignment(out, aggregate(sets, args.lam), n_sentences,
                     _meta(args, "aggregate", lam=args.lam, inputs=[str(p) for p in args.inputs],
                           eval_offset=offsets.pop() if offsets else 0))
    if args.tally:
        _write(Path(args.tally), tally(sets).to_csv())
    return EXIT_OK


def cmd_evaluate(args) -> int:
    lines = _read_text(args.alignment).splitlines()
    predicted = read_pharaoh(lines)
    offset = args.gold_offset
    if offset is None:
        meta = _sidecar(Path(args.alignment))
        offset = json.loads(meta.read_text(encoding="utf-8")).get("eval_offset", 0) if meta.is_file() else 0
    gold = read_gold_naacl(_read_text(args.gold).splitlines(), one_based=not args.zero_based)
    if offset:
        gold = gold.shift(offset)
    extra = {}
    if args.source and args.target:
        corpus = load_parallel(_read_text(args.source).splitlines(), _read_text(args.target).splitlines())
        if args.eval_source and args.eval_target:
            corpus = corpus + load_parallel(_read_text(args.eval_source).splitlines(),
                                            _read_text(args.eval_target).splitlines())
        bad_gold = out_of_range_links(gold.possible, corpus)
        bad_pred = out_of_range_links(predicted, corpus)
        extra = {"gold_links_out_of_range": bad_gold, "predicted_links_out_of_range": bad_pred}
        if bad_gold or bad_pred:
            log.warning("%d gold and %d predicted links fall outside their sentences; "
                        "check --zero-based and --gold-offset", bad_gold, bad_pred)
    metrics = score(predicted, gold)
    doc = json.loads(metrics.to_json(seed=args.seed, gold_offset=offset, **extra))
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    if args.csv:
        _write(Path(args.csv), metrics.to_csv(seed=args.seed))
    return EXIT_OK


def _optimizer_config(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(args.budget, args.random_init, args.early_stopping, args.seed,
                               args.max_iterations, args.n_candidates, args.surrogate)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_optimize(args) -> int:
    opt_config = _optimizer_config(args)
    if not args.gold:
        raise UsageError("optimize requires --gold")
    corpus, offset = load_corpus(args)
    gold = load_gold(args, corpus, offset)
    out = Path(args.out_dir)
    state_path = out / "state.json"
    state = None
    if args.resume:
        if not state_path.is_file():
            raise UsageError(f"--resume given but no state file at {state_path}")
        state = OptimizerState.from_json(state_path.read_text(encoding="utf-8"))
        if state.seed != args.seed:
            raise UsageError(f"state file was written with seed {state.seed}, --seed is {args.seed}")
        tables = load_tables(args.merges_dir or out)
    else:
        tables = tables_for(args, corpus)
        save_tables(out, tables)
    try:
        space = SearchSpace.from_tables(tables, _parse_range(args.source_range), _parse_range(args.target_range),
                                        not args.no_word, _parse_range(args.lambda_range, float) or (0.0, 1.0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pipeline = make_pipeline(args, corpus, tables)

    def checkpoint(st: OptimizerState) -> None:
        _write(state_path, st.to_json())

    state, alignment = run_iterative_sampling(corpus, gold, tables, space, opt_config, pipeline.aligner_config,
                                              pipeline, state, checkpoint)
    _write(state_path, state.to_json())
    _write(out / "trace.csv", state.trace_csv())
    _write_json(out / "run.json", _meta(args, "optimize", eval_offset=offset, method=args.method,
                                        space=space.to_json(), budget=args.budget, random_init=args.random_init,
                                        early_stopping=args.early_stopping, surrogate=args.surrogate,
                                        best_f1=state.best_f1, stop_reason=state.stop_reason))
    _write_alignment(out / "alignment.pharaoh", alignment, corpus.size,
                     _meta(args, "optimize", eval_offset=offset, lam=state.lambda_star,
                           schemes=[s.to_json() for s in state.xi_star]))
    if state.xi_star:
        _write(out / "tally.csv", tally([pipeline.word_links(s) for s in state.xi_star]).to_csv())
    print(f"best F1 {state.best_f1:.4f} with {len(state.xi_star)} cell(s), lambda {state.lambda_star:.3f} "
          f"({state.n_iterations} iterations, stop: {state.stop_reason})")
    return EXIT_OK


def cmd_apply(args) -> int:
    state = OptimizerState.from_json(_read_text(args.state))
    if not state.xi_star:
        raise UsageError(f"{args.state} selects no cells")
    corpus, offset = load_corpus(args)
    tables = tables_for(args, corpus)
    schemes = clamp_schemes(state.xi_star, tables)
    pipeline = make_pipeline(args, corpus, tables)
    alignment = pipeline.aligned(schemes, state.lambda_star)
    out = Path(args.output)
    _write_alignment(out, alignment, corpus.size,
                     _meta(args, "apply", eval_offset=offset, lam=state.lambda_star,
                           schemes=[s.to_json() for s in schemes], source_state=str(args.state)))
    if args.tally:
        _write(Path(args.tally), tally([pipeline.word_links(s) for s in schemes]).to_csv())
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out_dir)
    wrote = False
    if args.merges_dir:
        for name, table in zip(("source", "target"), load_tables(args.merges_dir)):
            _write(out / f"affected_{name}.csv", curve_to_csv(affected_curve(table)))
        wrote = True
    if args.state:
        state = OptimizerState.from_json(_read_text(args.state))
        _write(out / "exploration.csv", state.exploration_csv())
        _write(out / "selected.csv", state.selected_csv())
        _write(out / "trace.csv", state.trace_csv())
        wrote = True
        if args.source and args.target:
            corpus, _ = load_corpus(args)
            tables = load_tables(args.merges_dir) if args.merges_dir else tables_for(args, corpus)
            pipeline = make_pipeline(args, corpus, tables)
            schemes = clamp_schemes(state.xi_star, tables)
            _write(out / "tally.csv", tally([pipeline.word_links(s) for s in schemes]).to_csv())
    if not wrote:
        raise UsageError("report needs --state and/or --merges-dir")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_corpus(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_argument_group("corpus")
    g.add_argument("--source", required=required, help="source side, one tokenized sentence per line")
    g.add_argument("--target", required=required, help="target side, line-parallel to --source")
    g.add_argument("--eval-source", help="gold-annotated source sentences appended after the training pairs")
    g.add_argument("--eval-target", help="gold-annotated target sentences")
    g.add_argument("--subsample", type=int, help="keep this many training pairs (uniform, order-preserving)")


def _add_bpe(p: argparse.ArgumentParser) -> None:
    p.add_argument("--merges-dir", help="directory with source.merges/target.merges (learned on the fly if absent)")
    p.add_argument("--max-merges", type=int, default=DEFAULT_MAX_MERGES)


def _add_aligner(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("aligner")
    d = AlignerConfig()
    g.add_argument("--method", choices=METHODS, default="intersection", help="symmetrization heuristic")
    g.add_argument("--external", help="external aligner command template with {input} and {output} placeholders")
    g.add_argument("--model1-iterations", type=int, default=d.model1_iterations)
    g.add_argument("--model2-iterations", type=int, default=d.model2_iterations)
    g.add_argument("--null-probability", type=float, default=d.null_probability)
    g.add_argument("--diagonal-tension", type=float, default=d.diagonal_tension)
    g.add_argument("--tension-updates", type=int, default=d.tension_updates_per_iter)
    g.add_argument("--smoothing-alpha", type=float, default=d.smoothing_alpha)


def _add_gold(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--gold", required=required, help="NAACL gold file: 'sentID srcPos tgtPos [S|P]'")
    p.add_argument("--zero-based", action="store_true", help="gold indices are 0-based (default 1-based)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file of option defaults")
    common.add_argument("--seed", type=int, default=0, help="single seed for all randomness")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="subalign", description=__doc__.split("\n\n")[0],
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.set_defaults(func=func)
        return p

    p = add("learn-bpe", cmd_learn_bpe, "learn BPE merge tables for both sides")
    _add_corpus(p)
    p.add_argument("--max-merges", type=int, default=DEFAULT_MAX_MERGES)
    p.add_argument("--out-dir", required=True)

    p = add("segment", cmd_segment, "write the corpus segmented under one scheme")
    _add_corpus(p)
    _add_bpe(p)
    p.add_argument("--scheme", default="WORD,WORD", help="SRC,TGT merge counts or WORD")
    p.add_argument("--out-dir", required=True)

    p = add("align", cmd_align, "word-align the corpus under one scheme")
    _add_corpus(p)
    _add_bpe(p)
    _add_aligner(p)
    p.add_argument("--scheme", default="WORD,WORD", help="SRC,TGT merge counts or WORD")
    p.add_argument("--output", required=True, help="Pharaoh output file")

    p = add("aggregate", cmd_aggregate, "threshold vote over several Pharaoh alignments")
    p.add_argument("inputs", nargs="+", help="Pharaoh files over the same corpus")
    p.add_argument("--lam", type=float, default=0.5, help="minimum fraction of inputs containing a link")
    p.add_argument("--output", required=True)
    p.add_argument("--tally", help="also write per-link vote counts as CSV")

    p = add("evaluate", cmd_evaluate, "precision/recall/F1 of an alignment against gold")
    p.add_argument("--alignment", required=True, help="Pharaoh file")
    _add_gold(p, required=True)
    p.add_argument("--gold-offset", type=int, help="id of the first gold sentence in the alignment "
                                                   "(default: from the alignment's sidecar, else 0)")
    _add_corpus(p, required=False)
    p.add_argument("--output", help="metrics JSON (default: stdout)")
    p.add_argument("--csv", help="also write metrics as a one-row CSV")

    p = add("optimize", cmd_optimize, "select segmentation cells and threshold against gold")
    _add_corpus(p)
    _add_gold(p)
    _add_bpe(p)
    _add_aligner(p)
    d = OptimizerConfig()
    p.add_argument("--budget", type=int, default=d.budget, help="trials per iteration (B)")
    p.add_argument("--random-init", type=int, default=d.random_init, help="prior samples per iteration (R)")
    p.add_argument("--early-stopping", type=int, default=d.early_stopping, help="patience in iterations (E)")
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--n-candidates", type=int, default=d.n_candidates)
    p.add_argument("--surrogate", choices=("tpe", "gp"), default=d.surrogate)
    p.add_argument("--source-range", help="LO,HI source merge counts (default: whole table)")
    p.add_argument("--target-range", help="LO,HI target merge counts")
    p.add_argument("--lambda-range", help="LO,HI for the vote threshold (default 0,1)")
    p.add_argument("--no-word", action="store_true", help="exclude the word-level cell from the grid")
    p.add_argument("--resume", action="store_true", help="continue from OUT_DIR/state.json")
    p.add_argument("--out-dir", required=True)

    p = add("apply", cmd_apply, "align a corpus with cells and threshold from a state file")
    _add_corpus(p)
    _add_bpe(p)
    _add_aligner(p)
    p.add_argument("--state", required=True, help="state.json written by optimize")
    p.add_argument("--output", required=True)
    p.add_argument("--tally", help="also write per-link vote counts as CSV")

    p = add("report", cmd_report, "write CSV diagnostics (affected curves, exploration, selections, tallies)")
    p.add_argument("--state")
    _add_corpus(p, required=False)
    _add_bpe(p)
    _add_aligner(p)
    p.add_argument("--out-dir", required=True)
    return parser


def read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for n, line in enumerate(_read_text(path).splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path} line {n}: expected 'key = value'")
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    command = next((a for a in rest if a in subparsers), None)
    if known.config and command is not None:
        sub = subparsers[command]
        actions = {a.dest: a for a in sub._actions if a.option_strings}
        defaults = {}
        for key, raw in read_config(known.config).items():
            action = actions.get(key)
            if action is None or key in ("config", "help"):
                log.debug("config key %r does not apply to %s", key, command)
                continue
            if action.nargs == 0:
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
                continue
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except ValueError:
                raise UsageError(f"config key {key!r}: bad value {raw!r}") from None
            if action.choices and defaults[key] not in action.choices:
                raise UsageError(f"config key {key!r}: {raw!r} not one of {list(action.choices)}")
            # a value from the file satisfies a required option; an explicit flag still wins
            action.required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    except UsageError as exc:
        print(f"subalign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        return args.func(args)
    except (UsageError, CorpusError, InvalidGoldError) as exc:
        print(f"subalign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AdapterError, ProjectionError) as exc:
        print(f"subalign: pipeline failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"subalign: pipeline failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
