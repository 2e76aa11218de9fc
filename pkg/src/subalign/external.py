"""Adapter for third-party aligners such as fast_align or eflomal.

The tool is described by a shell command template containing ``{input}`` and
``{output}`` placeholders. The input file holds one ``source ||| target``
line per sentence pair; the tool must write Pharaoh links (``i-j``, 0-based,
source index first) to the output file, one line per pair. The reverse
direction is obtained by running the same command on the side-swapped
bitext and transposing its links.

Example templates::

    fast_align -i {input} -d -o -v > {output}
    eflomal-align -i {input} -f {output}
"""
from __future__ import annotations

import logging
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bpe import SegmentedCorpus
from .corpus import AlignmentSet, CorpusError, read_pharaoh

log = logging.getLogger(__name__)

_MAX_DIAGNOSTIC_CHARS = 2000


class AdapterError(RuntimeError):
    """The external aligner failed or produced unusable output."""

    def __init__(self, message: str, returncode: int | None = None, stderr: str = ""):
        detail = f"\n--- tool stderr ---\n{stderr[-_MAX_DIAGNOSTIC_CHARS:]}" if stderr.strip() else ""
        super().__init__(message + detail)
        self.returncode = returncode
        self.stderr = stderr


def write_bitext(source: Sequence[Sequence[str]], target: Sequence[Sequence[str]]) -> str:
    if len(source) != len(target):
        raise ValueError(f"bitext sides differ in length: {len(source)} vs {len(target)}")
    return "".join(f"{' '.join(s)} ||| {' '.join(t)}\n" for s, t in zip(source, target))


def _check_template(command: str) -> None:
    missing = [p for p in ("{input}", "{output}") if p not in command]
    if missing:
        raise ValueError(f"command template lacks placeholder(s) {', '.join(missing)}: {command!r}")


def _run_once(command: str, source, target, workdir: Path, tag: str, timeout: float | None) -> AlignmentSet:
    inp = workdir / f"{tag}.bitext"
    out = workdir / f"{tag}.pharaoh"
    inp.write_text(write_bitext(source, target), encoding="utf-8")
    # plain substitution so other braces in the template (awk programs, ${VAR}) survive
    cmd = command.replace("{input}", shlex.quote(str(inp))).replace("{output}", shlex.quote(str(out)))
    log.debug("running external aligner: %s", cmd)
    try:
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired as exc:
        raise AdapterError(f"external aligner timed out after {timeout}s: {cmd}") from exc
    if proc.returncode != 0:
        raise AdapterError(f"external aligner exited with status {proc.returncode}: {cmd}",
                           proc.returncode, proc.stderr)
    if not out.exists():
        raise AdapterError(f"external aligner wrote no output file {out}", proc.returncode, proc.stderr)
    lines = out.read_text(encoding="utf-8").splitlines()
    if len(lines) != len(source):
        raise AdapterError(f"external aligner wrote {len(lines)} lines for {len(source)} sentence pairs",
                           proc.returncode, proc.stderr)
    try:
        links = read_pharaoh(lines)
    except CorpusError as exc:
        raise AdapterError(f"malformed external aligner output: {exc}", proc.returncode, proc.stderr) from exc
    s, i, j = links.arrays()
    n_src = np.array([len(x) for x in source], dtype=np.int64)
    n_tgt = np.array([len(x) for x in target], dtype=np.int64)
    bad = (i >= n_src[s]) | (j >= n_tgt[s]) if s.size else np.zeros(0, dtype=bool)
    if bad.any():
        k = int(np.argmax(bad))
        raise AdapterError(f"external aligner link {int(i[k])}-{int(j[k])} on line {int(s[k]) + 1} "
                           f"is outside the sentence ({int(n_src[s[k]])} x {int(n_tgt[s[k]])} tokens)",
                           proc.returncode, proc.stderr)
    return links


def external_align(corpus: SegmentedCorpus, command: str, timeout: float | None = None,
                   workdir: str | Path | None = None) -> tuple[AlignmentSet, AlignmentSet]:
    """Forward and reverse links from an external tool, both as (source, target)."""
    _check_template(command)
    source, target = corpus.token_lists()
    with tempfile.TemporaryDirectory(dir=workdir, prefix="subalign-ext-") as tmp:
        tmp_path = Path(tmp)
        fwd = _run_once(command, source, target, tmp_path, "forward", timeout)
        rev = _run_once(command, target, source, tmp_path, "reverse", timeout).transpose()
    return fwd, rev


@dataclass(frozen=True)
class ExternalAligner:
    """Callable wrapper so a command template can stand in for the internal aligner."""

    command: str
    timeout: float | None = None

    def __post_init__(self):
        _check_template(self.command)

    def __call__(self, corpus: SegmentedCorpus) -> tuple[AlignmentSet, AlignmentSet]:
        return external_align(corpus, self.command, self.timeout)
