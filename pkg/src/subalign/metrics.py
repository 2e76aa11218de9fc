"""Precision, recall and F1 against sure/possible gold links."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from .corpus import AlignmentSet, GoldAlignment


class InvalidGoldError(ValueError):
    pass


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    n_predicted: int
    n_predicted_possible: int
    n_predicted_sure: int
    n_sure: int

    @classmethod
    def from_counts(cls, n_predicted: int, n_predicted_possible: int, n_predicted_sure: int,
                    n_sure: int) -> "Metrics":
        if n_sure <= 0:
            raise InvalidGoldError("gold standard has no sure links")
        precision = n_predicted_possible / n_predicted if n_predicted else 0.0
        recall = n_predicted_sure / n_sure
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(precision, recall, f1, n_predicted, n_predicted_possible, n_predicted_sure, n_sure)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **extra) -> str:
        return json.dumps({**extra, **self.to_dict()}, indent=2, sort_keys=True) + "\n"

    def to_csv(self, **extra) -> str:
        row = {**extra, **self.to_dict()}
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()


def score(predicted: AlignmentSet, gold: GoldAlignment) -> Metrics:
    """Score ``predicted`` on the gold-covered sentences only."""
    if len(gold.sure) == 0:
        raise InvalidGoldError("gold standard has no sure links")
    covered = np.fromiter(gold.covered_sentences, dtype=np.int64, count=len(gold.covered_sentences))
    pred = predicted.restrict(covered)
    keys = pred.keys
    n_p = int(np.isin(keys, gold.possible.keys, assume_unique=True).sum())
    n_s = int(np.isin(keys, gold.sure.keys, assume_unique=True).sum())
    return Metrics.from_counts(len(pred), n_p, n_s, len(gold.sure))
