"""Fold-subset bootstrap test for comparing two classifiers.

Both systems come as one confusion matrix per CV fold, paired by fold
index (same held-out data). Every size-s subset of fold indices is
enumerated; the p-value is the fraction of subsets whose winner disagrees
with the winner on all folds combined. With 5 folds and subsets of 3 the
denominator is exactly 10.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from hatelab.evaluate import weighted_f1


@dataclass(frozen=True)
class SystemFolds:
    system_id: str
    folds: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.folds:
            raise ValueError("need at least one fold")
        k = self.folds[0].shape
        if any(f.shape != k for f in self.folds):
            raise ValueError("all fold matrices must share class count")

    @classmethod
    def from_lists(cls, system_id: str, folds: Sequence) -> "SystemFolds":
        return cls(system_id=system_id,
                   folds=tuple(np.asarray(f, dtype=np.int64) for f in folds))


def winner(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> str:
    """'a' or 'b' by weighted F1 of the summed matrices; ties go to 'a'."""
    if len(a) != len(b):
        raise ValueError("fold lists must have equal length")
    f1_a = weighted_f1(np.sum(a, axis=0))
    f1_b = weighted_f1(np.sum(b, axis=0))
    return "a" if f1_a >= f1_b else "b"


@dataclass(frozen=True)
class BootstrapResult:
    p_value: float
    full_winner: str
    subset_count: int
    disagreements: int

    def to_dict(self) -> dict:
        return {
            "p_value": self.p_value,
            "full_winner": self.full_winner,
            "subset_count": self.subset_count,
            "disagreements": self.disagreements,
        }


def bootstrap_compare(a: SystemFolds, b: SystemFolds, subset_size: int = 3) -> BootstrapResult:
    if len(a.folds) != len(b.folds):
        raise ValueError(
            f"fold counts differ: {a.system_id} has {len(a.folds)}, "
            f"{b.system_id} has {len(b.folds)}")
    k = len(a.folds)
    if not 1 <= subset_size <= k:
        raise ValueError("subset_size must be in [1, fold count]")
    full = winner(a.folds, b.folds)
    subsets = list(combinations(range(k), subset_size))
    disagreements = sum(
        1 for idx in subsets
        if winner([a.folds[i] for i in idx], [b.folds[i] for i in idx]) != full
    )
    label = {"a": a.system_id, "b": b.system_id}[full]
    return BootstrapResult(p_value=disagreements / len(subsets), full_winner=label,
                           subset_count=len(subsets), disagreements=disagreements)
