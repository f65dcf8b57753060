"""Confusion-matrix metrics and cross-validated / holdout evaluation.

Conventions: rows are gold classes, columns are predictions. The FP rate
is false-discovery style (wrong predictions into a class divided by all
predictions of that class); TP and FN rates are row-relative and sum to
100 per class. Denominator-free cells score 0 instead of erroring, since
small folds can lack predictions for a class.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from hatelab.data import Dataset, stratified_kfold
from hatelab.models import Model, ModelConfig, build_model, encode_dataset, predict, train_model
from hatelab.encoding import build_vocab


def confusion_matrix(golds: Sequence[int], preds: Sequence[int], k: int) -> np.ndarray:
    golds = np.asarray(golds, dtype=np.int64)
    preds = np.asarray(preds, dtype=np.int64)
    if golds.shape != preds.shape:
        raise ValueError("golds and preds must have equal length")
    if golds.size and (golds.min() < 0 or golds.max() >= k or preds.min() < 0 or preds.max() >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (golds, preds), 1)
    return cm


def accuracy_of(cm: np.ndarray) -> float:
    total = cm.sum()
    if total <= 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm) / total)


def per_class_f1(cm: np.ndarray) -> np.ndarray:
    cm = np.asarray(cm, dtype=np.float64)
    diag = np.diag(cm)
    colsum = cm.sum(axis=0)
    rowsum = cm.sum(axis=1)
    precision = np.divide(diag, colsum, out=np.zeros_like(diag), where=colsum > 0)
    recall = np.divide(diag, rowsum, out=np.zeros_like(diag), where=rowsum > 0)
    pr = precision + recall
    return np.divide(2 * precision * recall, pr, out=np.zeros_like(diag), where=pr > 0)


def weighted_f1(cm: np.ndarray) -> float:
    cm = np.asarray(cm, dtype=np.float64)
    total = cm.sum()
    if total <= 0:
        raise ValueError("empty confusion matrix")
    supports = cm.sum(axis=1)
    return float((per_class_f1(cm) * supports / total).sum())


def class_rates(cm: np.ndarray) -> list[dict[str, float]]:
    """Per class: TP% = 100*diag/rowsum, FN% = 100 - TP%, and
    FP% = 100*(colsum-diag)/colsum."""
    cm = np.asarray(cm, dtype=np.float64)
    if cm.sum() <= 0:
        raise ValueError("empty confusion matrix")
    diag = np.diag(cm)
    rowsum = cm.sum(axis=1)
    colsum = cm.sum(axis=0)
    tp = 100.0 * np.divide(diag, rowsum, out=np.zeros_like(diag), where=rowsum > 0)
    fp = 100.0 * np.divide(colsum - diag, colsum, out=np.zeros_like(diag), where=colsum > 0)
    return [
        {"tp": float(tp[c]), "fp": float(fp[c]), "fn": float(100.0 - tp[c])}
        for c in range(cm.shape[0])
    ]


@dataclass(frozen=True)
class FoldResult:
    fold: int
    confusion: np.ndarray
    accuracy: float
    weighted_f1: float
    loss_history: tuple[float, ...]

    @property
    def total(self) -> int:
        return int(self.confusion.sum())


@dataclass(frozen=True)
class CvResult:
    label_names: tuple[str, ...]
    folds: tuple[FoldResult, ...]
    mean_accuracy: float
    mean_weighted_f1: float
    pooled_confusion: np.ndarray
    pooled_accuracy: float
    pooled_weighted_f1: float

    @classmethod
    def from_folds(cls, label_names: Sequence[str], folds: Sequence[FoldResult]) -> "CvResult":
        pooled = np.sum([f.confusion for f in folds], axis=0)
        return cls(
            label_names=tuple(label_names),
            folds=tuple(folds),
            mean_accuracy=float(np.mean([f.accuracy for f in folds])),
            mean_weighted_f1=float(np.mean([f.weighted_f1 for f in folds])),
            pooled_confusion=pooled,
            pooled_accuracy=accuracy_of(pooled),
            pooled_weighted_f1=weighted_f1(pooled),
        )


def _score_fold(config: ModelConfig, dataset: Dataset, fold: int,
                train_idx: Sequence[int], test_idx: Sequence[int],
                seed: int, pretrained: Mapping[str, np.ndarray] | None) -> FoldResult:
    train_docs = [dataset.documents[i] for i in train_idx]
    test_docs = [dataset.documents[i] for i in test_idx]
    vocab = None
    if config.uses_words:
        # vocabulary from training folds only; held-out tokens become unknowns
        vocab = build_vocab([d.text.split() for d in train_docs], min_freq=1)
    train_ex = encode_dataset(train_docs, vocab, config)
    test_ex = encode_dataset(test_docs, vocab, config)
    model = build_model(config, vocab, dataset.label_names,
                        pretrained=pretrained, seed=[seed, fold])
    history = train_model(model, train_ex, seed=[seed, fold])
    preds = predict(model, test_ex)
    golds = [d.label for d in test_docs]
    cm = confusion_matrix(golds, preds, config.k)
    return FoldResult(fold=fold, confusion=cm, accuracy=accuracy_of(cm),
                      weighted_f1=weighted_f1(cm), loss_history=tuple(history))


def run_cv(config: ModelConfig, dataset: Dataset, k: int = 5, seed: int | None = None,
           jobs: int = 1, pretrained: Mapping[str, np.ndarray] | None = None) -> CvResult:
    """Stratified k-fold cross-validation; per-fold vocabularies come from
    the training folds so no test token leaks. Folds run independently and
    results are assembled in fold order, so jobs > 1 changes nothing but
    wall time."""
    if config.k != dataset.k:
        raise ValueError(f"config.k={config.k} but dataset has {dataset.k} classes")
    seed = config.seed if seed is None else seed
    folds = stratified_kfold(dataset, k=k, seed=seed)
    all_idx = set(range(len(dataset)))
    tasks = []
    for fold, test_idx in enumerate(folds):
        train_idx = sorted(all_idx - set(test_idx))
        tasks.append((config, dataset, fold, train_idx, test_idx, seed, pretrained))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_score_fold_star, tasks))
    else:
        results = [_score_fold(*t) for t in tasks]
    return CvResult.from_folds(dataset.label_names, results)


def _score_fold_star(task) -> FoldResult:
    return _score_fold(*task)


def run_holdout(config: ModelConfig, train: Dataset, test: Dataset,
                seed: int | None = None,
                pretrained: Mapping[str, np.ndarray] | None = None
                ) -> tuple[FoldResult, Model]:
    """Train on all of `train`, score `test` once. Label vocabularies must
    agree by name."""
    if train.label_names != test.label_names:
        raise ValueError("train and test label names differ")
    if config.k != train.k:
        raise ValueError(f"config.k={config.k} but dataset has {train.k} classes")
    seed = config.seed if seed is None else seed
    vocab = None
    if config.uses_words:
        vocab = build_vocab([d.text.split() for d in train.documents], min_freq=1)
    model = build_model(config, vocab, train.label_names,
                        pretrained=pretrained, seed=[seed])
    history = train_model(model, encode_dataset(train, vocab, config), seed=[seed])
    preds = predict(model, encode_dataset(test, vocab, config))
    cm = confusion_matrix([d.label for d in test.documents], preds, config.k)
    result = FoldResult(fold=0, confusion=cm, accuracy=accuracy_of(cm),
                        weighted_f1=weighted_f1(cm), loss_history=tuple(history))
    return result, model
