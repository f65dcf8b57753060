"""Independent reference implementations used to cross-check the package.

Deliberately written in plain Python (no numpy) with the most literal
possible arithmetic, so agreement with the package is meaningful.
"""

from __future__ import annotations

import math
from collections import Counter


def weighted_f1_reference(cm_rows) -> float:
    """Weighted F1 from a confusion matrix given as nested lists."""
    k = len(cm_rows)
    total = sum(sum(row) for row in cm_rows)
    score = 0.0
    for c in range(k):
        tp = cm_rows[c][c]
        colsum = sum(cm_rows[r][c] for r in range(k))
        rowsum = sum(cm_rows[c])
        precision = tp / colsum if colsum else 0.0
        recall = tp / rowsum if rowsum else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        score += f1 * rowsum / total
    return score


class NaiveBayes:
    """Multinomial Naive Bayes with add-one smoothing over whitespace tokens."""

    def __init__(self, k: int):
        self.k = k
        self.token_counts = [Counter() for _ in range(k)]
        self.class_totals = [0] * k
        self.class_docs = [0] * k
        self.vocab: set[str] = set()

    def fit(self, texts, labels):
        for text, label in zip(texts, labels):
            self.class_docs[label] += 1
            for tok in text.split():
                self.token_counts[label][tok] += 1
                self.class_totals[label] += 1
                self.vocab.add(tok)
        return self

    def predict_one(self, text: str) -> int:
        n_docs = sum(self.class_docs)
        v = len(self.vocab)
        best, best_score = 0, -math.inf
        for c in range(self.k):
            if self.class_docs[c] == 0:
                continue
            score = math.log(self.class_docs[c] / n_docs)
            denom = self.class_totals[c] + v
            for tok in text.split():
                score += math.log((self.token_counts[c][tok] + 1) / denom)
            if score > best_score:
                best, best_score = c, score
        return best

    def predict(self, texts):
        return [self.predict_one(t) for t in texts]


def naive_bayes_cv_accuracy(dataset, k: int = 5, seed: int = 0) -> float:
    """Mean stratified-CV accuracy of the Naive Bayes reference on a
    Dataset (package fold splitter, reference classifier)."""
    from hatelab.data import stratified_kfold

    folds = stratified_kfold(dataset, k=k, seed=seed)
    all_idx = set(range(len(dataset)))
    accs = []
    for test_idx in folds:
        train_idx = sorted(all_idx - set(test_idx))
        nb = NaiveBayes(dataset.k).fit(
            [dataset.documents[i].text for i in train_idx],
            [dataset.documents[i].label for i in train_idx],
        )
        preds = nb.predict([dataset.documents[i].text for i in test_idx])
        golds = [dataset.documents[i].label for i in test_idx]
        accs.append(sum(p == g for p, g in zip(preds, golds)) / len(golds))
    return sum(accs) / len(accs)


# Published confusion matrices for three hate-speech benchmarks
# (rows = gold, columns = predicted), used as metric oracles.

D1_MATRIX = [
    [1538, 14, 371],     # racism
    [17, 1800, 1054],    # sexism
    [539, 441, 9702],    # neither
]

D2_MATRIX = [
    [415, 861, 154],     # hate
    [334, 18347, 509],   # offensive
    [43, 306, 3814],     # neither
]

D3_CV_MATRIX = [
    [1601, 1285, 533],   # overtly aggressive
    [921, 2842, 1534],   # covertly aggressive
    [371, 1531, 4383],   # non-aggressive
]

# Published class-rate table: {class: (TP%, FP%, FN%)}
PUBLISHED_RATES = {
    "racism": (79.97, 26.58, 20.02),
    "sexism": (62.69, 20.17, 37.30),
    "hate": (29.02, 47.60, 70.97),
    "offensive": (95.60, 5.98, 4.40),
    "overtly": (46.82, 44.65, 53.18),
    "covertly": (53.65, 49.77, 46.34),
}
