"""Classification metrics: accuracy, macro-F1, one-vs-rest ROC AUC, confusion matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ArgumentError


@dataclass(frozen=True, eq=False)
class MetricSet:
    accuracy: float
    macro_f1: float
    per_class_auc: list  # NaN where a class has no positives or no negatives
    confusion: np.ndarray  # rows: true class, columns: predicted class

    @property
    def mean_auc(self) -> float:
        vals = [a for a in self.per_class_auc if not math.isnan(a)]
        return float(np.mean(vals)) if vals else float("nan")

    def to_dict(self) -> dict:
        def clean(v):
            return None if math.isnan(v) else v
        return {"accuracy": self.accuracy, "macro_f1": self.macro_f1,
                "auc": [clean(a) for a in self.per_class_auc], "mean_auc": clean(self.mean_auc),
                "confusion": self.confusion.tolist()}


def binary_auc(scores, positive) -> float:
    """Area under the ROC curve via the rank-sum statistic (average ranks on ties)."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(scores, method="average")
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def confusion_matrix(true_labels, pred_labels, c: int) -> np.ndarray:
    cm = np.zeros((c, c), dtype=np.int64)
    np.add.at(cm, (np.asarray(true_labels), np.asarray(pred_labels)), 1)
    return cm


def macro_f1(cm: np.ndarray) -> float:
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    return float(f1.mean())


def compute_metrics(probs_matrix, true_labels) -> MetricSet:
    P = np.asarray(probs_matrix, dtype=np.float64)
    y = np.asarray(true_labels, dtype=np.int64)
    if P.ndim != 2 or P.shape[0] != y.shape[0]:
        raise ArgumentError(f"probs shape {P.shape} does not match {y.shape[0]} labels")
    c = P.shape[1]
    if y.size and (y.min() < 0 or y.max() >= c):
        raise ArgumentError(f"labels must lie in [0, {c})")
    pred = np.argmax(P, axis=1)  # lowest index wins ties
    cm = confusion_matrix(y, pred, c)
    total = cm.sum()
    acc = float(np.trace(cm) / total) if total else 0.0
    aucs = [binary_auc(P[:, k], y == k) for k in range(c)]
    return MetricSet(acc, macro_f1(cm), aucs, cm)
