"""Entropy, conditional entropy and information gain of binary features.

All quantities are in bits. For a feature ``v`` over dataset ``D``::

    H(D)   = -sum_i p_i * log2(p_i)                 (0 * log2 0 taken as 0)
    H(D|v) = sum_{x in {0,1}} |D_x|/|D| * H(D_x)
    IG     = H(D) - H(D|v)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .errors import EmptyVocabulary, LengthMismatch, ZeroTotal
from .model import CLASS_ORDER, Category, ClassLabel, Dataset, FeatureColumn


@dataclass(frozen=True)
class ClassDistribution:
    counts: Mapping[ClassLabel, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def of(cls, dataset: Dataset) -> "ClassDistribution":
        return cls(dataset.class_counts)


@dataclass(frozen=True)
class FeatureScore:
    feature: str
    category: Category
    h_dataset: float
    h_conditional: float
    ig: float


def _plogp(p: float) -> float:
    return p * math.log2(p) if p > 0 else 0.0


def _h2(positive: int, total: int) -> float:
    if total == 0:
        return 0.0
    # (total - positive) / total rather than 1 - p keeps the value symmetric
    # in the two classes down to the last bit; 0.0 - x avoids a -0.0 result.
    return 0.0 - (_plogp(positive / total) + _plogp((total - positive) / total))


def binary_entropy(positive, total) -> np.ndarray:
    """Elementwise two-class entropy of ``positive`` out of ``total`` (0 where total is 0).

    Evaluated once per distinct ``(positive, total)`` pair, so equal counts
    always produce bit-identical entropies.
    """
    positive = np.asarray(positive, dtype=np.int64)
    total = np.asarray(total, dtype=np.int64)
    positive, total = np.broadcast_arrays(positive, total)
    if positive.size == 0:
        return np.zeros(positive.shape)
    base = int(total.max()) + 1
    keys, inverse = np.unique(positive * base + total, return_inverse=True)
    table = np.array([_h2(int(k) // base, int(k) % base) for k in keys], dtype=np.float64)
    return table[inverse].reshape(positive.shape)


def entropy(dist: ClassDistribution) -> float:
    total = dist.total
    if total <= 0:
        raise ZeroTotal()
    counts = [dist.counts.get(label, 0) for label in CLASS_ORDER]
    counts += [c for label, c in dist.counts.items() if label not in CLASS_ORDER]
    if len(counts) == 2:
        return _h2(counts[0], total)
    return 0.0 - math.fsum(_plogp(c / total) for c in counts)


def _score_counts(n: int, n_malware: int, present: np.ndarray, present_malware: np.ndarray):
    h_d = _h2(n_malware, n)
    absent = n - present
    absent_malware = n_malware - present_malware
    h_cond = (present / n) * binary_entropy(present_malware, present) + (absent / n) * binary_entropy(
        absent_malware, absent
    )
    return h_d, h_cond, h_d - h_cond


def score_matrix(matrix: np.ndarray, labels: np.ndarray, backend: str | None = None):
    """``(H(D), H(D|v) per column, IG per column)`` for a presence matrix."""
    n = matrix.shape[0]
    if n == 0:
        raise ZeroTotal()
    present, present_malware = _kernels.class_counts(matrix, labels, backend)
    return _score_counts(n, int(np.count_nonzero(labels)), present, present_malware)


def _check_column(dataset: Dataset, column: FeatureColumn) -> np.ndarray:
    values = np.asarray(column.values)
    if values.shape[0] != len(dataset):
        raise LengthMismatch(len(dataset), values.shape[0])
    return values.reshape(-1, 1)


def conditional_entropy(dataset: Dataset, column: FeatureColumn) -> float:
    values = _check_column(dataset, column)
    _, h_cond, _ = score_matrix(values, dataset.labels)
    return float(h_cond[0])


def information_gain(dataset: Dataset, column: FeatureColumn) -> FeatureScore:
    values = _check_column(dataset, column)
    h_d, h_cond, ig = score_matrix(values, dataset.labels)
    if 0 <= column.index < len(dataset.vocabulary):
        name, cat = dataset.vocabulary.entries[column.index]
    else:
        name, cat = f"#{column.index}", Category.PERMISSION
    return FeatureScore(name, cat, h_d, float(h_cond[0]), float(ig[0]))


def rank_features(dataset: Dataset, backend: str | None = None) -> list[FeatureScore]:
    """Score every vocabulary entry; highest IG first, ties by feature name."""
    if len(dataset.vocabulary) == 0:
        raise EmptyVocabulary()
    h_d, h_cond, ig = score_matrix(dataset.matrix, dataset.labels, backend)
    scores = [
        FeatureScore(name, cat, h_d, float(hc), float(g))
        for (name, cat), hc, g in zip(dataset.vocabulary.entries, h_cond, ig)
    ]
    scores.sort(key=lambda s: (-s.ig, s.feature))
    return scores


def category_means(scores: Iterable[FeatureScore]) -> dict[Category, float]:
    """Unweighted mean IG per category over all given scores."""
    groups: dict[Category, list[float]] = {}
    for s in scores:
        groups.setdefault(s.category, []).append(s.ig)
    return {cat: math.fsum(groups[cat]) / len(groups[cat]) for cat in Category if cat in groups}
