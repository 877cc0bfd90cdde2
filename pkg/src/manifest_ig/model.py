"""Labeled binary feature vectors over a permission/intent vocabulary."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateSample, NameCollisionAcrossCategories, PoolTooSmall
from .features import ManifestFeatures

_MASK64 = (1 << 64) - 1


class ClassLabel(enum.Enum):
    MALWARE = "malware"
    BENIGN = "benign"

    @property
    def display(self) -> str:
        return self.value.capitalize()


class Category(enum.Enum):
    PERMISSION = "permission"
    INTENT = "intent"

    @property
    def display(self) -> str:
        return "Permissions" if self is Category.PERMISSION else "Intents"

    @classmethod
    def parse(cls, text: str) -> "Category":
        key = text.strip().lower().rstrip("s")
        return cls(key)


# Entropy sums run over the classes in this order.
CLASS_ORDER = (ClassLabel.MALWARE, ClassLabel.BENIGN)


@dataclass(frozen=True)
class FeatureVocabulary:
    entries: tuple[tuple[str, Category], ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {name: j for j, (name, _) in enumerate(self.entries)})

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def category_of(self, name: str) -> Category:
        return self.entries[self.index[name]][1]


def _feature_items(features: ManifestFeatures, namespace_categories: bool) -> Iterable[tuple[str, Category]]:
    for name in features.permissions:
        yield (f"permission:{name}" if namespace_categories else name), Category.PERMISSION
    for name in features.intents:
        yield (f"intent:{name}" if namespace_categories else name), Category.INTENT


def build_vocabulary(
    feature_records: Sequence[ManifestFeatures],
    namespace_categories: bool = False,
    extra: Iterable[tuple[str, Category]] = (),
) -> FeatureVocabulary:
    """Sorted union of every permission and intent name in ``feature_records``.

    ``extra`` entries are merged in as well, which lets several corpora share
    one vocabulary.
    """
    if not feature_records:
        raise ValueError("build_vocabulary needs at least one record")
    seen: dict[str, Category] = {}
    items = [item for rec in feature_records for item in _feature_items(rec, namespace_categories)]
    for name, cat in [*items, *extra]:
        prev = seen.setdefault(name, cat)
        if prev is not cat:
            raise NameCollisionAcrossCategories(name)
    return FeatureVocabulary(tuple(sorted(seen.items())))


@dataclass(frozen=True)
class Instance:
    sha256: str
    label: ClassLabel
    vector: np.ndarray
    oov_count: int = 0


def vectorize(
    features: ManifestFeatures,
    vocab: FeatureVocabulary,
    label: ClassLabel,
    sha256: str = "",
    namespace_categories: bool = False,
) -> Instance:
    vec = np.zeros(len(vocab), dtype=np.uint8)
    oov = 0
    for name, cat in _feature_items(features, namespace_categories):
        j = vocab.index.get(name)
        if j is None or vocab.entries[j][1] is not cat:
            oov += 1
        else:
            vec[j] = 1
    return Instance(sha256, label, vec, oov)


@dataclass(frozen=True)
class FeatureColumn:
    index: int
    values: np.ndarray


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled dataset.

    ``matrix`` is the (instances x vocabulary) uint8 presence matrix and
    ``labels`` is 1 for malware, 0 for benign.
    """

    vocabulary: FeatureVocabulary
    sha256s: tuple[str, ...]
    matrix: np.ndarray
    labels: np.ndarray
    oov_count: int = 0

    def __post_init__(self):
        n, m = self.matrix.shape
        if n != len(self.sha256s) or n != len(self.labels) or m != len(self.vocabulary):
            raise ValueError("dataset arrays disagree in shape")
        self.matrix.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self) -> int:
        return len(self.sha256s)

    @property
    def class_counts(self) -> dict[ClassLabel, int]:
        n_mal = int(self.labels.sum())
        return {ClassLabel.MALWARE: n_mal, ClassLabel.BENIGN: len(self) - n_mal}

    @property
    def instances(self) -> list[Instance]:
        return [
            Instance(sha, ClassLabel.MALWARE if lab else ClassLabel.BENIGN, self.matrix[i])
            for i, (sha, lab) in enumerate(zip(self.sha256s, self.labels))
        ]

    def column(self, j: int) -> FeatureColumn:
        return FeatureColumn(j, self.matrix[:, j])

    def select_features(self, keep: np.ndarray) -> "Dataset":
        """Dataset restricted to the vocabulary positions where ``keep`` is true."""
        keep = np.asarray(keep, dtype=bool)
        entries = tuple(e for e, k in zip(self.vocabulary.entries, keep) if k)
        return Dataset(
            FeatureVocabulary(entries),
            self.sha256s,
            np.ascontiguousarray(self.matrix[:, keep]),
            self.labels.copy(),
            self.oov_count,
        )

    def with_min_support(self, k: int) -> "Dataset":
        """Drop features declared by fewer than ``k`` instances."""
        if k <= 0:
            return self
        return self.select_features(self.matrix.sum(axis=0, dtype=np.int64) >= k)

    def with_category(self, category: Category) -> "Dataset":
        return self.select_features(np.array([c is category for _, c in self.vocabulary.entries], dtype=bool))


def assemble_dataset(
    records: Sequence[tuple[ManifestFeatures, ClassLabel, str]],
    namespace_categories: bool = False,
    extra_vocabulary: Iterable[tuple[str, Category]] = (),
) -> Dataset:
    """Build the vocabulary from all ``(features, label, sha256)`` records and vectorize them."""
    if not records:
        raise ValueError("assemble_dataset needs at least one record")
    counts = Counter(sha for _, _, sha in records)
    for _, _, sha in records:
        if counts[sha] > 1:
            raise DuplicateSample(sha)
    vocab = build_vocabulary([f for f, _, _ in records], namespace_categories, extra_vocabulary)
    matrix = np.zeros((len(records), len(vocab)), dtype=np.uint8)
    labels = np.zeros(len(records), dtype=np.uint8)
    oov = 0
    for i, (features, label, sha) in enumerate(records):
        inst = vectorize(features, vocab, label, sha, namespace_categories)
        matrix[i] = inst.vector
        labels[i] = label is ClassLabel.MALWARE
        oov += inst.oov_count
    return Dataset(vocab, tuple(sha for _, _, sha in records), matrix, labels, oov)


# -- seeded sampling ----------------------------------------------------------


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    Used instead of the stdlib/numpy generators because its output sequence is
    fully specified by a dozen lines of integer arithmetic, so a selection can
    be reproduced bit-for-bit by any other implementation.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling."""
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next()
            if x < limit:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, swapping from the last position down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def sample_balanced(malware_pool: Sequence, benign_pool: Sequence, n_per_class: int, seed: int) -> tuple[list, list]:
    """Pick ``n_per_class`` items from each pool, reproducibly.

    Items only need a ``sha256`` attribute. Each pool is sorted by digest,
    shuffled with its own SplitMix64 stream (the two stream seeds are the first
    two outputs of ``SplitMix64(seed)``), and the first ``n_per_class`` kept.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be positive")
    for label, pool in ((ClassLabel.MALWARE, malware_pool), (ClassLabel.BENIGN, benign_pool)):
        if len(pool) < n_per_class:
            raise PoolTooSmall(label, len(pool), n_per_class)
    master = SplitMix64(seed)
    picked = []
    for pool in (malware_pool, benign_pool):
        items = sorted(pool, key=lambda s: s.sha256)
        SplitMix64(master.next()).shuffle(items)
        picked.append(items[:n_per_class])
    return picked[0], picked[1]
