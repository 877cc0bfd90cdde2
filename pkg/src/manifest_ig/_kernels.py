"""Per-feature class counting, the inner loop of feature ranking.

Two interchangeable implementations: a numba ``@njit`` loop and a pure numpy
path. Set ``MANIFEST_IG_DISABLE_NUMBA=1`` (or ``NUMBA_DISABLE_JIT=1``) to force
numpy; numpy is also used when numba is not importable. Both return the same
integers, and the entropy arithmetic downstream is shared, so scores are
bit-identical whichever backend ran.
"""

from __future__ import annotations

import os

import numpy as np


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


_DISABLED = _env_flag("MANIFEST_IG_DISABLE_NUMBA") or _env_flag("NUMBA_DISABLE_JIT")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
except ImportError:
    njit = None

BACKEND = "numba" if njit is not None else "numpy"


def class_counts_numpy(matrix: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per column: number of instances with the feature, and how many of those are malware."""
    present = matrix.sum(axis=0, dtype=np.int64)
    present_malware = matrix[labels.astype(bool)].sum(axis=0, dtype=np.int64)
    return present, present_malware


def _class_counts_loop(matrix, labels):
    n, m = matrix.shape
    present = np.zeros(m, dtype=np.int64)
    present_malware = np.zeros(m, dtype=np.int64)
    for i in range(n):
        row = matrix[i]
        if labels[i]:
            for j in range(m):
                if row[j]:
                    present[j] += 1
                    present_malware[j] += 1
        else:
            for j in range(m):
                if row[j]:
                    present[j] += 1
    return present, present_malware


if njit is not None:
    class_counts_numba = njit(cache=True, nogil=True)(_class_counts_loop)
else:
    class_counts_numba = None


def class_counts(matrix: np.ndarray, labels: np.ndarray, backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    backend = backend or BACKEND
    matrix = np.ascontiguousarray(matrix, dtype=np.uint8)
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if backend == "numba":
        if class_counts_numba is None:
            raise RuntimeError("numba backend requested but unavailable")
        return class_counts_numba(matrix, labels)
    if backend == "numpy":
        return class_counts_numpy(matrix, labels)
    raise ValueError(f"unknown backend {backend!r}")
