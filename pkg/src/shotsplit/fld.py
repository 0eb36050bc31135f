"""Two-directional Fisher criterion between two classes of matrices.

Each sample is a k x d matrix. Scatter is measured in both the column
direction (d x d, ``(A - M)^T (A - M)``) and the row direction (k x k,
``(A - M)(A - M)^T``); each direction contributes
``trace((S_w + eps I)^{-1} S_b)`` and the criterion is their sum.

For two classes the between-class scatter about the size-weighted global
mean reduces to ``n1 n2 / (n1 + n2) * D^T D`` with ``D = M1 - M2``. That
form is used because it is exactly symmetric in the classes and exactly
zero for equal means.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

RIDGE = 1e-6
RIDGE_FLOOR = 1e-12


@dataclass(frozen=True)
class CriterionValue:
    j: float
    j_row: float
    j_col: float


@dataclass(frozen=True)
class ClassSummary:
    """Sufficient statistics of one class: size, mean and both within-scatters."""

    n: int
    mean: np.ndarray
    scatter_col: np.ndarray  # (d, d)
    scatter_row: np.ndarray  # (k, k)

    @classmethod
    def from_samples(cls, samples: Sequence[np.ndarray] | np.ndarray) -> "ClassSummary":
        stack = np.asarray(samples, dtype=float)
        if stack.ndim != 3 or stack.shape[0] == 0:
            raise ValueError("a class needs at least one k x d sample")
        # shifted mean: a class of identical samples has exactly zero scatter
        mean = stack[0] + (stack - stack[0]).mean(axis=0)
        centered = stack - mean
        return cls(
            stack.shape[0],
            mean,
            np.einsum("nki,nkj->ij", centered, centered),
            np.einsum("nik,njk->ij", centered, centered),
        )


def _direction(sb: np.ndarray, sw: np.ndarray, ridge: float) -> float:
    dim = sw.shape[0]
    eps = ridge * np.trace(sw) / dim + RIDGE_FLOOR
    factor = cho_factor(sw + eps * np.eye(dim), lower=True, check_finite=False)
    return max(0.0, float(np.trace(cho_solve(factor, sb, check_finite=False))))


def criterion_from_summaries(c1: ClassSummary, c2: ClassSummary, ridge: float = RIDGE) -> CriterionValue:
    if c1.mean.shape != c2.mean.shape:
        raise ValueError(f"dimension mismatch: {c1.mean.shape} vs {c2.mean.shape}")
    if c1.n < 1 or c2.n < 1:
        raise ValueError("empty class")
    delta = c1.mean - c2.mean
    weight = c1.n * c2.n / (c1.n + c2.n)
    j_col = _direction(weight * (delta.T @ delta), c1.scatter_col + c2.scatter_col, ridge)
    j_row = _direction(weight * (delta @ delta.T), c1.scatter_row + c2.scatter_row, ridge)
    return CriterionValue(j_row + j_col, j_row, j_col)


def criterion_J(
    class1: Sequence[np.ndarray] | np.ndarray,
    class2: Sequence[np.ndarray] | np.ndarray,
    ridge: float = RIDGE,
) -> CriterionValue:
    """Separation score of two sets of equally shaped matrices (larger = more distinct).

    ``ridge`` scales the relative regularization added to each within-class
    scatter: ``eps = ridge * trace(S_w) / dim + 1e-12``.
    """
    return criterion_from_summaries(
        ClassSummary.from_samples(class1), ClassSummary.from_samples(class2), ridge
    )


class SegmentSummaries:
    """Memoized class summaries of contiguous runs ``[start, end)`` of a sequence."""

    def __init__(self, matrices: Sequence[np.ndarray] | np.ndarray):
        self._stack = np.asarray(matrices, dtype=float)
        if self._stack.ndim != 3 or self._stack.shape[0] == 0:
            raise ValueError("need a non-empty (n, k, d) stack")
        self._cache: dict[tuple[int, int], ClassSummary] = {}

    def __len__(self) -> int:
        return self._stack.shape[0]

    def summary(self, start: int, end: int) -> ClassSummary:
        key = (start, end)
        hit = self._cache.get(key)
        if hit is None:
            if not 0 <= start < end <= len(self):
                raise ValueError(f"invalid segment [{start}, {end})")
            hit = self._cache[key] = ClassSummary.from_samples(self._stack[start:end])
        return hit

    def criterion(self, a: tuple[int, int], b: tuple[int, int], ridge: float = RIDGE) -> float:
        return criterion_from_summaries(self.summary(*a), self.summary(*b), ridge).j
