"""Predictor groups and orderings from hierarchical clustering of correlations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage
from scipy.spatial.distance import pdist

LINKAGES = ("average", "complete", "single")


@dataclass(frozen=True)
class GroupAssignment:
    """Group label per predictor; labels are ``0..k-1`` and every group is non-empty."""

    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(g) for g in self.labels)
        if not labels:
            raise ValueError("empty group assignment")
        k = max(labels) + 1
        if min(labels) < 0:
            raise ValueError("group labels must be nonnegative")
        present = set(labels)
        if len(present) != k:
            missing = min(set(range(k)) - present)
            raise ValueError(f"group {missing} is empty")
        object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return max(self.labels) + 1

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(np.bincount(self.labels, minlength=self.k).tolist())

    def members(self, g: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.labels) == g)

    @classmethod
    def singletons(cls, m: int) -> "GroupAssignment":
        return cls(tuple(range(m)))


def correlation_matrix(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pearson correlations between the columns of ``X``.

    Returns ``(C, constant)``; constant columns correlate 0 with everything
    except themselves and are flagged in ``constant``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("need a matrix with at least two columns")
    Z = X - X.mean(axis=0)
    sd = np.sqrt((Z**2).mean(axis=0))
    constant = sd <= 1e-12 * np.maximum(np.abs(X).max(axis=0), 1.0)
    Z[:, constant] = 0.0
    Z[:, ~constant] /= sd[~constant]
    C = Z.T @ Z / X.shape[0]
    C = np.clip((C + C.T) / 2, -1.0, 1.0)
    np.fill_diagonal(C, 1.0)
    return C, constant


def cluster_predictors(C: np.ndarray, k: int, method: str = "average") -> GroupAssignment:
    """Cut an agglomerative tree over the rows of ``C`` into exactly ``k`` groups.

    Rows are compared by Euclidean distance. Group ids are numbered by first
    appearance in predictor order, so the output is independent of scipy's
    internal cluster numbering.
    """
    C = np.asarray(C, dtype=float)
    m = C.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"k={k} out of range for {m} predictors")
    if method not in LINKAGES:
        raise ValueError(f"unknown linkage {method!r}")
    if k == m:
        return GroupAssignment.singletons(m)
    if k == 1:
        return GroupAssignment((0,) * m)
    Z = linkage(pdist(C, metric="euclidean"), method=method)
    raw = cut_tree(Z, n_clusters=k).ravel()
    relabel: dict[int, int] = {}
    labels = [relabel.setdefault(int(g), len(relabel)) for g in raw]
    return GroupAssignment(tuple(labels))


def order_predictors(assignment: GroupAssignment) -> tuple[int, ...]:
    """Permutation placing each group contiguously, groups in id order."""
    labels = np.asarray(assignment.labels)
    return tuple(int(i) for i in np.argsort(labels, kind="stable"))


def group_predictors(X: np.ndarray, k: int, method: str = "average") -> GroupAssignment:
    """Cluster the columns of ``X`` into at most ``k`` groups (clipped to the column count)."""
    C, _ = correlation_matrix(X)
    return cluster_predictors(C, min(k, X.shape[1]), method)
