"""Weighted Euclidean cost algebra.

Everything here works on weighted point sets: centroids, 1-means costs,
the cost of assigning a set to an arbitrary center, and the increase in
total cost caused by merging two clusters. The agglomerative engines only
ever touch clusters through :class:`ClusterSummary`, which carries enough
statistics (weight, centroid, internal cost) to price a merge in O(d).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "WeightedPoint",
    "Dataset",
    "ClusterSummary",
    "EmptyClusterError",
    "centroid",
    "one_means_cost",
    "cost_to_center",
    "merge_delta",
    "merge_summaries",
    "merge_costs",
]


class EmptyClusterError(ValueError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class WeightedPoint:
    coords: tuple[float, ...]
    weight: float = 1.0

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "weight", float(self.weight))
        if not coords:
            raise ValueError("point must have at least one coordinate")
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite coordinate in {coords}")
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise ValueError(f"weight must be positive and finite, got {self.weight}")

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Weighted points in R^d with an optional planted labeling.

    ``points`` is an (n, d) float array, ``weights`` an (n,) array of
    positive reals. Labels, when given, are integers 0..k-1 with every class
    non-empty. Arrays are frozen on construction.
    """

    points: np.ndarray
    weights: np.ndarray
    labels: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.points, dtype=np.float64, copy=True)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[1] < 1:
            raise ValueError(f"points must be an (n, d) array, got shape {x.shape}")
        n = x.shape[0]
        if n < 1:
            raise EmptyClusterError("empty cluster")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite coordinate")
        w = np.ones(n) if self.weights is None else np.array(self.weights, dtype=np.float64, copy=True)
        if w.shape != (n,):
            raise ValueError(f"expected {n} weights, got shape {w.shape}")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise ValueError("weights must be positive and finite")
        object.__setattr__(self, "points", _readonly(x))
        object.__setattr__(self, "weights", _readonly(w))
        if self.labels is not None:
            lab = np.array(self.labels, dtype=np.int64, copy=True)
            if lab.shape != (n,):
                raise ValueError(f"expected {n} labels, got shape {lab.shape}")
            k = int(lab.max()) + 1
            if lab.min() < 0 or len(np.unique(lab)) != k:
                raise ValueError("labels must be 0..k-1 with every class non-empty")
            object.__setattr__(self, "labels", _readonly(lab))
        object.__setattr__(self, "meta", dict(self.meta))

    @classmethod
    def from_points(cls, points: Iterable[WeightedPoint], labels=None, meta=None) -> "Dataset":
        pts = list(points)
        if not pts:
            raise EmptyClusterError("empty cluster")
        dims = {p.dim for p in pts}
        if len(dims) != 1:
            raise ValueError(f"inconsistent dimensions {sorted(dims)}")
        return cls(
            np.array([p.coords for p in pts]),
            np.array([p.weight for p in pts]),
            labels=labels,
            meta=meta or {},
        )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def k(self) -> int | None:
        """Number of planted classes, or None when unlabeled."""
        return None if self.labels is None else int(self.labels.max()) + 1

    def point(self, i: int) -> WeightedPoint:
        return WeightedPoint(tuple(self.points[i]), float(self.weights[i]))

    def summary(self, members: Iterable[int]) -> "ClusterSummary":
        return ClusterSummary.from_points(self.points, self.weights, members)

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.points, self.weights, labels=labels, meta=self.meta)

    def digest(self) -> str:
        """Content hash over dimension, coordinates and weights."""
        h = hashlib.sha256()
        h.update(np.int64(self.dim).tobytes())
        h.update(np.ascontiguousarray(self.points).tobytes())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        return h.hexdigest()


def _as_arrays(points, weights=None) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points, Dataset):
        return points.points, points.weights if weights is None else np.asarray(weights, float)
    if isinstance(points, Sequence) and points and isinstance(points[0], WeightedPoint):
        if len({p.dim for p in points}) != 1:
            raise ValueError("inconsistent dimensions")
        x = np.array([p.coords for p in points], dtype=np.float64)
        w = np.array([p.weight for p in points], dtype=np.float64)
        return x, w
    x = np.asarray(points, dtype=np.float64)
    if x.size == 0:
        raise EmptyClusterError("empty cluster")
    if x.ndim == 1:
        x = x[:, None]
    w = np.ones(len(x)) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (len(x),):
        raise ValueError("weights do not match points")
    return x, w


def centroid(points, weights=None) -> np.ndarray:
    """Weighted mean of a non-empty point set.

    ``points`` may be a list of :class:`WeightedPoint`, a :class:`Dataset`,
    or an (n, d) array with optional ``weights`` (default 1).
    """
    x, w = _as_arrays(points, weights)
    return (w @ x) / w.sum()


def one_means_cost(points, weights=None) -> float:
    """Sum of weighted squared distances to the centroid."""
    x, w = _as_arrays(points, weights)
    diff = x - (w @ x) / w.sum()
    # numpy reductions use pairwise summation, which keeps drift small
    return float(np.sum(w * np.sum(diff * diff, axis=1)))


def cost_to_center(points, center, weights=None) -> float:
    x, w = _as_arrays(points, weights)
    c = np.asarray(center, dtype=np.float64).reshape(-1)
    if c.shape[0] != x.shape[1]:
        raise ValueError(f"center has dimension {c.shape[0]}, points have {x.shape[1]}")
    diff = x - c
    return float(np.sum(w * np.sum(diff * diff, axis=1)))


@dataclass(frozen=True, eq=False)
class ClusterSummary:
    weight: float
    centroid: np.ndarray
    internal_cost: float
    members: tuple[int, ...]

    def __post_init__(self):
        c = np.array(self.centroid, dtype=np.float64, copy=True).reshape(-1)
        object.__setattr__(self, "centroid", _readonly(c))
        object.__setattr__(self, "members", tuple(sorted(int(m) for m in self.members)))
        if not self.members:
            raise EmptyClusterError("empty cluster")
        if not self.weight > 0:
            raise ValueError("cluster weight must be positive")
        if self.internal_cost < 0:
            raise ValueError("internal cost must be non-negative")

    @classmethod
    def from_points(cls, points: np.ndarray, weights: np.ndarray, members: Iterable[int]) -> "ClusterSummary":
        idx = sorted(set(int(m) for m in members))
        if not idx:
            raise EmptyClusterError("empty cluster")
        x, w = points[idx], weights[idx]
        return cls(float(w.sum()), centroid(x, w), one_means_cost(x, w), tuple(idx))

    @property
    def dim(self) -> int:
        return self.centroid.shape[0]


def _check_mergeable(a: ClusterSummary, b: ClusterSummary):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if not set(a.members).isdisjoint(b.members):
        raise ValueError("non-disjoint merge")


def merge_delta(a: ClusterSummary, b: ClusterSummary) -> float:
    """Increase of total 1-means cost when ``a`` and ``b`` are merged.

    Equals w(A) w(B) / (w(A) + w(B)) * ||mu_A - mu_B||^2.
    """
    _check_mergeable(a, b)
    diff = a.centroid - b.centroid
    return float(a.weight * b.weight / (a.weight + b.weight) * (diff @ diff))


def merge_summaries(a: ClusterSummary, b: ClusterSummary) -> ClusterSummary:
    cost = merge_delta(a, b)
    w = a.weight + b.weight
    c = (a.weight * a.centroid + b.weight * b.centroid) / w
    return ClusterSummary(w, c, a.internal_cost + b.internal_cost + cost, a.members + b.members)


def merge_costs(weight: float, center: np.ndarray, weights: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Vectorised merge delta of one cluster against many.

    ``weights`` has shape (m,), ``centers`` shape (m, d).
    """
    diff = centers - center
    return weight * weights / (weight + weights) * np.einsum("ij,ij->i", diff, diff)
