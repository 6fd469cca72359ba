"""Ward-style greedy merging for k-median.

Unlike Ward's squared objective, the unsquared one does not produce
monotone merge costs; these routines build the traces that show it, both
with continuous centers (geometric median) and with centers restricted to
input points of a finite metric.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, _as_arrays
from .instances import FiniteMetricInstance

__all__ = [
    "GeometricMedianError",
    "MedianMergeTrace",
    "geometric_median",
    "median_objective",
    "kmedian_greedy_euclidean",
    "kmedian_greedy_discrete",
    "discrete_median_cost",
]

TRACE_TOL = 1e-6


class GeometricMedianError(RuntimeError):
    def __init__(self, message: str, best: np.ndarray):
        super().__init__(message)
        self.best = best


def median_objective(x: np.ndarray, w: np.ndarray, c: np.ndarray) -> float:
    return float(w @ np.linalg.norm(x - c, axis=1))


def _optimal_data_point(x: np.ndarray, w: np.ndarray) -> int | None:
    """Index of an input point that is itself a geometric median, if any.

    Point j is optimal iff the pull of all other points, sum of w_i times
    the unit vector towards x_i, has norm at most the weight sitting on x_j.
    """
    for j in range(len(x)):
        diff = x - x[j]
        dist = np.linalg.norm(diff, axis=1)
        away = dist > 0
        pull = (w[away, None] * diff[away] / dist[away, None]).sum(axis=0)
        if np.linalg.norm(pull) <= w[~away].sum():
            return j
    return None


def geometric_median(points, weights=None, tol: float = 1e-10, max_iter: int = 10_000) -> np.ndarray:
    """Point minimizing the weighted sum of Euclidean distances.

    Weiszfeld iteration started at the centroid. Input points are tested
    for optimality up front, so the iteration never has to crawl towards a
    vertex. Stops once the convexity gap bound, gradient norm times the
    largest distance to an input point, drops below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x, w = _as_arrays(points, weights)
    if len(x) == 1:
        return x[0].copy()
    if len(x) == 2:
        if w[0] == w[1]:
            return (x[0] + x[1]) / 2.0
        return x[int(np.argmax(w))].copy()
    j = _optimal_data_point(x, w)
    if j is not None:
        return x[j].copy()

    y = (w @ x) / w.sum()
    best, best_f = y, median_objective(x, w, y)
    for _ in range(max_iter):
        diff = x - y
        dist = np.linalg.norm(diff, axis=1)
        if np.any(dist == 0):
            # landed on a non-optimal input point: nudge off it
            y = y + 1e-12 * (np.abs(y).max() + 1.0)
            continue
        grad = -(w[:, None] * diff / dist[:, None]).sum(axis=0)
        if np.linalg.norm(grad) * dist.max() <= tol:
            return y
        inv = w / dist
        y = (inv @ x) / inv.sum()
        f = median_objective(x, w, y)
        if f < best_f:
            best, best_f = y, f
    raise GeometricMedianError(f"Weiszfeld did not converge in {max_iter} iterations", best)


@dataclass(frozen=True)
class MedianMergeTrace:
    merges: tuple[tuple[tuple[int, ...], tuple[int, ...], float], ...]
    final_cost: float
    setting: str

    @property
    def increases(self) -> list[float]:
        return [c for _, _, c in self.merges]

    @property
    def monotone(self) -> bool:
        inc = self.increases
        return all(b >= a - TRACE_TOL for a, b in zip(inc, inc[1:]))


def _greedy(n: int, k_stop: int, cluster_cost, setting: str) -> MedianMergeTrace:
    if n < 2:
        raise ValueError(f"need at least 2 points, got {n}")
    if not 1 <= k_stop < n:
        raise ValueError(f"k_stop must be in [1, {n - 1}], got {k_stop}")
    clusters = [(i,) for i in range(n)]
    cost = {c: cluster_cost(c) for c in clusters}
    merges = []
    while len(clusters) > k_stop:
        best = None
        for a, b in itertools.combinations(clusters, 2):
            u = tuple(sorted(a + b))
            if u not in cost:
                cost[u] = cluster_cost(u)
            key = (cost[u] - cost[a] - cost[b], a, b)
            if best is None or key < best:
                best = key
        inc, a, b = best
        merges.append((a, b, inc))
        clusters = sorted([c for c in clusters if c not in (a, b)] + [tuple(sorted(a + b))])
    return MedianMergeTrace(tuple(merges), math.fsum(cost[c] for c in clusters), setting)


def kmedian_greedy_euclidean(dataset: Dataset, k_stop: int = 1, tol: float = 1e-10) -> MedianMergeTrace:
    """Repeatedly merge the pair whose union raises total 1-median cost least."""
    x, w = dataset.points, dataset.weights

    def cluster_cost(members):
        idx = list(members)
        c = geometric_median(x[idx], w[idx], tol=tol)
        return median_objective(x[idx], w[idx], c)

    return _greedy(dataset.n, k_stop, cluster_cost, "euclidean-continuous")


def discrete_median_cost(instance: FiniteMetricInstance, members) -> float:
    """Cheapest cost of serving ``members`` from any single input point."""
    idx = list(members)
    return float((instance.dist[:, idx] @ instance.weights[idx]).min())


def kmedian_greedy_discrete(instance: FiniteMetricInstance, k_stop: int = 1) -> MedianMergeTrace:
    """Greedy merging where centers may be any input point of the metric."""
    return _greedy(
        instance.n,
        k_stop,
        lambda members: discrete_median_cost(instance, members),
        "finite-metric-discrete",
    )
