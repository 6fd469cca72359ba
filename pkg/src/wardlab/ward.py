"""Agglomerative Ward clustering.

Two exact engines build the full merge tree:

* :func:`ward_reference` is the literal global greedy: a heap over all
  cluster pairs keyed by merge cost, with stale entries skipped lazily.
  Ties are broken by the smaller (left id, right id) pair.
* :func:`ward_nn_chain` follows nearest-neighbour chains. It relies on the
  reducibility of the Ward merge cost and produces the same hierarchy in
  O(n^2) time and O(n) extra memory; its merges are re-sorted by cost so
  that cutting after n - k merges gives the k-clustering for both engines.

Leaves carry ids 0..n-1, the i-th merge creates id n + i.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, merge_costs, one_means_cost

__all__ = [
    "MergeRecord",
    "Dendrogram",
    "Clustering",
    "ward_reference",
    "ward_nn_chain",
    "build_dendrogram",
    "extract_clustering",
    "verify_1d_convexity",
    "is_monotone",
    "telescoping_error",
    "ENGINES",
]


@dataclass(frozen=True)
class MergeRecord:
    left_id: int
    right_id: int
    new_id: int
    cost: float
    result_weight: float
    result_internal_cost: float


@dataclass(frozen=True)
class Dendrogram:
    n_leaves: int
    merges: tuple[MergeRecord, ...]
    engine: str
    dataset_digest: str = ""

    def __post_init__(self):
        n = self.n_leaves
        object.__setattr__(self, "merges", tuple(self.merges))
        if n < 1:
            raise ValueError("dendrogram needs at least one leaf")
        if len(self.merges) != n - 1:
            raise ValueError(f"expected {n - 1} merges, got {len(self.merges)}")
        used = set()
        for i, m in enumerate(self.merges):
            if m.new_id != n + i:
                raise ValueError(f"merge {i} creates id {m.new_id}, expected {n + i}")
            if m.left_id == m.right_id:
                raise ValueError(f"merge {i} joins cluster {m.left_id} with itself")
            for c in (m.left_id, m.right_id):
                if not 0 <= c < n + i:
                    raise ValueError(f"merge {i} references unknown cluster {c}")
                if c in used:
                    raise ValueError(f"cluster {c} is merged twice")
                used.add(c)
            if not m.cost >= 0:
                raise ValueError(f"merge {i} has negative cost {m.cost}")

    @property
    def costs(self) -> np.ndarray:
        return np.array([m.cost for m in self.merges])

    def labels_at(self, k: int) -> np.ndarray:
        """Cluster index per leaf after the first n - k merges.

        Clusters are numbered in order of their smallest member.
        """
        n = self.n_leaves
        if not 1 <= k <= n:
            raise ValueError(f"k must be in [1, {n}], got {k}")
        parent = list(range(2 * n - 1))
        for m in self.merges[: n - k]:
            parent[m.left_id] = m.new_id
            parent[m.right_id] = m.new_id

        def root(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        roots = [root(i) for i in range(n)]
        index: dict[int, int] = {}
        return np.array([index.setdefault(r, len(index)) for r in roots], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Clustering:
    k: int
    assignment: np.ndarray
    cost: float
    centers: np.ndarray

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, a in enumerate(self.assignment):
            out[a].append(i)
        return out

    @classmethod
    def from_assignment(cls, dataset: Dataset, assignment) -> "Clustering":
        """Canonicalise labels (ordered by smallest member) and price them."""
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.shape != (dataset.n,):
            raise ValueError("assignment must cover every point")
        index: dict[int, int] = {}
        canon = np.array([index.setdefault(int(a), len(index)) for a in assignment], dtype=np.int64)
        k = len(index)
        centers = np.empty((k, dataset.dim))
        parts = []
        for j in range(k):
            mask = canon == j
            x, w = dataset.points[mask], dataset.weights[mask]
            centers[j] = (w @ x) / w.sum()
            parts.append(one_means_cost(x, w))
        return cls(k, canon, math.fsum(parts), centers)


def _check_input(dataset: Dataset):
    if dataset.n < 2:
        raise ValueError(f"need at least 2 points, got {dataset.n}")


class _Clusters:
    """Flat arrays of (weight, centroid, internal cost) indexed by cluster id."""

    def __init__(self, dataset: Dataset):
        n, d = dataset.n, dataset.dim
        self.weight = np.empty(2 * n - 1)
        self.center = np.empty((2 * n - 1, d))
        self.delta = np.zeros(2 * n - 1)
        self.weight[:n] = dataset.weights
        self.center[:n] = dataset.points

    def merge(self, a: int, b: int, new: int) -> tuple[float, float, float]:
        wa, wb = self.weight[a], self.weight[b]
        diff = self.center[a] - self.center[b]
        cost = float(wa * wb / (wa + wb) * (diff @ diff))
        w = wa + wb
        self.weight[new] = w
        self.center[new] = (wa * self.center[a] + wb * self.center[b]) / w
        self.delta[new] = self.delta[a] + self.delta[b] + cost
        return cost, float(w), float(self.delta[new])


def ward_reference(dataset: Dataset) -> Dendrogram:
    """Global greedy Ward: always merge the currently cheapest pair.

    The heap holds, for every live cluster i, its cheapest partner j > i.
    Entries whose partner has died are lower bounds and get recomputed when
    popped; a fresh cluster always has the largest id, so it only ever needs
    to be offered to the clusters below it. Popping therefore yields the
    lexicographically smallest (cost, i, j) among all live pairs.
    """
    _check_input(dataset)
    n = dataset.n
    cl = _Clusters(dataset)
    alive = np.zeros(2 * n - 1, dtype=bool)
    alive[:n] = True
    nn_cost = np.full(2 * n - 1, np.inf)
    nn_id = np.full(2 * n - 1, -1, dtype=np.int64)

    def refresh(i: int, upto: int):
        js = np.flatnonzero(alive[i + 1 : upto]) + i + 1
        if len(js) == 0:
            nn_cost[i], nn_id[i] = np.inf, -1
            return
        costs = merge_costs(cl.weight[i], cl.center[i], cl.weight[js], cl.center[js])
        j = int(np.argmin(costs))
        nn_cost[i], nn_id[i] = costs[j], js[j]

    heap = []
    for i in range(n - 1):
        refresh(i, n)
        heap.append((float(nn_cost[i]), i, int(nn_id[i])))
    heapq.heapify(heap)

    merges = []
    for step in range(n - 1):
        new = n + step
        while True:
            c, a, b = heapq.heappop(heap)
            if not alive[a] or b != nn_id[a] or c != nn_cost[a]:
                continue
            if alive[b]:
                break
            refresh(a, new)
            if nn_id[a] >= 0:
                heapq.heappush(heap, (float(nn_cost[a]), a, int(nn_id[a])))
        cost, wt, delta = cl.merge(a, b, new)
        alive[a] = alive[b] = False
        merges.append(MergeRecord(a, b, new, cost, wt, delta))
        others = np.flatnonzero(alive[:new])
        if len(others):
            costs = merge_costs(cl.weight[new], cl.center[new], cl.weight[others], cl.center[others])
            better = costs < nn_cost[others]
            for o, cst in zip(others[better].tolist(), costs[better].tolist()):
                nn_cost[o], nn_id[o] = cst, new
                heapq.heappush(heap, (cst, o, new))
        alive[new] = True
    return Dendrogram(n, tuple(merges), "reference-greedy", dataset.digest())


def ward_nn_chain(dataset: Dataset) -> Dendrogram:
    """Nearest-neighbour-chain Ward, relabelled into cost order."""
    _check_input(dataset)
    n = dataset.n
    cl = _Clusters(dataset)
    alive = np.zeros(2 * n - 1, dtype=bool)
    alive[:n] = True

    raw = []  # (a, b, cost, weight, delta) in chain order; temp id n + index
    chain: list[int] = []
    next_id = n
    while next_id < 2 * n - 1:
        if not chain:
            chain.append(int(np.flatnonzero(alive)[0]))
        a = chain[-1]
        cand = np.flatnonzero(alive)
        cand = cand[cand != a]
        costs = merge_costs(cl.weight[a], cl.center[a], cl.weight[cand], cl.center[cand])
        best = costs.min()
        # prefer the predecessor on the chain when tied, otherwise the smallest id
        if len(chain) > 1 and costs[np.searchsorted(cand, chain[-2])] == best:
            b = chain[-2]
        else:
            b = int(cand[np.flatnonzero(costs == best)[0]])
        if len(chain) > 1 and b == chain[-2]:
            chain.pop()
            chain.pop()
            lo, hi = min(a, b), max(a, b)
            cost, wt, delta = cl.merge(lo, hi, next_id)
            alive[lo] = alive[hi] = False
            alive[next_id] = True
            raw.append((lo, hi, cost, wt, delta))
            next_id += 1
        else:
            chain.append(b)

    # Effective key: a parent is never ordered before its children, even if
    # rounding puts its cost a hair below theirs.
    key = np.empty(n - 1)
    eff = np.zeros(2 * n - 1)
    for i, (a, b, cost, _, _) in enumerate(raw):
        key[i] = max(cost, eff[a], eff[b])
        eff[n + i] = key[i]
    order = sorted(range(n - 1), key=lambda i: (key[i], i))
    relabel = list(range(n)) + [0] * (n - 1)
    for pos, i in enumerate(order):
        relabel[n + i] = n + pos
    merges = []
    for pos, i in enumerate(order):
        a, b, cost, wt, delta = raw[i]
        a, b = relabel[a], relabel[b]
        merges.append(MergeRecord(min(a, b), max(a, b), n + pos, cost, wt, delta))
    return Dendrogram(n, tuple(merges), "nn-chain", dataset.digest())


ENGINES = {"reference": ward_reference, "nnchain": ward_nn_chain}


def build_dendrogram(dataset: Dataset, pairs, engine: str = "manual") -> Dendrogram:
    """Price an explicit merge sequence given as (left id, right id) pairs."""
    n = dataset.n
    cl = _Clusters(dataset)
    merges = []
    for i, (a, b) in enumerate(pairs):
        cost, wt, delta = cl.merge(a, b, n + i)
        merges.append(MergeRecord(a, b, n + i, cost, wt, delta))
    return Dendrogram(n, tuple(merges), engine, dataset.digest())


def extract_clustering(dendrogram: Dendrogram, dataset: Dataset, k: int) -> Clustering:
    """The k-clustering after the first n - k merges, priced from raw points."""
    if dendrogram.n_leaves != dataset.n:
        raise ValueError("dendrogram and dataset sizes differ")
    return Clustering.from_assignment(dataset, dendrogram.labels_at(k))


def is_monotone(costs, rtol: float = 1e-12) -> bool:
    """True if ``costs`` never drops by more than ``rtol`` relative.

    The tolerance only absorbs rounding between mathematically tied merges.
    """
    c = np.asarray(costs, dtype=float)
    if len(c) < 2:
        return True
    return bool(np.all(c[1:] >= c[:-1] - rtol * np.abs(c[:-1])))


def telescoping_error(dendrogram: Dendrogram, dataset: Dataset) -> float:
    """Largest relative gap, over all levels, between the running sum of merge
    costs and the sum of 1-means costs recomputed from raw points."""
    n = dataset.n
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    scratch: dict[int, float] = {}
    merged = []
    worst = 0.0
    for m in dendrogram.merges:
        idx = members.pop(m.left_id) + members.pop(m.right_id)
        members[m.new_id] = idx
        scratch.pop(m.left_id, None)
        scratch.pop(m.right_id, None)
        scratch[m.new_id] = one_means_cost(dataset.points[idx], dataset.weights[idx])
        merged.append(m.cost)
        level = math.fsum(scratch.values())
        total = math.fsum(merged)
        scale = max(level, total)
        if scale > 0:
            worst = max(worst, abs(total - level) / scale)
    return worst


def verify_1d_convexity(dendrogram: Dendrogram, dataset: Dataset) -> bool:
    """Check that every merge joins clusters that are neighbours on the line.

    Fails if, at some merge, another live cluster has its centroid strictly
    between the centroids of the two clusters being merged.
    """
    if dataset.dim != 1:
        raise ValueError(f"convexity check needs 1-dimensional data, got dim={dataset.dim}")
    n = dataset.n
    cl = _Clusters(dataset)
    alive = np.zeros(2 * n - 1, dtype=bool)
    alive[:n] = True
    for m in dendrogram.merges:
        a, b = m.left_id, m.right_id
        lo, hi = sorted((cl.center[a, 0], cl.center[b, 0]))
        alive[a] = alive[b] = False
        c = cl.center[: m.new_id, 0][alive[: m.new_id]]
        if np.any((c > lo) & (c < hi)):
            return False
        cl.merge(a, b, m.new_id)
        alive[m.new_id] = True
    return True
