"""Exact k-means optima for small or one-dimensional inputs, plus k-means++.

These are the yardsticks the approximation experiments compare Ward to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .ward import Clustering

__all__ = [
    "OracleResult",
    "BRUTE_FORCE_MAX_N",
    "brute_force_opt",
    "opt_1d_dp",
    "kmeanspp_seed",
    "cost_of_centers",
    "restricted_growth_strings",
]

BRUTE_FORCE_MAX_N = 14
_CHUNK = 1 << 17
_DENSE_DP_MAX_N = 2048


@dataclass(frozen=True)
class OracleResult:
    clustering: Clustering
    method: str
    work: int


def _check_k(n: int, k: int):
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")


def restricted_growth_strings(n: int, k: int, chunk: int = _CHUNK):
    """Yield int8 arrays whose rows are all set partitions of n items into
    exactly k blocks, encoded as restricted growth strings.

    Prefixes are expanded breadth-first and split depth-first whenever a
    batch grows past ``chunk`` rows, so memory stays bounded.
    """
    _check_k(n, k)
    stack = [(np.zeros((1, 1), dtype=np.int8), np.zeros(1, dtype=np.int8))]
    while stack:
        prefix, top = stack.pop()
        i = prefix.shape[1]
        if i == n:
            yield prefix
            continue
        rows, tops = [], []
        for v in range(k):
            ok = v <= top + 1
            new_top = np.maximum(top, v)
            # enough positions left to open the remaining blocks
            ok &= new_top + 1 + (n - i - 1) >= k
            if ok.any():
                ext = np.empty((int(ok.sum()), i + 1), dtype=np.int8)
                ext[:, :i] = prefix[ok]
                ext[:, i] = v
                rows.append(ext)
                tops.append(new_top[ok].astype(np.int8))
        if not rows:
            continue
        batch, btop = np.concatenate(rows), np.concatenate(tops)
        order = np.lexsort(batch.T[::-1])
        batch, btop = batch[order], btop[order]
        pieces = range(0, len(batch), chunk)
        for s in reversed(pieces):
            stack.append((batch[s : s + chunk], btop[s : s + chunk]))


def brute_force_opt(dataset: Dataset, k: int) -> OracleResult:
    """Optimal k-means by enumerating every partition into k blocks."""
    n = dataset.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"instance too large for brute force (n={n} > {BRUTE_FORCE_MAX_N})")
    if n < 1:
        raise ValueError("empty instance")
    _check_k(n, k)
    w = dataset.weights
    x = dataset.points - (w @ dataset.points) / w.sum()
    wx = w[:, None] * x
    wq = w * np.einsum("ij,ij->i", x, x)

    best_cost, best_row, work = np.inf, None, 0
    for block in restricted_growth_strings(n, k):
        cost = np.zeros(len(block))
        for j in range(k):
            m = (block == j).astype(np.float64)
            mw = m @ w
            s = m @ wx
            cost += m @ wq - np.einsum("ij,ij->i", s, s) / mw
        i = int(np.argmin(cost))
        work += len(block)
        if cost[i] < best_cost:
            best_cost, best_row = cost[i], block[i]
    clustering = Clustering.from_assignment(dataset, best_row)
    return OracleResult(clustering, "brute-force", work)


def _interval_costs(ps_w, ps_x, ps_q, lo, hi):
    """1-means cost of sorted points lo..hi-1 (arrays of bounds allowed)."""
    w = ps_w[hi] - ps_w[lo]
    s = ps_x[hi] - ps_x[lo]
    q = ps_q[hi] - ps_q[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        c = q - s * s / w
    return np.maximum(c, 0.0)


def opt_1d_dp(dataset: Dataset, k: int) -> OracleResult:
    """Exact 1-D k-means by dynamic programming over contiguous intervals.

    ``best[j][i]`` is the optimal cost of the first i sorted points using
    j clusters. The last interval's start is chosen as the largest
    minimiser, i.e. ties go to the shorter last interval. Inputs up to a
    couple of thousand points use a dense transition table; larger ones use
    divide and conquer over the monotone split points.
    """
    if dataset.dim != 1:
        raise ValueError(f"1-D dynamic program needs dim=1, got {dataset.dim}")
    n = dataset.n
    _check_k(n, k)
    order = np.argsort(dataset.points[:, 0], kind="stable")
    w = dataset.weights[order]
    x = dataset.points[order, 0]
    x = x - (w @ x) / w.sum()
    ps_w = np.concatenate(([0.0], np.cumsum(w)))
    ps_x = np.concatenate(([0.0], np.cumsum(w * x)))
    ps_q = np.concatenate(([0.0], np.cumsum(w * x * x)))

    prev = np.full(n + 1, np.inf)
    prev[0] = 0.0
    split = np.zeros((k + 1, n + 1), dtype=np.int64)
    work = 0
    dense = n <= _DENSE_DP_MAX_N
    if dense:
        lo = np.arange(n + 1)[:, None]
        hi = np.arange(n + 1)[None, :]
        table = np.where(lo < hi, _interval_costs(ps_w, ps_x, ps_q, np.minimum(lo, hi), hi), np.inf)
    for j in range(1, k + 1):
        cur = np.full(n + 1, np.inf)
        if dense:
            cand = prev[:, None] + table
            # largest minimiser: argmin over the reversed start index
            rev = cand[::-1]
            arg = n - np.argmin(rev, axis=0)
            cur = cand[arg, np.arange(n + 1)]
            cur[: j] = np.inf
            split[j] = arg
            work += (n + 1) * (n + 1)
        else:
            work += _dc_layer(prev, cur, split[j], j, ps_w, ps_x, ps_q)
        prev = cur

    bounds = [n]
    for j in range(k, 0, -1):
        bounds.append(int(split[j][bounds[-1]]))
    bounds = bounds[::-1]
    labels_sorted = np.empty(n, dtype=np.int64)
    for j in range(k):
        labels_sorted[bounds[j] : bounds[j + 1]] = j
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = labels_sorted
    return OracleResult(Clustering.from_assignment(dataset, assignment), "dp-1d", work)


def _dc_layer(prev, cur, split, j, ps_w, ps_x, ps_q) -> int:
    n = len(cur) - 1
    work = 0
    stack = [(j, n, j - 1, n - 1)]
    while stack:
        lo, hi, opt_lo, opt_hi = stack.pop()
        if lo > hi:
            continue
        mid = (lo + hi) // 2
        starts = np.arange(opt_lo, min(mid - 1, opt_hi) + 1)
        vals = prev[starts] + _interval_costs(ps_w, ps_x, ps_q, starts, np.full(len(starts), mid))
        best = len(vals) - 1 - int(np.argmin(vals[::-1]))
        cur[mid] = vals[best]
        split[mid] = starts[best]
        work += len(starts)
        stack.append((lo, mid - 1, opt_lo, int(starts[best])))
        stack.append((mid + 1, hi, int(starts[best]), opt_hi))
    return work


def cost_of_centers(dataset: Dataset, centers) -> float:
    """Weighted k-means cost with every point sent to its nearest center."""
    c = np.asarray(centers, dtype=np.float64)
    if c.ndim == 1:
        c = c[:, None] if dataset.dim == 1 else c[None, :]
    if c.shape[0] == 0:
        raise ValueError("need at least one center")
    if c.shape[1] != dataset.dim:
        raise ValueError(f"centers have dimension {c.shape[1]}, data has {dataset.dim}")
    return float(dataset.weights @ _min_sqdist(dataset.points, c))


def _min_sqdist(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    out = np.full(len(x), np.inf)
    for center in c:
        diff = x - center
        np.minimum(out, np.einsum("ij,ij->i", diff, diff), out=out)
    return out


def kmeanspp_seed(dataset: Dataset, k: int, seed: int) -> tuple[np.ndarray, float]:
    """k-means++ seeding on weighted points (no Lloyd steps afterwards).

    The first center is drawn proportionally to weight, each further one
    proportionally to weight times squared distance to the nearest chosen
    center. Returns the centers and their k-means cost.
    """
    n = dataset.n
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    _check_k(n, k)
    rng = np.random.default_rng(seed)
    x, w = dataset.points, dataset.weights
    chosen = [int(rng.choice(n, p=w / w.sum()))]
    d2 = np.einsum("ij,ij->i", x - x[chosen[0]], x - x[chosen[0]])
    for _ in range(1, k):
        p = w * d2
        total = p.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=p / total))
        else:
            # every point already sits on a center; any unused point is free
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free, p=w[free] / w[free].sum()))
        chosen.append(nxt)
        diff = x - x[nxt]
        np.minimum(d2, np.einsum("ij,ij->i", diff, diff), out=d2)
    centers = x[chosen].copy()
    return centers, float(w @ d2)
