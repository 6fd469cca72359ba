"""Instance generators.

* the lower-bound family: 2^(d+1) points in R^d on which Ward's 2^d-clustering
  is exponentially worse than optimal, with closed forms for both costs;
* planted clusterings certified to a target center separation;
* plain random point clouds;
* the two small k-median examples (equilateral triangle, weighted star).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset

__all__ = [
    "LowerBoundParams",
    "FiniteMetricInstance",
    "z_squared",
    "gen_lowerbound",
    "closed_form_opt",
    "closed_form_ward",
    "closed_form_ratio",
    "gen_separated",
    "gen_random",
    "star_graph_instance",
    "star_graph_points",
    "triangle_instance",
    "RANDOM_DISTRIBUTIONS",
]

SQRT2 = math.sqrt(2.0)
LIGHT_GAP = 2.0 - SQRT2  # distance from a light point to its heavy point
MAX_LOWERBOUND_D = 20


def z_squared(i: int) -> float:
    """Squared half-width of the lower-bound construction in coordinate i."""
    if i < 2:
        raise ValueError(f"z_i is defined for i >= 2, got {i}")
    return 3.0 ** (i - 2) / 2.0 ** (i - 1)


@dataclass(frozen=True)
class LowerBoundParams:
    d: int
    heavy_weight: float = 1e9
    eps: float = 1e-4

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"lower-bound family needs d >= 2, got {self.d}")
        if self.d > MAX_LOWERBOUND_D:
            raise ValueError(f"d={self.d} exceeds the point-count guard d <= {MAX_LOWERBOUND_D}")
        if not 0 < self.eps < LIGHT_GAP / 100:
            raise ValueError(f"eps must lie in (0, {LIGHT_GAP / 100:.6g}), got {self.eps}")
        if not self.heavy_weight >= 1e6:
            raise ValueError(f"heavy_weight must be >= 1e6, got {self.heavy_weight}")


def gen_lowerbound(params: LowerBoundParams) -> Dataset:
    """Build the lower-bound instance in dimension ``params.d``.

    First coordinates are -(1+eps), -(sqrt2-1), sqrt2-1, 1+eps; coordinate
    i >= 2 is +-z_i. Points with |x_1| = 1+eps are heavy. Pushing the heavy
    points outward by eps turns every tie of the idealised construction
    into a strict preference for the bad merge order.

    Labels mark the optimal 2^d-clustering: every heavy point with the light
    point nearest to it.
    """
    d, W, eps = params.d, params.heavy_weight, params.eps
    z = [math.sqrt(z_squared(i)) for i in range(2, d + 1)]
    first = (-(1.0 + eps), -(SQRT2 - 1.0), SQRT2 - 1.0, 1.0 + eps)
    points, weights, labels = [], [], []
    for x1 in first:
        side = 0 if x1 < 0 else 1
        for rest_id, signs in enumerate(itertools.product((-1.0, 1.0), repeat=d - 1)):
            points.append([x1] + [s * zi for s, zi in zip(signs, z)])
            weights.append(W if abs(x1) > 1.0 else 1.0)
            labels.append(side * 2 ** (d - 1) + rest_id)
    meta = {"generator": "lowerbound", "d": d, "heavy_weight": W, "eps": eps}
    return Dataset(np.array(points), np.array(weights), labels=labels, meta=meta)


def closed_form_opt(d: int) -> float:
    """Optimal 2^d-means cost of the idealised (unperturbed) instance."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return 2.0**d * LIGHT_GAP**2


def closed_form_ward(d: int) -> float:
    """Cost of Ward's 2^d-clustering on the idealised instance."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return 4.0 * 3.0 ** (d - 1) + 2.0 ** (d - 1) * LIGHT_GAP**2 - 2.0**d


def closed_form_ratio(d: int) -> float:
    """Ward / optimum, written in its (3/2)^d form."""
    g = LIGHT_GAP**2
    return 4.0 / (3.0 * g) * 1.5**d + 0.5 - 1.0 / g


@dataclass(frozen=True, eq=False)
class FiniteMetricInstance:
    dist: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        dist = np.array(self.dist, dtype=np.float64, copy=True)
        w = np.array(self.weights, dtype=np.float64, copy=True)
        n = len(w)
        if dist.shape != (n, n):
            raise ValueError(f"distance matrix must be {n}x{n}, got {dist.shape}")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be positive and finite")
        if np.any(dist < 0) or not np.all(np.isfinite(dist)):
            raise ValueError("distances must be finite and non-negative")
        if not np.array_equal(dist, dist.T):
            raise ValueError("distance matrix is not symmetric")
        if np.any(np.diag(dist) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        # d[i, j] <= d[i, m] + d[m, j] for all m
        via = (dist[:, :, None] + dist[None, :, :]).min(axis=1)
        if np.any(dist > via + 1e-12 * max(1.0, float(dist.max()))):
            raise ValueError("distance matrix violates the triangle inequality")
        dist.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return len(self.weights)


def star_graph_instance() -> FiniteMetricInstance:
    """Star with a weight-1 center and three weight-2 leaves, unit edges.

    Index 0 is the center; distances are shortest paths.
    """
    dist = np.array(
        [
            [0.0, 1.0, 1.0, 1.0],
            [1.0, 0.0, 2.0, 2.0],
            [1.0, 2.0, 0.0, 2.0],
            [1.0, 2.0, 2.0, 0.0],
        ]
    )
    return FiniteMetricInstance(dist, np.array([1.0, 2.0, 2.0, 2.0]))


def star_graph_points() -> Dataset:
    """Planar drawing of the star: center at the origin, leaves on the unit
    circle at 0, 120 and 240 degrees, same weights as the metric instance."""
    ang = np.deg2rad([0.0, 120.0, 240.0])
    pts = np.vstack([[0.0, 0.0], np.column_stack([np.cos(ang), np.sin(ang)])])
    return Dataset(pts, np.array([1.0, 2.0, 2.0, 2.0]), meta={"generator": "star-drawing"})


def triangle_instance() -> Dataset:
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
    return Dataset(pts, np.ones(3), meta={"generator": "triangle"})


def _grid_layout(k: int, d: int) -> np.ndarray:
    """k distinct integer grid points in R^d, minimum pairwise distance 1."""
    side = max(2, math.ceil(k ** (1.0 / d) - 1e-9))
    while side**d < k:
        side += 1
    cells = itertools.islice(itertools.product(range(side), repeat=d), k)
    return np.array(list(cells), dtype=np.float64)


def _unit_ball(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    v = rng.normal(size=(m, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = rng.uniform(size=(m, 1)) ** (1.0 / d)
    return v * r


def gen_separated(
    k: int,
    d: int,
    sizes,
    target_delta: float,
    seed: int,
    separation: str = "weak",
    margin: float = 0.5,
    max_tries: int = 100,
) -> Dataset:
    """Planted clustering certified to ``target_delta`` center separation.

    Each cluster is ``sizes[i]`` unit-weight points drawn uniformly from a
    unit ball around a grid node. Grid spacing starts at
    ``target_delta + margin`` and is widened until the certificate of the
    planted labels reaches the target (``separation`` picks the weak or
    strong variant).
    """
    from .certify import certify

    sizes = [int(s) for s in sizes]
    if k < 2:
        raise ValueError(f"need k >= 2 clusters, got {k}")
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if len(sizes) != k or min(sizes) < 1:
        raise ValueError("sizes must list k positive integers")
    if not target_delta > 0:
        raise ValueError("target_delta must be positive")
    if separation not in ("weak", "strong"):
        raise ValueError(f"separation must be 'weak' or 'strong', got {separation!r}")

    rng = np.random.default_rng(seed)
    grid = _grid_layout(k, d)
    offsets = [_unit_ball(rng, s, d) for s in sizes]
    labels = np.repeat(np.arange(k), sizes)
    spacing = target_delta + margin
    for _ in range(max_tries):
        pts = np.vstack([spacing * g + off for g, off in zip(grid, offsets)])
        ds = Dataset(
            pts,
            np.ones(len(pts)),
            labels=labels,
            meta={
                "generator": "separated",
                "k": k,
                "d": d,
                "sizes": sizes,
                "target_delta": target_delta,
                "separation": separation,
                "seed": seed,
            },
        )
        cert = certify(ds)
        got = cert.delta_weak if separation == "weak" else cert.delta_strong
        if got >= target_delta:
            return ds
        spacing *= max(1.01, 1.01 * target_delta / got)
    raise RuntimeError(f"could not reach separation {target_delta} in {max_tries} rescalings")


RANDOM_DISTRIBUTIONS = ("uniform-cube", "gaussian", "mixture")


def gen_random(n: int, d: int, seed: int, distribution: str = "gaussian", components: int | None = None) -> Dataset:
    """Unit-weight random points; ``mixture`` also attaches component labels.

    ``components`` defaults to min(3, n).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    meta = {"generator": "random", "distribution": distribution, "n": n, "d": d, "seed": seed}
    if distribution == "uniform-cube":
        return Dataset(rng.uniform(size=(n, d)), np.ones(n), meta=meta)
    if distribution == "gaussian":
        return Dataset(rng.normal(size=(n, d)), np.ones(n), meta=meta)
    if distribution == "mixture":
        components = min(3, n) if components is None else components
        if not 1 <= components <= n:
            raise ValueError(f"need 1 <= components <= n, got {components}")
        means = rng.normal(scale=5.0, size=(components, d))
        # every component gets at least one point
        labels = np.concatenate([np.arange(components), rng.integers(components, size=n - components)])
        labels = labels[rng.permutation(n)]
        pts = means[labels] + rng.normal(size=(n, d))
        meta["components"] = components
        return Dataset(pts, np.ones(n), labels=labels, meta=meta)
    raise ValueError(f"unknown distribution {distribution!r}; choose from {RANDOM_DISTRIBUTIONS}")
