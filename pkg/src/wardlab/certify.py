"""Clusterability measurements for a labeled dataset.

All quantities are taken with respect to the centroids of the given
labeling; for an optimal labeling those are exactly the optimal centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset

__all__ = [
    "SeparationCertificate",
    "certify",
    "certify_eps_separation",
    "predict_ward_quality",
    "TWO_APPROX_SEPARATION",
    "TWO_APPROX_PROXIMITY",
    "recovery_separation",
]

TWO_APPROX_SEPARATION = 2.0 + 2.0 * math.sqrt(2.0)
TWO_APPROX_PROXIMITY = 3.0 + 2.0 * math.sqrt(2.0)


def recovery_separation(nu: float) -> float:
    """Strong separation above which Ward recovers a nu-balanced optimum."""
    return 2.0 + 2.0 * math.sqrt(2.0 * nu)


@dataclass(frozen=True, eq=False)
class SeparationCertificate:
    delta_weak: float
    delta_strong: float
    alpha: float
    nu: float
    strict_separation: bool
    centers_used: np.ndarray
    eps_separation: float | None = None


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def certify(dataset: Dataset) -> SeparationCertificate:
    """Measure weak/strong center separation, center proximity, balance and
    strict separation of the dataset's labeling.

    Zero radii and points sitting exactly on their own center contribute
    +inf to the corresponding minimum.
    """
    if dataset.labels is None:
        raise ValueError("certification needs a labeled dataset")
    k = dataset.k
    if k < 2:
        raise ValueError("certification needs at least two classes")
    x, w, lab = dataset.points, dataset.weights, dataset.labels

    centers = np.empty((k, dataset.dim))
    class_weight = np.empty(k)
    for j in range(k):
        m = lab == j
        class_weight[j] = w[m].sum()
        centers[j] = (w[m] @ x[m]) / class_weight[j]

    to_centers = _pairwise(x, centers)  # (n, k)
    own = to_centers[np.arange(len(x)), lab]
    radius = np.array([own[lab == j].max() for j in range(k)])

    cc = _pairwise(centers, centers)
    np.fill_diagonal(cc, np.inf)
    nearest_center = cc.min(axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        weak_terms = np.where(radius > 0, nearest_center / radius, np.inf)
        delta_weak = float(weak_terms.min())
        rmax = radius.max()
        delta_strong = float(nearest_center.min() / rmax) if rmax > 0 else math.inf

        other = to_centers.copy()
        other[np.arange(len(x)), lab] = np.inf
        ratio = np.where(own > 0, other.min(axis=1) / own, np.inf)
        alpha = float(ratio.min())

    nu = float(class_weight.max() / class_weight.min())

    pd = _pairwise(x, x)
    same = lab[:, None] == lab[None, :]
    far_own = np.where(same, pd, -np.inf).max(axis=1)
    near_other = np.where(same, np.inf, pd).min(axis=1)
    strict = bool(np.all(far_own < near_other))

    return SeparationCertificate(delta_weak, delta_strong, alpha, nu, strict, centers)


def certify_eps_separation(dataset: Dataset, k: int, oracle: str = "brute-force") -> float:
    """sqrt(opt_k / opt_{k-1}); small values mean k clusters fit much
    better than k - 1."""
    from .oracles import BRUTE_FORCE_MAX_N, brute_force_opt, opt_1d_dp

    if k < 2:
        raise ValueError(f"epsilon-separation needs k >= 2, got {k}")
    if oracle == "brute-force":
        if dataset.n > BRUTE_FORCE_MAX_N:
            raise ValueError(f"brute-force oracle limited to n <= {BRUTE_FORCE_MAX_N}")
        solve = brute_force_opt
    elif oracle == "dp-1d":
        if dataset.dim != 1:
            raise ValueError("dp-1d oracle needs 1-dimensional data")
        solve = opt_1d_dp
    else:
        raise ValueError(f"unknown oracle {oracle!r}")
    if k > dataset.n:
        raise ValueError(f"k={k} exceeds the number of points {dataset.n}")
    opt_k = solve(dataset, k).clustering.cost
    opt_prev = solve(dataset, k - 1).clustering.cost
    if opt_prev <= 0:
        raise ValueError("degenerate instance: opt_{k-1} is zero")
    return math.sqrt(opt_k / opt_prev)


def predict_ward_quality(cert: SeparationCertificate) -> str:
    """Which guarantee, if any, the certificate triggers for Ward."""
    if cert.delta_strong > recovery_separation(cert.nu):
        return "optimal-recovery"
    if cert.delta_weak > TWO_APPROX_SEPARATION or cert.alpha > TWO_APPROX_PROXIMITY:
        return "two-approx"
    return "no-guarantee"
