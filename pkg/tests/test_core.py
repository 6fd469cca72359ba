import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wardlab.core import (
    ClusterSummary,
    Dataset,
    EmptyClusterError,
    WeightedPoint,
    centroid,
    cost_to_center,
    merge_delta,
    merge_summaries,
    one_means_cost,
)
from wardlab.instances import LowerBoundParams, gen_lowerbound

import laws

P = WeightedPoint


def summary(coords, weight=1.0, idx=0):
    x = np.atleast_2d(np.asarray(coords, dtype=float))
    return ClusterSummary(weight, x[0], 0.0, (idx,))


# centroid / one_means_cost / cost_to_center


def test_centroid_examples():
    assert centroid([P((0,)), P((2,))]) == pytest.approx([1.0])
    assert centroid([P((0,), 3), P((4,), 1)]) == pytest.approx([1.0])
    assert centroid([P((5, 5), 7)]) == pytest.approx([5.0, 5.0])


def test_empty_cluster_rejected():
    for fn in (centroid, one_means_cost):
        with pytest.raises(EmptyClusterError, match="empty cluster"):
            fn([])


def test_one_means_cost_examples():
    assert one_means_cost([P((0,)), P((2,))]) == pytest.approx(2.0)
    assert one_means_cost([P((3.7,), 123.0)]) == 0.0
    assert one_means_cost([P((0,)), P((1,))]) == pytest.approx(0.5)


def test_cost_to_center_examples():
    pts = [P((0,)), P((2,))]
    assert cost_to_center(pts, [1.0]) == pytest.approx(2.0)
    assert cost_to_center(pts, [0.0]) == pytest.approx(4.0)
    assert cost_to_center([P((1.5, -2.0), 4.0)], [1.5, -2.0]) == 0.0


def test_cost_to_center_dimension_mismatch():
    with pytest.raises(ValueError):
        cost_to_center([P((0, 0))], [1.0])


# merge_delta / merge_summaries


def test_merge_delta_examples():
    assert merge_delta(summary([0.0], idx=0), summary([1.0], idx=1)) == pytest.approx(0.5)
    # (3*1/4) * 4^2, and from scratch 3*1^2 + 1*3^2 around the centroid 1
    assert merge_delta(summary([0.0], 3.0, 0), summary([4.0], 1.0, 1)) == pytest.approx(12.0)
    assert one_means_cost([P((0,), 3), P((4,), 1)]) == pytest.approx(12.0)


def test_merge_delta_lowerbound_light_pair():
    ds = gen_lowerbound(LowerBoundParams(2))
    light = np.flatnonzero(ds.weights == 1.0)
    a, b = [i for i in light if ds.points[i, 1] > 0]
    got = merge_delta(ds.summary([a]), ds.summary([b]))
    assert got == pytest.approx((2 - math.sqrt(2)) ** 2, rel=1e-12)


def test_merge_delta_non_disjoint():
    a = summary([0.0], idx=0)
    with pytest.raises(ValueError, match="non-disjoint merge"):
        merge_delta(a, a)
    with pytest.raises(ValueError, match="non-disjoint merge"):
        merge_summaries(a, a)


def test_merge_delta_dimension_mismatch():
    with pytest.raises(ValueError):
        merge_delta(summary([0.0], idx=0), summary([0.0, 1.0], idx=1))


def test_merge_summaries_examples():
    m = merge_summaries(summary([0.0], idx=0), summary([2.0], idx=1))
    assert m.weight == 2.0 and m.centroid == pytest.approx([1.0]) and m.internal_cost == pytest.approx(2.0)
    assert m.members == (0, 1)
    dup = merge_summaries(summary([3.0, 1.0], idx=4), summary([3.0, 1.0], idx=2))
    assert dup.internal_cost == 0.0 and dup.members == (2, 4)
    assert dup.centroid == pytest.approx([3.0, 1.0])


def test_merge_summaries_associative():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(9, 3))
    w = rng.uniform(0.5, 2.0, 9)
    A, B, C = (ClusterSummary.from_points(x, w, m) for m in ([0, 1, 2], [3, 4], [5, 6, 7, 8]))
    left = merge_summaries(merge_summaries(A, B), C)
    right = merge_summaries(merge_summaries(A, C), B)
    assert left.internal_cost == pytest.approx(right.internal_cost, rel=1e-9)
    assert left.internal_cost == pytest.approx(one_means_cost(x, w), rel=1e-9)


def test_incremental_chain_drift():
    rng = np.random.default_rng(11)
    n = 1000
    x = rng.normal(scale=10.0, size=(n, 4))
    w = rng.uniform(0.1, 5.0, n)
    acc = ClusterSummary.from_points(x, w, [0])
    for i in range(1, n):
        acc = merge_summaries(acc, ClusterSummary.from_points(x, w, [i]))
    assert acc.internal_cost == pytest.approx(one_means_cost(x, w), rel=1e-6)


# types


def test_weighted_point_validation():
    with pytest.raises(ValueError):
        P((0.0,), 0.0)
    with pytest.raises(ValueError):
        P((float("nan"),))
    with pytest.raises(ValueError):
        P((0.0,), float("inf"))


def test_dataset_validation():
    x = np.zeros((3, 2))
    with pytest.raises(ValueError):
        Dataset(x, np.ones(2))
    with pytest.raises(ValueError):
        Dataset(x, np.ones(3), labels=np.array([0, 2, 2]))  # class 1 empty
    ds = Dataset(x, np.ones(3), labels=np.array([0, 1, 1]))
    assert ds.k == 2 and ds.n == 3 and ds.dim == 2
    with pytest.raises(ValueError):
        ds.points[0, 0] = 1.0


def test_dataset_digest_stable():
    a = Dataset.from_points([P((0.0, 1.0)), P((2.0, 3.0), 2.0)])
    b = Dataset.from_points([P((0.0, 1.0)), P((2.0, 3.0), 2.0)])
    c = Dataset.from_points([P((0.0, 1.0)), P((2.0, 3.0), 2.5)])
    assert a.digest() == b.digest() != c.digest()


# laws (hypothesis)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=6)


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_magic_formula_law(seed, d):
    rng = np.random.default_rng(seed)
    x, w = laws.random_cluster(rng, d)
    assert laws.magic_formula(x, w, rng.normal(scale=5.0, size=d))


@settings(max_examples=200, deadline=None)
@given(seeds, dims, st.booleans())
def test_obsb_law(seed, d, equal):
    rng = np.random.default_rng(seed)
    a, b = laws.random_cluster(rng, d), laws.random_cluster(rng, d)
    if equal:
        b = (b[0], np.full(len(b[1]), a[1].sum() / len(b[1])))
    assert laws.obsb(a, b)


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_relaxed_triangle_law(seed, d):
    x, y, z = np.random.default_rng(seed).normal(scale=3.0, size=(3, d))
    assert laws.relaxed_triangle(x, y, z)


@settings(max_examples=200, deadline=None)
@given(seeds, dims, st.integers(min_value=1, max_value=6))
def test_delta_partition_law(seed, d, parts):
    rng = np.random.default_rng(seed)
    x, w = laws.random_cluster(rng, d, size=int(rng.integers(1, 25)))
    assert laws.delta_partition(x, w, rng.integers(0, parts, len(x)))


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_good_merge_three_law(seed, d):
    rng = np.random.default_rng(seed)
    assert laws.good_merge_three(*(laws.random_cluster(rng, d) for _ in range(3)))


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_good_merge_four_law(seed, d):
    rng = np.random.default_rng(seed)
    assert laws.good_merge_four(*(laws.random_cluster(rng, d) for _ in range(4)))


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_subcluster_law(seed, d):
    rng = np.random.default_rng(seed)
    a = laws.random_cluster(rng, d)
    b = laws.random_cluster(rng, d, size=int(rng.integers(2, 9)))
    keep = rng.random(len(b[1])) < 0.5
    keep[0] = True
    assert laws.subcluster(a, b, keep) in (True, None)
