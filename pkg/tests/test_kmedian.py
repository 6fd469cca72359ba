import itertools
import math

import numpy as np
import pytest

from wardlab.core import Dataset
from wardlab.instances import FiniteMetricInstance, star_graph_instance, star_graph_points, triangle_instance
from wardlab.kmedian import (
    GeometricMedianError,
    discrete_median_cost,
    geometric_median,
    kmedian_greedy_discrete,
    kmedian_greedy_euclidean,
    median_objective,
)
from wardlab.ward import is_monotone, ward_reference


def test_geometric_median_small_cases():
    assert geometric_median(np.array([[2.0, 3.0]])) == pytest.approx([2.0, 3.0])
    two = np.array([[0.0, 0.0], [3.0, 4.0]])
    c = geometric_median(two)
    assert median_objective(two, np.ones(2), c) == pytest.approx(5.0)
    assert geometric_median(two, np.array([1.0, 2.0])) == pytest.approx([3.0, 4.0])


def test_geometric_median_triangle():
    ds = triangle_instance()
    c = geometric_median(ds.points, ds.weights)
    assert median_objective(ds.points, ds.weights, c) == pytest.approx(math.sqrt(3), abs=1e-9)
    assert c == pytest.approx([0.5, math.sqrt(3) / 6], abs=1e-6)


def test_geometric_median_vertex_optimal():
    # a heavy vertex is itself the median
    x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert geometric_median(x, np.array([5.0, 1.0, 1.0])) == pytest.approx([0.0, 0.0])


def test_geometric_median_beats_every_input_point():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(3, 15))
        x, w = rng.normal(size=(n, 3)), rng.uniform(0.1, 3.0, n)
        f = median_objective(x, w, geometric_median(x, w))
        assert all(f <= median_objective(x, w, p) + 1e-10 for p in x)


def test_geometric_median_errors():
    with pytest.raises(ValueError):
        geometric_median(np.array([[0.0], [1.0]]), tol=0)
    x = np.random.default_rng(1).normal(size=(20, 2))
    with pytest.raises(GeometricMedianError) as err:
        geometric_median(x, tol=1e-300, max_iter=3)
    assert err.value.best.shape == (2,)


def test_triangle_trace():
    trace = kmedian_greedy_euclidean(triangle_instance(), 1)
    first, second = trace.increases
    assert first == pytest.approx(1.0, abs=1e-6)
    assert second == pytest.approx(math.sqrt(3) - 1, abs=1e-4)
    assert second < first and second < math.sqrt(3) / 2
    assert not trace.monotone
    assert trace.final_cost == pytest.approx(math.sqrt(3), abs=1e-9)
    assert trace.setting == "euclidean-continuous"


def test_two_point_trace():
    ds = Dataset(np.array([[0.0, 0.0], [0.0, 2.5]]), np.ones(2))
    trace = kmedian_greedy_euclidean(ds, 1)
    assert len(trace.merges) == 1 and trace.increases[0] == pytest.approx(2.5)


def test_ward_on_triangle_is_monotone():
    assert is_monotone(ward_reference(triangle_instance()).costs)
    assert is_monotone(ward_reference(star_graph_points()).costs)


def test_star_trace():
    trace = kmedian_greedy_discrete(star_graph_instance(), 1)
    a, b, first = trace.merges[0]
    assert first == pytest.approx(1.0)
    assert 0 in a + b and len(a + b) == 2
    inc = trace.increases
    assert any(inc[j] < inc[i] for i in range(len(inc)) for j in range(i + 1, len(inc)))
    assert not trace.monotone
    assert trace.setting == "finite-metric-discrete"


def _exhaustive_trace(inst):
    """Replays the greedy by scoring every pair against every candidate center."""
    clusters = [(i,) for i in range(inst.n)]

    def cost(c):
        return min(sum(inst.weights[x] * inst.dist[x, p] for x in c) for p in range(inst.n))

    out = []
    while len(clusters) > 1:
        best = min(
            (cost(tuple(sorted(a + b))) - cost(a) - cost(b), a, b) for a, b in itertools.combinations(clusters, 2)
        )
        out.append(best[0])
        clusters = sorted([c for c in clusters if c not in best[1:]] + [tuple(sorted(best[1] + best[2]))])
    return out


def test_star_trace_matches_exhaustive_replay():
    inst = star_graph_instance()
    assert kmedian_greedy_discrete(inst, 1).increases == pytest.approx(_exhaustive_trace(inst))
    assert kmedian_greedy_discrete(inst, 1).increases == pytest.approx([1.0, 3.0, 2.0])


def test_discrete_cost_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(2, 11))
        x = rng.normal(size=(n, 2))
        inst = FiniteMetricInstance(np.linalg.norm(x[:, None] - x[None], axis=2), rng.uniform(0.5, 2, n))
        members = [i for i in range(n) if rng.random() < 0.6] or [0]
        expect = min(sum(inst.weights[m] * inst.dist[m, c] for m in members) for c in range(n))
        assert discrete_median_cost(inst, members) == pytest.approx(expect)


def test_k_stop_bounds():
    with pytest.raises(ValueError):
        kmedian_greedy_euclidean(triangle_instance(), 3)
    with pytest.raises(ValueError):
        kmedian_greedy_discrete(star_graph_instance(), 0)
    assert len(kmedian_greedy_discrete(star_graph_instance(), 2).merges) == 2
