import math

import numpy as np
import pytest

from wardlab.certify import (
    TWO_APPROX_PROXIMITY,
    TWO_APPROX_SEPARATION,
    SeparationCertificate,
    certify,
    certify_eps_separation,
    predict_ward_quality,
    recovery_separation,
)
from wardlab.core import Dataset
from wardlab.instances import LowerBoundParams, gen_lowerbound, gen_random, gen_separated


def labeled(xs, labels, w=None):
    x = np.asarray(xs, dtype=float)
    x = x.reshape(len(x), -1)
    return Dataset(x, np.ones(len(x)) if w is None else np.asarray(w, float), labels=np.asarray(labels))


def cert(delta_weak=1.0, delta_strong=1.0, alpha=1.0, nu=1.0):
    return SeparationCertificate(delta_weak, delta_strong, alpha, nu, False, np.zeros((2, 1)))


def test_singleton_clusters_infinite():
    c = certify(labeled([0.0, 10.0], [0, 1]))
    assert c.delta_weak == math.inf and c.delta_strong == math.inf and c.alpha == math.inf
    assert c.nu == 1.0 and c.strict_separation


def test_two_intervals():
    c = certify(labeled([0, 1, 9, 10], [0, 0, 1, 1]))
    assert c.delta_strong == pytest.approx(18.0)
    assert c.delta_weak == pytest.approx(18.0)
    assert c.alpha == pytest.approx(8.5 / 0.5)
    assert c.centers_used[:, 0] == pytest.approx([0.5, 9.5])
    assert c.strict_separation


def test_lowerbound_separation():
    c = certify(gen_lowerbound(LowerBoundParams(2)))
    assert c.delta_strong <= 1 + math.sqrt(2) + 0.05
    assert c.strict_separation


def test_weak_uses_per_cluster_radius():
    # radii 0.5 and 2; nearest-center distance 10
    c = certify(labeled([0, 1, 8, 12], [0, 0, 1, 1]))
    assert c.delta_weak == pytest.approx(min(9.5 / 0.5, 9.5 / 2))
    assert c.delta_strong == pytest.approx(9.5 / 2)


def test_nu_uses_weights():
    c = certify(labeled([0, 1, 9, 10], [0, 0, 1, 1], w=[1, 1, 3, 5]))
    assert c.nu == pytest.approx(4.0)


def test_strict_separation_false():
    c = certify(labeled([0, 3, 4, 5], [0, 0, 1, 1]))
    assert not c.strict_separation


def test_errors():
    with pytest.raises(ValueError):
        certify(gen_random(5, 2, 0))
    with pytest.raises(ValueError):
        certify(labeled([0, 1], [0, 0]))


def test_relations_on_random_labelings():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 30))
        k = int(rng.integers(2, min(n, 6) + 1))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
        ds = Dataset(rng.normal(size=(n, 3)), rng.uniform(0.5, 2, n), labels=rng.permutation(labels))
        c = certify(ds)
        assert c.delta_strong <= c.delta_weak
        assert c.nu >= 1
        if math.isfinite(c.alpha):
            assert c.delta_weak >= (c.alpha - 1) * (1 - 1e-12)


def test_scale_invariance():
    ds = gen_separated(3, 2, [4, 5, 3], 6.0, seed=4)
    a = certify(ds)
    b = certify(Dataset(ds.points * 37.5, ds.weights, labels=ds.labels))
    for f in ("delta_weak", "delta_strong", "alpha", "nu"):
        assert getattr(b, f) == pytest.approx(getattr(a, f), rel=1e-9)
    assert a.strict_separation == b.strict_separation


def test_eps_separation():
    four = Dataset(np.array([[0.0], [1.0], [4.0], [5.0]]), np.ones(4))
    assert certify_eps_separation(four, 2) == pytest.approx(math.sqrt(1 / 17))
    assert certify_eps_separation(four, 2, oracle="dp-1d") == pytest.approx(math.sqrt(1 / 17))
    assert certify_eps_separation(Dataset(np.array([[0.0], [10.0]]), np.ones(2)), 2) == 0.0
    with pytest.raises(ValueError):
        certify_eps_separation(Dataset(np.array([[1.0], [1.0]]), np.ones(2)), 2)
    with pytest.raises(ValueError):
        certify_eps_separation(four, 1)
    with pytest.raises(ValueError):
        certify_eps_separation(gen_random(15, 2, 0), 2)
    with pytest.raises(ValueError):
        certify_eps_separation(gen_random(5, 2, 0), 2, oracle="dp-1d")
    with pytest.raises(ValueError):
        certify_eps_separation(four, 2, oracle="magic")


def test_thresholds():
    assert TWO_APPROX_SEPARATION == pytest.approx(4.828427, abs=1e-6)
    assert TWO_APPROX_PROXIMITY == pytest.approx(5.828427, abs=1e-6)
    assert recovery_separation(1.0) == TWO_APPROX_SEPARATION


def test_verdicts():
    assert predict_ward_quality(cert(delta_weak=10, delta_strong=10, nu=1)) == "optimal-recovery"
    assert predict_ward_quality(cert(delta_weak=5, delta_strong=5, nu=100)) == "two-approx"
    assert predict_ward_quality(cert(delta_weak=2, delta_strong=2, alpha=2)) == "no-guarantee"
    assert predict_ward_quality(cert(delta_weak=2, delta_strong=2, alpha=6)) == "two-approx"
    # thresholds are strict
    t = TWO_APPROX_SEPARATION
    assert predict_ward_quality(cert(delta_weak=t, delta_strong=t)) == "no-guarantee"
