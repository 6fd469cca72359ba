"""Experiment drivers behind ``wardlab lowerbound`` and ``wardlab bench``.

Every run returns plain row dicts (one per instance) so the CLI can write
them as CSV and the acceptance tests can assert on them directly. Each row
also carries the per-run health checks: monotone merge costs, the
cost-telescoping error and certificate consistency.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .certify import certify, predict_ward_quality
from .core import Dataset
from .instances import (
    LIGHT_GAP,
    LowerBoundParams,
    closed_form_opt,
    closed_form_ward,
    gen_lowerbound,
    gen_random,
    gen_separated,
)
from .oracles import brute_force_opt, kmeanspp_seed, opt_1d_dp
from .ward import Clustering, extract_clustering, is_monotone, telescoping_error, verify_1d_convexity, ward_reference

__all__ = [
    "derive_seed",
    "SUITES",
    "TWO_APPROX_TARGET",
    "lowerbound_row",
    "run_lowerbound",
    "run_suite",
    "summarize",
    "suite_failures",
    "worker_count",
]

TWO_APPROX_TARGET = 2.0 + 2.0 * math.sqrt(2.0) + 0.1
TELESCOPING_RTOL = 1e-9
CERT_RTOL = 1e-9


def derive_seed(seed: int, *labels) -> int:
    """Stable 64-bit child seed from a parent seed and a label path."""
    text = "|".join([str(int(seed))] + [str(lab) for lab in labels])
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def worker_count() -> int:
    env = os.environ.get("WARDLAB_THREADS")
    if env:
        return max(1, int(env))
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def _certificate_columns(ds: Dataset) -> dict:
    cert = certify(ds)
    ok = cert.delta_strong <= cert.delta_weak * (1 + CERT_RTOL)
    if math.isfinite(cert.alpha):
        ok &= cert.delta_weak >= (cert.alpha - 1) * (1 - CERT_RTOL)
    return {
        "delta_weak": cert.delta_weak,
        "delta_strong": cert.delta_strong,
        "alpha": cert.alpha,
        "nu": cert.nu,
        "strict": cert.strict_separation,
        "verdict": predict_ward_quality(cert),
        "cert_consistent": bool(ok),
    }


def _ward_health(den, ds) -> dict:
    tel = telescoping_error(den, ds)
    return {
        "monotone": is_monotone(den.costs),
        "telescoping_err": tel,
        "telescoping_ok": tel <= TELESCOPING_RTOL,
    }


# lower bound ----------------------------------------------------------------


def _phase_checks(den, ds: Dataset, d: int) -> dict:
    """Phase-one shape and absence of early heavy-heavy merges."""
    n, k = ds.n, 2**d
    heavy = ds.weights > 1.0
    has_heavy = list(heavy) + [False] * (n - 1)
    light_pair_cost = LIGHT_GAP**2
    phase1_ok = True
    for m in den.merges[: 2 ** (d - 1)]:
        a, b = m.left_id, m.right_id
        ok = a < n and b < n and not heavy[a] and not heavy[b]
        ok = ok and np.array_equal(ds.points[a, 1:], ds.points[b, 1:]) and ds.points[a, 0] != ds.points[b, 0]
        ok = ok and abs(m.cost / light_pair_cost - 1.0) <= 0.005
        phase1_ok &= bool(ok)
    heavy_heavy = False
    for m in den.merges:
        if has_heavy[m.left_id] and has_heavy[m.right_id] and m.new_id - n < n - k:
            heavy_heavy = True
        has_heavy[m.new_id] = has_heavy[m.left_id] or has_heavy[m.right_id]
    return {"phase1_ok": phase1_ok, "heavy_heavy_before_k": heavy_heavy}


def lowerbound_row(d: int, heavy_weight: float = 1e9, eps: float = 1e-4) -> dict:
    t0 = time.perf_counter()
    ds = gen_lowerbound(LowerBoundParams(d, heavy_weight, eps))
    den = ward_reference(ds)
    k = 2**d
    ward_cost = extract_clustering(den, ds, k).cost
    planted = Clustering.from_assignment(ds, ds.labels).cost
    row = {
        "d": d,
        "n": ds.n,
        "k": k,
        "measured_ward": ward_cost,
        "closed_ward": closed_form_ward(d),
        "measured_opt_planted": planted,
        "closed_opt": closed_form_opt(d),
        "ratio": ward_cost / planted,
    }
    row.update(_phase_checks(den, ds, d))
    row.update(_ward_health(den, ds))
    row.update(_certificate_columns(ds))
    row["engine"] = den.engine
    row["wall_time"] = time.perf_counter() - t0
    return row


def run_lowerbound(d_min: int = 2, d_max: int = 8, heavy_weight: float = 1e9, eps: float = 1e-4) -> list[dict]:
    if not 2 <= d_min <= d_max:
        raise ValueError(f"need 2 <= d_min <= d_max, got {d_min}, {d_max}")
    return [lowerbound_row(d, heavy_weight, eps) for d in range(d_min, d_max + 1)]


# separated suites -----------------------------------------------------------


def _same_partition(a, b) -> bool:
    return bool(np.array_equal(a, b))


def _separated_case(suite: str, seed: int, index: int) -> dict:
    t0 = time.perf_counter()
    rng = np.random.default_rng(derive_seed(seed, suite, index, "shape"))
    inst_seed = derive_seed(seed, suite, index, "points")
    d = int(rng.integers(1, 4))
    if suite == "separated-2approx":
        k = int(rng.integers(2, 4))
        while True:
            sizes = rng.integers(1, 6, size=k)
            if sizes.sum() <= 12:
                break
        ds = gen_separated(k, d, sizes, TWO_APPROX_TARGET, inst_seed, separation="weak")
    else:
        k = int(rng.integers(2, 5))
        per = int(rng.integers(2, 12 // k + 1))
        ds = gen_separated(k, d, [per] * k, TWO_APPROX_TARGET, inst_seed, separation="strong")
    den = ward_reference(ds)
    ward = extract_clustering(den, ds, k)
    opt = brute_force_opt(ds, k).clustering
    planted = Clustering.from_assignment(ds, ds.labels)
    row = {
        "instance": f"{suite}-{index:03d}",
        "n": ds.n,
        "d": d,
        "k": k,
        "ward_cost": ward.cost,
        "reference_cost": opt.cost,
        "ratio": ward.cost / opt.cost if opt.cost > 0 else (1.0 if ward.cost == 0 else math.inf),
        "ward_equals_planted": _same_partition(ward.assignment, planted.assignment),
        "planted_equals_opt": _same_partition(planted.assignment, opt.assignment),
    }
    row.update(_certificate_columns(ds))
    row.update(_ward_health(den, ds))
    row["engine"] = den.engine
    row["wall_time"] = time.perf_counter() - t0
    return row


def _oned_case(suite: str, seed: int, index: int) -> dict:
    t0 = time.perf_counter()
    rng = np.random.default_rng(derive_seed(seed, suite, index, "shape"))
    n = int(rng.integers(20, 501))
    k = int(rng.integers(2, 11))
    dist = ("uniform-cube", "gaussian", "mixture")[index % 3]
    ds = gen_random(n, 1, derive_seed(seed, suite, index, "points"), dist, components=k)
    den = ward_reference(ds)
    ward = extract_clustering(den, ds, k)
    opt = opt_1d_dp(ds, k).clustering
    row = {
        "instance": f"{suite}-{index:03d}",
        "n": n,
        "d": 1,
        "k": k,
        "distribution": dist,
        "ward_cost": ward.cost,
        "reference_cost": opt.cost,
        "ratio": ward.cost / opt.cost,
        "convex": verify_1d_convexity(den, ds),
    }
    row.update(_ward_health(den, ds))
    row["engine"] = den.engine
    row["wall_time"] = time.perf_counter() - t0
    return row


def _kmeanspp_case(suite: str, seed: int, index: int, draws: int = 100) -> dict:
    t0 = time.perf_counter()
    rng = np.random.default_rng(derive_seed(seed, suite, index, "shape"))
    k = int(rng.integers(4, 9))
    d = int(rng.integers(2, 4))
    ds = gen_separated(k, d, [10] * k, 10.0, derive_seed(seed, suite, index, "points"), separation="strong")
    den = ward_reference(ds)
    ward = extract_clustering(den, ds, k)
    planted = Clustering.from_assignment(ds, ds.labels)
    pp = [kmeanspp_seed(ds, k, derive_seed(seed, suite, index, "kmeanspp", j))[1] for j in range(draws)]
    median_pp = float(np.median(pp))
    row = {
        "instance": f"{suite}-{index:03d}",
        "n": ds.n,
        "d": d,
        "k": k,
        "ward_cost": ward.cost,
        "reference_cost": planted.cost,
        "ratio": ward.cost / planted.cost,
        "kmeanspp_median": median_pp,
        "kmeanspp_mean": float(np.mean(pp)),
        "kmeanspp_ratio": median_pp / planted.cost,
        "ward_le_kmeanspp_median": ward.cost <= median_pp,
    }
    row.update(_certificate_columns(ds))
    row.update(_ward_health(den, ds))
    row["engine"] = den.engine
    row["wall_time"] = time.perf_counter() - t0
    return row


SUITES = {
    "separated-2approx": _separated_case,
    "separated-recovery": _separated_case,
    "oned": _oned_case,
    "kmeanspp-compare": _kmeanspp_case,
}


def _call(args):
    suite, seed, index = args
    return SUITES[suite](suite, seed, index)


def run_suite(suite: str, seeds: int, seed: int = 0, workers: int | None = None) -> list[dict]:
    """Run ``seeds`` instances of ``suite``; rows come back in instance order."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    jobs = [(suite, seed, i) for i in range(seeds)]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or seeds <= 1:
        return [_call(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, jobs))


def suite_failures(suite: str, rows: list[dict]) -> list[str]:
    """Assertion failures per instance; empty means the suite passed."""
    bad = []
    for r in rows:
        name = r["instance"]
        if not r["monotone"]:
            bad.append(f"{name}: merge costs not monotone")
        if not r["telescoping_ok"]:
            bad.append(f"{name}: telescoping error {r['telescoping_err']:.3g}")
        if "cert_consistent" in r and not r["cert_consistent"]:
            bad.append(f"{name}: inconsistent certificate")
        if suite == "separated-2approx" and not r["ratio"] <= 2 + 1e-6:
            bad.append(f"{name}: ratio {r['ratio']:.6g} exceeds 2")
        if suite == "separated-recovery":
            if not r["ward_equals_planted"]:
                bad.append(f"{name}: Ward missed the planted partition")
            if not r["planted_equals_opt"]:
                bad.append(f"{name}: planted partition is not optimal")
        if suite == "oned":
            if not (math.isfinite(r["ratio"]) and r["ratio"] <= 100):
                bad.append(f"{name}: ratio {r['ratio']} outside smoke bound")
            if not r["convex"]:
                bad.append(f"{name}: non-adjacent merge in 1-D")
    return bad


def summarize(suite: str, rows: list[dict]) -> dict:
    ratios = [r["ratio"] for r in rows]
    out = {
        "instance": "summary",
        "n": len(rows),
        "ratio": max(ratios) if ratios else float("nan"),
        "monotone": all(r["monotone"] for r in rows),
        "telescoping_ok": all(r["telescoping_ok"] for r in rows),
    }
    for col in ("ward_equals_planted", "planted_equals_opt", "convex", "ward_le_kmeanspp_median", "cert_consistent"):
        if rows and col in rows[0]:
            out[col] = all(r[col] for r in rows)
    out["wall_time"] = sum(r["wall_time"] for r in rows)
    return out
