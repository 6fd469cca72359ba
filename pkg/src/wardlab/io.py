"""JSON and CSV formats.

Floats are written with 17 significant digits so every value round-trips
bit for bit; infinities in certificates are written as the string "inf".
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .certify import SeparationCertificate, predict_ward_quality
from .core import Dataset
from .instances import FiniteMetricInstance
from .kmedian import MedianMergeTrace
from .ward import Clustering, Dendrogram, MergeRecord

__all__ = [
    "dumps",
    "fmt_float",
    "dataset_to_json",
    "dataset_from_json",
    "metric_to_json",
    "metric_from_json",
    "dendrogram_to_json",
    "dendrogram_from_json",
    "clustering_to_json",
    "certificate_to_json",
    "trace_to_json",
    "load_json",
    "write_json",
    "write_csv",
]


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        raise ValueError("NaN is not serialisable")
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = "%.17g" % x
    return s if any(c in s for c in ".en") else s + ".0"


def dumps(obj) -> str:
    """Deterministic JSON text: sorted keys off, insertion order kept."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _inf(v):
    if v in ("inf", "-inf"):
        return float(v)
    return v


def dataset_to_json(ds: Dataset) -> dict:
    labels = ds.labels
    return {
        "dim": ds.dim,
        "points": [
            {
                "x": ds.points[i].tolist(),
                "w": float(ds.weights[i]),
                "label": None if labels is None else int(labels[i]),
            }
            for i in range(ds.n)
        ],
        "meta": ds.meta,
    }


def dataset_from_json(obj: dict) -> Dataset:
    try:
        dim = int(obj["dim"])
        pts = obj["points"]
        x = np.array([p["x"] for p in pts], dtype=np.float64).reshape(len(pts), dim)
        w = np.array([p.get("w", 1.0) for p in pts], dtype=np.float64)
        raw = [p.get("label") for p in pts]
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"malformed dataset JSON: {e}") from e
    if any(r is None for r in raw):
        if any(r is not None for r in raw):
            raise ValueError("labels must be given for all points or none")
        labels = None
    else:
        labels = np.array(raw, dtype=np.int64)
    return Dataset(x, w, labels=labels, meta=obj.get("meta", {}))


def metric_to_json(inst: FiniteMetricInstance) -> dict:
    return {"n": inst.n, "dist": inst.dist.tolist(), "weights": inst.weights.tolist()}


def metric_from_json(obj: dict) -> FiniteMetricInstance:
    inst = FiniteMetricInstance(np.array(obj["dist"], dtype=float), np.array(obj["weights"], dtype=float))
    if int(obj.get("n", inst.n)) != inst.n:
        raise ValueError("n does not match the distance matrix")
    return inst


def dendrogram_to_json(den: Dendrogram) -> dict:
    return {
        "n": den.n_leaves,
        "engine": den.engine,
        "merges": [
            {
                "a": m.left_id,
                "b": m.right_id,
                "id": m.new_id,
                "cost": m.cost,
                "weight": m.result_weight,
                "delta": m.result_internal_cost,
            }
            for m in den.merges
        ],
    }


def dendrogram_from_json(obj: dict) -> Dendrogram:
    merges = tuple(
        MergeRecord(int(m["a"]), int(m["b"]), int(m["id"]), float(m["cost"]), float(m["weight"]), float(m["delta"]))
        for m in obj["merges"]
    )
    return Dendrogram(int(obj["n"]), merges, obj["engine"])


def clustering_to_json(c: Clustering) -> dict:
    return {"k": c.k, "cost": c.cost, "assignment": c.assignment.tolist(), "centers": c.centers.tolist()}


def certificate_to_json(cert: SeparationCertificate) -> dict:
    return {
        "delta_weak": cert.delta_weak,
        "delta_strong": cert.delta_strong,
        "alpha": cert.alpha,
        "nu": cert.nu,
        "strict": cert.strict_separation,
        "eps": cert.eps_separation,
        "verdict": predict_ward_quality(cert),
    }


def certificate_from_json(obj: dict) -> dict:
    """Parse certificate JSON back into plain floats (``"inf"`` -> inf)."""
    return {k: _inf(v) for k, v in obj.items()}


def trace_to_json(trace: MedianMergeTrace) -> dict:
    return {
        "setting": trace.setting,
        "merges": [{"a": list(a), "b": list(b), "cost": c} for a, b, c in trace.merges],
        "monotone": trace.monotone,
    }


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(obj, path=None) -> str:
    text = dumps(obj) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def write_csv(rows: list[dict], path, columns: list[str] | None = None):
    """RFC-4180 CSV with a header row and LF line endings."""
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_csv_cell(r.get(c)) for c in columns])
