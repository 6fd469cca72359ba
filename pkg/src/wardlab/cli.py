"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 failed check, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from . import io
from .certify import certify
from .experiments import derive_seed, run_lowerbound, run_suite, suite_failures, summarize, SUITES
from .instances import (
    RANDOM_DISTRIBUTIONS,
    LowerBoundParams,
    closed_form_ratio,
    gen_lowerbound,
    gen_random,
    gen_separated,
    star_graph_instance,
    star_graph_points,
    triangle_instance,
)
from .kmedian import kmedian_greedy_discrete, kmedian_greedy_euclidean
from .ward import ENGINES, extract_clustering, is_monotone, ward_reference

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3

LOWERBOUND_COLUMNS = ["d", "measured_ward", "closed_ward", "measured_opt_planted", "closed_opt", "ratio"]
BENCH_COLUMNS = [
    "instance", "n", "d", "k", "ward_cost", "reference_cost", "ratio",
    "delta_weak", "delta_strong", "alpha", "nu", "verdict", "engine",
]
EXTRA_COLUMNS = {
    "separated-2approx": ["ward_equals_planted", "planted_equals_opt"],
    "separated-recovery": ["ward_equals_planted", "planted_equals_opt"],
    "oned": ["distribution", "convex"],
    "kmeanspp-compare": ["kmeanspp_median", "kmeanspp_ratio", "ward_le_kmeanspp_median"],
}
HEALTH_COLUMNS = ["monotone", "telescoping_err"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sizes(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}")


def _emit(obj, out):
    text = io.write_json(obj, out)
    if out is None:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    kind = args.subtype
    if kind == "lowerbound":
        obj = io.dataset_to_json(gen_lowerbound(LowerBoundParams(args.d, args.heavy_weight, args.eps)))
    elif kind == "separated":
        sizes = args.sizes or [args.size] * args.k
        ds = gen_separated(args.k, args.dim, sizes, args.delta, derive_seed(args.seed, "generate", "separated"),
                           separation=args.separation)
        obj = io.dataset_to_json(ds)
    elif kind == "random":
        ds = gen_random(args.n, args.dim, derive_seed(args.seed, "generate", "random"), args.distribution,
                        components=args.components)
        obj = io.dataset_to_json(ds)
    elif kind == "star":
        obj = io.metric_to_json(star_graph_instance())
    else:
        obj = io.dataset_to_json(triangle_instance())
    _emit(obj, args.out)
    return EXIT_OK


def _load_dataset(path):
    return io.dataset_from_json(io.load_json(path))


def cmd_cluster(args) -> int:
    ds = _load_dataset(args.input)
    den = ENGINES[args.engine](ds)
    if args.out_dendrogram or args.k is None:
        _emit(io.dendrogram_to_json(den), args.out_dendrogram)
    if args.k is not None:
        if not 1 <= args.k <= ds.n:
            raise UsageError(f"--k must be in [1, {ds.n}]")
        _emit(io.clustering_to_json(extract_clustering(den, ds, args.k)), args.out_clustering)
    return EXIT_OK


def cmd_certify(args) -> int:
    ds = _load_dataset(args.input)
    if ds.labels is None:
        raise UsageError("input dataset has no labels")
    _emit(io.certificate_to_json(certify(ds)), args.out)
    return EXIT_OK


def _lowerbound_failures(rows) -> list[str]:
    bad = []
    for r in rows:
        if abs(r["measured_ward"] / r["closed_ward"] - 1) > 0.01:
            bad.append(f"d={r['d']}: Ward cost off closed form by more than 1%")
        if abs(r["measured_opt_planted"] / r["closed_opt"] - 1) > 0.01:
            bad.append(f"d={r['d']}: planted cost off closed form by more than 1%")
        if not r["phase1_ok"] or r["heavy_heavy_before_k"]:
            bad.append(f"d={r['d']}: merge order differs from the adversarial run")
    return bad


def _growth_report(rows) -> list[str]:
    """Consecutive ratio quotients next to the closed-form ones; the closed
    form itself only approaches 1.5 as d grows, so this is informational."""
    lines = []
    for a, b in zip(rows, rows[1:]):
        q = b["ratio"] / a["ratio"]
        q_closed = closed_form_ratio(b["d"]) / closed_form_ratio(a["d"])
        lines.append(f"d={a['d']}->{b['d']}: ratio quotient {q:.4f} (closed form {q_closed:.4f}, limit 1.5)")
    return lines


def cmd_lowerbound(args) -> int:
    if not 2 <= args.d_min <= args.d_max <= 8:
        raise UsageError("need 2 <= --d-min <= --d-max <= 8")
    rows = run_lowerbound(args.d_min, args.d_max)
    columns = LOWERBOUND_COLUMNS + (["wall_time"] if args.timing else [])
    io.write_csv(rows, args.out_csv, columns)
    bad = _lowerbound_failures(rows)
    for line in _growth_report(rows) + bad:
        print(line, file=sys.stderr)
    return EXIT_CHECK if bad else EXIT_OK


def cmd_bench(args) -> int:
    rows = run_suite(args.suite, args.seeds, args.seed)
    summary = summarize(args.suite, rows)
    columns = BENCH_COLUMNS + EXTRA_COLUMNS[args.suite] + HEALTH_COLUMNS + (["wall_time"] if args.timing else [])
    io.write_csv(rows + [summary], args.out_csv, columns)
    bad = suite_failures(args.suite, rows)
    print(
        f"{args.suite}: {len(rows)} instances, max ratio {summary['ratio']:.6g}, "
        f"{len(bad)} failures",
        file=sys.stderr,
    )
    for line in bad:
        print(line, file=sys.stderr)
    return EXIT_CHECK if bad else EXIT_OK


def cmd_kmedian_demo(args) -> int:
    if args.instance == "triangle":
        points = triangle_instance()
        trace = kmedian_greedy_euclidean(points, 1)
    else:
        points = star_graph_points()
        trace = kmedian_greedy_discrete(star_graph_instance(), 1)
    ward = ward_reference(points)
    obj = io.trace_to_json(trace)
    obj["ward"] = {
        "costs": [m.cost for m in ward.merges],
        "monotone": is_monotone(ward.costs),
    }
    _emit(obj, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wardlab", description="Ward's method, exact k-means oracles and clusterability checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write an instance as JSON")
    g.add_argument("subtype", choices=["lowerbound", "separated", "random", "star", "triangle"])
    g.add_argument("--d", type=int, default=2, help="dimension of the lower-bound instance")
    g.add_argument("--heavy-weight", type=float, default=1e9)
    g.add_argument("--eps", type=float, default=1e-4)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--sizes", type=_sizes)
    g.add_argument("--size", type=int, default=4, help="cluster size when --sizes is absent")
    g.add_argument("--delta", type=float, default=5.0)
    g.add_argument("--separation", choices=["weak", "strong"], default="weak")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--distribution", choices=RANDOM_DISTRIBUTIONS, default="gaussian")
    g.add_argument("--components", type=int, help="mixture components (default min(3, n))")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("cluster", help="run a Ward engine on a dataset")
    c.add_argument("--input", required=True)
    c.add_argument("--engine", choices=sorted(ENGINES), default="reference")
    c.add_argument("--k", type=int)
    c.add_argument("--out-dendrogram")
    c.add_argument("--out-clustering")
    c.set_defaults(func=cmd_cluster)

    ce = sub.add_parser("certify", help="measure separation of a labeled dataset")
    ce.add_argument("--input", required=True)
    ce.add_argument("--out")
    ce.set_defaults(func=cmd_certify)

    lb = sub.add_parser("lowerbound", help="Ward vs optimum on the lower-bound family")
    lb.add_argument("--d-min", type=int, default=2)
    lb.add_argument("--d-max", type=int, default=8)
    lb.add_argument("--out-csv", required=True)
    lb.add_argument("--timing", action="store_true", help="add a wall_time column")
    lb.set_defaults(func=cmd_lowerbound)

    b = sub.add_parser("bench", help="run an experiment suite")
    b.add_argument("--suite", choices=sorted(SUITES), required=True)
    b.add_argument("--seeds", type=int, default=50, help="number of seeded instances")
    b.add_argument("--seed", type=int, default=0, help="base seed")
    b.add_argument("--out-csv", required=True)
    b.add_argument("--timing", action="store_true", help="add a wall_time column")
    b.set_defaults(func=cmd_bench)

    km = sub.add_parser("kmedian-demo", help="greedy k-median traces vs Ward")
    km.add_argument("--instance", choices=["star", "triangle"], required=True)
    km.add_argument("--out")
    km.set_defaults(func=cmd_kmedian_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"wardlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"wardlab: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, RuntimeError) as e:
        print(f"wardlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
