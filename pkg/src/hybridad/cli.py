"""Command-line entry point: ``score``, ``benchmark``, ``stability``, ``synth``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .data import load_dataset, load_schema, split_labels
from .errors import HybridADError
from .evaluation import METHODS, evaluate_methods, stability_experiment
from .forest import write_distance_csv
from .graph import write_clustering_csv
from .scoring import HybridConfig, score_pipeline
from .synth import make_benchmark, write_benchmark_csv


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return v


def _percentile(text):
    v = float(text)
    if not 0.0 < v < 100.0:
        raise argparse.ArgumentTypeError(f"percentile must lie in (0, 100), got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0.0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _methods(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in METHODS]
    if not names or bad:
        raise argparse.ArgumentTypeError(f"methods must be a comma list from {','.join(METHODS)}")
    return names


def _fractions(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fraction list {text!r}") from None
    if not vals or any(not 0.0 < v <= 1.0 for v in vals):
        raise argparse.ArgumentTypeError(f"fractions must lie in (0, 1], got {text}")
    return vals


def _seeds(text):
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("at least one seed required")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridad", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def pipeline_flags(p, label_default=None):
        p.add_argument("--input", required=True, help="feature CSV with a header row")
        p.add_argument("--schema", help="optional schema file: one 'name,NUMERIC|CATEGORICAL' per line")
        p.add_argument("--label-col", default=label_default, help="0/1 ground-truth column")
        p.add_argument("--trees", type=_positive_int, default=100)
        p.add_argument("--k", type=_nonneg_int, default=0, help="KNN graph degree (0 = ceil(ln N))")
        p.add_argument("--dc-percentile", type=_percentile, default=20.0)
        p.add_argument("--z", type=_positive_float, default=2.5)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1, help="worker processes for the forest")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("score", help="score every row with the hybrid detector")
    pipeline_flags(p)
    p.add_argument("--write-distances", action="store_true", help="also write distances.csv")

    p = sub.add_parser("benchmark", help="AUC of the hybrid detector and baselines")
    pipeline_flags(p, label_default="label")
    p.add_argument("--methods", type=_methods, default=["hybrid"])
    p.add_argument("--timings", action="store_true", help="record wall-clock times (breaks byte equality)")
    p.add_argument("--repeats", type=_positive_int, default=1)

    p = sub.add_parser("stability", help="AUC across seeded subsamples")
    pipeline_flags(p, label_default="label")
    p.add_argument("--methods", type=_methods, default=["hybrid"])
    p.add_argument("--fractions", type=_fractions, default=[0.1, 0.2, 0.5, 1.0])
    p.add_argument("--seeds", type=_seeds, default=[0, 1, 2, 3, 4])
    p.add_argument("--timings", action="store_true", help="record wall-clock times (breaks byte equality)")

    p = sub.add_parser("synth", help="write a labeled Gaussian-clusters-plus-outliers CSV")
    p.add_argument("--clusters", type=_positive_int, default=2)
    p.add_argument("--per-cluster", type=_positive_int, default=150)
    p.add_argument("--outliers", type=_nonneg_int, default=10)
    p.add_argument("--dims", type=_positive_int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _config(args) -> HybridConfig:
    return HybridConfig(
        n_trees=args.trees,
        k=args.k,
        dc_percentile=args.dc_percentile,
        z=args.z,
        seed=args.seed,
        n_jobs=args.jobs,
    )


def _load(args, need_labels: bool):
    schema = load_schema(args.schema) if args.schema else None
    x = load_dataset(args.input, schema)
    labels = None
    if args.label_col is not None:
        x, labels = split_labels(x, args.label_col)
    elif need_labels:
        raise UsageError("--label-col is required")
    return x, labels


def cmd_score(args) -> int:
    x, _ = _load(args, need_labels=False)
    report = score_pipeline(x, _config(args))
    os.makedirs(args.out, exist_ok=True)
    report.write_csv(os.path.join(args.out, "scores.csv"))
    report.write_summary(os.path.join(args.out, "summary.json"))
    write_clustering_csv(os.path.join(args.out, "clusters.csv"), report.clustering)
    if args.write_distances:
        write_distance_csv(os.path.join(args.out, "distances.csv"), report.distances)
    print(f"scored {report.n} rows, {int(report.flags.sum())} flagged -> {args.out}")
    return 0


def cmd_benchmark(args) -> int:
    x, labels = _load(args, need_labels=True)
    report = evaluate_methods(x, labels, args.methods, args.seed, _config(args), repeats=args.repeats)
    os.makedirs(args.out, exist_ok=True)
    report.write_csv(os.path.join(args.out, "benchmark.csv"), timings=args.timings)
    report.write_summary(os.path.join(args.out, "benchmark_summary.json"))
    report.write_scores_csv(os.path.join(args.out, "method_scores.csv"))
    for r in report.rows:
        print(f"{r.method:8s} AUC={r.auc:.4f}")
    return 0


def cmd_stability(args) -> int:
    x, labels = _load(args, need_labels=True)
    report = stability_experiment(x, labels, args.fractions, args.seeds, args.methods, _config(args))
    os.makedirs(args.out, exist_ok=True)
    report.write_csv(os.path.join(args.out, "stability.csv"), timings=args.timings)
    report.write_summary(os.path.join(args.out, "stability_summary.json"))
    for (method, fraction), (mean, std) in report.aggregate().items():
        print(f"{method:8s} fraction={fraction:<5g} AUC={mean:.4f} +/- {std:.4f}")
    return 0


def cmd_synth(args) -> int:
    if args.clusters > args.dims:
        raise UsageError(f"--clusters ({args.clusters}) must not exceed --dims ({args.dims})")
    X, labels = make_benchmark(args.per_cluster, args.clusters, args.outliers, args.dims, args.seed)
    parent = os.path.dirname(args.out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    write_benchmark_csv(args.out, X, labels)
    print(f"wrote {len(labels)} rows to {args.out}")
    return 0


COMMANDS = {
    "score": cmd_score,
    "benchmark": cmd_benchmark,
    "stability": cmd_stability,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (HybridADError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
