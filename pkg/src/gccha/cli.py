"""Command-line interface: ``gccha {analyze,classify,synth,diagnose}``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .core import solve_field
from .exceptions import NumericalError, ValidationError
from .pipelines import (
    AnalysisConfig,
    ClassificationConfig,
    analyze,
    classify,
    synthetic_images,
    write_accuracy_table,
)
from .spectral import stationarity_diagnostic
from .synth import synthesize_stationary

log = logging.getLogger("gccha")


def _add_estimator_args(p, default_mode="auto", center=True):
    p.add_argument("--estimator", default=default_mode,
                   choices=["auto", "realization-average", "random-window"])
    p.add_argument("--windows", type=int, default=50, help="number of random windows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ridge", type=float, default=1e-8)
    if center:
        p.add_argument("--no-center", dest="center", action="store_false")


def build_parser():
    parser = argparse.ArgumentParser(prog="gccha", description="Graph canonical coherence analysis")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="canonical coherence analysis of two signal tables")
    a.add_argument("--graph", required=True, help="edge list CSV (src,dst,weight)")
    a.add_argument("--x", required=True, help="signal CSV of the first set")
    a.add_argument("--y", required=True, help="signal CSV of the second set")
    a.add_argument("--gso", default="laplacian", choices=["laplacian", "adjacency", "custom"])
    a.add_argument("--gso-matrix", help="CSV matrix dump for --gso custom")
    a.add_argument("--directed", action="store_true")
    a.add_argument("--rank", type=int)
    a.add_argument("--threshold", type=float, default=0.2, help="salient loading threshold")
    a.add_argument("--out", required=True)
    _add_estimator_args(a)

    c = sub.add_parser("classify", help="split-image classification experiment")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--images", help="image CSV (label,p0,...,p255)")
    src.add_argument("--synthetic", type=int, metavar="CLASSES",
                     help="use generated blob images with this many classes")
    c.add_argument("--split-rows", type=int, nargs="+", default=[4])
    c.add_argument("--rank", type=int, nargs="+", default=[20])
    c.add_argument("--reps", type=int, default=50)
    c.add_argument("--per-class", type=int, default=40)
    c.add_argument("--row-width", type=int, default=16)
    c.add_argument("--k", type=int, default=10)
    c.add_argument("--no-bridge", dest="bridge", action="store_false")
    c.add_argument("--out", help="directory for accuracy tables")
    c.add_argument("--feature-scaling", default="unit-norm", choices=["unit-norm", "unit-gpsd"])
    _add_estimator_args(c, "random-window", center=False)

    s = sub.add_parser("synth", help="draw a stationary process from a JSON spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)

    d = sub.add_parser("diagnose", help="stationarity report for a signal table")
    d.add_argument("--x", required=True)
    d.add_argument("--graph", required=True)
    d.add_argument("--gso", default="laplacian", choices=["laplacian", "adjacency"])
    d.add_argument("--threshold", type=float, default=0.05)
    return parser


def cmd_analyze(args):
    cfg = AnalysisConfig(
        graph_path=args.graph, x_path=args.x, y_path=args.y, output_dir=args.out,
        gso=args.gso, gso_matrix_path=args.gso_matrix, estimator=args.estimator,
        windows=args.windows, seed=args.seed, ridge=args.ridge, center=args.center,
        rank=args.rank, loading_threshold=args.threshold, directed=args.directed,
    )
    summary = analyze(cfg)
    print(f"wrote results for n={summary['n']} p={summary['p']} q={summary['q']} "
          f"r={summary['rank']} to {args.out}")
    return 0


def cmd_classify(args):
    if args.images:
        if not Path(args.images).is_file():
            raise ValidationError(f"image file not found: {args.images}")
        labels, pixels = io.read_image_csv(args.images)
    else:
        labels, pixels = synthetic_images(args.synthetic, args.per_class, seed=args.seed)
    cfg = ClassificationConfig(
        images_per_class=args.per_class, split_rows=tuple(args.split_rows),
        row_width=args.row_width, ranks=tuple(args.rank), knn_k=args.k,
        repetitions=args.reps, seed=args.seed, estimator=args.estimator,
        windows=args.windows, ridge=args.ridge, bridge=args.bridge,
        feature_scaling=args.feature_scaling,
    )
    table, per_rep = classify(labels, pixels, cfg)
    print("r,K,K_fraction,mean_accuracy,std_accuracy,repetitions")
    for row in table:
        print(",".join(io.fmt(v) for v in row))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_accuracy_table(out / "accuracy.csv", table)
        rows = [(i, r, k, acc) for i, d in enumerate(per_rep) for (r, k), acc in sorted(d.items())]
        with open(out / "repetitions.csv", "w") as fh:
            fh.write("repetition,r,K,accuracy\n")
            for row in rows:
                fh.write(",".join(io.fmt(v) for v in row) + "\n")
    return 0


def cmd_synth(args):
    graph, spec = io.load_synthesis_spec(args.spec)
    x, y = synthesize_stationary(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_edge_csv(out / "graph.csv", graph)
    io.write_signal_csv(out / "x.csv", x, [f"X{j + 1}" for j in range(spec.p)])
    io.write_signal_csv(out / "y.csv", y, [f"Y{j + 1}" for j in range(spec.q)])
    field = spec.field()
    io.dump_json(out / "population_field.json", io.field_to_dict(field))
    _, _, gamma, _ = solve_field(field)
    with open(out / "population_coherence.csv", "w") as fh:
        fh.write(",".join(["frequency_index", "lambda", *(f"gamma_{i + 1}" for i in range(len(gamma)))]) + "\n")
        for ell in range(field.n):
            fh.write(",".join(io.fmt(v) for v in (ell, field.frequencies[ell], *gamma[:, ell])) + "\n")
    print(f"wrote {spec.realizations} realizations (n={spec.basis.n}, p={spec.p}, q={spec.q}) to {out}")
    return 0


def cmd_diagnose(args):
    x, labels = io.read_signal_csv(args.x)
    edges, n = io.read_edge_csv(args.graph)
    graph = io.build_graph(edges, max(n, x.shape[0]))
    basis = io.basis_from_graph(graph, args.gso)
    ratio = stationarity_diagnostic(x, basis)
    worst = float(np.nanmax(ratio)) if np.any(np.isfinite(ratio)) else float("nan")
    report = {
        "labels": labels,
        "off_diagonal_ratio": [[None if np.isnan(v) else float(v) for v in row] for row in ratio],
        "max_ratio": worst,
        "threshold": args.threshold,
        "supports_stationarity": bool(worst <= args.threshold),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    if not worst <= args.threshold:
        log.warning("off-diagonal energy ratio %.3g exceeds %.3g", worst, args.threshold)
    return 0


COMMANDS = {"analyze": cmd_analyze, "classify": cmd_classify, "synth": cmd_synth, "diagnose": cmd_diagnose}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
