"""Batch command-line interface.

Subcommands cover the full pipeline: ``ingest`` raw data, ``synth``
labelled bundles, ``matrix`` pairwise distances, ``cluster`` a stored
matrix, ``criteria`` sweeps of the cluster-count, and ``bench`` timing
reports. Every subcommand is deterministic given its inputs, flags, and
the single RNG seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .clustering import LINKAGES, affinity_propagation, criteria, cut, exemplar, hca
from .dataset import BundleSpec, TrajectoryDataset, ingest, load_dataset, save_dataset, synth
from .matrix import (DISTANCE_NAMES, DistanceSpec, compute_matrix, load_matrix,
                     save_matrix, save_matrix_csv)

__all__ = ["main"]


def _box(text: str) -> tuple[float, float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("box must be min_x,min_y,max_x,max_y")
    return tuple(parts)  # type: ignore[return-value]


def _pair(text: str) -> tuple[float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected x,y")
    return (parts[0], parts[1])


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajkit",
        description="Trajectory distances, distance matrices, and clustering.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalise raw CSV/GeoJSON into a planar dataset")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="canonical dataset CSV to write")
    p.add_argument("--format", choices=("csv", "geojson"), default="csv")
    p.add_argument("--wgs84", action="store_true",
                   help="treat coordinates as lat/lon and project to planar metres")
    p.add_argument("--min-points", type=int, default=2)
    p.add_argument("--start-box", type=_box, default=None, metavar="X0,Y0,X1,Y1",
                   help="keep trajectories starting inside this box (lon/lat for geographic input)")
    p.add_argument("--end-box", type=_box, default=None, metavar="X0,Y0,X1,Y1")

    p = sub.add_parser("synth", help="generate seeded bundles of noisy anchor resamplings")
    p.add_argument("spec", type=Path, help="JSON file: {\"bundles\": [{\"anchor\": [[x,y],...], "
                                           "\"count\": int, \"jitter\": float, \"points\": [lo,hi]}]}")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--labels", type=Path, default=None, help="also write traj_id,label CSV")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("matrix", help="compute a pairwise distance matrix")
    p.add_argument("dataset", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="binary matrix file to write")
    p.add_argument("--distance", required=True,
                   help=f"one of: {', '.join(DISTANCE_NAMES)} (lcss is stored as dlcss)")
    p.add_argument("--eps-d", type=float, default=None, help="matching threshold for dlcss/edr")
    p.add_argument("--gap", type=_pair, default=None, metavar="X,Y",
                   help="ERP gap point (default: projected-frame origin 0,0)")
    p.add_argument("--owd-density", type=float, default=None,
                   help="sowd arc-length samples per unit (default 1.0)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", type=Path, default=None, help="also export the matrix as CSV")

    p = sub.add_parser("cluster", help="cluster a stored distance matrix")
    p.add_argument("matrix", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True,
                   help="assignments CSV (traj_id,cluster,is_exemplar)")
    p.add_argument("--method", choices=("hca", "ap"), required=True)
    p.add_argument("--linkage", choices=LINKAGES, default="ward")
    p.add_argument("--k", type=int, default=None, help="cluster count (hca)")
    p.add_argument("--preference", default="min-similarity",
                   help="AP preference: a number, or 'min-similarity' / 'min-distance'")
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--convergence-iter", type=int, default=15)

    p = sub.add_parser("criteria", help="between/within criteria over a range of cluster counts")
    p.add_argument("matrix", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="CSV with one row per K")
    p.add_argument("--linkage", choices=LINKAGES, default="ward")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, required=True)

    p = sub.add_parser("bench", help="time matrix jobs on seeded synthetic data")
    p.add_argument("-o", "--output", type=Path, required=True, help="JSON report to write")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--distances", default=",".join(bench_mod.BENCH_DISTANCES),
                   help="comma-separated distance names")
    p.add_argument("--workers", type=int, default=0,
                   help="also record a parallel column with this many workers")
    p.add_argument("--repeats", type=int, default=1)
    return parser


def _cmd_ingest(args: argparse.Namespace) -> int:
    ds = ingest(args.input, fmt=args.format, wgs84=args.wgs84, min_points=args.min_points,
                start_box=args.start_box, end_box=args.end_box)
    save_dataset(ds, args.output)
    dropped = ds.provenance.get("dropped", {})
    print(f"ingested {len(ds)} trajectories -> {args.output} "
          f"(dropped: {sum(dropped.values())} {dropped})")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    doc = json.loads(args.spec.read_text(encoding="utf-8"))
    bundle_docs = doc.get("bundles")
    if not bundle_docs:
        raise ValueError(f"{args.spec}: spec JSON needs a nonempty 'bundles' list")
    bundles = []
    for b in bundle_docs:
        bundles.append(BundleSpec(
            anchor=np.asarray(b["anchor"], dtype=np.float64),
            count=int(b["count"]),
            jitter=float(b.get("jitter", 0.0)),
            points=tuple(b.get("points", (8, 12))),
        ))
    ds, labels = synth(bundles, seed=args.seed)
    save_dataset(ds, args.output)
    if args.labels is not None:
        with open(args.labels, "w", encoding="utf-8") as fh:
            fh.write("traj_id,label\n")
            for traj, label in zip(ds.trajectories, labels):
                fh.write(f"{traj.id},{int(label)}\n")
    print(f"synthesised {len(ds)} trajectories in {len(bundles)} bundles -> {args.output}")
    return 0


def _cmd_matrix(args: argparse.Namespace) -> int:
    ds = load_dataset(args.dataset)
    spec = DistanceSpec(args.distance, eps_d=args.eps_d, gap=args.gap,
                        samples_per_unit=args.owd_density)
    m = compute_matrix(ds.trajectories, spec, workers=args.workers)
    save_matrix(m, args.output)
    if args.csv is not None:
        save_matrix_csv(m, args.csv)
    print(f"computed {len(m)}x{len(m)} {m.kind} matrix -> {args.output}")
    return 0


def _cmd_cluster(args: argparse.Namespace) -> int:
    m = load_matrix(args.matrix)
    if args.method == "hca":
        if args.k is None:
            raise ValueError("cluster --method hca requires --k")
        dend = hca(m, linkage=args.linkage)
        assignment = cut(dend, args.k)
        exemplars = {c: exemplar(assignment.members(c), m) for c in range(assignment.k)}
        note = f"hca/{args.linkage} k={assignment.k}"
        if dend.inversions:
            print(f"note: {len(dend.inversions)} height inversion(s) in the dendrogram",
                  file=sys.stderr)
    else:
        preference = args.preference
        if preference == "min-distance":
            off = m.values[~np.eye(len(m), dtype=bool)]
            preference = float(off.min()) if off.size else 0.0
        elif preference != "min-similarity":
            preference = float(preference)
        result = affinity_propagation(m, preference=preference, damping=args.damping,
                                      max_iter=args.max_iter,
                                      convergence_iter=args.convergence_iter)
        assignment = result.assignment
        exemplars = {c: result.exemplars[c] for c in range(assignment.k)}
        note = f"ap k={assignment.k} (preference={result.preference_value!r}, iter={result.n_iter})"
        if not result.converged:
            print("warning: affinity propagation did not converge; "
                  "assignment is a partial result", file=sys.stderr)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("traj_id,cluster,is_exemplar\n")
        for idx, item_id in enumerate(m.ids):
            c = int(assignment.labels[idx])
            fh.write(f"{item_id},{c},{int(exemplars[c] == idx)}\n")
    print(f"clustered {len(m)} items: {note} -> {args.output}")
    return 0


def _cmd_criteria(args: argparse.Namespace) -> int:
    m = load_matrix(args.matrix)
    if not 1 <= args.k_min <= args.k_max <= len(m):
        raise ValueError(f"criteria: need 1 <= k-min <= k-max <= {len(m)}")
    dend = hca(m, linkage=args.linkage)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("k,bc,wc,exemplar_ids\n")
        for k in range(args.k_min, args.k_max + 1):
            assignment = cut(dend, k)
            crit = criteria(assignment, m)
            names = "|".join(m.ids[e] for e in crit.exemplars)
            fh.write(f"{k},{crit.bc!r},{crit.wc!r},{names}\n")
    print(f"criteria for k in [{args.k_min}, {args.k_max}] ({args.linkage}) -> {args.output}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    distances = tuple(d.strip() for d in args.distances.split(",") if d.strip())
    report = bench_mod.run_bench(n=args.n, points=args.points, seed=args.seed,
                                 distances=distances, workers=args.workers,
                                 repeats=args.repeats)
    args.output.write_text(json.dumps(dataclasses.asdict(report), indent=2) + "\n",
                           encoding="utf-8")
    order = sorted(report.timings, key=lambda d: report.timings[d]["serial"])
    print(f"benchmarked {len(order)} distances on n={args.n} ({report.environment})")
    for name in order:
        row = report.timings[name]
        extra = f", parallel {row['parallel']:.3f}s" if "parallel" in row else ""
        print(f"  {name}: serial {row['serial']:.3f}s{extra}")
    print(f"report -> {args.output}")
    return 0


_HANDLERS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "matrix": _cmd_matrix,
    "cluster": _cmd_cluster,
    "criteria": _cmd_criteria,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
