"""Command-line pipeline over truss models and node signatures.

Subcommands mirror the analysis stages: analyze (statics), descriptors
(signatures), distances, mds, cluster, complexity, and sweep (design-space
study). Every run is deterministic for fixed inputs, flags and seed; CSV
artifacts are byte-identical across repeats.

Exit codes: 0 success, 1 pipeline or data error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import exports, svgplot
from .analysis import classical_mds, complexity_score, kmeans, min_enclosing_ball
from .descriptor import (
    AMPLITUDE_MAGNITUDE,
    AMPLITUDE_SIGNED,
    DEFAULT_DELTA,
    KERNEL_COORDINATE,
    KERNEL_GEODESIC,
    ForceFunctionSpec,
    build_force_function,
    distance_matrix,
    node_feature_vectors,
)
from .fea import SingularStructureError, extract_demands, solve
from .generator import GridTrussParams, latin_hypercube, sweep
from .harmonics import DEFAULT_L_MAX, DEFAULT_OVERSAMPLE, build_grid, expand
from .model import ModelFormatError, TrussModel, UnknownFieldWarning, read_model


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ModelFormatError, SingularStructureError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmonode",
        description="Quantify spatial-truss connection complexity from nodal force demands.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="kernel sharpness (default 20)")
    common.add_argument("--lmax", type=int, default=DEFAULT_L_MAX, help="max harmonic degree (default 16)")
    common.add_argument(
        "--kernel",
        choices=(KERNEL_COORDINATE, KERNEL_GEODESIC),
        default=KERNEL_GEODESIC,
        help="force-function kernel (default geodesic)",
    )
    common.add_argument(
        "--amplitude",
        choices=(AMPLITUDE_MAGNITUDE, AMPLITUDE_SIGNED),
        default=AMPLITUDE_MAGNITUDE,
        help="bump amplitudes: magnitudes or signed by sense (default magnitude)",
    )
    common.add_argument(
        "--oversample", type=float, default=DEFAULT_OVERSAMPLE, help="quadrature grid oversampling"
    )
    common.add_argument("--include-loads", action="store_true", help="add applied loads to demands")
    common.add_argument("--include-reactions", action="store_true", help="add reactions to demands")
    common.add_argument("--load-case", default=None, help="load case to analyze")
    common.add_argument("--out", default=".", help="output directory (default current)")

    p = sub.add_parser("analyze", parents=[common], help="solve one load case, export CSV results")
    p.add_argument("model", help="path to a .truss.json model")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("descriptors", parents=[common], help="export per-node feature vectors")
    p.add_argument("model", help="path to a .truss.json model")
    p.add_argument(
        "--write-expansions", action="store_true", help="also export per-node coefficient files"
    )
    p.set_defaults(handler=cmd_descriptors)

    p = sub.add_parser("distances", parents=[common], help="pairwise distance matrix + heatmap")
    p.add_argument("input", help="model file or feature_vectors.csv")
    p.set_defaults(handler=cmd_distances)

    p = sub.add_parser("mds", parents=[common], help="low-dimensional embedding + scatter")
    p.add_argument("input", help="model file or feature_vectors.csv")
    p.add_argument("--dims", type=int, default=2, help="embedding dimension (default 2)")
    p.add_argument(
        "--circle",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="overlay the minimal bounding circle on the scatter",
    )
    p.set_defaults(handler=cmd_mds)

    p = sub.add_parser("cluster", parents=[common], help="k-means grouping of node signatures")
    p.add_argument("input", help="model file or feature_vectors.csv")
    p.add_argument("--k", type=int, default=10, help="number of clusters (default 10)")
    p.add_argument("--seed", type=int, default=0, help="clustering seed (default 0)")
    p.set_defaults(handler=cmd_cluster)

    p = sub.add_parser("complexity", parents=[common], help="minimal enclosing sphere radius")
    p.add_argument("input", help="model file or feature_vectors.csv")
    p.set_defaults(handler=cmd_complexity)

    p = sub.add_parser("sweep", parents=[common], help="design-space study over sampled variants")
    p.add_argument("params", help="JSON file describing the parametric family")
    p.add_argument("--n", type=int, default=20, help="number of sampled designs (default 20)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.set_defaults(handler=cmd_sweep)

    return parser


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_model(path: str) -> TrussModel:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UnknownFieldWarning)
        model = read_model(p.read_text())
    for item in caught:
        print(f"warning: {item.message}", file=sys.stderr)
    return model


def _model_vectors(args, model: TrussModel):
    result = solve(model, args.load_case)
    demands = extract_demands(
        model,
        result,
        include_applied_loads=args.include_loads,
        include_reactions=args.include_reactions,
    )
    grid = build_grid(args.lmax, args.oversample)
    vectors = node_feature_vectors(
        demands,
        delta=args.delta,
        l_max=args.lmax,
        grid=grid,
        kernel=args.kernel,
        amplitude_mode=args.amplitude,
        load_case=result.load_case,
    )
    return vectors


def _input_vectors(args):
    path = Path(args.input)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {args.input}")
    if path.suffix.lower() == ".csv":
        return exports.read_feature_vectors_csv(path)
    return _model_vectors(args, _load_model(args.input))


def cmd_analyze(args) -> int:
    model = _load_model(args.model)
    result = solve(model, args.load_case)
    out = _out_dir(args)
    exports.write_displacements_csv(out / "displacements.csv", result)
    exports.write_forces_csv(out / "forces.csv", result)
    exports.write_reactions_csv(out / "reactions.csv", result)
    peak = max(abs(f) for f in result.axial_forces.values()) if result.axial_forces else 0.0
    print(
        f"analyzed case {result.load_case!r}: {len(model.nodes)} nodes, "
        f"{len(model.elements)} elements, peak |N| = {peak:.6g} N"
    )
    return 0


def cmd_descriptors(args) -> int:
    model = _load_model(args.model)
    result = solve(model, args.load_case)
    demands = extract_demands(
        model,
        result,
        include_applied_loads=args.include_loads,
        include_reactions=args.include_reactions,
    )
    grid = build_grid(args.lmax, args.oversample)
    vectors = node_feature_vectors(
        demands,
        delta=args.delta,
        l_max=args.lmax,
        grid=grid,
        kernel=args.kernel,
        amplitude_mode=args.amplitude,
        load_case=result.load_case,
    )
    out = _out_dir(args)
    exports.write_feature_vectors_csv(out / "feature_vectors.csv", vectors)
    if args.write_expansions:
        for demand in demands:
            spec = ForceFunctionSpec(
                demand=demand, delta=args.delta, kernel=args.kernel, amplitude_mode=args.amplitude
            )
            expansion = expand(build_force_function(spec, grid), args.lmax)
            exports.write_expansion_csv(out / f"expansion_{demand.node:04d}.csv", expansion)
    print(f"wrote {len(vectors)} feature vectors of length {args.lmax + 1}")
    return 0


def cmd_distances(args) -> int:
    vectors = _input_vectors(args)
    matrix = distance_matrix(vectors)
    out = _out_dir(args)
    exports.write_distance_matrix_csv(out / "distance_matrix.csv", matrix)
    (out / "distance_matrix.svg").write_text(
        svgplot.heatmap(matrix.values, title="node signature distances")
    )
    print(f"distance matrix over {len(vectors)} nodes, max distance {matrix.values.max():.6g}")
    return 0


def cmd_mds(args) -> int:
    vectors = _input_vectors(args)
    matrix = distance_matrix(vectors)
    embedding = classical_mds(matrix, args.dims)
    out = _out_dir(args)
    exports.write_embedding_csv(out / "mds.csv", embedding, matrix.node_ids)
    if args.dims == 2:
        circles = []
        if args.circle:
            ball = min_enclosing_ball(embedding.coordinates)
            circles.append((ball.center, ball.radius))
        (out / "mds.svg").write_text(
            svgplot.scatter(
                embedding.coordinates,
                circles=circles,
                title="embedded node signatures",
                x_label="coord 0",
                y_label="coord 1",
            )
        )
    print(f"embedded {len(matrix.node_ids)} nodes into {args.dims}D, stress {embedding.stress:.3e}")
    return 0


def cmd_cluster(args) -> int:
    vectors = _input_vectors(args)
    assignment = kmeans(vectors, k=args.k, seed=args.seed)
    out = _out_dir(args)
    exports.write_clusters_csv(out / "clusters.csv", assignment)
    exports.write_cluster_summary_csv(out / "cluster_summary.csv", assignment)
    if len(vectors) > 2:
        embedding = classical_mds(distance_matrix(vectors), 2)
        (out / "clusters.svg").write_text(
            svgplot.scatter(
                embedding.coordinates,
                labels=assignment.labels,
                title=f"{args.k} signature clusters (label order: increasing radius)",
                x_label="coord 0",
                y_label="coord 1",
            )
        )
    rows = np.array([v.components for v in vectors])
    (out / "parallel_coordinates.svg").write_text(
        svgplot.parallel_coordinates(rows, labels=assignment.labels, title="signatures by cluster")
    )
    radii = ", ".join(f"{s.radius:.4g}" for s in assignment.spheres)
    print(f"clustered {len(vectors)} nodes into {args.k} groups; radii [{radii}]")
    return 0


def cmd_complexity(args) -> int:
    vectors = _input_vectors(args)
    radius = complexity_score(vectors)
    summary: dict[str, float | int | str] = {
        "complexity_radius": radius,
        "n_nodes": len(vectors),
        "n_components": len(vectors[0]),
    }
    if len(vectors) > 2:
        embedding = classical_mds(distance_matrix(vectors), 2)
        summary["complexity_radius_2d"] = min_enclosing_ball(embedding.coordinates).radius
    out = _out_dir(args)
    exports.write_summary_csv(out / "summary.csv", summary)
    print(f"complexity_radius: {radius!r}")
    return 0


def cmd_sweep(args) -> int:
    path = Path(args.params)
    if not path.exists():
        raise FileNotFoundError(f"params file not found: {args.params}")
    params, bounds = _read_sweep_params(path)
    samples = latin_hypercube(args.n, bounds, seed=args.seed)
    n_jobs = max(1, int(os.environ.get("HARMONODE_THREADS", "1")))
    out = _out_dir(args)
    records = sweep(
        params,
        samples,
        out,
        delta=args.delta,
        l_max=args.lmax,
        kernel=args.kernel,
        amplitude_mode=args.amplitude,
        oversample=args.oversample,
        n_jobs=n_jobs,
    )
    solved = [r for r in records if r.status == "ok"]
    if solved:
        points = [(r.mass_per_area, r.complexity_radius) for r in solved]
        (out / "biobjective.svg").write_text(
            svgplot.scatter(
                points,
                title="design family: material use vs connection complexity",
                x_label="mass per enclosed area (kg/m^2)",
                y_label="complexity radius",
            )
        )
    failures = len(records) - len(solved)
    print(f"swept {len(records)} designs ({failures} failed); results in {out / 'sweep.csv'}")
    return 0


def _read_sweep_params(path: Path) -> tuple[GridTrussParams, tuple]:
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON: {exc.msg} (offset {exc.pos})") from exc
    if not isinstance(raw, dict):
        raise ModelFormatError(f"{path}: top level must be a JSON object")
    known = {
        "nx", "ny", "bay", "depth", "control_heights", "supports",
        "load_per_node", "load_case", "initial_area", "youngs_modulus", "bounds",
    }
    for key in raw:
        if key not in known:
            warnings.warn(f"ignoring unknown field {key!r}", UnknownFieldWarning, stacklevel=2)
    try:
        heights = tuple(tuple(float(v) for v in row) for row in raw["control_heights"])
        params = GridTrussParams(
            nx=int(raw["nx"]),
            ny=int(raw["ny"]),
            bay=float(raw["bay"]),
            control_heights=heights,
            depth=float(raw["depth"]),
            supports=tuple(int(v) for v in raw["supports"]) if "supports" in raw else None,
            load_per_node=float(raw.get("load_per_node", 20e3)),
            load_case=str(raw.get("load_case", "gravity")),
            initial_area=float(raw.get("initial_area", 1e-3)),
            youngs_modulus=float(raw.get("youngs_modulus", 200e9)),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"{path}: missing or malformed field: {exc}") from exc

    free = ((len(heights) + 1) // 2) * len(heights[0])
    bounds_raw = raw.get("bounds", [0.0, 2.0])
    if (
        isinstance(bounds_raw, list)
        and len(bounds_raw) == 2
        and all(isinstance(v, (int, float)) for v in bounds_raw)
    ):
        bounds = tuple((float(bounds_raw[0]), float(bounds_raw[1])) for _ in range(free))
    else:
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds_raw)
        if len(bounds) != free:
            raise ModelFormatError(
                f"{path}: expected {free} bound pairs for the symmetric control grid, got {len(bounds)}"
            )
    return params, bounds


if __name__ == "__main__":
    sys.exit(main())
