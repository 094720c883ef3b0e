"""Command-line interface.

Four subcommands: ``reconstruct`` (one solve over a masked dataset),
``experiment`` (Monte-Carlo protocol from a JSON config), ``gridsearch``
(hyperparameter tuning from a JSON config) and ``graph-info`` (inspect the
kNN graph built from a positions file).

Exit codes are a stable contract: 0 success, 2 usage or validation
problems, 3 runtime or solver failures. Diagnostics go to stderr; result
tables go to stdout and to the output files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import ingest
from .errors import (
    DegenerateRange,
    DensityTooLow,
    DimensionMismatch,
    DuplicateCoordinates,
    DuplicateReading,
    EmptyDataset,
    EmptyEvaluationSet,
    GraphfillError,
    HorizonTooShort,
    KTooLarge,
    MalformedCsv,
    UnknownNode,
)
from .graph import build_knn_graph, spectral_decomposition, write_edge_list
from .harness import ExperimentConfig, fit_observed_scale, grid_search, run_experiment
from .metrics import error_report
from .sampling import random_mask
from .solver import SobolevConfig, reconstruct_sobolev
from .synthetic import synthetic_dataset
from .temporal import TimeVaryingSignal

_VALIDATION_ERRORS = (
    MalformedCsv,
    DuplicateReading,
    UnknownNode,
    EmptyDataset,
    KTooLarge,
    DuplicateCoordinates,
    DensityTooLow,
    HorizonTooShort,
    DegenerateRange,
    DimensionMismatch,
    EmptyEvaluationSet,
    ValueError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphfill",
        description="Recover missing sensor readings by reconstructing "
        "time-varying graph signals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("reconstruct", help="single reconstruction run")
    rec.add_argument("--positions", required=True, help="node_id,x,y CSV")
    rec.add_argument("--readings", required=True, help="node_id,time_index,value CSV")
    rec.add_argument("--k", required=True, type=int, help="graph neighbours per node")
    rec.add_argument("--epsilon", required=True, type=float)
    rec.add_argument("--beta", required=True, type=float)
    rec.add_argument("--gamma", required=True, type=float)
    rec.add_argument("--density", required=True, type=float, help="observed fraction in (0, 1]")
    rec.add_argument("--seed", required=True, type=int)
    rec.add_argument("--out", required=True, help="output base path (.csv and .json)")
    rec.add_argument("--min-coverage", type=float, default=0.0,
                     help="drop nodes below this native coverage first")
    rec.add_argument("--cg-tolerance", type=float, default=1e-10)
    rec.add_argument("--max-iterations", type=int, default=20000)

    exp = sub.add_parser("experiment", help="Monte-Carlo experiment from a JSON config")
    _add_dataset_flags(exp)
    exp.add_argument("--config", required=True, help="experiment config JSON")
    exp.add_argument("--out", required=True, help="output base path (.csv and .json)")
    exp.add_argument("--threads", type=int, default=1,
                     help="cap on concurrently executed repetitions")

    grid = sub.add_parser("gridsearch", help="hyperparameter grid search from a JSON config")
    _add_dataset_flags(grid)
    grid.add_argument("--config", required=True, help="grid config JSON")
    grid.add_argument("--out", required=True, help="output base path (.csv and .json)")
    grid.add_argument("--threads", type=int, default=1)

    info = sub.add_parser("graph-info", help="inspect the kNN sensor graph")
    info.add_argument("--positions", required=True)
    info.add_argument("--k", required=True, type=int)
    info.add_argument("--out", help="optional edge-list CSV path")

    return parser


def _add_dataset_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--positions", help="node_id,x,y CSV")
    sub.add_argument("--readings", help="node_id,time_index,value CSV")
    sub.add_argument("--synthetic", action="store_true",
                     help="use the bundled synthetic dataset instead of CSVs")
    sub.add_argument("--synthetic-seed", type=int, default=0)
    sub.add_argument("--min-coverage", type=float, default=1.0,
                     help="native coverage required to keep a node")


def _load_experiment_dataset(args) -> "ingest.Dataset":
    if args.synthetic:
        return synthetic_dataset(seed=args.synthetic_seed)
    if not (args.positions and args.readings):
        raise ValueError("provide --positions and --readings, or --synthetic")
    dataset = ingest.load_dataset(args.positions, args.readings)
    return ingest.filter_consistent_nodes(dataset, args.min_coverage)


def _strict_keys(doc: dict, allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown {where} fields: {', '.join(sorted(unknown))}")


def _sobolev_from_json(doc: dict) -> SobolevConfig:
    _strict_keys(doc, {"epsilon", "beta", "gamma", "cg_tolerance", "max_iterations"}, "sobolev")
    return SobolevConfig(**doc)


def _experiment_config(path) -> ExperimentConfig:
    doc = _read_json(path)
    _strict_keys(
        doc,
        {"densities", "repetitions", "master_seed", "method", "sobolev", "k_graph"},
        "config",
    )
    kwargs = dict(doc)
    if "densities" in kwargs:
        kwargs["densities"] = tuple(kwargs["densities"])
    if "sobolev" in kwargs:
        kwargs["sobolev"] = _sobolev_from_json(kwargs["sobolev"])
    return ExperimentConfig(**kwargs)


def _read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"config {path} must be a JSON object")
    return doc


def _print_table(results, stream=None) -> None:
    stream = stream or sys.stdout
    header = f"{'dataset':<12} {'method':<12} {'density':>7} {'rmse_mean':>10} {'rmse_std':>9} {'mae_mean':>10} {'mae_std':>9} {'reps':>4}"
    print(header, file=stream)
    for r in results:
        print(
            f"{r.dataset_name:<12} {r.method:<12} {r.density:>7.3g} "
            f"{r.rmse_mean:>10.4g} {r.rmse_std:>9.4g} "
            f"{r.mae_mean:>10.4g} {r.mae_std:>9.4g} {len(r.per_rep):>4}",
            file=stream,
        )


def _cmd_reconstruct(args) -> int:
    if not 0 < args.density <= 1:
        raise ValueError(f"--density must be in (0, 1], got {args.density}")
    dataset = ingest.load_dataset(args.positions, args.readings)
    if args.min_coverage > 0:
        dataset = ingest.filter_consistent_nodes(dataset, args.min_coverage)
    graph = build_knn_graph(dataset.positions, args.k)
    n, m = dataset.signal.values.shape
    drawn = random_mask(n, m, args.density, args.seed)

    # Natively missing entries count as unobserved regardless of the draw,
    # but only artificially hidden entries with ground truth are scored.
    effective = drawn.matrix * dataset.native_mask
    eval_set = [
        (int(i), int(t))
        for i, t in np.argwhere((drawn.matrix == 0) & (dataset.native_mask == 1))
    ]
    params, y_values = fit_observed_scale(dataset.signal.values, effective)
    config = SobolevConfig(
        epsilon=args.epsilon,
        beta=args.beta,
        gamma=args.gamma,
        cg_tolerance=args.cg_tolerance,
        max_iterations=args.max_iterations,
    )
    result = reconstruct_sobolev(TimeVaryingSignal(values=y_values), effective, graph, config)
    if not result.converged:
        print(
            f"graphfill: solver did not converge after {result.iterations} iterations "
            f"(relative residual {result.final_relative_residual:.3e})",
            file=sys.stderr,
        )
        return 3
    recon = TimeVaryingSignal(values=result.xbar.values * params.span + params.min_value)

    csv_path, json_path = ingest.result_paths(args.out)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "time_index", "value"])
        for i, node_id in enumerate(dataset.positions.node_ids):
            for c, time_index in enumerate(dataset.time_indices):
                writer.writerow([node_id, time_index, format(recon.values[i, c], ".12g")])

    metrics_doc = {
        "dataset": dataset.name,
        "density": args.density,
        "seed": args.seed,
        "config": asdict(config),
        "k": args.k,
        "iterations": result.iterations,
        "final_relative_residual": result.final_relative_residual,
        "objective_value": result.objective_value,
        "n_evaluated": len(eval_set),
        "rmse": None,
        "mae": None,
    }
    if eval_set:
        report = error_report(dataset.signal, recon, eval_set)
        metrics_doc["rmse"] = report.rmse
        metrics_doc["mae"] = report.mae
    json_path.write_text(json.dumps(metrics_doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = _experiment_config(args.config)
    dataset = _load_experiment_dataset(args)
    results = run_experiment(dataset, cfg, threads=args.threads)
    echo = asdict(cfg)
    echo["dataset"] = dataset.name
    ingest.write_results(results, args.out, config=echo)
    _print_table(results)
    failed = sum(len(r.failed) for r in results)
    if failed:
        print(f"graphfill: {failed} repetitions failed; see failed_reps in the JSON output",
              file=sys.stderr)
        return 3
    return 0


def _cmd_gridsearch(args) -> int:
    doc = _read_json(args.config)
    _strict_keys(
        doc,
        {"density", "eps_grid", "beta_grid", "gamma_grid", "repetitions",
         "master_seed", "k_graph", "cg_tolerance", "max_iterations"},
        "config",
    )
    for key in ("density", "eps_grid", "beta_grid", "gamma_grid"):
        if key not in doc:
            raise ValueError(f"config is missing required field {key!r}")
    if not (doc["eps_grid"] and doc["beta_grid"] and doc["gamma_grid"]):
        raise ValueError("grids must be nonempty")

    dataset = _load_experiment_dataset(args)
    search = grid_search(
        dataset,
        density=doc["density"],
        eps_grid=doc["eps_grid"],
        beta_grid=doc["beta_grid"],
        gamma_grid=doc["gamma_grid"],
        repetitions=doc.get("repetitions", 20),
        master_seed=doc.get("master_seed", 0),
        k_graph=doc.get("k_graph", 5),
        cg_tolerance=doc.get("cg_tolerance", 1e-10),
        max_iterations=doc.get("max_iterations", 20000),
        threads=args.threads,
    )

    csv_path, json_path = ingest.result_paths(args.out)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epsilon", "beta", "gamma", "rmse_mean", "rmse_std",
                         "mae_mean", "mae_std", "reps", "failed"])
        for config, result in search.entries:
            writer.writerow([
                format(config.epsilon, ".6g"),
                format(config.beta, ".6g"),
                format(config.gamma, ".6g"),
                format(result.rmse_mean, ".6g"),
                format(result.rmse_std, ".6g"),
                format(result.mae_mean, ".6g"),
                format(result.mae_std, ".6g"),
                len(result.per_rep),
                len(result.failed),
            ])
    report = {
        "config_echo": doc,
        "dataset": dataset.name,
        "best_config": asdict(search.best_config),
        "best_rmse_mean": search.best_result.rmse_mean,
        "best_mae_mean": search.best_result.mae_mean,
        "entries": [
            {
                "config": asdict(config),
                "rmse_mean": _none_if_nan(result.rmse_mean),
                "mae_mean": _none_if_nan(result.mae_mean),
                "failed_reps": [
                    {"seed": seed, "error": message} for seed, message in result.failed
                ],
            }
            for config, result in search.entries
        ],
    }
    json_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    best = search.best_config
    print(
        f"best: epsilon={best.epsilon:g} beta={best.beta:g} gamma={best.gamma:g} "
        f"rmse_mean={search.best_result.rmse_mean:.6g}"
    )
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _none_if_nan(value: float):
    return None if np.isnan(value) else value


def _cmd_graph_info(args) -> int:
    positions = ingest.load_positions(args.positions)
    graph = build_knn_graph(positions, args.k)
    decomp = spectral_decomposition(graph)
    lam = decomp.eigenvalues
    n_zero = int(np.sum(np.abs(lam) < 1e-10))
    print(f"nodes:             {graph.n_nodes}")
    print(f"edges:             {graph.n_edges}")
    print(f"sigma:             {graph.sigma:.6g}")
    print(f"mean degree:       {2 * graph.n_edges / graph.n_nodes:.3f}")
    print(f"lambda_2:          {lam[1]:.6g}")
    print(f"lambda_max:        {lam[-1]:.6g}")
    print(f"components:        {n_zero}")
    print(f"connected:         {n_zero == 1}")
    if args.out:
        write_edge_list(graph, positions.node_ids, args.out)
        print(f"wrote {args.out}")
    return 0


_HANDLERS = {
    "reconstruct": _cmd_reconstruct,
    "experiment": _cmd_experiment,
    "gridsearch": _cmd_gridsearch,
    "graph-info": _cmd_graph_info,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse already printed its diagnostic
        return int(exc.code) if exc.code is not None else 0
    try:
        return _HANDLERS[args.command](args)
    except _VALIDATION_ERRORS as exc:
        print(f"graphfill: {exc}", file=sys.stderr)
        return 2
    except (GraphfillError, OSError) as exc:
        print(f"graphfill: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
