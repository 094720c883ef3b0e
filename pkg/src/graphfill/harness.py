"""Monte-Carlo experiments, hyperparameter grid search and the kNN baseline.

The protocol: for each sampling density, repeatedly (i) draw a random mask
seeded by master_seed + repetition, (ii) min-max scale the data using the
observed entries only, (iii) reconstruct the hidden entries with the chosen
method, (iv) undo the scaling, and (v) score RMSE/MAE against the ground
truth over the hidden entries. Aggregates are the mean and population
standard deviation over repetitions.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyColumn, EmptyEvaluationSet, GraphfillError
from .graph import SensorGraph, build_knn_graph
from .ingest import Dataset
from .metrics import ScaleParams, error_report
from .sampling import SamplingMask, complement_indices, random_mask, samples_per_column
from .solver import SobolevConfig, reconstruct_sobolev, reconstruct_tikhonov
from .temporal import TimeVaryingSignal, mask_values

METHODS = ("sobolev", "tikhonov", "knn_baseline")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: densities x repetitions for a single method."""

    densities: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7)
    repetitions: int = 20
    master_seed: int = 0
    method: str = "sobolev"
    sobolev: SobolevConfig = field(default_factory=SobolevConfig)
    k_graph: int = 5

    def __post_init__(self):
        dens = tuple(float(d) for d in self.densities)
        if not dens:
            raise ValueError("densities must be nonempty")
        if any(not 0 < d <= 1 for d in dens):
            raise ValueError(f"densities must lie in (0, 1], got {dens}")
        if any(b <= a for a, b in zip(dens, dens[1:])):
            raise ValueError(f"densities must be strictly increasing, got {dens}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.k_graph < 1:
            raise ValueError("k_graph must be positive")
        object.__setattr__(self, "densities", dens)


@dataclass(frozen=True)
class ExperimentResult:
    """Per-(method, density) metric aggregates over Monte-Carlo repetitions.

    per_rep holds (seed, rmse, mae) for each successful repetition; failed
    holds (seed, error message) for repetitions that raised. Aggregates are
    over successes only, so a result with failures is flagged rather than
    silently averaged down.
    """

    dataset_name: str
    method: str
    density: float
    rmse_mean: float
    rmse_std: float
    mae_mean: float
    mae_std: float
    per_rep: tuple[tuple[int, float, float], ...]
    failed: tuple[tuple[int, str], ...] = ()
    repetitions: int = 0

    @property
    def complete(self) -> bool:
        return not self.failed and len(self.per_rep) == self.repetitions


@dataclass(frozen=True)
class GridSearchResult:
    """Winning configuration plus the full per-config report."""

    best_config: SobolevConfig
    best_result: ExperimentResult
    entries: tuple[tuple[SobolevConfig, ExperimentResult], ...]


def knn_baseline_impute(
    y: TimeVaryingSignal, mask, graph: SensorGraph
) -> TimeVaryingSignal:
    """Fill hidden entries with the weighted mean of observed graph neighbours.

    For hidden entry (i, t) the estimate is the W(i, .)-weighted average of
    the nodes adjacent to i that are observed at time t; when no neighbour
    is observed the column mean of the observed entries stands in. Observed
    entries pass through unchanged.
    """
    j = mask_values(mask)
    if j.shape != y.values.shape or y.n_nodes != graph.n_nodes:
        raise GraphfillError("signal, mask and graph dimensions must agree")
    col_counts = j.sum(axis=0)
    if np.any(col_counts == 0):
        t = int(np.nonzero(col_counts == 0)[0][0])
        raise EmptyColumn(f"time step {t} has no observed nodes")
    w = graph.weights
    neighbour_sum = w @ (y.values * j)
    neighbour_weight = w @ j
    column_mean = (y.values * j).sum(axis=0) / col_counts
    fallback = np.broadcast_to(column_mean, y.values.shape)
    safe_weight = np.where(neighbour_weight > 0, neighbour_weight, 1.0)
    averaged = np.where(neighbour_weight > 0, neighbour_sum / safe_weight, fallback)
    return TimeVaryingSignal(values=np.where(j == 1, y.values, averaged))


def fit_observed_scale(truth_values: np.ndarray, mask_matrix: np.ndarray):
    """Min-max parameters from observed entries only, plus the scaled Y.

    Hidden entries of truth_values are never read: the returned matrix is
    exactly zero there regardless of their content, which keeps ground truth
    out of the reconstruction inputs.
    """
    observed = truth_values[mask_matrix == 1]
    params = ScaleParams(min_value=float(observed.min()), max_value=float(observed.max()))
    with np.errstate(invalid="ignore"):
        scaled = (truth_values - params.min_value) / params.span
    y_values = np.where(mask_matrix == 1, scaled, 0.0)
    return params, y_values


def _solve(method, y, mask, graph, sobolev_cfg):
    if method == "sobolev":
        result = reconstruct_sobolev(y, mask, graph, sobolev_cfg)
    elif method == "tikhonov":
        result = reconstruct_tikhonov(
            y,
            mask,
            graph,
            sobolev_cfg.gamma,
            cg_tolerance=sobolev_cfg.cg_tolerance,
            max_iterations=sobolev_cfg.max_iterations,
        )
    else:
        return knn_baseline_impute(y, mask, graph)
    if not result.converged:
        raise GraphfillError(
            f"solver did not converge within {result.iterations} iterations "
            f"(relative residual {result.final_relative_residual:.3e})"
        )
    return result.xbar


def run_single_repetition(
    truth: TimeVaryingSignal,
    graph: SensorGraph,
    density: float,
    seed: int,
    method: str,
    sobolev_cfg: SobolevConfig,
) -> tuple[float, float, SamplingMask]:
    """One mask draw, solve and score; returns (rmse, mae, mask)."""
    n, m = truth.values.shape
    mask = random_mask(n, m, density, seed)
    hidden = complement_indices(mask)
    if not hidden:
        raise EmptyEvaluationSet(
            f"density {density} observes every entry; nothing left to evaluate"
        )
    params, y_values = fit_observed_scale(truth.values, mask.matrix)
    estimate = _solve(method, TimeVaryingSignal(values=y_values), mask, graph, sobolev_cfg)
    recon = TimeVaryingSignal(values=estimate.values * params.span + params.min_value)
    report = error_report(truth, recon, hidden)
    return report.rmse, report.mae, mask


def _aggregate(dataset_name, method, density, per_rep, failed, repetitions):
    if per_rep:
        rmses = np.array([r for _, r, _ in per_rep])
        maes = np.array([m for _, _, m in per_rep])
        stats = (
            float(rmses.mean()),
            float(rmses.std()),
            float(maes.mean()),
            float(maes.std()),
        )
    else:
        stats = (float("nan"),) * 4
    return ExperimentResult(
        dataset_name=dataset_name,
        method=method,
        density=density,
        rmse_mean=stats[0],
        rmse_std=stats[1],
        mae_mean=stats[2],
        mae_std=stats[3],
        per_rep=tuple(per_rep),
        failed=tuple(failed),
        repetitions=repetitions,
    )


def _require_full_coverage(dataset: Dataset) -> None:
    if not dataset.fully_covered:
        raise GraphfillError(
            "experiment needs a fully covered dataset; apply "
            "filter_consistent_nodes(min_coverage=1.0) first"
        )


def _run_cell(truth, graph, dataset_name, density, cfg: ExperimentConfig, threads: int = 1):
    n = truth.values.shape[0]
    if samples_per_column(n, density) >= n:
        raise EmptyEvaluationSet(
            f"density {density} samples all {n} nodes per snapshot; "
            "nothing is hidden, so there is nothing to evaluate"
        )

    def one(rep: int):
        seed = cfg.master_seed + rep
        try:
            r, m, _ = run_single_repetition(
                truth, graph, density, seed, cfg.method, cfg.sobolev
            )
            return seed, (r, m), None
        except GraphfillError as exc:
            return seed, None, f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(cfg.repetitions)))
    else:
        outcomes = [one(rep) for rep in range(cfg.repetitions)]

    # Aggregation order is the repetition order, not completion order.
    per_rep = [(seed, rm[0], rm[1]) for seed, rm, _ in outcomes if rm is not None]
    failed = [(seed, msg) for seed, _, msg in outcomes if msg is not None]
    return _aggregate(dataset_name, cfg.method, density, per_rep, failed, cfg.repetitions)


def run_experiment(
    dataset: Dataset, cfg: ExperimentConfig, threads: int = 1
) -> list[ExperimentResult]:
    """Monte-Carlo cross-validation over all configured densities.

    Deterministic given the config: repetition r draws its mask with seed
    master_seed + r, so distinct methods or hyperparameters evaluated with
    the same master_seed see identical masks (paired comparisons). threads
    caps how many repetitions run concurrently; it never changes results.
    """
    _require_full_coverage(dataset)
    graph = build_knn_graph(dataset.positions, cfg.k_graph)
    return [
        _run_cell(dataset.signal, graph, dataset.name, density, cfg, threads=threads)
        for density in cfg.densities
    ]


def grid_search(
    dataset: Dataset,
    density: float,
    eps_grid,
    beta_grid,
    gamma_grid,
    repetitions: int = 20,
    master_seed: int = 0,
    k_graph: int = 5,
    cg_tolerance: float = 1e-10,
    max_iterations: int = 20000,
    threads: int = 1,
) -> GridSearchResult:
    """Exhaustive (epsilon, beta, gamma) search at one sampling density.

    Every configuration is scored on the identical mask sequence (seeds
    master_seed .. master_seed + repetitions - 1). The winner minimizes
    rmse_mean; ties break toward smaller (gamma, epsilon, beta). A
    configuration with any failed repetition stays in the report but is
    excluded from the argmin.
    """
    eps_grid = list(eps_grid)
    beta_grid = list(beta_grid)
    gamma_grid = list(gamma_grid)
    if not (eps_grid and beta_grid and gamma_grid):
        raise ValueError("all three grids must be nonempty")
    _require_full_coverage(dataset)
    graph = build_knn_graph(dataset.positions, k_graph)

    entries = []
    for eps, beta, gamma in itertools.product(eps_grid, beta_grid, gamma_grid):
        sobolev_cfg = SobolevConfig(
            epsilon=eps,
            beta=beta,
            gamma=gamma,
            cg_tolerance=cg_tolerance,
            max_iterations=max_iterations,
        )
        cfg = ExperimentConfig(
            densities=(density,),
            repetitions=repetitions,
            master_seed=master_seed,
            method="sobolev",
            sobolev=sobolev_cfg,
            k_graph=k_graph,
        )
        result = _run_cell(dataset.signal, graph, dataset.name, density, cfg, threads=threads)
        entries.append((sobolev_cfg, result))

    eligible = [(c, r) for c, r in entries if r.complete]
    if not eligible:
        raise GraphfillError("every grid configuration had failed repetitions")
    best_config, best_result = min(
        eligible, key=lambda cr: (cr[1].rmse_mean, cr[0].gamma, cr[0].epsilon, cr[0].beta)
    )
    return GridSearchResult(
        best_config=best_config, best_result=best_result, entries=tuple(entries)
    )
