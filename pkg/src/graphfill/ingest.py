"""Dataset loading from CSV and result serialization.

Two long-format CSV contracts cover both weather-station style and indoor
lab style sensor networks:

* positions: header ``node_id,x,y``; one row per node.
* readings: header ``node_id,time_index,value``; absent (node, time) rows or
  non-finite value tokens mean the reading is natively missing.

Time is an integer index; only its ordering matters. Nodes keep the
positions-file order, time columns are sorted ascending by index.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateReading,
    EmptyDataset,
    MalformedCsv,
    UnknownNode,
)
from .graph import NodePositions
from .temporal import TimeVaryingSignal

_POSITIONS_HEADER = ["node_id", "x", "y"]
_READINGS_HEADER = ["node_id", "time_index", "value"]


@dataclass(frozen=True, eq=False)
class Dataset:
    """One sensor network: positions, readings matrix, native-missing mask.

    native_mask marks entries that exist in the source data; the signal is
    exactly zero (a placeholder, never evaluated) where native_mask is 0.
    """

    positions: NodePositions
    signal: TimeVaryingSignal
    native_mask: np.ndarray
    name: str
    time_indices: tuple[int, ...]

    def __post_init__(self):
        native = np.asarray(self.native_mask).astype(np.int8)
        if native.shape != self.signal.values.shape:
            raise ValueError("native_mask and signal shapes differ")
        if self.positions.n_nodes != self.signal.n_nodes:
            raise ValueError("positions and signal node counts differ")
        if len(self.time_indices) != self.signal.n_steps:
            raise ValueError("time_indices and signal column counts differ")
        if np.any(self.signal.values[native == 0] != 0.0):
            raise ValueError("signal must be zero where the reading is missing")
        native.setflags(write=False)
        object.__setattr__(self, "native_mask", native)
        object.__setattr__(self, "time_indices", tuple(int(t) for t in self.time_indices))

    @property
    def n_nodes(self) -> int:
        return self.signal.n_nodes

    @property
    def n_steps(self) -> int:
        return self.signal.n_steps

    @property
    def fully_covered(self) -> bool:
        return bool(self.native_mask.all())


def _read_rows(path: Path, header: list[str]) -> list[list[str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedCsv(f"{path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise MalformedCsv(f"{path}: empty file")
    got = [c.strip() for c in rows[0]]
    if got != header:
        raise MalformedCsv(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise MalformedCsv(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        body.append([c.strip() for c in row])
    return body


def load_positions(path) -> NodePositions:
    """Read a ``node_id,x,y`` CSV into NodePositions."""
    path = Path(path)
    rows = _read_rows(path, _POSITIONS_HEADER)
    ids: list[str] = []
    coords: list[tuple[float, float]] = []
    for row in rows:
        node_id, xs, ys = row
        if node_id in ids:
            raise MalformedCsv(f"{path}: duplicate node_id {node_id!r}")
        try:
            xy = (float(xs), float(ys))
        except ValueError as exc:
            raise MalformedCsv(f"{path}: bad coordinate for {node_id!r}: {exc}") from exc
        if not all(math.isfinite(v) for v in xy):
            raise MalformedCsv(f"{path}: non-finite coordinate for {node_id!r}")
        ids.append(node_id)
        coords.append(xy)
    if len(ids) < 2:
        raise EmptyDataset(f"{path}: need at least 2 nodes, got {len(ids)}")
    return NodePositions(coords=np.array(coords), node_ids=tuple(ids))


def load_dataset(positions_path, readings_path, name: str | None = None) -> Dataset:
    """Load positions + long-format readings and pivot into an N x M matrix.

    Node order follows the positions file; time columns are the distinct
    time_index values sorted ascending. Nodes with no readings at all are
    dropped with a warning. A missing (node, time) row, or a value token
    that does not parse to a finite real, marks that entry natively missing.

    Raises:
        MalformedCsv, DuplicateReading, UnknownNode, EmptyDataset.
    """
    positions_path = Path(positions_path)
    readings_path = Path(readings_path)
    positions = load_positions(positions_path)
    rows = _read_rows(readings_path, _READINGS_HEADER)
    if not rows:
        raise EmptyDataset(f"{readings_path}: no readings")

    node_index = {nid: i for i, nid in enumerate(positions.node_ids)}
    triples: dict[tuple[int, int], float | None] = {}
    times: set[int] = set()
    for row in rows:
        node_id, time_str, value_str = row
        if node_id not in node_index:
            raise UnknownNode(f"{readings_path}: node {node_id!r} not in positions file")
        try:
            time_index = int(time_str)
        except ValueError as exc:
            raise MalformedCsv(f"{readings_path}: bad time_index {time_str!r}") from exc
        if time_index < 0:
            raise MalformedCsv(f"{readings_path}: negative time_index {time_index}")
        key = (node_index[node_id], time_index)
        if key in triples:
            raise DuplicateReading(
                f"{readings_path}: duplicate reading for ({node_id!r}, {time_index})"
            )
        if value_str == "":
            value = None
        else:
            try:
                value = float(value_str)
            except ValueError as exc:
                raise MalformedCsv(f"{readings_path}: bad value {value_str!r}") from exc
            if not math.isfinite(value):
                value = None
        triples[key] = value
        times.add(time_index)

    observed_nodes = {i for i, _ in triples}
    keep = [i for i in range(positions.n_nodes) if i in observed_nodes]
    dropped = [positions.node_ids[i] for i in range(positions.n_nodes) if i not in observed_nodes]
    if dropped:
        warnings.warn(f"dropping nodes with no readings: {', '.join(dropped)}", stacklevel=2)
    if len(keep) < 2:
        raise EmptyDataset(f"{readings_path}: fewer than 2 nodes have readings")

    time_order = sorted(times)
    col_of = {t: c for c, t in enumerate(time_order)}
    row_of = {old: new for new, old in enumerate(keep)}
    signal = np.zeros((len(keep), len(time_order)))
    native = np.zeros((len(keep), len(time_order)), dtype=np.int8)
    for (i, t), value in triples.items():
        if i not in row_of or value is None:
            continue
        signal[row_of[i], col_of[t]] = value
        native[row_of[i], col_of[t]] = 1

    kept_positions = NodePositions(
        coords=positions.coords[keep],
        node_ids=tuple(positions.node_ids[i] for i in keep),
    )
    return Dataset(
        positions=kept_positions,
        signal=TimeVaryingSignal(values=signal),
        native_mask=native,
        name=name if name is not None else readings_path.stem,
        time_indices=tuple(time_order),
    )


def filter_consistent_nodes(dataset: Dataset, min_coverage: float) -> Dataset:
    """Keep nodes whose fraction of native readings is at least min_coverage.

    min_coverage = 1.0 keeps only nodes with a complete series;
    min_coverage = 0 is the identity.
    """
    if not 0 <= min_coverage <= 1:
        raise ValueError(f"min_coverage must be in [0, 1], got {min_coverage}")
    coverage = dataset.native_mask.mean(axis=1)
    keep = np.nonzero(coverage >= min_coverage)[0]
    if keep.size < 2:
        raise EmptyDataset(
            f"only {keep.size} nodes reach coverage {min_coverage}; need at least 2"
        )
    if keep.size == dataset.n_nodes:
        return dataset
    positions = NodePositions(
        coords=dataset.positions.coords[keep],
        node_ids=tuple(dataset.positions.node_ids[i] for i in keep),
    )
    return Dataset(
        positions=positions,
        signal=TimeVaryingSignal(values=dataset.signal.values[keep]),
        native_mask=dataset.native_mask[keep],
        name=dataset.name,
        time_indices=dataset.time_indices,
    )


def iter_readings(dataset: Dataset):
    """Yield (node_id, time_index, value) for every native reading."""
    for i in range(dataset.n_nodes):
        for c in range(dataset.n_steps):
            if dataset.native_mask[i, c]:
                yield (
                    dataset.positions.node_ids[i],
                    dataset.time_indices[c],
                    float(dataset.signal.values[i, c]),
                )


def _finite_or_none(value: float):
    return float(value) if value is not None and math.isfinite(value) else None


def result_paths(path) -> tuple[Path, Path]:
    """Resolve an output base path into its (csv, json) pair."""
    base = Path(path)
    if base.suffix in {".csv", ".json"}:
        base = base.with_suffix("")
    return base.with_suffix(".csv"), base.with_suffix(".json")


def write_results(results, path, config: dict | None = None) -> None:
    """Write experiment results as a CSV summary table plus a JSON document.

    ``path`` is a base path: ``<path>.csv`` gets one row per (dataset,
    method, density) with means and population standard deviations at 6
    significant digits; ``<path>.json`` carries full-precision per-repetition
    values, failures, and an echo of the configuration. Output bytes are
    deterministic for identical inputs.
    """
    results = list(results)
    if not results:
        raise ValueError("results must be nonempty")
    csv_path, json_path = result_paths(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)

    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["dataset", "method", "density", "rmse_mean", "rmse_std", "mae_mean", "mae_std", "reps"]
        )
        for r in results:
            writer.writerow(
                [
                    r.dataset_name,
                    r.method,
                    format(r.density, ".6g"),
                    _fmt(r.rmse_mean),
                    _fmt(r.rmse_std),
                    _fmt(r.mae_mean),
                    _fmt(r.mae_std),
                    len(r.per_rep),
                ]
            )

    doc = {
        "config": config,
        "results": [
            {
                "dataset": r.dataset_name,
                "method": r.method,
                "density": r.density,
                "rmse_mean": _finite_or_none(r.rmse_mean),
                "rmse_std": _finite_or_none(r.rmse_std),
                "mae_mean": _finite_or_none(r.mae_mean),
                "mae_std": _finite_or_none(r.mae_std),
                "repetitions": r.repetitions,
                "per_rep": [
                    {"seed": seed, "rmse": rm, "mae": ma} for seed, rm, ma in r.per_rep
                ],
                "failed_reps": [
                    {"seed": seed, "error": message} for seed, message in r.failed
                ],
            }
            for r in results
        ],
    }
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fmt(value: float) -> str:
    return format(value, ".6g") if math.isfinite(value) else "nan"
