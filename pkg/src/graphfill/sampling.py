"""Random sampling masks over (node, time) entries.

Masks follow the equal-per-snapshot protocol: every time column observes the
same number of nodes, drawn uniformly at random. A whole mask is redrawn if
any node ends up never observed, because the reconstruction system is
singular in that case.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DensityTooLow, DimensionMismatch, UnsatisfiableCoverage
from .temporal import TimeVaryingSignal, mask_values

_MAX_REDRAWS = 1000


def samples_per_column(n: int, density: float) -> int:
    """Observed nodes per snapshot: density * n rounded half-up."""
    return int(np.floor(density * n + 0.5))


@dataclass(frozen=True, eq=False)
class SamplingMask:
    """Binary N x M matrix marking observed (1) entries.

    Every column carries exactly round(density * N) ones. Row coverage
    (every node observed at least once) is guaranteed for masks produced by
    random_mask; hand-built masks may violate it, in which case the solver
    rejects them with SingularSystem.
    """

    matrix: np.ndarray
    density: float
    seed: int

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {m.shape}")
        if not np.isin(m, (0, 1)).all():
            raise ValueError("mask entries must be 0 or 1")
        if not 0 < self.density <= 1:
            raise ValueError(f"density must be in (0, 1], got {self.density}")
        expected = samples_per_column(m.shape[0], self.density)
        col_sums = m.sum(axis=0)
        if not (col_sums == expected).all():
            raise ValueError(
                f"every column must have exactly {expected} ones, "
                f"got sums {sorted(set(int(c) for c in col_sums))}"
            )
        arr = m.astype(np.int8)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def from_matrix(cls, matrix, seed: int = 0) -> "SamplingMask":
        """Wrap an explicit binary matrix; columns must share one sample count."""
        m = np.asarray(matrix)
        counts = set(int(c) for c in m.sum(axis=0))
        if len(counts) != 1:
            raise ValueError(f"column sums must be constant, got {sorted(counts)}")
        density = counts.pop() / m.shape[0]
        return cls(matrix=m, density=density, seed=seed)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def random_mask(n: int, m: int, density: float, seed: int) -> SamplingMask:
    """Draw a deterministic random mask with equal samples per snapshot.

    Each column independently picks round(density * n) distinct node
    indices. If some node row comes out all-zero the whole mask is redrawn
    (same generator stream), up to 1000 attempts.

    Raises:
        DensityTooLow: the per-column count rounds to zero.
        UnsatisfiableCoverage: 1000 redraws never covered every row.
    """
    if n < 2 or m < 1:
        raise ValueError(f"mask needs n >= 2 and m >= 1, got ({n}, {m})")
    if not 0 < density <= 1:
        raise ValueError(f"density must be in (0, 1], got {density}")
    count = samples_per_column(n, density)
    if count < 1:
        raise DensityTooLow(f"density {density} rounds to 0 of {n} nodes per snapshot")

    rng = np.random.default_rng(seed)
    for _ in range(_MAX_REDRAWS):
        matrix = np.zeros((n, m), dtype=np.int8)
        for t in range(m):
            matrix[rng.choice(n, size=count, replace=False), t] = 1
        if matrix.sum(axis=1).min() > 0:
            return SamplingMask(matrix=matrix, density=density, seed=seed)
    raise UnsatisfiableCoverage(
        f"{_MAX_REDRAWS} draws never observed every one of {n} nodes "
        f"({count} samples x {m} snapshots)"
    )


def apply_mask(x: TimeVaryingSignal, mask) -> TimeVaryingSignal:
    """Entrywise product Y = J o X: observed entries kept, the rest zeroed."""
    j = mask_values(mask)
    if j.shape != x.values.shape:
        raise DimensionMismatch(f"mask {j.shape} vs signal {x.values.shape}")
    return TimeVaryingSignal(values=x.values * j)


def complement_indices(mask) -> list[tuple[int, int]]:
    """All unobserved (node, time) pairs, 0-based, sorted lexicographically."""
    j = np.asarray(getattr(mask, "matrix", mask))
    return [(int(i), int(t)) for i, t in np.argwhere(j == 0)]


def write_mask_csv(mask, path) -> None:
    """Export a mask as bare 0/1 CSV, N rows by M columns, no header."""
    j = np.asarray(getattr(mask, "matrix", mask))
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in j:
            writer.writerow([int(v) for v in row])
