"""Least-squares fitting of model parameters against reference CDFs from
measurements or ray tracing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class ReferenceCdf:
    """Sorted empirical or tabulated CDF."""

    values: np.ndarray
    probabilities: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        probs = np.asarray(self.probabilities, dtype=np.float64)
        if values.ndim != 1 or values.shape != probs.shape or values.size == 0:
            raise ValueError("CDF needs matching non-empty 1-D columns")
        if np.any(np.diff(values) < 0.0):
            raise ValueError("CDF values must be sorted")
        if np.any(np.diff(probs) < 0.0) or probs[0] < 0.0 or probs[-1] > 1.0:
            raise ValueError("CDF probabilities must be non-decreasing in [0, 1]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def from_samples(cls, samples, label: str = "") -> "ReferenceCdf":
        values = np.sort(np.asarray(samples, dtype=np.float64))
        probs = np.arange(1, values.size + 1) / values.size
        return cls(values, probs, label)

    def evaluate(self, points) -> np.ndarray:
        return np.interp(points, self.values, self.probabilities, left=0.0, right=1.0)


def load_reference_cdf_csv(path, label: str = "") -> ReferenceCdf:
    """Read a two-column (value, probability) CSV; header row required."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CDF file") from None
        try:
            float(header[0])
        except (ValueError, IndexError):
            pass
        else:
            raise ValueError(f"{path}: CDF file must start with a header row")
        rows = [(float(row[0]), float(row[1])) for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: CDF file has no data rows")
    values, probs = zip(*rows)
    return ReferenceCdf(np.array(values), np.array(probs), label or str(path))


@dataclass(frozen=True)
class CdfDistance:
    """Mean squared vertical CDF difference plus the sup (KS) distance."""

    mse: float
    ks: float


def cdf_distance(simulated: ReferenceCdf, reference: ReferenceCdf) -> CdfDistance:
    """Vertical distance of two CDFs on the union grid, symmetric in its
    arguments."""
    grid = np.union1d(simulated.values, reference.values)
    diff = simulated.evaluate(grid) - reference.evaluate(grid)
    return CdfDistance(mse=float(np.mean(diff**2)), ks=float(np.max(np.abs(diff))))


def mmse_fit(
    parameter_grid,
    simulator_closure,
    reference: ReferenceCdf,
    n_realizations: int = 1,
    seed: int = 0,
    refine: bool = True,
) -> tuple[float, float]:
    """Grid search for the parameter whose simulated CDF best matches the
    reference, followed by one half-step local refinement pass.

    ``simulator_closure(value, rng, n_realizations)`` must return a
    :class:`ReferenceCdf`.  Every evaluation receives a generator seeded
    identically (common random numbers), so the search is deterministic and
    comparisons across the grid share their sampling noise.
    """
    grid = [float(v) for v in parameter_grid]
    if not grid:
        raise ConfigError("parameter grid must not be empty")

    def evaluate(value: float) -> float:
        rng = np.random.default_rng(np.random.SeedSequence([seed]))
        simulated = simulator_closure(value, rng, n_realizations)
        return cdf_distance(simulated, reference).mse

    distances = [evaluate(v) for v in grid]
    best_idx = int(np.argmin(distances))
    best_value, best_distance = grid[best_idx], distances[best_idx]
    if refine and len(grid) > 1:
        steps = np.diff(sorted(grid))
        half = float(np.min(steps)) / 2.0
        lo, hi = min(grid), max(grid)
        for candidate in (best_value - half, best_value + half):
            if lo <= candidate <= hi:
                distance = evaluate(candidate)
                if distance < best_distance:
                    best_value, best_distance = candidate, distance
    return best_value, best_distance
