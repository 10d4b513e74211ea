"""Probability-vector primitives: softmax and temperature scaling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import KIND_LOGITS, KIND_PROBABILITIES, LogitDataset
from .errors import DatasetKindError

#: The default temperature-sweep grid: 14 evenly spaced values on [0.85, 2].
TEMPERATURE_GRID_START = 0.85
TEMPERATURE_GRID_STOP = 2.0
TEMPERATURE_GRID_POINTS = 14


def default_temperature_grid() -> np.ndarray:
    return np.linspace(
        TEMPERATURE_GRID_START, TEMPERATURE_GRID_STOP, TEMPERATURE_GRID_POINTS
    )


@dataclass(frozen=True)
class TemperatureConfig:
    """A single scaling temperature plus an ordered grid for sweeps."""

    temperature: float = 1.0
    grid: tuple[float, ...] = field(
        default_factory=lambda: tuple(default_temperature_grid())
    )

    def __post_init__(self):
        if not (self.temperature > 0):
            raise ValueError("temperature must be > 0")
        grid = tuple(float(t) for t in self.grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("temperature grid must be strictly increasing")
        if any(t <= 0 for t in grid):
            raise ValueError("grid temperatures must be > 0")
        object.__setattr__(self, "grid", grid)


def softmax(logits, temperature: float = 1.0) -> np.ndarray:
    """Temperature-scaled softmax along the last axis.

    Stable for large logits (subtracts the row max before exponentiating);
    preserves each row's argmax for any temperature > 0.
    """
    if not (temperature > 0):
        raise ValueError("temperature must be > 0")
    x = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("logits must be finite")
    z = x / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def apply_temperature(ds: LogitDataset, temperature: float) -> LogitDataset:
    """Softmax every row of a logits dataset at the given temperature.

    Only defined on raw logits; a dataset already stored as probabilities
    is rejected rather than re-scaled.
    """
    if ds.kind != KIND_LOGITS:
        raise DatasetKindError("temperature scaling applies to logits only")
    probs = softmax(ds.values, temperature)
    return LogitDataset(probs, ds.labels, KIND_PROBABILITIES)


def as_logits(ds: LogitDataset) -> LogitDataset:
    """View a probabilities dataset as equivalent log-probability logits.

    softmax(log p, T=1) recovers p exactly (up to rounding), so this is the
    inverse entry point for temperature experiments on stored probabilities.
    """
    if ds.kind != KIND_PROBABILITIES:
        return ds
    p = np.maximum(ds.values, np.finfo(np.float64).tiny)
    return LogitDataset(np.log(p), ds.labels, KIND_LOGITS)
