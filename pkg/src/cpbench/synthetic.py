"""Synthetic classifiers with controllable accuracy and confidence.

Rows are drawn from a Dirichlet whose concentration is boosted on an
"intended" class: the true label with probability `target_accuracy`,
otherwise a uniformly random wrong label.  This gives a desk-scale
stand-in for stored model outputs whose accuracy, sharpness, and
calibration/test mismatch are all knobs, which is what the statistical
tests need as ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import KIND_PROBABILITIES, LogitDataset
from .rng import derive_seed

DEFAULT_SHARPNESS = 10.0
DEFAULT_DIFFUSE_FRACTION = 0.25


@dataclass(frozen=True)
class ShiftSpec:
    """How the test distribution differs from calibration."""

    accuracy_drop: float = 0.0
    noise_scale: float = 0.0

    def __post_init__(self):
        if self.accuracy_drop < 0:
            raise ValueError("accuracy_drop must be >= 0")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")


@dataclass(frozen=True)
class SyntheticSpec:
    num_classes: int
    n: int
    target_accuracy: float = 0.7
    sharpness: float = DEFAULT_SHARPNESS
    diffuse_fraction: float = DEFAULT_DIFFUSE_FRACTION
    shift: ShiftSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (0.0 < self.target_accuracy <= 1.0):
            raise ValueError("target_accuracy must lie in (0, 1]")
        if not (self.sharpness > 0):
            raise ValueError("sharpness must be > 0")
        if not (0.0 <= self.diffuse_fraction <= 1.0):
            raise ValueError("diffuse_fraction must lie in [0, 1]")
        if self.shift is not None and not (
            self.shift.accuracy_drop < self.target_accuracy
        ):
            raise ValueError("accuracy_drop must be < target_accuracy")


def _generate(
    num_classes: int,
    n: int,
    target_accuracy: float,
    sharpness: float,
    diffuse_fraction: float,
    seed: int,
) -> LogitDataset:
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, num_classes, size=n)
    if num_classes == 1:
        return LogitDataset(np.ones((n, 1)), labels, KIND_PROBABILITIES)
    correct = rng.random(n) < target_accuracy
    # Uniform draw over the K-1 wrong labels.
    offset = rng.integers(1, num_classes, size=n)
    intended = np.where(correct, labels, (labels + offset) % num_classes)
    # Two row regimes, both with expected top probability around
    # sharpness / (sharpness + 1):
    #  - sparse-tail rows: the non-top mass concentrates on a couple of
    #    runner-up classes, and when the row is wrong the true label is the
    #    natural runner-up (unit concentration vs 1/(K-1) for the rest);
    #  - diffuse-tail rows: the non-top mass spreads evenly over all other
    #    classes, so a wrong row buries the true label at a deep rank.
    # Real classifiers show both kinds of error; without the diffuse rows
    # every score family degenerates to near-identical rank-2 sets.
    diffuse = rng.random(n) < diffuse_fraction
    concentration = np.full((n, num_classes), 1.0 / (num_classes - 1))
    concentration[np.arange(n), labels] = 1.0
    concentration[np.arange(n), intended] = sharpness
    concentration[diffuse] = 1.0
    concentration[diffuse, intended[diffuse]] = sharpness * (num_classes - 1)
    rows = rng.gamma(shape=concentration)
    rows /= rows.sum(axis=1, keepdims=True)
    return LogitDataset(rows, labels, KIND_PROBABILITIES)


def generate(spec: SyntheticSpec) -> LogitDataset:
    """One dataset from the base (calibration-side) distribution."""
    return _generate(
        spec.num_classes,
        spec.n,
        spec.target_accuracy,
        spec.sharpness,
        spec.diffuse_fraction,
        spec.seed,
    )


def generate_pair(spec: SyntheticSpec) -> tuple[LogitDataset, LogitDataset]:
    """(calibration, test) pair; the test half applies the spec's shift.

    The shifted side loses `accuracy_drop` of top-1 accuracy and has its
    sharpness divided by (1 + noise_scale).  Sub-seeds are derived from
    spec.seed so the halves are independent but reproducible.
    """
    if spec.shift is None:
        raise ValueError("generate_pair needs a spec with a shift")
    cal_seed = derive_seed(spec.seed, 1)
    test_seed = derive_seed(spec.seed, 2)
    cal = _generate(
        spec.num_classes,
        spec.n,
        spec.target_accuracy,
        spec.sharpness,
        spec.diffuse_fraction,
        cal_seed,
    )
    test = _generate(
        spec.num_classes,
        spec.n,
        spec.target_accuracy - spec.shift.accuracy_drop,
        spec.sharpness / (1.0 + spec.shift.noise_scale),
        spec.diffuse_fraction,
        test_seed,
    )
    return cal, test
