"""Evaluation metrics: set size, coverage, CovGap, MCCC, ECE, diagnostics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .conformal import PredictionSetBatch
from .errors import SchemaError

DEFAULT_ECE_BINS = 15


def _as_membership(sets) -> np.ndarray | None:
    if isinstance(sets, PredictionSetBatch):
        return sets.membership
    return None


def _set_sizes(sets) -> np.ndarray:
    membership = _as_membership(sets)
    if membership is not None:
        return membership.sum(axis=1)
    return np.array([s.size for s in sets], dtype=np.int64)


def _covered(sets, labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    membership = _as_membership(sets)
    if membership is not None:
        if labels.shape != (membership.shape[0],):
            raise SchemaError("labels length does not match number of sets")
        return membership[np.arange(labels.size), labels]
    if labels.shape != (len(sets),):
        raise SchemaError("labels length does not match number of sets")
    return np.array([y in s for s, y in zip(sets, labels)], dtype=bool)


def avg_set_size(sets) -> float:
    sizes = _set_sizes(sets)
    if sizes.size == 0:
        raise ValueError("need at least one prediction set")
    return float(sizes.mean())


def empirical_coverage(sets, labels) -> float:
    """Fraction of samples whose true label lies in their prediction set."""
    covered = _covered(sets, labels)
    if covered.size == 0:
        raise ValueError("need at least one prediction set")
    return float(covered.mean())


def class_conditional_coverage(sets, labels, num_classes: int) -> dict[int, float]:
    """Coverage restricted to each class's samples; absent classes omitted."""
    labels = np.asarray(labels, dtype=np.int64)
    covered = _covered(sets, labels)
    out: dict[int, float] = {}
    for k in range(num_classes):
        mask = labels == k
        if mask.any():
            out[k] = float(covered[mask].mean())
    return out


def cov_gap(per_class: dict[int, float], alpha: float) -> float:
    """Mean absolute deviation of class coverage from the 1 - alpha target."""
    if not per_class:
        raise ValueError("per-class coverage map is empty")
    target = 1.0 - alpha
    return float(np.mean([abs(v - target) for v in per_class.values()]))


def mccc(per_class: dict[int, float]) -> float:
    """Minimum class-conditional coverage."""
    if not per_class:
        raise ValueError("per-class coverage map is empty")
    return float(min(per_class.values()))


def ece(probs, labels, n_bins: int = DEFAULT_ECE_BINS) -> float:
    """Top-label expected calibration error over equal-width confidence bins.

    Bin b (0-based) holds confidences in [b/n_bins, (b+1)/n_bins); a
    confidence of exactly 1.0 lands in the last bin.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] < 1:
        raise ValueError("probs must be a non-empty n x K matrix")
    if labels.shape != (probs.shape[0],):
        raise SchemaError("labels length does not match probs")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    confidence = probs.max(axis=1)
    correct = (probs.argmax(axis=1) == labels).astype(np.float64)
    bins = np.minimum((confidence * n_bins).astype(np.int64), n_bins - 1)
    n = probs.shape[0]
    total = 0.0
    for b in range(n_bins):
        mask = bins == b
        count = int(mask.sum())
        if count == 0:
            continue
        total += (count / n) * abs(correct[mask].mean() - confidence[mask].mean())
    return float(total)


@dataclass(frozen=True)
class SizeDeltaHistogram:
    """Multiset of nonzero per-sample set-size differences, zeros counted apart."""

    deltas: dict[int, int]
    zeros: int

    @property
    def total(self) -> int:
        return self.zeros + sum(self.deltas.values())


def set_size_delta(sets_a, sets_b) -> SizeDeltaHistogram:
    """Histogram of size(a_i) - size(b_i) over aligned samples, zeros excluded."""
    sizes_a = _set_sizes(sets_a)
    sizes_b = _set_sizes(sets_b)
    if sizes_a.shape != sizes_b.shape:
        raise SchemaError("runs have different numbers of prediction sets")
    diff = sizes_a - sizes_b
    nonzero = diff[diff != 0]
    return SizeDeltaHistogram(
        deltas=dict(Counter(int(d) for d in nonzero)),
        zeros=int((diff == 0).sum()),
    )


@dataclass(frozen=True)
class WorstClassComparison:
    """Run B's behaviour at run A's worst-covered class."""

    worst_class: int
    coverage_a: float
    avg_size_a: float
    coverage_b: float | None
    avg_size_b: float | None
    min_coverage_b: float


def _class_avg_size(sets, labels, k: int) -> float | None:
    labels = np.asarray(labels, dtype=np.int64)
    sizes = _set_sizes(sets)
    mask = labels == k
    if not mask.any():
        return None
    return float(sizes[mask].mean())


def worst_class_comparison(
    per_class_a: dict[int, float],
    sets_a,
    per_class_b: dict[int, float],
    sets_b,
    labels,
) -> WorstClassComparison:
    """Find run A's minimum-coverage class and report run B there.

    Ties for the minimum resolve to the lowest class index.  If the class
    is absent from run B's map its entries are reported as None rather
    than fabricated.
    """
    if not per_class_a or not per_class_b:
        raise ValueError("per-class coverage maps must be non-empty")
    worst = min(per_class_a, key=lambda k: (per_class_a[k], k))
    in_b = worst in per_class_b
    return WorstClassComparison(
        worst_class=worst,
        coverage_a=per_class_a[worst],
        avg_size_a=_class_avg_size(sets_a, labels, worst),
        coverage_b=per_class_b[worst] if in_b else None,
        avg_size_b=_class_avg_size(sets_b, labels, worst) if in_b else None,
        min_coverage_b=min(per_class_b.values()),
    )


@dataclass(frozen=True)
class MetricsReport:
    """All metrics for one conformal run."""

    coverage: float
    avg_set_size: float
    cov_gap: float
    mccc: float
    ece: float
    accuracy: float
    empty_set_fraction: float
    per_class_coverage: dict[int, float] = field(default_factory=dict)

    def to_record(self) -> dict:
        """Flat serializable record (per-class vector excluded)."""
        return {
            "coverage": self.coverage,
            "avg_set_size": self.avg_set_size,
            "cov_gap": self.cov_gap,
            "mccc": self.mccc,
            "ece": self.ece,
            "accuracy": self.accuracy,
            "empty_set_fraction": self.empty_set_fraction,
        }


def compute_report(
    probs,
    labels,
    sets,
    alpha: float,
    n_bins: int = DEFAULT_ECE_BINS,
) -> MetricsReport:
    """Evaluate one run end to end."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    per_class = class_conditional_coverage(sets, labels, probs.shape[1])
    sizes = _set_sizes(sets)
    return MetricsReport(
        coverage=empirical_coverage(sets, labels),
        avg_set_size=float(sizes.mean()),
        cov_gap=cov_gap(per_class, alpha),
        mccc=mccc(per_class),
        ece=ece(probs, labels, n_bins),
        accuracy=float(np.mean(probs.argmax(axis=1) == labels)),
        empty_set_fraction=float(np.mean(sizes == 0)),
        per_class_coverage=per_class,
    )
