"""Experiment protocols over stored logits: conformalize, temperature
sweeps, domain-shift evaluation, and multi-model comparison tables."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .conformal import PredictionSetBatch, conformalize
from .data import KIND_LOGITS, KIND_PROBABILITIES, LogitDataset
from .errors import DatasetKindError, SchemaError
from .fileio import read_logits, split
from .metrics import (
    DEFAULT_ECE_BINS,
    MetricsReport,
    compute_report,
    set_size_delta,
    worst_class_comparison,
)
from .prob import apply_temperature, default_temperature_grid
from .scores import ScoreSpec

DEFAULT_ALPHA = 0.1
#: The CIFAR-10 recipe uses a tighter error level.
CIFAR10_ALPHA = 0.05
DEFAULT_CAL_FRACTION = 0.5

#: Keys present in every flat report record, in emission order.
REPORT_KEYS = (
    "alpha",
    "method",
    "lambda",
    "kreg",
    "T",
    "seed",
    "coverage",
    "avg_set_size",
    "cov_gap",
    "mccc",
    "ece",
    "accuracy",
    "empty_set_fraction",
)


@dataclass(frozen=True)
class RunConfig:
    """Everything a harness run needs besides the data."""

    alpha: float = DEFAULT_ALPHA
    score: ScoreSpec = field(default_factory=ScoreSpec)
    cal_fraction: float = DEFAULT_CAL_FRACTION
    seed: int = 0
    temperature: float | None = None
    t_grid: tuple[float, ...] | None = None
    ece_bins: int = DEFAULT_ECE_BINS

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if not (0.0 < self.cal_fraction <= 1.0):
            raise ValueError("cal_fraction must lie in (0, 1]")
        if self.temperature is not None and not (self.temperature > 0):
            raise ValueError("temperature must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def grid(self) -> tuple[float, ...]:
        if self.t_grid is not None:
            return self.t_grid
        return tuple(default_temperature_grid())


def cifar10_recipe(**overrides) -> RunConfig:
    """The CIFAR-10 defaults: identical except alpha = 0.05."""
    overrides.setdefault("alpha", CIFAR10_ALPHA)
    return RunConfig(**overrides)


@dataclass(frozen=True)
class RunResult:
    """One conformal run: config, metrics, and the raw prediction sets."""

    config: RunConfig
    temperature: float | None
    report: MetricsReport
    sets: PredictionSetBatch
    labels: np.ndarray

    def record(self) -> dict:
        rec = {
            "alpha": self.config.alpha,
            "method": self.config.score.method,
            "lambda": self.config.score.penalty,
            "kreg": self.config.score.k_reg,
            "T": self.temperature,
            "seed": self.config.seed,
        }
        rec.update(self.report.to_record())
        return rec


def _as_probabilities(ds: LogitDataset, temperature: float | None) -> tuple[LogitDataset, float | None]:
    if ds.kind == KIND_LOGITS:
        t = 1.0 if temperature is None else temperature
        return apply_temperature(ds, t), t
    if temperature is not None:
        raise DatasetKindError(
            "temperature was requested but the input already holds probabilities"
        )
    return ds, None


def run_pair(cal: LogitDataset, test: LogitDataset, cfg: RunConfig) -> RunResult:
    """Calibrate on `cal`, evaluate on `test`, and compute all metrics."""
    cal, t = _as_probabilities(cal, cfg.temperature)
    test, _ = _as_probabilities(test, cfg.temperature)
    _, sets = conformalize(cal, test, cfg.score, cfg.alpha, cfg.seed)
    labels = test.require_labels()
    report = compute_report(test.values, labels, sets, cfg.alpha, cfg.ece_bins)
    return RunResult(cfg, t, report, sets, labels)


def run_split(ds: LogitDataset, cfg: RunConfig) -> RunResult:
    """Split one dataset into calibration/test halves and run."""
    cal, test = split(ds, cfg.cal_fraction, cfg.seed)
    if test.n == 0:
        raise ValueError("cal_fraction leaves no test samples")
    return run_pair(cal, test, cfg)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, rows: list[dict]) -> None:
    keys = list(REPORT_KEYS)
    if rows and "run" in rows[0]:
        keys = ["run"] + keys
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in keys})


def _emit(out_dir, stem: str, payload: dict, rows: list[dict], fmt: str) -> None:
    if out_dir is None:
        return
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt in ("json", "both"):
        _write_json(out_dir / f"{stem}.json", payload)
    if fmt in ("csv", "both"):
        _write_csv(out_dir / f"{stem}.csv", rows)


def cmd_conformalize(
    input_path, cfg: RunConfig, out_dir=None, fmt: str = "json"
) -> dict:
    """Split -> (temperature) -> score -> calibrate -> predict -> metrics."""
    result = run_split(read_logits(input_path), cfg)
    payload = {
        "record": result.record(),
        "per_class_coverage": {
            str(k): v for k, v in result.report.per_class_coverage.items()
        },
        "set_sizes": [int(s) for s in result.sets.sizes()],
    }
    _emit(out_dir, "report", payload, [result.record()], fmt)
    return payload


def cmd_sweep_temperature(
    input_path, cfg: RunConfig, out_dir=None, fmt: str = "json"
) -> dict:
    """One conformal run per grid temperature on a raw-logits input.

    The calibration/test split is fixed across the grid so rows differ
    only in the temperature.
    """
    ds = read_logits(input_path)
    if ds.kind != KIND_LOGITS:
        raise DatasetKindError("temperature sweep needs raw logits input")
    cal, test = split(ds, cfg.cal_fraction, cfg.seed)
    if test.n == 0:
        raise ValueError("cal_fraction leaves no test samples")
    rows = []
    for t in cfg.grid():
        result = run_pair(cal, test, replace(cfg, temperature=float(t), t_grid=None))
        rows.append(result.record())
    payload = {"grid": [float(t) for t in cfg.grid()], "rows": rows}
    _emit(out_dir, "sweep", payload, rows, fmt)
    return payload


def cmd_shift_eval(
    cal_path, test_path, cfg: RunConfig, out_dir=None, fmt: str = "json"
) -> dict:
    """Calibrate on one file, evaluate on another (domain-shift protocol)."""
    cal = read_logits(cal_path)
    test = read_logits(test_path)
    if cal.num_classes != test.num_classes:
        raise SchemaError(
            f"class-count mismatch: {cal_path} has K={cal.num_classes}, "
            f"{test_path} has K={test.num_classes}"
        )
    result = run_pair(cal, test, cfg)
    payload = {
        "record": result.record(),
        "per_class_coverage": {
            str(k): v for k, v in result.report.per_class_coverage.items()
        },
    }
    _emit(out_dir, "shift", payload, [result.record()], fmt)
    return payload


def cmd_compare(
    input_paths,
    methods,
    cfg: RunConfig,
    out_dir=None,
    fmt: str = "json",
    analyze: tuple[str, str] | None = None,
) -> dict:
    """One run per (input file, method); optional pairwise diagnostics.

    Run labels are "<file stem>/<method>".  When `analyze` names two runs,
    the payload adds the worst-class comparison of the pair and the
    per-sample set-size-difference histogram.
    """
    if not input_paths:
        raise ValueError("need at least one input file")
    rows = []
    runs: dict[str, RunResult] = {}
    for path in input_paths:
        ds = read_logits(path)
        for method in methods:
            run_cfg = replace(cfg, score=replace(cfg.score, method=method))
            result = run_split(ds, run_cfg)
            label = f"{Path(path).stem}/{method}"
            runs[label] = result
            rows.append({"run": label, **result.record()})
    payload: dict = {"rows": rows}
    if analyze is not None:
        label_a, label_b = analyze
        for label in (label_a, label_b):
            if label not in runs:
                raise ValueError(
                    f"unknown run {label!r}; available: {sorted(runs)}"
                )
        a, b = runs[label_a], runs[label_b]
        if a.sets.n != b.sets.n:
            raise SchemaError("analysis pair must share the same test split")
        wc = worst_class_comparison(
            a.report.per_class_coverage,
            a.sets,
            b.report.per_class_coverage,
            b.sets,
            a.labels,
        )
        delta = set_size_delta(a.sets, b.sets)
        payload["worst_class"] = {
            "run_a": label_a,
            "run_b": label_b,
            "class": wc.worst_class,
            "coverage_a": wc.coverage_a,
            "avg_size_a": wc.avg_size_a,
            "coverage_b": wc.coverage_b,
            "avg_size_b": wc.avg_size_b,
            "min_coverage_b": wc.min_coverage_b,
        }
        payload["set_size_delta"] = {
            "deltas": {str(k): v for k, v in sorted(delta.deltas.items())},
            "zeros": delta.zeros,
        }
    _emit(out_dir, "compare", payload, rows, fmt)
    return payload
