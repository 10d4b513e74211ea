"""Non-conformity scores: LAC, APS, and RAPS.

Notation used throughout: for a probability vector p and candidate label y,
`mass_above(p, y)` is the total probability of classes strictly more likely
than y, and `rank(p, y)` is 1 + the number of such classes.  Ties (classes
with probability exactly equal to p[y]) count toward neither, so tied
classes contribute nothing to the accumulated mass or the rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import KIND_PROBABILITIES, LogitDataset
from .errors import DatasetKindError
from .rng import keyed_uniforms

METHOD_LAC = "lac"
METHOD_APS = "aps"
METHOD_RAPS = "raps"
METHODS = (METHOD_LAC, METHOD_APS, METHOD_RAPS)

DEFAULT_RAPS_LAMBDA = 0.1
DEFAULT_RAPS_KREG = 2

U_UNIFORM = "uniform"
U_FIXED = "fixed"


@dataclass(frozen=True)
class ScoreSpec:
    """A score family plus its hyperparameters and randomization policy.

    `penalty` (lambda) and `k_reg` apply to RAPS only; LAC ignores the
    randomization settings entirely.
    """

    method: str = METHOD_LAC
    penalty: float = DEFAULT_RAPS_LAMBDA
    k_reg: int = DEFAULT_RAPS_KREG
    u_mode: str = U_UNIFORM
    u_value: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown score method {self.method!r}")
        if self.penalty < 0:
            raise ValueError("penalty (lambda) must be >= 0")
        if self.k_reg < 0:
            raise ValueError("k_reg must be >= 0")
        if self.u_mode not in (U_UNIFORM, U_FIXED):
            raise ValueError(f"unknown u_mode {self.u_mode!r}")
        if self.u_mode == U_FIXED:
            if self.u_value is None or not (0.0 <= self.u_value <= 1.0):
                raise ValueError("fixed u requires a value in [0, 1]")

    @property
    def randomized(self) -> bool:
        return self.method != METHOD_LAC and self.u_mode == U_UNIFORM


def _check_u(u: float) -> float:
    if not (0.0 <= u <= 1.0):
        raise ValueError("u must lie in [0, 1]")
    return float(u)


def _check_label(p: np.ndarray, y: int) -> int:
    if not (0 <= y < p.shape[-1]):
        raise IndexError(f"label {y} out of range for K={p.shape[-1]}")
    return int(y)


def score_lac(p, y: int) -> float:
    """1 - p[y]."""
    p = np.asarray(p, dtype=np.float64)
    y = _check_label(p, y)
    return float(1.0 - p[y])


def score_aps(p, y: int, u: float) -> float:
    """Accumulated mass of classes strictly more likely than y, plus p[y]*u."""
    p = np.asarray(p, dtype=np.float64)
    y = _check_label(p, y)
    u = _check_u(u)
    mass_above = float(p[p > p[y]].sum())
    return mass_above + float(p[y]) * u


def score_raps(
    p,
    y: int,
    u: float,
    penalty: float = DEFAULT_RAPS_LAMBDA,
    k_reg: int = DEFAULT_RAPS_KREG,
) -> float:
    """APS plus a rank penalty: penalty * max(0, rank(p, y) - k_reg)."""
    p = np.asarray(p, dtype=np.float64)
    y = _check_label(p, y)
    u = _check_u(u)
    if penalty < 0 or k_reg < 0:
        raise ValueError("penalty and k_reg must be >= 0")
    rank = int(np.sum(p > p[y])) + 1
    return score_aps(p, y, u) + penalty * max(0, rank - k_reg)


def mass_above_and_rank(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-class strictly-greater mass and rank for a batch of rows.

    For each row i and class y: mass[i, y] = sum of p[i, k] over k with
    p[i, k] > p[i, y], and rank[i, y] = that count + 1.  Vectorized via a
    stable descending sort; tie groups share the mass/rank of their first
    (sorted) member, which is exactly the strict-inequality definition.
    """
    p = np.asarray(p, dtype=np.float64)
    n, num_classes = p.shape
    order = np.argsort(-p, axis=1, kind="stable")
    sorted_p = np.take_along_axis(p, order, axis=1)
    csum = np.concatenate(
        [np.zeros((n, 1)), np.cumsum(sorted_p, axis=1)], axis=1
    )
    # first[j]: index of the first entry of the tie group containing sorted
    # position j.
    positions = np.arange(num_classes)
    group_start = np.zeros((n, num_classes), dtype=np.int64)
    if num_classes > 1:
        changed = sorted_p[:, 1:] != sorted_p[:, :-1]
        group_start[:, 1:] = np.where(changed, positions[1:], 0)
    first = np.maximum.accumulate(group_start, axis=1)

    mass_sorted = np.take_along_axis(csum, first, axis=1)
    rank_sorted = first + 1
    mass = np.empty_like(p)
    rank = np.empty((n, num_classes), dtype=np.int64)
    np.put_along_axis(mass, order, mass_sorted, axis=1)
    np.put_along_axis(rank, order, rank_sorted, axis=1)
    return mass, rank


def draw_u(spec: ScoreSpec, n: int, seed: int) -> np.ndarray:
    """The per-sample randomization term, one value per row.

    Uniform mode draws from the keyed (seed, row index) stream so the same
    row always receives the same u for a given seed, independent of batch
    order and of the score method.
    """
    if spec.u_mode == U_FIXED:
        return np.full(n, spec.u_value, dtype=np.float64)
    return keyed_uniforms(seed, np.arange(n))


def score_matrix(ds: LogitDataset, spec: ScoreSpec, seed: int = 0) -> np.ndarray:
    """n x K matrix of scores S(x_i, y) for every candidate label y.

    The randomization term is drawn once per sample and shared across that
    sample's K candidate scores, so prediction sets stay nested in the
    threshold.
    """
    if ds.kind != KIND_PROBABILITIES:
        raise DatasetKindError(
            "scores need probabilities; apply_temperature first or declare "
            "the dataset as probabilities"
        )
    p = ds.values
    if spec.method == METHOD_LAC:
        return 1.0 - p
    mass, rank = mass_above_and_rank(p)
    u = draw_u(spec, ds.n, seed)
    scores = mass + p * u[:, None]
    if spec.method == METHOD_RAPS:
        scores = scores + spec.penalty * np.maximum(rank - spec.k_reg, 0)
    return scores


def score_batch(
    ds: LogitDataset,
    spec: ScoreSpec,
    labels_mode: str = "observed",
    seed: int = 0,
) -> np.ndarray:
    """Batch scoring: observed-label vector or all-classes matrix.

    `observed` returns the length-n vector S(x_i, y_i) used for
    calibration; `all_classes` returns the full n x K matrix used for set
    construction.  Deterministic given (ds, spec, seed).
    """
    if labels_mode not in ("observed", "all_classes"):
        raise ValueError(f"unknown labels_mode {labels_mode!r}")
    matrix = score_matrix(ds, spec, seed)
    if labels_mode == "all_classes":
        return matrix
    labels = ds.require_labels()
    return np.take_along_axis(matrix, labels[:, None], axis=1)[:, 0]
