"""Split-conformal calibration and prediction-set construction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .data import LogitDataset
from .errors import SchemaError
from .rng import derive_seed
from .scores import (
    METHOD_APS,
    METHOD_LAC,
    METHOD_RAPS,
    ScoreSpec,
    U_FIXED,
    score_aps,
    score_batch,
    score_lac,
    score_raps,
)

#: Sub-stream tags for deriving calibration/test u seeds from a run seed.
_CAL_STREAM = 1
_TEST_STREAM = 2


def quantile_index(n: int, alpha: float) -> int:
    """k = ceil((n + 1) * (1 - alpha)), computed exactly.

    Exact rational arithmetic avoids the classic float pitfall where
    e.g. 10 * (1 - 0.1) evaluates just above 9 and the ceiling jumps.
    """
    if n < 1:
        raise ValueError("need at least one calibration score")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    return math.ceil(Fraction(n + 1) * (1 - Fraction(alpha)))


def conformal_quantile(cal_scores, alpha: float) -> float:
    """The calibration threshold: the k-th smallest score, k as above.

    Returns +inf when k exceeds n (too few calibration points for the
    requested alpha), which makes every prediction set the full label set
    and so preserves the coverage guarantee.
    """
    scores = np.asarray(cal_scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("calibration scores must be a non-empty 1-D vector")
    if not np.all(np.isfinite(scores)):
        raise ValueError("calibration scores must be finite")
    k = quantile_index(scores.size, alpha)
    if k > scores.size:
        return math.inf
    return float(np.partition(scores, k - 1)[k - 1])


@dataclass(frozen=True)
class ConformalPredictor:
    """A score spec bound to a calibrated threshold at level alpha."""

    spec: ScoreSpec
    alpha: float
    q_alpha: float
    n_cal: int

    @property
    def degenerate(self) -> bool:
        return math.isinf(self.q_alpha)


@dataclass(frozen=True)
class PredictionSet:
    """A sorted set of candidate class indices for one sample."""

    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    def __contains__(self, label: int) -> bool:
        return label in self.members


class PredictionSetBatch:
    """Prediction sets for a batch of samples, stored as a boolean mask.

    `membership[i, y]` says whether class y is in sample i's set.  The
    mask form keeps metric computation vectorized; `__getitem__` and
    `to_sets` materialize individual `PredictionSet`s.
    """

    def __init__(self, membership: np.ndarray):
        membership = np.asarray(membership, dtype=bool)
        if membership.ndim != 2:
            raise ValueError("membership must be an n x K boolean matrix")
        membership = membership.copy()
        membership.flags.writeable = False
        self.membership = membership

    @property
    def n(self) -> int:
        return self.membership.shape[0]

    @property
    def num_classes(self) -> int:
        return self.membership.shape[1]

    def sizes(self) -> np.ndarray:
        return self.membership.sum(axis=1)

    def contains(self, labels) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (self.n,):
            raise SchemaError("labels length does not match batch size")
        return self.membership[np.arange(self.n), labels]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> PredictionSet:
        return PredictionSet(tuple(np.flatnonzero(self.membership[i])))

    def to_sets(self) -> list[PredictionSet]:
        return [self[i] for i in range(self.n)]


def calibrate(cal_scores, alpha: float, spec: ScoreSpec | None = None,
              ) -> ConformalPredictor:
    """Build a predictor from observed-label calibration scores."""
    scores = np.asarray(cal_scores, dtype=np.float64)
    q = conformal_quantile(scores, alpha)
    return ConformalPredictor(
        spec=spec if spec is not None else ScoreSpec(),
        alpha=float(alpha),
        q_alpha=q,
        n_cal=int(scores.size),
    )


def _score_vector(p: np.ndarray, spec: ScoreSpec, u: float) -> np.ndarray:
    num_classes = p.shape[0]
    if spec.method == METHOD_LAC:
        return 1.0 - p
    if spec.method == METHOD_APS:
        return np.array([score_aps(p, y, u) for y in range(num_classes)])
    return np.array(
        [score_raps(p, y, u, spec.penalty, spec.k_reg) for y in range(num_classes)]
    )


def predict_set(p, predictor: ConformalPredictor, u: float | None = None,
                ) -> PredictionSet:
    """The set of labels whose score is at most the calibrated threshold.

    Empty sets are legitimate output (a randomized score can push every
    label above the threshold); a degenerate threshold yields all K labels.
    """
    p = np.asarray(p, dtype=np.float64)
    spec = predictor.spec
    if u is None:
        if spec.method != METHOD_LAC and spec.u_mode != U_FIXED:
            raise ValueError("uniform u_mode needs an explicit u draw")
        u = spec.u_value if spec.u_mode == U_FIXED else 0.0
    scores = _score_vector(p, spec, u)
    return PredictionSet(tuple(np.flatnonzero(scores <= predictor.q_alpha)))


def conformalize(
    cal: LogitDataset,
    test: LogitDataset,
    spec: ScoreSpec,
    alpha: float,
    seed: int = 0,
) -> tuple[ConformalPredictor, PredictionSetBatch]:
    """Calibrate on `cal` and build prediction sets for every row of `test`.

    Calibration and test randomization terms come from sub-streams derived
    from `seed`, so the whole run is reproducible bit-for-bit.
    """
    if cal.num_classes != test.num_classes:
        raise SchemaError(
            f"class-count mismatch: cal K={cal.num_classes}, "
            f"test K={test.num_classes}"
        )
    cal_scores = score_batch(
        cal, spec, labels_mode="observed", seed=derive_seed(seed, _CAL_STREAM)
    )
    predictor = calibrate(cal_scores, alpha, spec)
    test_scores = score_batch(
        test, spec, labels_mode="all_classes", seed=derive_seed(seed, _TEST_STREAM)
    )
    return predictor, PredictionSetBatch(test_scores <= predictor.q_alpha)
