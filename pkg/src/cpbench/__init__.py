"""Conformal prediction sets (LAC / APS / RAPS) and an evaluation harness
for stored classifier outputs."""

from .conformal import (
    ConformalPredictor,
    PredictionSet,
    PredictionSetBatch,
    calibrate,
    conformal_quantile,
    conformalize,
    predict_set,
)
from .data import KIND_LOGITS, KIND_PROBABILITIES, LogitDataset
from .errors import (
    CorruptionError,
    CpBenchError,
    DatasetKindError,
    FormatError,
    SchemaError,
)
from .fileio import read_logits, split, write_logits
from .harness import (
    CIFAR10_ALPHA,
    DEFAULT_ALPHA,
    RunConfig,
    cifar10_recipe,
    cmd_compare,
    cmd_conformalize,
    cmd_shift_eval,
    cmd_sweep_temperature,
    run_pair,
    run_split,
)
from .metrics import (
    MetricsReport,
    avg_set_size,
    class_conditional_coverage,
    compute_report,
    cov_gap,
    ece,
    empirical_coverage,
    mccc,
    set_size_delta,
    worst_class_comparison,
)
from .prob import (
    TemperatureConfig,
    apply_temperature,
    as_logits,
    default_temperature_grid,
    softmax,
)
from .scores import (
    DEFAULT_RAPS_KREG,
    DEFAULT_RAPS_LAMBDA,
    ScoreSpec,
    score_aps,
    score_batch,
    score_lac,
    score_raps,
)
from .synthetic import ShiftSpec, SyntheticSpec, generate, generate_pair

__version__ = "0.1.0"
