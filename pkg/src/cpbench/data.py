"""Core dataset container: a dense matrix of classifier outputs plus labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError

KIND_LOGITS = "logits"
KIND_PROBABILITIES = "probabilities"

SIMPLEX_ATOL = 1e-6


@dataclass(frozen=True)
class LogitDataset:
    """n x K classifier outputs (raw logits or probabilities) with labels.

    `values` is float64, shape (n, K); `labels` is int64, shape (n,), or
    None when the source carried no labels.  Arrays are made read-only.
    """

    values: np.ndarray
    labels: np.ndarray | None = None
    kind: str = KIND_LOGITS

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        if values.shape[1] < 1:
            raise ValueError("class count K must be >= 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if self.kind not in (KIND_LOGITS, KIND_PROBABILITIES):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == KIND_PROBABILITIES and values.size:
            if np.any(values < 0):
                raise ValueError("probabilities must be nonnegative")
            sums = values.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > SIMPLEX_ATOL):
                raise ValueError("probability rows must sum to 1 within 1e-6")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (values.shape[0],):
                raise SchemaError(
                    f"labels shape {labels.shape} does not match n={values.shape[0]}"
                )
            if labels.size and (labels.min() < 0 or labels.max() >= values.shape[1]):
                raise ValueError("labels must lie in [0, K)")
            labels = labels.copy()
            labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def num_classes(self) -> int:
        return self.values.shape[1]

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("this operation needs a labeled dataset")
        return self.labels

    def take(self, indices: np.ndarray) -> "LogitDataset":
        """Row subset in the given order."""
        labels = None if self.labels is None else self.labels[indices]
        return LogitDataset(self.values[indices], labels, self.kind)

    def accuracy(self) -> float:
        """Top-1 accuracy; argmax ties resolve to the lowest class index."""
        labels = self.require_labels()
        if self.n == 0:
            raise ValueError("accuracy of an empty dataset is undefined")
        return float(np.mean(np.argmax(self.values, axis=1) == labels))
