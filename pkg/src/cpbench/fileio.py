"""The CPL1 binary logits file and deterministic dataset splitting.

Layout (all little-endian):

    bytes 0-3    magic "CPL1"
    bytes 4-7    uint32 version (= 1)
    bytes 8-15   uint64 n (sample count)
    bytes 16-19  uint32 K (class count)
    byte  20     uint8 flags: bit0 = labels present,
                              bit1 = values are probabilities
    then         n*K float32 values, row-major
    then         n int32 labels, if bit0 is set

No padding, no trailing bytes.  Values are stored as float32; in-memory
computation stays in float64.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .data import KIND_LOGITS, KIND_PROBABILITIES, LogitDataset
from .errors import CorruptionError, FormatError
from .rng import fisher_yates

MAGIC = b"CPL1"
VERSION = 1
FLAG_LABELS = 0x01
FLAG_PROBABILITIES = 0x02

_HEADER = struct.Struct("<4sIQIB")


def write_logits(ds: LogitDataset, path) -> None:
    """Serialize a dataset; values are quantized to float32."""
    flags = 0
    if ds.labels is not None:
        flags |= FLAG_LABELS
    if ds.kind == KIND_PROBABILITIES:
        flags |= FLAG_PROBABILITIES
    payload = np.ascontiguousarray(ds.values, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, ds.n, ds.num_classes, flags))
        fh.write(payload)
        if ds.labels is not None:
            fh.write(np.ascontiguousarray(ds.labels, dtype="<i4").tobytes())


def read_logits(path) -> LogitDataset:
    """Read and validate a CPL1 file."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CorruptionError(f"{path}: file shorter than the CPL1 header")
    magic, version, n, num_classes, flags = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if num_classes < 1:
        raise FormatError(f"{path}: class count must be >= 1, got {num_classes}")
    if flags & ~(FLAG_LABELS | FLAG_PROBABILITIES):
        raise FormatError(f"{path}: unknown flag bits in 0x{flags:02x}")

    offset = _HEADER.size
    payload_bytes = n * num_classes * 4
    label_bytes = n * 4 if flags & FLAG_LABELS else 0
    expected = offset + payload_bytes + label_bytes
    if len(raw) < expected:
        raise CorruptionError(
            f"{path}: truncated ({len(raw)} bytes, expected {expected})"
        )
    if len(raw) > expected:
        raise FormatError(f"{path}: {len(raw) - expected} trailing bytes")

    values = np.frombuffer(raw, dtype="<f4", count=n * num_classes, offset=offset)
    values = values.reshape(n, num_classes).astype(np.float64)
    labels = None
    if flags & FLAG_LABELS:
        labels = np.frombuffer(
            raw, dtype="<i4", count=n, offset=offset + payload_bytes
        ).astype(np.int64)
        if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
            raise FormatError(f"{path}: label out of range [0, {num_classes})")
    kind = KIND_PROBABILITIES if flags & FLAG_PROBABILITIES else KIND_LOGITS
    try:
        return LogitDataset(values, labels, kind)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid content: {exc}") from exc


def split(
    ds: LogitDataset, cal_fraction: float, seed: int
) -> tuple[LogitDataset, LogitDataset]:
    """Random disjoint (calibration, test) partition of a dataset.

    Shuffles with Fisher-Yates driven by xoshiro256** seeded via
    splitmix64(seed); the first floor(n * cal_fraction) shuffled indices
    become the calibration half.  cal_fraction = 1 returns the whole
    dataset as calibration and an empty test half.
    """
    if not (0.0 < cal_fraction <= 1.0):
        raise ValueError("cal_fraction must lie in (0, 1]")
    if cal_fraction == 1.0:
        empty = LogitDataset(
            np.empty((0, ds.num_classes)),
            None if ds.labels is None else np.empty(0, dtype=np.int64),
            ds.kind,
        )
        return ds, empty
    if ds.n < 2:
        raise ValueError("need at least 2 samples to split")
    perm = fisher_yates(ds.n, seed)
    n_cal = int(np.floor(ds.n * cal_fraction))
    return ds.take(perm[:n_cal]), ds.take(perm[n_cal:])
