"""Exception types shared across the package."""


class CpBenchError(Exception):
    """Base class for all package-specific errors."""


class FormatError(CpBenchError):
    """A logits file violates the CPL1 format (bad magic, version, or layout)."""


class CorruptionError(FormatError):
    """A logits file is truncated or its payload does not match the header."""


class SchemaError(CpBenchError):
    """Two inputs that must agree (shapes, class counts, lengths) do not."""


class DatasetKindError(CpBenchError):
    """An operation received logits where probabilities were required, or vice versa."""
