"""Exception hierarchy shared across the package.

Every error raised by library code derives from :class:`FaultcastError` so
callers (notably the CLI) can map failures to exit codes without matching on
message text.
"""

from __future__ import annotations


class FaultcastError(Exception):
    """Base class for all package errors."""


class DataError(FaultcastError):
    """Problems with input data, schemas, or persisted artifacts."""


class IoError(DataError):
    """A file could not be read or written."""


class SchemaError(DataError):
    """A file does not follow the expected layout (header, cell types)."""


class MissingValue(DataError):
    """An empty cell was found and the active policy cannot repair it."""


class MalformedKpiId(DataError):
    """A KPI key does not parse as ``metric@node``."""


class SchemaMismatch(DataError):
    """Dataset columns do not match the columns a model was trained on."""


class DimensionMismatch(DataError):
    """Vector length differs from the expected dimension."""


class NonFiniteLoss(FaultcastError):
    """Training produced a NaN or infinite loss."""


class TooFewPoints(FaultcastError):
    """A curve has too few points for knee selection."""


class InsufficientHistory(FaultcastError):
    """Fewer buffered samples than the analysis window requires."""


class NoNodes(FaultcastError):
    """Centrality was requested for an empty graph."""


class EmptyDocument(DataError):
    """A document to ingest has no content."""


class EmptyStore(FaultcastError):
    """Retrieval was attempted against a store with no chunks."""


class MissingDescriptor(FaultcastError):
    """An anomalous KPI has no human-readable description."""


class EndpointError(FaultcastError):
    """A remote endpoint failed after all retries."""


class Timeout(EndpointError):
    """A remote endpoint did not answer within the deadline."""


class OnsetOutOfRange(DataError):
    """A fault onset lies outside the simulated time range."""


class NoAnomalousReport(FaultcastError):
    """Localization scoring got no anomalous report to score."""
