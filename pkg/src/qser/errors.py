"""Exception hierarchy shared across the toolkit.

Every error raised by qser derives from QserError so callers can catch the
whole family. The CLI maps subclasses onto stable exit codes (see cli.py).
"""


class QserError(Exception):
    """Base class for all qser errors."""


class ConfigError(QserError):
    """Invalid configuration value (qubit counts, ratios, grid values, run configs)."""


class CircuitError(QserError):
    """Malformed gate or circuit: bad wires, parameter-count mismatch, oversized unitary."""


class EmbeddingError(QserError):
    """Feature vector cannot be embedded (wrong length, all-zero amplitude input)."""


class LayerError(QserError):
    """Quantum layer input/param widths do not match its configuration."""


class ModelError(QserError):
    """Layer shapes do not compose, or a model is built from incompatible pieces."""


class DataError(QserError):
    """Bad labels, undecidable valence values, impossible splits."""


class IngestionError(QserError):
    """A file on disk could not be parsed; message carries byte offset or line number."""


class EvaluationError(QserError):
    """Evaluation preconditions violated (e.g. a class absent from the test set)."""


class TrainingAbortError(QserError):
    """Training hit a non-finite loss and stopped."""
