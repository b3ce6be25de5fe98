"""Exception hierarchy. Every error carries a short machine-readable ``code``
which the CLI prints as ``ERROR <CODE>: message``."""


class DiscomaxError(Exception):
    code = "RUNTIME"


class ShapeError(DiscomaxError, ValueError):
    code = "SHAPE"


class SymmetryError(ShapeError):
    code = "ASYMMETRIC"


class NonFiniteError(DiscomaxError, ValueError):
    code = "NON_FINITE"


class NotPSDError(DiscomaxError, ValueError):
    code = "NOT_PSD"


class InsufficientSamplesError(DiscomaxError, ValueError):
    code = "INSUFFICIENT_SAMPLES"


class DegenerateInputError(DiscomaxError, ValueError):
    code = "DEGENERATE_INPUT"


class DegenerateResponseError(DegenerateInputError):
    code = "DEGENERATE_RESPONSE"


class DegenerateEmbeddingError(DegenerateInputError):
    code = "DEGENERATE_EMBEDDING"


class ConfigError(DiscomaxError, ValueError):
    code = "CONFIG"


class DataFileError(DiscomaxError, ValueError):
    code = "DATA"
