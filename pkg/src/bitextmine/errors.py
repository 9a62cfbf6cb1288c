"""Exception hierarchy shared by every module.

Each family maps to one CLI exit code (see ``bitextmine.cli``).
"""


class BitextError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(BitextError, ValueError):
    """Invalid parameters or configuration (exit code 1)."""


class ProviderError(BitextError):
    """Embedding provider failure (exit code 3)."""


class AuthError(ProviderError):
    pass


class RateLimitError(ProviderError):
    pass


class TransportError(ProviderError):
    pass


class ValidationError(BitextError, ValueError):
    """Data failed a consistency check (exit code 4)."""


class DimensionMismatch(ValidationError):
    pass


class CacheCorruption(ValidationError):
    def __init__(self, line_no: int, reason: str, path=None):
        self.line_no = line_no
        self.reason = reason
        self.path = path
        where = f"{path}:" if path is not None else "line "
        super().__init__(f"corrupt cache record at {where}{line_no}: {reason}")


class NormalizationError(ValidationError):
    def __init__(self, row: int, norm: float):
        self.row = row
        self.norm = norm
        super().__init__(f"row {row} has L2 norm {norm:.3g}; cannot normalize")


class EmptyTargetError(ValidationError):
    pass


class IndexOutOfBounds(ValidationError, IndexError):
    pass


class LineCountMismatch(ValidationError):
    def __init__(self, n_src: int, n_tgt: int):
        self.n_src = n_src
        self.n_tgt = n_tgt
        super().__init__(f"parallel files differ in length: {n_src} source lines vs {n_tgt} target lines")


class EmptyPairs(ValidationError):
    pass


class InvalidLabel(ValidationError):
    def __init__(self, line_no: int, value: str):
        self.line_no = line_no
        self.value = value
        super().__init__(f"invalid label {value!r} on line {line_no}; expected an integer in 1..5")
