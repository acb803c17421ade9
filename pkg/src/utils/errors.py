"""Exception types shared by the kernel calculus and the verification harness."""


class FockCalcError(Exception):
    """Base class for all fockcalc errors."""


class DimensionMismatchError(FockCalcError):
    """Raised when blocks, vectors or operators do not fit their point space."""


class FlavorMismatchError(FockCalcError):
    """Raised when germ matrices of different flavors are combined."""


class PreconditionError(FockCalcError):
    """Raised when an estimate or construction is called outside its hypotheses."""


class ConfigError(FockCalcError):
    """Raised for an invalid harness configuration."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class ReportWriteError(FockCalcError):
    """Raised when a report cannot be written to its output path."""
