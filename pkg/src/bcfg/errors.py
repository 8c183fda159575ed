"""Exception hierarchy for the package."""


class BcfgError(Exception):
    """Base class for every error raised by bcfg."""


class CollisionError(BcfgError):
    pass


class DimensionMismatch(BcfgError, ValueError):
    pass


class ZeroConfiguration(BcfgError, ValueError):
    pass


class NotNormalized(BcfgError, ValueError):
    pass


class SpectrumInvariantViolation(BcfgError):
    pass


class NotASolution(BcfgError):
    pass


class ZeroVector(BcfgError):
    pass


class KernelMismatch(BcfgError):
    pass


class NotAdmissible(BcfgError):
    pass


class NoConvergence(BcfgError):
    pass


class SingularSystem(BcfgError):
    pass


class AmbiguousTangent(BcfgError):
    pass


class FellBackToTrivial(BcfgError):
    pass


class EmptyBranch(BcfgError, ValueError):
    pass


class ParseError(BcfgError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(BcfgError, ValueError):
    pass
