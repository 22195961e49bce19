"""Exception hierarchy shared by all modules."""


class ImpSobolError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(ImpSobolError, ValueError):
    pass


class DomainError(ImpSobolError, ValueError):
    pass


class DimensionMismatch(ImpSobolError, ValueError):
    pass


class QuadratureFailure(ImpSobolError, RuntimeError):
    pass


class RankDeficient(ImpSobolError, ArithmeticError):
    pass


class DegenerateDesign(ImpSobolError, ArithmeticError):
    pass


class DegenerateValidation(ImpSobolError, ArithmeticError):
    pass


class ZeroVariance(ImpSobolError, ArithmeticError):
    pass


class OptimizationFailed(ImpSobolError, RuntimeError):
    pass


class InfeasibleBase(ImpSobolError, ValueError):
    pass


class SingularStiffness(ImpSobolError, ArithmeticError):
    pass


class UnknownModel(ImpSobolError, KeyError):
    pass


class ConfigError(ImpSobolError, ValueError):
    pass
