"""Exception hierarchy shared by all modules."""


class RLSigmaError(Exception):
    """Base class for every error raised by the package."""


class ExprError(RLSigmaError, ValueError):
    """Problem with an expression string."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at byte offset {offset}")
        self.name = name
        self.offset = offset


class VariableIndexError(ExprError):
    def __init__(self, name: str, dimension: int, offset: int):
        super().__init__(
            f"variable {name} out of range for dimension {dimension} "
            f"at byte offset {offset}"
        )
        self.name = name
        self.offset = offset


class EvalDomainError(RLSigmaError, ArithmeticError):
    """Evaluation left the domain of log, sqrt or division."""

    def __init__(self, message: str, subexpression: str):
        super().__init__(f"{message} in subexpression {subexpression}")
        self.subexpression = subexpression


class ConfigError(RLSigmaError, ValueError):
    """Malformed metric configuration document."""


class NormalFormError(RLSigmaError, ValueError):
    """The metric violates the adapted normal form at a sample point."""

    def __init__(self, message: str, point=None):
        where = "" if point is None else f" at {tuple(float(x) for x in point)}"
        super().__init__(message + where)
        self.point = point


class PreconditionError(RLSigmaError, ValueError):
    """An operation was called outside its domain of definition."""


class NotOnSigmaError(PreconditionError):
    pass


class NotVanishingError(PreconditionError):
    def __init__(self, residual: float):
        super().__init__(f"function does not vanish on the hypersurface (|f| = {residual:.3e})")
        self.residual = residual


class NonTangentError(PreconditionError):
    pass


class NotIIFlatError(PreconditionError):
    pass


class NonCanonicalError(PreconditionError):
    pass


class StencilOutOfBoxError(PreconditionError):
    pass
