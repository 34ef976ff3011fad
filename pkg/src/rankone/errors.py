"""Exception hierarchy shared by every module.

Each error carries a module-qualified ``code`` so the CLI can emit a
structured JSON error without inspecting the message text.
"""
from fractions import Fraction


class RankOneError(Exception):
    code = "rankone.error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": str(self)}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


class DomainError(RankOneError, ValueError):
    """A precondition on an input value was violated."""

    code = "domain"

    def __init__(self, message, precondition, **details):
        super().__init__(message, precondition=precondition, **details)
        self.precondition = precondition


class PoleError(RankOneError, ArithmeticError):
    code = "pole"

    def __init__(self, message, argument, **details):
        super().__init__(message, argument=argument, **details)
        self.argument = argument


class ConvergenceError(RankOneError, ArithmeticError):
    """A quadrature or series failed to reach its tolerance."""

    code = "convergence"

    def __init__(self, message, estimate, **details):
        super().__init__(message, estimate=estimate, **details)
        self.estimate = estimate


class BoundaryError(RankOneError, ValueError):
    """An exponent sits exactly on the L^2 threshold Re = 1/2."""

    code = "boundary"


class ModelError(RankOneError, ValueError):
    code = "model"


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    try:
        import numpy as np

        if isinstance(v, np.generic):
            return _jsonable(v.item())
    except ImportError:  # pragma: no cover
        pass
    if v is None or isinstance(v, (bool, int, float, str)):
        return v
    return repr(v)
