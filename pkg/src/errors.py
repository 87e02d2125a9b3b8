"""Exception hierarchy shared by every numeric module."""


class GaborError(Exception):
    """Base class for all repgabor errors."""


class DomainError(GaborError, ValueError):
    """An operation was called outside its contract (bad parameter, k = 0, ab != 1, ...)."""


class GridMismatchError(DomainError):
    """Two sampled objects live on incompatible grids."""


class NumericError(GaborError, ArithmeticError):
    """A numeric target could not be met.

    ``node`` is the offending sample point (if any) and ``attained`` the
    error or bound actually reached.
    """

    def __init__(self, message, node=None, attained=None):
        super().__init__(message)
        self.node = node
        self.attained = attained

    def __str__(self):
        base = super().__str__()
        extras = []
        if self.node is not None:
            extras.append(f"node={self.node}")
        if self.attained is not None:
            extras.append(f"attained={self.attained:.3e}")
        return f"{base} ({', '.join(extras)})" if extras else base


class TruncationError(NumericError):
    """A series or lattice sum cannot be truncated within the requested tail bound."""
