"""Exceptions shared across the package."""


class XxzentError(Exception):
    """Base class for all package-specific failures."""


class DomainError(XxzentError, ValueError):
    """Arguments outside the validity domain of an operation."""


class BreakdownError(XxzentError):
    """RPA correction factor not positive: an imaginary collective mode left
    the Matsubara validity window (beta*|omega|/2 >= pi)."""

    def __init__(self, message, where=None, t_star=None):
        super().__init__(message)
        self.where = where          # offending (r, z) or mode index
        self.t_star = t_star        # estimated breakdown temperature, if known


class QuadratureError(XxzentError):
    """Adaptive integration failed to reach the requested error budget."""


class ConvergenceError(XxzentError):
    """Iterative solver did not converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PhaseError(XxzentError):
    """Operation requested in the wrong mean-field phase (e.g. deformed-phase
    moments in the normal phase, or a non-positive fluctuation Hessian)."""


class NotApplicableError(XxzentError):
    """Approximation formally defined but outside its applicability window
    (e.g. CMFA concurrence for b > b* at T <= Ttilde, where it turns complex)."""


class InconsistentMomentsError(XxzentError):
    """Collective moments produce a two-qubit density that is not positive
    semidefinite beyond tolerance."""
