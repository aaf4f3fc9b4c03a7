"""Exception types shared across the package."""


class DualNewtonError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(DualNewtonError):
    """Operands have incompatible shapes."""


class NonFiniteValue(DualNewtonError):
    """A computation produced or received a NaN/Inf."""


class NotPositiveDefinite(DualNewtonError):
    """Cholesky factorization hit a nonpositive pivot."""


class SingularMatrix(DualNewtonError):
    """LU factorization found a pivot below the singularity threshold."""


class DomainViolation(DualNewtonError):
    """A point left the chart domain of its model (e.g. sigma <= 0)."""


class DivergenceUndefined(DualNewtonError):
    """The alpha-divergence integral does not converge at this point."""


class MomentInfeasible(DualNewtonError):
    """No natural parameter reproduces the requested moment vector."""


class LineSearchFailure(DualNewtonError):
    """Wolfe bracketing exhausted its evaluation budget."""


class QuadratureUnderflow(DualNewtonError):
    """Model density underflowed at every quadrature node."""


class InsufficientIterations(DualNewtonError):
    """Too few iterates to estimate a convergence order."""
