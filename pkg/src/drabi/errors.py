"""Exception and warning types shared across modules."""


class JcmBoundary(ValueError):
    """Raised when k1*k2 == 0: the similarity transform and kappa are undefined."""


class SpectralCollapse(UserWarning):
    """The su(1,1) model has no bounded-below discrete spectrum (gamma <= 2)."""


class NotBalanceable(ValueError):
    """A tridiagonal matrix has an off-diagonal pair with negative product."""


class NonRealSpectrum(ArithmeticError):
    """Eigenvalues with imaginary parts above tolerance were produced."""


class NonUnitaryError(ValueError):
    pass


class NotFGForm(ValueError):
    pass


class ConvergenceFailure(RuntimeError):
    """Truncation doubling hit the cap before the requested levels settled.

    ``best`` holds the last spectrum computed (levels flagged unconverged) and
    ``last_delta`` the maximum change between the final two truncations.
    """

    def __init__(self, message, best=None, last_delta=float("nan")):
        super().__init__(message)
        self.best = best
        self.last_delta = last_delta
