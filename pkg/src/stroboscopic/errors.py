"""Exception hierarchy shared by the library and the CLI."""


class TomographyError(Exception):
    """Base class for every error raised by this package."""


class InvariantViolation(TomographyError, ValueError):
    """An input breaks a domain invariant (non-Hermitian observable, invalid state, ...)."""


class NumericalError(TomographyError, ArithmeticError):
    """A numerical routine failed or became too ill-conditioned to trust."""


class RankDeficientError(TomographyError):
    """The stacked reconstruction system does not determine rho(0) uniquely."""


class NotReconstructibleError(RankDeficientError):
    """The Krylov subspaces of the observables (plus identity) do not span the Hermitian operators."""


class SingularTimeGridError(RankDeficientError):
    """The matrix [alpha_k(t_j)] built on the measurement times is singular."""
