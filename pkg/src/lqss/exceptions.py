"""Exception types raised by the toolkit."""


class UnstableSystemError(ValueError):
    """The state matrix is not Hurwitz, so Gramians and norms are undefined."""


class RealizabilityError(ValueError):
    """A quadrature model violates the physical realizability constraints."""


class UnsupportedFeedthroughError(ValueError):
    """The feedthrough matrix D is not a selection of a unitary symplectic matrix."""


class NotQuasiBalanceableError(ValueError):
    """The Gramians do not admit a simultaneous paired-diagonal symplectic form."""


class ConsistencyError(RuntimeError):
    """Two characterizations that must agree produced different verdicts."""


class LyapunovSolveError(RuntimeError):
    """A Lyapunov solve returned a residual above the requested tolerance."""
