"""Exception types shared by the simulation modules."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedRegimeError(ValueError):
    """The physical regime is excluded by the model (e.g. E_T <= V)."""


class SingularMemberError(ArithmeticError):
    """A square-well member sits on a zero of cos(k1 x0)."""


class TruncationError(ValueError):
    """A spectral grid does not cover the significant part of a spectrum."""


class ResolutionError(ValueError):
    """A spatial grid cannot resolve the wave numbers it is asked to carry."""


class ConvergenceError(RuntimeError):
    """A fixed-point iteration did not converge."""


class SingularityError(ArithmeticError):
    """A closed form was evaluated at (or too close to) a pole."""

    def __init__(self, message, critical=()):
        super().__init__(message)
        self.critical = tuple(critical)


class BeamStoppingError(ValueError):
    """The magnetic velocity shift exceeds the beam speed scale."""
