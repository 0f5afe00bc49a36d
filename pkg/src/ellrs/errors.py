"""Exception hierarchy for the ellrs package."""


class EllrsError(Exception):
    """Base class for all library-specific errors."""


class NonconvergentSeries(EllrsError):
    """Theta series could not be summed to tolerance within the term cap."""


class PoleAtLatticePoint(EllrsError):
    """An argument landed on (or too close to) a pole of the requested kernel."""


class DegenerateWeights(EllrsError):
    """Weight components collide modulo the lattice; intertwiners degenerate."""


class NearSingular(EllrsError):
    """Matrix inversion refused: estimated condition number above threshold."""


class ShiftMismatch(EllrsError):
    """The zero-shift relation v = u + sum(lambda - mu) is violated."""


class NoConvergence(EllrsError):
    """Newton iteration exhausted its multistart budget without converging."""


class DegenerateSolution(EllrsError):
    """A root finder returned weights that violate genericity."""


class PathThroughZero(EllrsError):
    """An integration path could not be deformed away from a theta zero."""
