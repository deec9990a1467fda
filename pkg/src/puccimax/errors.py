"""Exception types shared across the package."""


class PucciMaxError(Exception):
    """Base class for all errors raised by this package."""


class NonSymmetric(PucciMaxError):
    """Matrix is not symmetric within tolerance."""


class UnsupportedDimension(PucciMaxError):
    """Operation not available in the requested dimension."""


class GridTooCoarse(PucciMaxError):
    """Grid spacing too large relative to the shortest game step."""


class OutOfLattice(PucciMaxError):
    """Query point lies outside the box covered by the lattice."""


class OutOfRange(PucciMaxError):
    """Radius outside the validity range of a radial solution."""


class NonPositiveRunningPayoff(PucciMaxError):
    """Degenerate solver requires a strictly positive running payoff."""


class MaxStepsExceeded(PucciMaxError):
    """A playout hit the safety cap before leaving the domain."""


class MismatchedStart(PucciMaxError):
    """Transcripts passed to a diagnostic disagree on the start point."""


class MismatchedSweep(PucciMaxError):
    """Two run summaries cannot be compared row by row."""


class DegenerateBranchMismatch(PucciMaxError):
    """Power branch forced where the log branch is required."""


class ConfigError(PucciMaxError):
    """Experiment configuration is invalid."""


class NotConverged(PucciMaxError):
    """Fixed-point iteration hit max_iter with residual above tolerance.

    Carries the last iterate and the iteration report.
    """

    def __init__(self, message, value_function=None, report=None):
        super().__init__(message)
        self.value_function = value_function
        self.report = report
