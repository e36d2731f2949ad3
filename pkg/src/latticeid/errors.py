"""Exception hierarchy.

Refusals that are part of normal operation (a zero found during
certification, an inconclusive grid) are returned as values by
:func:`latticeid.charfn.certify_zero_free`; the classes here are raised when a
caller asked for something that cannot be delivered.
"""


class LatticeError(Exception):
    """Base class for all errors raised by latticeid."""


class DimensionMismatch(LatticeError, ValueError):
    pass


class NormalizationError(LatticeError, ValueError):
    """Masses are negative or do not sum to one."""

    def __init__(self, message, total=None):
        super().__init__(message)
        self.total = total


class SingularMatrixError(LatticeError, ValueError):
    pass


class GridBudgetError(LatticeError):
    """Requested torus grid exceeds the configured point budget."""


class UnwrapError(LatticeError):
    """A neighbouring phase step reached pi/2; the grid is too coarse."""


class WindingError(LatticeError):
    """Loop phase sums are non-integral or disagree between parallel loops."""


class ZeroFoundError(LatticeError):
    """The characteristic function vanishes at ``witness``."""

    def __init__(self, message, witness=None, modulus=None):
        super().__init__(message)
        self.witness = witness
        self.modulus = modulus


class InconclusiveError(LatticeError):
    """Zero-freeness could be neither certified nor refuted within budget."""


class ConvergenceError(LatticeError):
    """Coefficient extraction did not meet its tolerances within budget."""


class NumericalFault(LatticeError):
    """A check that holds exactly in theory failed beyond tolerance."""


class IllConditionedError(LatticeError, ValueError):
    """Forward recursion refused because the mass at zero is too small."""


class AxisInconsistencyError(LatticeError):
    """Per-axis integrations of the log series disagree."""
