"""Exception types raised across the package."""


class KerrSPTError(Exception):
    """Base class for all package errors."""


class SingularEliminationError(KerrSPTError, ZeroDivisionError):
    """The elimination denominator W vanished (resonant magnon pole)."""


class ConstraintError(KerrSPTError, ValueError):
    """The detuning constraint Delta_m = -2 K N_m cannot be satisfied or does not hold."""


class UnstablePhaseError(KerrSPTError, ValueError):
    """The squeezed-frame frequency is imaginary (stability factor <= 0)."""


class DimensionCapError(KerrSPTError, ValueError):
    """A Hilbert-space dimension exceeded the configured cap."""


class ConvergenceError(KerrSPTError, RuntimeError):
    """An iterative eigensolver did not converge."""


class NoSteadyStateError(KerrSPTError, ArithmeticError):
    """The mean-field fixed-point linear system is singular."""


class DivergenceError(KerrSPTError, ArithmeticError):
    """A mean-field trajectory left the blow-up bound.

    Attributes
    ----------
    last_state : MeanFieldState or None
        Last finite state before the bound was crossed.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state
