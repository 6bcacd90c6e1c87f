"""
Error types raised by genlearn. Argument and model-validation errors are ValueError subclasses so
that callers used to the estimators' "The value of 'x' must be ..." messages keep catching
ValueError; numeric failures that happen while a computation runs derive from NumericFailure.
"""


class GenLearnError(Exception):
    """
    Base class of every genlearn error.
    """


class InvalidArgumentError(GenLearnError, ValueError):
    """
    An argument violates the precondition of an operation (dimension mismatch, out of range, ...).
    """


class InvalidSpecError(GenLearnError, ValueError):
    """
    An f-divergence generator fails the convexity or normalization check.
    """


class InvalidModelError(GenLearnError, ValueError):
    """
    A parameter record is inconsistent (e.g., a covariance that is not positive definite).
    """


class InvalidScheduleError(GenLearnError, ValueError):
    """
    A diffusion noise schedule has some beta outside (0, 1).
    """


class ContextTooLargeError(GenLearnError, ValueError):
    """
    A Markov model was requested with an order whose tables would not fit in memory.
    """


class NonDifferentiableActivationError(GenLearnError, ValueError):
    """
    Backpropagation was requested through a heaviside activation.
    """


class NumericFailure(GenLearnError, RuntimeError):
    """
    Base class of the errors raised when a numeric procedure breaks down while running.
    """


class SingularDesignError(NumericFailure):
    """
    The normal equations of a least-squares fit are (numerically) singular.
    """


class StepSizeTooLargeError(NumericFailure):
    """
    Gradient ascent iterates blew up, which only happens with backtracking disabled.
    """


class DegenerateSpectrumError(NumericFailure):
    """
    The PPCA closed form would take the square root of a negative number.
    """


class AccuracyFailureError(NumericFailure):
    """
    Two quadrature refinements disagree by more than the accepted tolerance.
    """


class DivergenceError(NumericFailure):
    """
    A trainer met a non-finite loss or gradient.

    Parameters
    ----------
    step: int
        The (1-based) optimisation step at which the non-finite value appeared
    message: str (default=None)
        Optional description of what went wrong
    """

    def __init__(self, step: int, message: str = None):
        self.step = step
        msg = f"Non-finite value encountered at step {step}."
        super().__init__(msg if message is None else f"{msg} {message}")


class ComponentCollapseError(NumericFailure):
    """
    A Gaussian-mixture component lost its support during EM.

    Parameters
    ----------
    component: int
        The index of the collapsed component
    """

    def __init__(self, component: int, message: str = None):
        self.component = component
        msg = f"Component {component} collapsed."
        super().__init__(msg if message is None else f"{msg} {message}")
