"""Exception hierarchy shared by all modules."""


class LameSpecError(Exception):
    """Base class for errors raised by lamespec."""


class ConfigError(LameSpecError, ValueError):
    """Invalid user input: moduli, configuration keys, file contents."""


class BesselRangeError(LameSpecError, ValueError):
    pass


class NumericsError(LameSpecError, ArithmeticError):
    """A numerical procedure failed or would be unreliable."""


class ConditioningError(NumericsError):
    pass


class DifferentiationError(NumericsError):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step={step:g})")
        self.step = step


class IntegrationError(NumericsError):
    def __init__(self, message, achieved=None):
        super().__init__(message if achieved is None else f"{message} (achieved {achieved:.3e})")
        self.achieved = achieved


class FitError(NumericsError):
    pass


class FactorizationError(NumericsError):
    pass


class MeshError(LameSpecError, ValueError):
    pass


class AssemblyError(NumericsError):
    def __init__(self, message, triangle=None):
        super().__init__(message)
        self.triangle = triangle


class IncompleteSpectrumError(LameSpecError):
    """Root scan could not certify completeness of a spectrum table.

    ``interval`` is the eigenvalue range ``(lo, hi)`` where roots are suspected
    to be missing.
    """

    def __init__(self, message, interval):
        super().__init__(f"{message}; suspect interval [{interval[0]:.6g}, {interval[1]:.6g}]")
        self.interval = interval


class RangeError(LameSpecError, ValueError):
    """Query outside the certified range of a table or evaluator."""
