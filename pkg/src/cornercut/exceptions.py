"""Exception hierarchy for cornercut."""


class CornerCutError(ValueError):
    """Base class for all cornercut errors."""


class LengthMismatch(CornerCutError):
    pass


class ClassViolation(CornerCutError):
    """A weight pair fails one of the strict positivity conditions.

    Attributes
    ----------
    quantity : str
        One of ``"alpha"``, ``"1-beta"``, ``"beta-alpha"``.
    index : int
        Index within the period where the violation occurs.
    value : float
    """

    def __init__(self, quantity, index, value, margin):
        self.quantity = quantity
        self.index = index
        self.value = value
        self.margin = margin
        super().__init__(
            f"weight pair outside the admissible class: {quantity}[{index}] = "
            f"{value!r} is not > {margin!r}"
        )


class EmptySchedule(CornerCutError):
    pass


class ScheduleExhausted(CornerCutError):
    pass


class NotCertified(CornerCutError):
    """Convergence could not be certified and ``force`` was not set."""


class OutOfDomain(CornerCutError):
    pass


class IncompatibleCorners(CornerCutError):
    pass


class BudgetExceeded(CornerCutError):
    pass


class ConfigError(CornerCutError):
    """Schema or semantic error in a run configuration."""
