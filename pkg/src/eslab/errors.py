"""Exception types shared across the library.

The CLI maps these onto process exit codes: configuration problems exit 2,
budget problems exit 3, I/O problems exit 4.
"""


class ConfigError(ValueError):
    """A parameter is outside the supported range or inconsistent."""


class BudgetError(RuntimeError):
    """An operation would exceed its enumeration/memory budget.

    The message names the offending size and, where meaningful, the largest
    feasible parameter.
    """


class PartialResultError(RuntimeError):
    """An enumeration ran out of budget midway; completed parts are attached.

    Attributes:
        partial: whatever was finished before the budget ran out.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class StructureError(RuntimeError):
    """A Diophantine structural precondition failed.

    Attributes:
        step: induction step or stage name where the condition broke.
        quality: the measured quantity that violated the requirement.
    """

    def __init__(self, message, step=None, quality=None):
        super().__init__(message)
        self.step = step
        self.quality = quality
