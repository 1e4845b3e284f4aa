"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: validation problems exit 1,
resource caps exit 2 and falsified bounds exit 3.
"""


class MarketError(ValueError):
    """Base class for invalid input (instances, profiles, prices, documents)."""

    code = "invalid"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ValidationError(MarketError):
    """A market instance or instance document violates the data model."""


class InvalidProfileError(MarketError):
    code = "invalid-profile"


class InfeasibleProfileError(MarketError):
    """The profile overloads some resource, i.e. it is not in X(u)."""

    code = "capacity-infeasible"


class InvalidPricesError(MarketError):
    code = "invalid-prices"


class StructuralError(MarketError):
    """The instance lacks a structural property an operation relies on."""

    code = "structural"


class CapExceededError(RuntimeError):
    """An enumeration or brute-force routine refused to run past its cap."""


class BoundViolationError(AssertionError):
    """A certified inequality or identity failed. Should never happen."""

    def __init__(self, name: str, detail: str = ""):
        super().__init__(f"bound violated: {name}" + (f" ({detail})" if detail else ""))
        self.name = name
