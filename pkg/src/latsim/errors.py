"""Exception hierarchy shared by every latsim module."""


class LatsimError(ValueError):
    """Base class for all domain errors raised by latsim."""


class EncodingError(LatsimError):
    """Malformed compact-bits encoding."""


class TargetOverflowError(LatsimError, OverflowError):
    """256-bit target arithmetic left the representable range."""


class InsufficientHistoryError(LatsimError):
    """Difficulty window is shorter than the algorithm requires."""


class SupplyOverflowError(LatsimError):
    """Cumulative supply exceeds MAX_MONEY."""

    def __init__(self, height: int, supply: int, max_money: int):
        super().__init__(
            f"cumulative supply {supply} shors at height {height} exceeds max_money {max_money}"
        )
        self.height = height
        self.supply = supply
        self.max_money = max_money


class DomainError(LatsimError):
    """Input outside the region where a model is defined."""


class ConfigError(LatsimError):
    """Invalid parameter file or scenario specification."""
