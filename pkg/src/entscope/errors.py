"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """Configuration value missing or out of range; message names the field."""


class LowStatisticsError(RuntimeError):
    """Not enough accepted events to run an estimator."""


class InfeasibleBudgetError(ValueError):
    """No magnitude satisfies the detection constraints of a budget."""
