# ----------------------------------------------------------
# Exceptions raised by platoon_intel.
# ----------------------------------------------------------
__all__ = [
    "ConfigError",
    "CheckpointError",
    "DimensionError",
    "InvalidAction",
    "StateSpaceTooLarge",
    "NumericalError",
    "DivergenceError",
]


class ConfigError(ValueError):
    """Raised when a configuration value, key or file is not acceptable"""

    pass


class CheckpointError(ConfigError):
    """A checkpoint could not be decoded"""

    def __init__(self, path, reason):
        super().__init__(f"Malformed checkpoint {path}: {reason}")
        self.path = path
        self.reason = reason


class DimensionError(ValueError):
    """Array shapes do not agree"""

    def __init__(self, operation, expected, got):
        super().__init__(f"{operation}: expected shape {expected}, got {got}")
        self.operation = operation
        self.expected = expected
        self.got = got


class InvalidAction(ValueError):
    """An action index outside the environment's action set"""

    def __init__(self, agent, action, n_actions):
        super().__init__(
            f"Agent {agent} chose action {action}, valid range is [0, {n_actions})"
        )
        self.agent = agent
        self.action = action


class StateSpaceTooLarge(ValueError):
    """Exhaustive search was requested over too many joint states"""

    pass


class NumericalError(ArithmeticError):
    """A loss or gradient became non-finite"""

    def __init__(self, /, what, *args):
        self.what = what
        self.details = args
        super().__init__(f"Non-finite value in {what}")


class DivergenceError(NumericalError):
    """Training produced a non-finite loss or gradient"""

    def __init__(self, /, what, iteration, *args):
        super().__init__(what, *args)
        self.iteration = iteration

    def __str__(self):
        return f"Training diverged at iteration {self.iteration}: non-finite {self.what}"

    def __repr__(self):
        return f"{self.__class__.__name__}({self.what} @ {self.iteration})"
