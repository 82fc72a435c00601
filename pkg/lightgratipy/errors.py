"""Exception types of LightGratiPy."""


class ConfigError(ValueError):
    """
    Invalid configuration file content.

    Parameters
    ----------
    key_path : str
        Dotted path of the offending key, e.g. ``grating.power``.
    message : str
        What is wrong with the value.
    line : int, optional
        1-based line number in the configuration text. Default is None.
    """

    def __init__(self, key_path, message, line=None):
        self.key_path = key_path
        self.line = line
        self.message = message

        if line is None:
            text = f"config: {key_path}: {message}"
        else:
            text = f"config line {line}: {key_path}: {message}"

        super().__init__(text)


class ConvergenceError(RuntimeError):
    """Quadrature did not converge within the requested tolerance."""

    pass


class PatternDataError(ValueError):
    """Pattern data is malformed, empty or on incompatible grids."""

    pass
