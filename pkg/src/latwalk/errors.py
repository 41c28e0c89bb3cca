class ConfigurationError(ValueError):
    """Invalid grid size, marked vertex, parameter or CLI option."""


class NumericError(RuntimeError):
    """A numerical procedure failed (bracketing, norm drift, ...)."""


class PoleError(NumericError):
    """Secular function evaluated too close to one of its poles."""
