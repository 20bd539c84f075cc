"""Exception types raised across the package."""


class WSNError(Exception):
    """Base class for all package errors."""


class TotalConflict(WSNError):
    """Dempster combination is undefined because the sources fully conflict."""


class EmptyField(WSNError):
    """An operation needs at least one sensor."""


class DegenerateRegion(WSNError):
    """Region has zero area or is otherwise malformed."""


class BadFile(WSNError):
    """An input file could not be parsed."""


class MissingParam(WSNError):
    """A parameter required by the selected option is absent."""


class StaleStructure(WSNError):
    """A frozen forward-pass skeleton does not match the sensor field."""


class LastSensor(WSNError):
    """Refusing to remove the only remaining sensor."""


class ConfigError(WSNError):
    """Run configuration is invalid."""
