"""Exception types raised across the package."""


class ApiParseError(ValueError):
    """A method identifier does not follow ``pkg.Class[:method]`` syntax."""


class InterchangeError(ValueError):
    """An interchange record is malformed."""


class SchemaMismatchError(ValueError):
    """Feature vectors and model disagree on the feature schema."""


class UndefinedMetricError(ValueError):
    """A graph metric is undefined for the given input (distinct from a sentinel)."""
