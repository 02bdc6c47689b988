"""Exception hierarchy.

Everything raised on bad input derives from :class:`ValidationError`, so
callers (notably the CLI) can distinguish "your data is wrong" from genuine
I/O failures, which surface as the built-in ``OSError`` family.
"""


class SoftvoteError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SoftvoteError, ValueError):
    """Input violates a documented contract."""


class AlignmentError(ValidationError):
    """Classifiers or labels disagree on sample identity or ordering."""


class DimensionError(ValidationError):
    """A vector or matrix has the wrong shape or length."""


class DegenerateWeightsError(ValidationError):
    """Weight vector is negative, non-finite, or sums to zero."""


class LabelRangeError(ValidationError):
    """A ground-truth label falls outside [0, num_classes)."""


class EmptyInputError(ValidationError):
    """An operation that needs at least one sample received none."""


class ConfigError(ValidationError):
    """A configuration value is out of its allowed range."""


class FormatError(ValidationError):
    """A file does not parse as its declared format."""


class SplitError(ValidationError):
    """A train/held-out split would leave one side empty."""


class BreedingError(ValidationError):
    """Crossover was asked to breed from fewer than two parents."""


class OracleScopeError(ValidationError):
    """Exhaustive weight search requested outside its tractable range."""
