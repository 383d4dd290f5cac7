"""Exception types shared across the package.

Input problems (bad files, malformed segmentations, infeasible dimensions)
and numerical degeneracies (zero scales, zero rates, vanishing evidence) are
kept distinct so the CLI can map them to different exit codes.
"""


class DataError(ValueError):
    """Malformed or inconsistent input: bad values, dimensions, or domains."""


class InvalidSegmentationError(DataError):
    """A change-point vector that does not define non-empty ordered segments."""


class InfeasibleError(DataError):
    """Requested segment count cannot fit the sequence (K > n and similar)."""


class DegeneracyError(ValueError):
    """Numerical degeneracy that would corrupt downstream posteriors."""


class DegenerateScaleError(DegeneracyError):
    """Fitted standard deviation is zero or indistinguishable from zero."""


class DegenerateRateError(DegeneracyError):
    """Fitted Poisson rate is zero."""


class UnsupportedFamilyError(ValueError):
    """Operation not available for this emission family."""
