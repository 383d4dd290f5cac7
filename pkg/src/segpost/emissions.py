"""Emission families, per-segment MLE fitting, and log-density tables.

Every recursion downstream consumes only the n x K table of
``log g_k(x_i)`` values, so arbitrary distributions can be plugged in by
supplying that table directly (the ``external-log-density`` family).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import ChangePointVector, ObservationSequence
from .errors import (
    DataError,
    DegenerateRateError,
    DegenerateScaleError,
    UnsupportedFamilyError,
)

GAUSSIAN_HOM = "gaussian-homoscedastic"
GAUSSIAN_HET = "gaussian-heteroscedastic"
POISSON = "poisson"
EXTERNAL = "external-log-density"

FAMILIES = (GAUSSIAN_HOM, GAUSSIAN_HET, POISSON, EXTERNAL)

# Fitted scales below this fraction of the data range are treated as zero;
# their log-densities would be +/-inf and corrupt every posterior.
SCALE_FLOOR_FRACTION = 1e-12


@dataclass(frozen=True)
class SegmentParams:
    """Location (mean / rate) and optional per-segment standard deviation."""

    location: float
    scale: float | None = None

    def __post_init__(self):
        if self.scale is not None and self.scale <= 0:
            raise DegenerateScaleError(f"scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class LogDensityTable:
    """n x K table of log emission densities; -inf allowed, NaN/+inf not."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise DataError("log-density table must be 2-dimensional")
        if entries.shape[0] < 2 or entries.shape[1] < 1:
            raise DataError(f"log-density table shape {entries.shape} too small")
        if np.any(np.isnan(entries)) or np.any(entries == np.inf):
            raise DataError("log-density table must not contain NaN or +inf")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def k(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class EmissionModel:
    """Family plus per-segment parameters, or an opaque external table."""

    family: str
    params: tuple[SegmentParams, ...] = ()
    shared_scale: float | None = None
    table: LogDensityTable | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnsupportedFamilyError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.family == EXTERNAL:
            if self.params or self.shared_scale is not None:
                raise DataError("external family carries a table, not parameters")
            if self.table is None:
                raise DataError("external family requires a log-density table")
            return
        if self.table is not None:
            raise DataError(f"{self.family} does not accept an external table")
        if not self.params:
            raise DataError("parametric family requires per-segment parameters")
        object.__setattr__(self, "params", tuple(self.params))
        if self.family == GAUSSIAN_HOM:
            if self.shared_scale is None or self.shared_scale <= 0:
                raise DegenerateScaleError(
                    f"homoscedastic family needs shared_scale > 0, "
                    f"got {self.shared_scale}"
                )
        elif self.family == GAUSSIAN_HET:
            if any(p.scale is None for p in self.params):
                raise DegenerateScaleError(
                    "heteroscedastic family needs a scale per segment"
                )
        elif self.family == POISSON:
            if any(p.location <= 0 for p in self.params):
                raise DegenerateRateError("poisson rates must be > 0")

    @property
    def k(self) -> int:
        return self.table.k if self.family == EXTERNAL else len(self.params)

    @property
    def locations(self) -> np.ndarray:
        if self.family == EXTERNAL:
            raise UnsupportedFamilyError(
                "external log-density models carry no segment locations"
            )
        return np.array([p.location for p in self.params])


def _check_poisson_values(values: np.ndarray) -> None:
    if np.any(values < 0) or np.any(values != np.floor(values)):
        raise DataError("poisson family requires non-negative integer values")


def fit_mle(
    data: ObservationSequence,
    changepoints: ChangePointVector,
    family: str,
) -> EmissionModel:
    """Maximum-likelihood parameters for each segment of a fixed segmentation.

    Gaussian locations are segment sample means; the homoscedastic scale is
    the pooled standard deviation with denominator n (the MLE, not n-K), and
    heteroscedastic scales use the segment length the same way. Poisson rates
    are segment means. A zero fitted scale or rate raises instead of being
    silently floored.
    """
    if family not in FAMILIES or family == EXTERNAL:
        raise UnsupportedFamilyError(
            f"cannot fit family {family!r}; provide the table directly"
        )
    x = data.values
    n = len(data)
    segments = changepoints.segments(n)
    if family == POISSON:
        _check_poisson_values(x)

    data_range = float(np.ptp(x))
    floor = SCALE_FLOOR_FRACTION * data_range

    params: list[SegmentParams] = []
    sse_total = 0.0
    for idx, (a, b) in enumerate(segments):
        seg = x[a:b]
        mean = float(seg.mean())
        if family == POISSON:
            if mean == 0.0:
                raise DegenerateRateError(
                    f"segment {idx + 1} has sample mean 0; poisson rate degenerate"
                )
            params.append(SegmentParams(mean))
            continue
        sse = float(np.sum((seg - mean) ** 2))
        sse_total += sse
        if family == GAUSSIAN_HET:
            if len(seg) < 2:
                raise DegenerateScaleError(
                    f"segment {idx + 1} has length 1; cannot fit its scale"
                )
            scale = math.sqrt(sse / len(seg))
            if scale == 0.0 or scale < floor:
                raise DegenerateScaleError(
                    f"segment {idx + 1} has zero within-segment variance"
                )
            params.append(SegmentParams(mean, scale))
        else:
            params.append(SegmentParams(mean))

    if family == GAUSSIAN_HOM:
        shared = math.sqrt(sse_total / n)
        if shared == 0.0 or shared < floor:
            raise DegenerateScaleError(
                "pooled standard deviation is zero or numerically degenerate"
            )
        return EmissionModel(GAUSSIAN_HOM, tuple(params), shared_scale=shared)
    return EmissionModel(family, tuple(params))


def log_density_table(
    data: ObservationSequence, model: EmissionModel
) -> LogDensityTable:
    """Evaluate log g_k(x_i) for every observation and segment parameter."""
    x = data.values
    n = len(data)
    if model.family == EXTERNAL:
        if model.table.n != n:
            raise DataError(
                f"external table has {model.table.n} rows for {n} observations"
            )
        return model.table

    locs = model.locations
    if model.family == GAUSSIAN_HOM:
        scales = np.full(model.k, model.shared_scale)
    elif model.family == GAUSSIAN_HET:
        scales = np.array([p.scale for p in model.params])
    else:
        _check_poisson_values(x)
        # x*log(rate) - rate - log(x!) with the factorial via log-gamma
        rates = locs[None, :]
        entries = (
            x[:, None] * np.log(rates) - rates - gammaln(x + 1.0)[:, None]
        )
        return LogDensityTable(entries)

    z = (x[:, None] - locs[None, :]) / scales[None, :]
    entries = -0.5 * z * z - np.log(scales)[None, :] - 0.5 * math.log(2.0 * math.pi)
    return LogDensityTable(entries)


def read_log_density_tsv(path, header: bool = False) -> LogDensityTable:
    """Load an external n x K log-density table from tab-separated text."""
    try:
        entries = np.loadtxt(path, delimiter="\t", skiprows=1 if header else 0,
                             ndmin=2)
    except ValueError as exc:
        raise DataError(f"cannot parse log-density table {path}: {exc}") from exc
    return LogDensityTable(entries)


def segmentation_log_likelihood(
    table: LogDensityTable, changepoints: ChangePointVector
) -> float:
    """Sum of table entries along a fixed segmentation's state path."""
    path = changepoints.state_path(table.n)
    return float(table.entries[np.arange(table.n), path].sum())
