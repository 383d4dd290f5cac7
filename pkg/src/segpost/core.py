"""Shared sequence and segmentation containers.

Positions are 1-based throughout the public API: a change-point at position
``i`` means observation ``i`` is the last one of its segment. Internal numpy
code is 0-based; the two conventions meet only inside this module and the
recursion wrappers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InvalidSegmentationError


@dataclass(frozen=True)
class ObservationSequence:
    """Ordered real observations, optionally tagged with position labels."""

    values: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DataError("observations must be one-dimensional")
        if values.size < 2:
            raise DataError(f"need at least 2 observations, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise DataError("observations must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != values.size:
                raise DataError(
                    f"{len(labels)} labels for {values.size} observations"
                )
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class ChangePointVector:
    """Strictly increasing 1-based last-indices of the first K-1 segments.

    An empty vector is the single-segment (K=1) case.
    """

    positions: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        positions = tuple(int(p) for p in self.positions)
        if any(p < 1 for p in positions):
            raise InvalidSegmentationError(f"positions must be >= 1: {positions}")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise InvalidSegmentationError(
                f"positions must strictly increase: {positions}"
            )
        object.__setattr__(self, "positions", positions)

    @property
    def k(self) -> int:
        """Number of segments this vector defines."""
        return len(self.positions) + 1

    def validate_for(self, n: int) -> None:
        if self.positions and self.positions[-1] > n - 1:
            raise InvalidSegmentationError(
                f"last change-point {self.positions[-1]} leaves segment "
                f"{self.k} empty for n={n}"
            )
        if self.k > n:
            raise InvalidSegmentationError(f"{self.k} segments cannot fit n={n}")

    def segments(self, n: int) -> list[tuple[int, int]]:
        """0-based half-open [start, end) ranges of each segment."""
        self.validate_for(n)
        bounds = (0,) + self.positions + (n,)
        return [(bounds[i], bounds[i + 1]) for i in range(self.k)]

    def state_path(self, n: int) -> np.ndarray:
        """0-based segment index of each observation."""
        path = np.zeros(n, dtype=np.int64)
        for k, (a, b) in enumerate(self.segments(n)):
            path[a:b] = k
        return path

    def __iter__(self):
        return iter(self.positions)

    def __len__(self) -> int:
        return len(self.positions)
