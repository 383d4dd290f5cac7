"""Constrained Markov chain prior over segmentations.

The chain starts in segment 1 with probability 1 and can only stay or move
one segment up; conditioning on ending in segment K makes state paths exactly
the K-segmentations. ``eta[k][i]`` is the probability of leaving segment k
between observations i-1 and i (source-indexed; k and i are 1-based here).
Constant eta is the canonical uniform prior over segmentations, so its value
cancels from every conditional posterior; per-position tables encode
informative priors.

K=1 is the degenerate single-segment chain: there is nothing to jump to, the
prior is a point mass, and stay probabilities are taken as 1 so that forward
quantities reduce to plain cumulative log-likelihoods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ChangePointVector
from .errors import DataError, InfeasibleError

HOMOGENEOUS = "homogeneous"
TABULATED = "tabulated"


@dataclass(frozen=True)
class TransitionPrior:
    """Stay/jump probabilities of the constrained chain, shape-checked."""

    kind: str
    k: int
    n: int
    eta: float | np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise InfeasibleError(f"need at least one segment, got K={self.k}")
        if self.n < 2:
            raise DataError(f"need at least two positions, got n={self.n}")
        if self.k > self.n:
            raise InfeasibleError(f"K={self.k} segments cannot fit n={self.n}")
        if self.kind == HOMOGENEOUS:
            eta = float(self.eta)
            if not 0.0 < eta < 1.0:
                raise DataError(f"homogeneous eta must lie in (0,1), got {eta}")
            object.__setattr__(self, "eta", eta)
        elif self.kind == TABULATED:
            eta = np.asarray(self.eta, dtype=np.float64)
            if eta.shape != (self.k, self.n):
                raise DataError(
                    f"tabulated prior must be K x n = {(self.k, self.n)}, "
                    f"got {eta.shape}"
                )
            if np.any(eta < 0.0) or np.any(eta >= 1.0):
                raise DataError("tabulated jump probabilities must lie in [0,1)")
            eta = eta.copy()
            eta.setflags(write=False)
            object.__setattr__(self, "eta", eta)
        else:
            raise DataError(f"unknown prior kind {self.kind!r}")

    def _eta_at(self, k: int, i: int) -> float:
        if not 1 <= k <= self.k:
            raise DataError(f"segment index {k} outside 1..{self.k}")
        if not 2 <= i <= self.n:
            raise DataError(f"position {i} outside 2..{self.n}")
        if self.k == 1:
            return 0.0
        if self.kind == HOMOGENEOUS:
            return self.eta
        return float(self.eta[k - 1, i - 1])

    def log_jump(self, k: int, i: int) -> float:
        """log P(enter segment k+1 at observation i | in segment k at i-1)."""
        eta = self._eta_at(k, i)
        return np.log(eta) if eta > 0.0 else -np.inf

    def log_stay(self, k: int, i: int) -> float:
        """log P(remain in segment k at observation i | there at i-1)."""
        return float(np.log1p(-self._eta_at(k, i)))

    def log_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(K, n) arrays of log-stay and log-jump, 0-based, for the kernels.

        Column j governs the transition into observation j; column 0 is never
        consulted. Row k of the jump table governs leaving segment k+1.
        Memoized: the tables are large at SNP-array sizes.
        """
        cached = getattr(self, "_log_tables", None)
        if cached is None:
            if self.k == 1:
                cached = np.zeros((1, self.n)), np.full((1, self.n), -np.inf)
            elif self.kind == HOMOGENEOUS:
                cached = (
                    np.full((self.k, self.n), np.log1p(-self.eta)),
                    np.full((self.k, self.n), np.log(self.eta)),
                )
            else:
                with np.errstate(divide="ignore"):
                    cached = np.log1p(-self.eta), np.log(self.eta)
            object.__setattr__(self, "_log_tables", cached)
        return cached

    def log_prior_mass(self, changepoints: ChangePointVector) -> float:
        """Unconditional log prior probability of one full segmentation."""
        if changepoints.k != self.k:
            raise DataError(
                f"segmentation has {changepoints.k} segments, prior has {self.k}"
            )
        changepoints.validate_for(self.n)
        if self.k == 1:
            return 0.0
        if self.kind == HOMOGENEOUS:
            return (self.n - self.k) * float(np.log1p(-self.eta)) + (
                self.k - 1
            ) * float(np.log(self.eta))
        total = 0.0
        path = changepoints.state_path(self.n)
        for i in range(1, self.n):
            if path[i] == path[i - 1]:
                total += self.log_stay(int(path[i]) + 1, i + 1)
            else:
                total += self.log_jump(int(path[i - 1]) + 1, i + 1)
        return total


def homogeneous(k: int, n: int, eta: float = 0.5) -> TransitionPrior:
    """Constant-jump-probability prior: uniform over all K-segmentations."""
    return TransitionPrior(HOMOGENEOUS, k, n, eta)


def tabulated(eta: np.ndarray) -> TransitionPrior:
    """Per-segment, per-position jump probabilities (informative prior)."""
    eta = np.asarray(eta, dtype=np.float64)
    if eta.ndim != 2:
        raise DataError("tabulated prior must be a K x n table")
    return TransitionPrior(TABULATED, eta.shape[0], eta.shape[1], eta)


def read_prior_tsv(path) -> TransitionPrior:
    """Load a K x n tabulated prior from tab-separated text."""
    try:
        eta = np.loadtxt(path, delimiter="\t", ndmin=2)
    except ValueError as exc:
        raise DataError(f"cannot parse prior table {path}: {exc}") from exc
    return tabulated(eta)
