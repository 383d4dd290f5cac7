"""Forward-backward recursions and the posterior quantities built on them.

Everything conditions on the chain ending in the last segment, which is
equivalent to conditioning on the path being a proper K-segmentation. The
evidence, per-position state posteriors, per-change-point marginal
distributions, posterior mean track, and discrete confidence intervals all
come from the two O(Kn) passes; no quantity here is approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import backward_kernel, forward_kernel
from .core import ChangePointVector
from .emissions import EmissionModel, LogDensityTable
from .errors import DataError, DegeneracyError
from .prior import TransitionPrior


def _check_dims(table: LogDensityTable, prior: TransitionPrior) -> None:
    if (table.n, table.k) != (prior.n, prior.k):
        raise DataError(
            f"log-density table is {table.n} x {table.k} but prior is for "
            f"n={prior.n}, K={prior.k}"
        )


def forward(table: LogDensityTable, prior: TransitionPrior) -> np.ndarray:
    """n x K table of log P(x_{1:i}, S_i = k); one left-to-right pass."""
    _check_dims(table, prior)
    log_stay, log_jump = prior.log_tables()
    return forward_kernel(table.entries, log_stay, log_jump)


def backward(table: LogDensityTable, prior: TransitionPrior) -> np.ndarray:
    """n x K table of log P(x_{i+1:n}, S_n = K | S_i = k)."""
    _check_dims(table, prior)
    log_stay, log_jump = prior.log_tables()
    return backward_kernel(table.entries, log_stay, log_jump)


@dataclass(frozen=True)
class ForwardBackwardState:
    """Both log-domain tables plus the log evidence they normalize by."""

    log_f: np.ndarray
    log_b: np.ndarray
    log_evidence: float
    n: int
    k: int


def forward_backward(
    table: LogDensityTable, prior: TransitionPrior
) -> ForwardBackwardState:
    log_f = forward(table, prior)
    log_b = backward(table, prior)
    evidence = float(log_f[0, 0] + log_b[0, 0])
    if not np.isfinite(evidence):
        raise DegeneracyError(
            "evidence is zero: no segmentation has positive probability "
            "under this table and prior"
        )
    log_f.setflags(write=False)
    log_b.setflags(write=False)
    return ForwardBackwardState(log_f, log_b, evidence, table.n, table.k)


def log_evidence(state: ForwardBackwardState) -> float:
    """log of the data probability summed over all K-segmentations."""
    return state.log_evidence


def state_posterior(state: ForwardBackwardState) -> np.ndarray:
    """n x K matrix of P(S_i = k | data, valid segmentation); rows sum to 1."""
    return np.exp(state.log_f + state.log_b - state.log_evidence)


@dataclass(frozen=True)
class ChangePointDistribution:
    """Marginal posterior of where change-point ``rank`` falls.

    ``positions`` are the feasible 1-based last-indices of segment ``rank``;
    ``probs`` is the posterior mass at each.
    """

    rank: int
    positions: np.ndarray
    probs: np.ndarray

    @property
    def mode(self) -> int:
        """Highest-probability position; the smallest index on ties."""
        return int(self.positions[int(np.argmax(self.probs))])

    def prob_at(self, position: int) -> float:
        hits = np.nonzero(self.positions == position)[0]
        return float(self.probs[hits[0]]) if hits.size else 0.0


def changepoint_marginal(
    state: ForwardBackwardState,
    table: LogDensityTable,
    prior: TransitionPrior,
    rank: int,
) -> ChangePointDistribution:
    """Exact posterior distribution of the rank-th change-point position.

    Mass at position i combines the forward weight of ending segment ``rank``
    at i, the jump into the next segment, its emission at i+1, and the
    backward weight from there on.
    """
    n, k_total = state.n, state.k
    if not 1 <= rank <= k_total - 1:
        raise DataError(f"change-point rank {rank} outside 1..{k_total - 1}")
    _, log_jump = prior.log_tables()
    r = rank - 1
    js = np.arange(r, n - k_total + r + 1)  # 0-based last index of segment
    log_mass = (
        state.log_f[js, r]
        + log_jump[r, js + 1]
        + table.entries[js + 1, r + 1]
        + state.log_b[js + 1, r + 1]
        - state.log_evidence
    )
    return ChangePointDistribution(rank, js + 1, np.exp(log_mass))


def posterior_mean_track(
    state: ForwardBackwardState, model: EmissionModel
) -> np.ndarray:
    """Per-position expectation of the segment location parameter."""
    locs = model.locations
    if locs.size != state.k:
        raise DataError(
            f"model has {locs.size} segments, state has {state.k}"
        )
    return state_posterior(state) @ locs


def confidence_interval(
    dist: ChangePointDistribution, level: float
) -> tuple[int, int, float]:
    """Equal-tailed discrete interval (lower, upper, achieved coverage).

    Cuts (1-level)/2 from each tail of the CDF; because the distribution is
    discrete the achieved coverage is always >= the requested level.
    """
    if not 0.0 < level < 1.0:
        raise DataError(f"confidence level must lie in (0,1), got {level}")
    tail = (1.0 - level) / 2.0
    cdf = np.cumsum(dist.probs)
    lo = int(np.searchsorted(cdf, tail, side="left"))
    hi = min(int(np.searchsorted(cdf, 1.0 - tail, side="left")), cdf.size - 1)
    achieved = float(cdf[hi] - (cdf[lo - 1] if lo > 0 else 0.0))
    return int(dist.positions[lo]), int(dist.positions[hi]), achieved


@dataclass(frozen=True)
class CredibleInterval:
    level: float
    lower: int
    upper: int
    achieved: float


@dataclass(frozen=True)
class ChangePointSummary:
    """Point estimates and intervals for one change-point."""

    rank: int
    mode: int
    prob_at_mode: float
    reference: int | None
    prob_at_reference: float | None
    intervals: tuple[CredibleInterval, ...]


@dataclass(frozen=True)
class ChangePointReport:
    """Everything the posterior says about one segmentation problem."""

    n: int
    k: int
    log_evidence: float
    changepoints: tuple[ChangePointSummary, ...]
    state_posterior: np.ndarray
    posterior_mean: np.ndarray | None
    distributions: tuple[ChangePointDistribution, ...] = field(repr=False, default=())


def analyze(
    table: LogDensityTable,
    prior: TransitionPrior,
    model: EmissionModel | None = None,
    reference: ChangePointVector | None = None,
    levels: tuple[float, ...] = (0.95,),
) -> ChangePointReport:
    """Run both passes and assemble every posterior quantity in one report."""
    state = forward_backward(table, prior)
    if reference is not None and reference.k != state.k:
        raise DataError(
            f"reference segmentation has {reference.k} segments, table {state.k}"
        )
    summaries = []
    dists = []
    for rank in range(1, state.k):
        dist = changepoint_marginal(state, table, prior, rank)
        dists.append(dist)
        ref = reference.positions[rank - 1] if reference is not None else None
        summaries.append(
            ChangePointSummary(
                rank=rank,
                mode=dist.mode,
                prob_at_mode=dist.prob_at(dist.mode),
                reference=ref,
                prob_at_reference=None if ref is None else dist.prob_at(ref),
                intervals=tuple(
                    CredibleInterval(level, *confidence_interval(dist, level))
                    for level in levels
                ),
            )
        )
    post = state_posterior(state)
    mean_track = None
    if model is not None and model.family != "external-log-density":
        mean_track = posterior_mean_track(state, model)
    return ChangePointReport(
        n=state.n,
        k=state.k,
        log_evidence=state.log_evidence,
        changepoints=tuple(summaries),
        state_posterior=post,
        posterior_mean=mean_track,
        distributions=tuple(dists),
    )
