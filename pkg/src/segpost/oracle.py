"""Brute-force reference: exact posterior by enumerating every segmentation.

Only usable on small instances, but the summation is definitionally correct,
so it anchors every recursion, marginal, and tie-break in the fast path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import ChangePointVector
from .emissions import LogDensityTable
from .errors import DataError
from .prior import TransitionPrior

ENUMERATION_GUARD = 10**6


@dataclass(frozen=True)
class EnumeratedPosterior:
    log_evidence: float
    state_posterior: np.ndarray
    cp_positions: tuple[np.ndarray, ...]
    cp_probs: tuple[np.ndarray, ...]
    map_changepoints: ChangePointVector
    map_log_posterior: float
    posterior_mean: np.ndarray | None
    n_segmentations: int


def _log_prior_of(prior: TransitionPrior, cps: tuple[int, ...], n: int) -> float:
    """Direct product of stay/jump probabilities along one state path."""
    if prior.k == 1:
        return 0.0
    total = 0.0
    state = 1
    next_cp = 0
    for i in range(2, n + 1):
        if next_cp < len(cps) and cps[next_cp] == i - 1:
            total += prior.log_jump(state, i)
            state += 1
            next_cp += 1
        else:
            total += prior.log_stay(state, i)
    return total


def enumerate_posterior(
    table: LogDensityTable,
    prior: TransitionPrior,
    locations: np.ndarray | None = None,
) -> EnumeratedPosterior:
    """Sum the posterior over every K-segmentation of the sequence.

    Ties for the MAP segmentation resolve toward the vector whose last
    change-point is smallest (then second-to-last, and so on), matching the
    stay-preferring Viterbi traceback.
    """
    n, k_total = table.n, table.k
    if (prior.n, prior.k) != (n, k_total):
        raise DataError("table and prior dimensions disagree")
    count = math.comb(n - 1, k_total - 1)
    if count > ENUMERATION_GUARD:
        raise DataError(
            f"{count} segmentations exceed the enumeration guard "
            f"({ENUMERATION_GUARD})"
        )
    if locations is not None:
        locations = np.asarray(locations, dtype=np.float64)
        if locations.size != k_total:
            raise DataError("need one location per segment")

    # prefix[k][i] = sum of the first i log-densities of column k
    prefix = np.vstack(
        [np.zeros((1, k_total)), np.cumsum(table.entries, axis=0)]
    )

    def log_weight(cps: tuple[int, ...]) -> float:
        bounds = (0,) + cps + (n,)
        loglik = 0.0
        for k in range(k_total):
            loglik += prefix[bounds[k + 1], k] - prefix[bounds[k], k]
        return loglik + _log_prior_of(prior, cps, n)

    all_cps = itertools.combinations(range(1, n), k_total - 1)

    # pass 1: evidence and MAP
    best_cps: tuple[int, ...] | None = None
    best_lw = -np.inf
    log_weights = np.empty(count)
    for idx, cps in enumerate(all_cps):
        lw = log_weight(cps)
        log_weights[idx] = lw
        if lw > best_lw or (
            lw == best_lw
            and best_cps is not None
            and tuple(reversed(cps)) < tuple(reversed(best_cps))
        ):
            best_lw = lw
            best_cps = cps
    log_ev = float(np.logaddexp.reduce(log_weights))

    # pass 2: aggregate marginals with normalized weights
    weights = np.exp(log_weights - log_ev)
    post = np.zeros((n, k_total))
    cp_hist = np.zeros((k_total - 1, n))
    mean_track = np.zeros(n) if locations is not None else None
    for idx, cps in enumerate(itertools.combinations(range(1, n), k_total - 1)):
        w = weights[idx]
        bounds = (0,) + cps + (n,)
        for k in range(k_total):
            post[bounds[k] : bounds[k + 1], k] += w
            if mean_track is not None:
                mean_track[bounds[k] : bounds[k + 1]] += w * locations[k]
        for r, cp in enumerate(cps):
            cp_hist[r, cp - 1] += w

    cp_positions = []
    cp_probs = []
    for r in range(k_total - 1):
        pos = np.arange(r + 1, n - k_total + r + 2)
        cp_positions.append(pos)
        cp_probs.append(cp_hist[r, pos - 1])

    return EnumeratedPosterior(
        log_evidence=log_ev,
        state_posterior=post,
        cp_positions=tuple(cp_positions),
        cp_probs=tuple(cp_probs),
        map_changepoints=ChangePointVector(best_cps),
        map_log_posterior=float(best_lw - log_ev),
        posterior_mean=mean_track,
        n_segmentations=count,
    )
