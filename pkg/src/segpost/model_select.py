"""Segment-count selection: greedy least squares, MAP refinement, and BIC.

The greedy pass splits one segment at a time, always taking the single split
that most reduces the total within-segment sum of squares; the refinement
alternates MLE fitting with Viterbi decoding until the change-point set is a
fixed point. BIC compares the refined fits across candidate K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ChangePointVector, ObservationSequence
from .decode import viterbi
from .emissions import (
    GAUSSIAN_HET,
    GAUSSIAN_HOM,
    POISSON,
    SCALE_FLOOR_FRACTION,
    EmissionModel,
    SegmentParams,
    fit_mle,
    log_density_table,
    segmentation_log_likelihood,
)
from .errors import DegeneracyError, InfeasibleError, UnsupportedFamilyError
from .prior import homogeneous

MAX_REFINE_ITERATIONS = 20


def parameter_count(family: str, k: int) -> int:
    """Free parameters of a K-segment fit; locations only, plus scales."""
    if family == GAUSSIAN_HOM:
        return k + 1
    if family == GAUSSIAN_HET:
        return 2 * k
    if family == POISSON:
        return k
    raise UnsupportedFamilyError(f"no parameter count for family {family!r}")


@dataclass(frozen=True)
class ModelScore:
    k: int
    log_lik: float
    n_params: int
    bic: float
    degenerate: bool = False


def _sse(s1: np.ndarray, s2: np.ndarray, a: int, b: int) -> float:
    total = s1[b] - s1[a]
    return float(s2[b] - s2[a] - total * total / (b - a))


def _best_split(
    s1: np.ndarray, s2: np.ndarray, a: int, b: int
) -> tuple[float, int]:
    """(SSE reduction, 0-based split start of right part) or (-inf, -1)."""
    if b - a < 2:
        return -np.inf, -1
    cs = np.arange(a + 1, b)
    left_sum = s1[cs] - s1[a]
    left = s2[cs] - s2[a] - left_sum * left_sum / (cs - a)
    right_sum = s1[b] - s1[cs]
    right = s2[b] - s2[cs] - right_sum * right_sum / (b - cs)
    total = left + right
    best = int(np.argmin(total))  # ties: earliest split
    return _sse(s1, s2, a, b) - float(total[best]), int(cs[best])


def greedy_segment(data: ObservationSequence, k: int) -> ChangePointVector:
    """Split into K segments by repeated best single splits (binary descent).

    Each round scans every current segment for its best split and applies the
    one with the largest SSE reduction; ties go to the leftmost segment and
    the earliest split position, so the result is deterministic.
    """
    n = len(data)
    if k < 1:
        raise InfeasibleError(f"need at least one segment, got K={k}")
    if k > n:
        raise InfeasibleError(f"K={k} segments cannot fit n={n}")
    x = data.values
    s1 = np.concatenate(([0.0], np.cumsum(x)))
    s2 = np.concatenate(([0.0], np.cumsum(x * x)))

    segments = [(0, n)]
    splits: list[tuple[float, int]] = [_best_split(s1, s2, 0, n)]
    boundaries: list[int] = []
    for _ in range(k - 1):
        gains = [g for g, _ in splits]
        pick = int(np.argmax(gains))  # ties: leftmost segment
        a, b = segments[pick]
        _, c = splits[pick]
        segments[pick : pick + 1] = [(a, c), (c, b)]
        splits[pick : pick + 1] = [
            _best_split(s1, s2, a, c),
            _best_split(s1, s2, c, b),
        ]
        boundaries.append(c)  # right part starts at c, so left ends at c (1-based)
    return ChangePointVector(tuple(sorted(boundaries)))


def refine(
    data: ObservationSequence,
    changepoints: ChangePointVector,
    family: str,
    eta: float = 0.5,
) -> ChangePointVector:
    """Alternate MLE fitting and Viterbi decoding to a fixed point.

    Each iteration can only increase the data log-likelihood, so the loop
    terminates at a fixed point or at the hard iteration cap.
    """
    n = len(data)
    changepoints.validate_for(n)
    current = changepoints
    for _ in range(MAX_REFINE_ITERATIONS):
        model = fit_mle(data, current, family)
        table = log_density_table(data, model)
        prior = homogeneous(current.k, n, eta)
        decoded, _ = viterbi(table, prior)
        if decoded.positions == current.positions:
            break
        current = decoded
    return current


def _floored_constant_fit(
    data: ObservationSequence, changepoints: ChangePointVector
) -> EmissionModel:
    """Homoscedastic fit with the scale floored, for model comparison only."""
    x = data.values
    floor = SCALE_FLOOR_FRACTION * float(np.ptp(x)) + np.finfo(float).eps
    params = tuple(
        SegmentParams(float(x[a:b].mean())) for a, b in changepoints.segments(len(data))
    )
    return EmissionModel(GAUSSIAN_HOM, params, shared_scale=floor)


def score_segmentation(
    data: ObservationSequence, changepoints: ChangePointVector, family: str
) -> ModelScore:
    """Fitted log-likelihood and BIC of one segmentation."""
    n = len(data)
    degenerate = False
    try:
        model = fit_mle(data, changepoints, family)
    except DegeneracyError:
        if family != GAUSSIAN_HOM:
            raise
        model = _floored_constant_fit(data, changepoints)
        degenerate = True
    table = log_density_table(data, model)
    log_lik = segmentation_log_likelihood(table, changepoints)
    n_params = parameter_count(family, changepoints.k)
    return ModelScore(
        k=changepoints.k,
        log_lik=log_lik,
        n_params=n_params,
        bic=log_lik - n_params * math.log(n),
        degenerate=degenerate,
    )


def select_k(
    data: ObservationSequence,
    k_max: int,
    family: str,
    eta: float = 0.5,
) -> tuple[int, ChangePointVector, list[tuple[ModelScore, ChangePointVector]]]:
    """Greedy-then-refine each K in 1..k_max and keep the best BIC.

    Candidates whose MLE is degenerate beyond the homoscedastic floor (for
    example a Poisson segment of all zeros) are dropped rather than aborting
    the sweep. Ties in BIC go to the smaller K.
    """
    n = len(data)
    if k_max > n:
        raise InfeasibleError(f"k_max={k_max} cannot exceed n={n}")
    if k_max < 1:
        raise InfeasibleError("k_max must be at least 1")
    scored: list[tuple[ModelScore, ChangePointVector]] = []
    last_error: DegeneracyError | None = None
    for k in range(1, k_max + 1):
        try:
            initial = greedy_segment(data, k)
            refined = refine(data, initial, family, eta)
            scored.append((score_segmentation(data, refined, family), refined))
        except DegeneracyError as exc:
            last_error = exc
    if not scored:
        raise last_error if last_error is not None else DegeneracyError(
            "no candidate segment count could be fitted"
        )
    best_score, best_cps = scored[0]
    for score, cps in scored[1:]:
        if score.bic > best_score.bic:
            best_score, best_cps = score, cps
    return best_score.k, best_cps, scored
