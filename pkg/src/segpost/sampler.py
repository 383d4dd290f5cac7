"""Exact joint sampling of segmentations and parametric bootstrap draws.

Sampling walks the chain forward, jumping with the conditional probability
implied by the backward table, so each draw is an independent exact sample
from the joint posterior over full change-point configurations (not from the
product of marginals). Streams are split per sample with a counter-based
generator, so draws are reproducible and safe to parallelize.
"""

from __future__ import annotations

import numpy as np

from .core import ChangePointVector, ObservationSequence
from .emissions import EXTERNAL, GAUSSIAN_HET, GAUSSIAN_HOM, POISSON, EmissionModel, LogDensityTable
from .engine import ForwardBackwardState
from .errors import DataError, UnsupportedFamilyError
from .prior import TransitionPrior


def _jump_probabilities(
    state: ForwardBackwardState, table: LogDensityTable, prior: TransitionPrior
) -> tuple[np.ndarray, np.ndarray]:
    """(n, K-1) matrix of P(jump into obs j | state at j-1), plus dead mask.

    Cell (j, k) conditions on being in segment k at observation j-1 with the
    constraint still satisfiable. Cells whose conditioning state is
    unreachable are zeroed; they are never consulted by a sampled walk.
    """
    _, log_jump = prior.log_tables()
    log_b = state.log_b
    n, k_total = state.n, state.k
    num = (
        log_jump[:-1, 1:].T  # source segment k leaving at observation j
        + table.entries[1:, 1:]
        + log_b[1:, 1:]
    )
    denom = log_b[:-1, : k_total - 1]
    with np.errstate(invalid="ignore"):
        p = np.exp(num - denom)
    p = np.nan_to_num(p, nan=0.0, posinf=0.0)
    jump_p = np.zeros((n, k_total - 1))
    jump_p[1:] = np.clip(p, 0.0, 1.0)
    dead_stay = ~np.isfinite(log_b)  # staying here has zero posterior mass
    return jump_p, dead_stay


def sample_segmentations(
    state: ForwardBackwardState,
    table: LogDensityTable,
    prior: TransitionPrior,
    m: int,
    seed: int,
) -> list[ChangePointVector]:
    """Draw m i.i.d. change-point configurations from the exact posterior.

    Jumps forced by feasibility (staying would strand the chain) are taken
    outright rather than trusting a floating-point probability to reach 1.
    """
    if m < 1:
        raise DataError(f"need at least one sample, got m={m}")
    n, k_total = state.n, state.k
    if k_total == 1:
        return [ChangePointVector() for _ in range(m)]

    jump_p, dead_stay = _jump_probabilities(state, table, prior)

    children = np.random.SeedSequence(seed).spawn(m)
    uniforms = np.stack(
        [np.random.Generator(np.random.Philox(c)).random(n - 1) for c in children]
    )

    states = np.zeros(m, dtype=np.int64)
    positions = np.zeros((m, k_total - 1), dtype=np.int64)
    for j in range(1, n):
        can_jump = states < k_total - 1
        src = np.minimum(states, k_total - 2)
        forced = dead_stay[j, states]
        jump = can_jump & (forced | (uniforms[:, j - 1] < jump_p[j, src]))
        rows = np.nonzero(jump)[0]
        positions[rows, states[rows]] = j  # segment ends at observation j-1
        states[jump] += 1

    return [ChangePointVector(tuple(row)) for row in positions]


def parametric_bootstrap(
    changepoints: ChangePointVector,
    model: EmissionModel,
    n: int,
    seed: int,
) -> ObservationSequence:
    """Generate a fresh sequence from the fitted emissions of a segmentation."""
    if model.family == EXTERNAL:
        raise UnsupportedFamilyError(
            "an external log-density table cannot be sampled from"
        )
    if model.k != changepoints.k:
        raise DataError(
            f"model has {model.k} segments, segmentation {changepoints.k}"
        )
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    values = np.empty(n)
    for k, (a, b) in enumerate(changepoints.segments(n)):
        p = model.params[k]
        if model.family == GAUSSIAN_HOM:
            values[a:b] = rng.normal(p.location, model.shared_scale, b - a)
        elif model.family == GAUSSIAN_HET:
            values[a:b] = rng.normal(p.location, p.scale, b - a)
        elif model.family == POISSON:
            values[a:b] = rng.poisson(p.location, b - a)
    return ObservationSequence(values)
