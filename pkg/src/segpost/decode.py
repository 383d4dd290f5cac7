"""Maximum a posteriori segmentation via the constrained Viterbi recursion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import forward_kernel, traceback_kernel, viterbi_kernel
from .core import ChangePointVector
from .emissions import LogDensityTable
from .engine import _check_dims
from .errors import DegeneracyError
from .prior import TransitionPrior


@dataclass(frozen=True)
class ViterbiState:
    """Max-product table and the stay/jump choice that produced each cell."""

    log_v: np.ndarray
    choice: np.ndarray


def viterbi_state(table: LogDensityTable, prior: TransitionPrior) -> ViterbiState:
    _check_dims(table, prior)
    log_stay, log_jump = prior.log_tables()
    log_v, choice = viterbi_kernel(table.entries, log_stay, log_jump)
    return ViterbiState(log_v, choice)


def viterbi(
    table: LogDensityTable, prior: TransitionPrior
) -> tuple[ChangePointVector, float]:
    """MAP change-point set and its log posterior probability.

    Ties between staying and jumping resolve to staying, so among equally
    probable paths the one whose change-points sit earliest is returned.
    The log posterior normalizes the best path weight by the evidence, which
    equals the final forward entry.
    """
    state = viterbi_state(table, prior)
    n, k_total = table.n, table.k
    if not np.isfinite(state.log_v[n - 1, k_total - 1]):
        raise DegeneracyError("no feasible path reaches the final segment")
    if k_total == 1:
        return ChangePointVector(), 0.0
    log_stay, log_jump = prior.log_tables()
    log_f = forward_kernel(table.entries, log_stay, log_jump)
    cps = traceback_kernel(state.choice)
    log_post = float(state.log_v[n - 1, k_total - 1] - log_f[n - 1, k_total - 1])
    return ChangePointVector(tuple(int(p) for p in cps)), log_post
