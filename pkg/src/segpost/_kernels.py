"""Numba kernels for the O(Kn) recursions.

All three passes run in log space with a two-term log-sum-exp (or max), and
only touch feasible cells: state k at observation j (0-based) requires
k <= j and k >= K - n + j, everything else stays pinned at -inf. The cache
flag keeps compiled artifacts across processes, so only the very first use
on a machine pays the JIT cost.
"""

import math

import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True, inline="always")
def _lse2(a, b):
    if a < b:
        a, b = b, a
    if b == NEG_INF:
        return a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True)
def forward_kernel(logdens, log_stay, log_jump):
    n, k_total = logdens.shape
    log_f = np.full((n, k_total), NEG_INF)
    log_f[0, 0] = logdens[0, 0]
    for j in range(1, n):
        k_lo = max(0, k_total - n + j)
        k_hi = min(j, k_total - 1)
        for k in range(k_lo, k_hi + 1):
            acc = log_f[j - 1, k] + log_stay[k, j]
            if k > 0:
                acc = _lse2(acc, log_f[j - 1, k - 1] + log_jump[k - 1, j])
            log_f[j, k] = acc + logdens[j, k]
    return log_f


@njit(cache=True)
def backward_kernel(logdens, log_stay, log_jump):
    n, k_total = logdens.shape
    log_b = np.full((n, k_total), NEG_INF)
    log_b[n - 1, k_total - 1] = 0.0
    for j in range(n - 2, -1, -1):
        k_lo = max(0, k_total - n + j)
        k_hi = min(j, k_total - 1)
        for k in range(k_lo, k_hi + 1):
            acc = log_stay[k, j + 1] + logdens[j + 1, k] + log_b[j + 1, k]
            if k < k_total - 1:
                acc = _lse2(
                    acc,
                    log_jump[k, j + 1] + logdens[j + 1, k + 1] + log_b[j + 1, k + 1],
                )
            log_b[j, k] = acc
    return log_b


@njit(cache=True)
def viterbi_kernel(logdens, log_stay, log_jump):
    """Max-product pass; choice[j, k] is 1 when the jump branch strictly wins.

    Ties prefer the stay branch, which pins each change-point to the earliest
    position among equally probable paths.
    """
    n, k_total = logdens.shape
    log_v = np.full((n, k_total), NEG_INF)
    choice = np.zeros((n, k_total), dtype=np.int8)
    log_v[0, 0] = logdens[0, 0]
    for j in range(1, n):
        k_lo = max(0, k_total - n + j)
        k_hi = min(j, k_total - 1)
        for k in range(k_lo, k_hi + 1):
            stay = log_v[j - 1, k] + log_stay[k, j]
            best = stay
            if k > 0:
                jump = log_v[j - 1, k - 1] + log_jump[k - 1, j]
                if jump > stay:
                    best = jump
                    choice[j, k] = 1
            log_v[j, k] = best + logdens[j, k]
    return log_v, choice


@njit(cache=True)
def traceback_kernel(choice):
    """1-based change-point positions of the path ending at (n-1, K-1)."""
    n, k_total = choice.shape
    cps = np.empty(k_total - 1, dtype=np.int64)
    k = k_total - 1
    for j in range(n - 1, 0, -1):
        if k == 0:
            break
        if choice[j, k] == 1:
            cps[k - 1] = j  # segment k (0-based k-1) ends at observation j-1
            k -= 1
    return cps
