"""Numba-compiled versions of the kernels in ``_numpy``."""

import numpy as np
from numba import njit


@njit(cache=True)
def aggregate(positions, u):
    n, m = positions.shape
    out = np.zeros(m)
    for j in range(m):
        acc = 0.0
        for i in range(n):
            acc = acc + u[i] * positions[i, j]
        out[j] = acc
    return out


@njit(cache=True)
def weighted_sum(w, x):
    acc = 0.0
    for j in range(w.shape[0]):
        acc = acc + w[j] * x[j]
    return acc


@njit(cache=True)
def cumulative(p):
    out = np.empty(p.shape[0])
    acc = 0.0
    for j in range(p.shape[0]):
        acc = acc + p[j]
        out[j] = acc
    return out


@njit(cache=True)
def tail_weights(sorted_probs, level):
    out = np.zeros(sorted_probs.shape[0])
    before = 0.0
    for j in range(sorted_probs.shape[0]):
        w = min(sorted_probs[j], level - before)
        out[j] = max(w, 0.0)
        before = before + sorted_probs[j]
    return out


@njit(cache=True)
def choquet_sorted(values, distorted_upper):
    r = values.shape[0]
    acc = 0.0
    for k in range(r):
        nxt = distorted_upper[k + 1] if k + 1 < r else 0.0
        acc = acc + (distorted_upper[k] - nxt) * values[k]
    return acc
