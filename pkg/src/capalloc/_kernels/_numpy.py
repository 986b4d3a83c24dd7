"""Pure-numpy kernels.

Every reduction that feeds a reported number is a sequential left-to-right
sum (``np.cumsum`` is an in-order accumulate) so results are bit-identical
to the compiled loops in ``_numba``.
"""

import numpy as np


def aggregate(positions, u):
    out = np.zeros(positions.shape[1])
    for i in range(positions.shape[0]):
        out = out + u[i] * positions[i]
    return out


def weighted_sum(w, x):
    if w.shape[0] == 0:
        return 0.0
    return float(np.cumsum(w * x)[-1])


def cumulative(p):
    return np.cumsum(p)


def tail_weights(sorted_probs, level):
    before = np.concatenate(([0.0], np.cumsum(sorted_probs)[:-1]))
    return np.maximum(np.minimum(sorted_probs, level - before), 0.0)


def choquet_sorted(values, distorted_upper):
    # distorted_upper[k] = phi(P[X >= values[k]]); phi(P[X > max]) = 0
    nxt = np.concatenate((distorted_upper[1:], [0.0]))
    return weighted_sum(distorted_upper - nxt, values)
