"""Compiled inner loops for the exponential-decay recursions."""
import numpy as np
from numba import njit


@njit(cache=True)
def decay_sums(w, a):
    # out[t] = sum_{i<t} w[i] a^(t-i)  (0-based days)
    out = np.empty(w.size)
    g = 0.0
    for t in range(w.size):
        out[t] = g
        g = a * (g + w[t])
    return out


@njit(cache=True)
def lagged_decay_sums(g, a):
    # h[t] = a h[t-1] + g[t], h[0] = g[0]
    out = np.empty(g.size)
    h = 0.0
    for t in range(g.size):
        h = a * h + g[t]
        out[t] = h
    return out


@njit(cache=True)
def sse(w, idx, y, p0, k1, k2, a1, a2):
    """Sum of squared residuals at the sorted 0-based day indices ``idx``."""
    g1 = 0.0
    g2 = 0.0
    total = 0.0
    j = 0
    n = idx.size
    for t in range(w.size):
        if j == n:
            break
        if idx[j] == t:
            r = p0 + k1 * g1 - k2 * g2 - y[j]
            total += r * r
            j += 1
        g1 = a1 * (g1 + w[t])
        g2 = a2 * (g2 + w[t])
    return total
