"""Independent brute-force oracles shared by unit and acceptance tests."""

import itertools
import math

import numpy as np

from paclab.polar import kron_power_matrix


def bit_channel_llr_bruteforce(y, prefix, W, n):
    """ln P(y, u^{i-1} | u_i = 0) / P(y, u^{i-1} | u_i = 1) by summing over every u suffix."""
    N = 1 << n
    G = kron_power_matrix(n).astype(int)
    i = len(prefix)
    totals = [0.0, 0.0]
    for tail in itertools.product((0, 1), repeat=N - i):
        u = np.array(list(prefix) + list(tail))
        x = u @ G % 2
        totals[u[i]] += math.prod(W[x[j], y[j]] for j in range(N))
    return math.log(totals[0] / totals[1])


def hill_reference(samples, l_min):
    x = np.asarray(samples, dtype=float)
    x = x[x >= l_min]
    return x.size / np.log(x / l_min).sum()
