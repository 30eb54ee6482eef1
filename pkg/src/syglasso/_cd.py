"""Compiled inner loop of the off-diagonal coordinate sweep."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def sweep_mode(X3, R3, P, gram, thresh):
    """One pass over the strict upper triangle of mode factor ``P``.

    ``X3`` and ``R3`` are the data and the residual ``W*X + Y`` reshaped to
    ``(before, m_k, after)``. ``gram[i]`` is the squared norm of slice ``i``.
    ``P`` and ``R3`` are updated in place. Returns the largest absolute
    change and the number of coordinates skipped for a zero denominator.
    """
    before, m, after = X3.shape
    max_delta = 0.0
    skipped = 0
    for i in range(m - 1):
        for j in range(i + 1, m):
            den = gram[i] + gram[j]
            if den <= 0.0:
                skipped += 1
                continue
            old = P[i, j]
            cross = 0.0
            for a in range(before):
                for b in range(after):
                    cross += R3[a, i, b] * X3[a, j, b] + R3[a, j, b] * X3[a, i, b]
            # gradient of the smooth part at zero, with the current entry removed
            z = old * den - cross
            if z > thresh:
                new = (z - thresh) / den
            elif z < -thresh:
                new = (z + thresh) / den
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                for a in range(before):
                    for b in range(after):
                        R3[a, i, b] += delta * X3[a, j, b]
                        R3[a, j, b] += delta * X3[a, i, b]
                P[i, j] = new
                P[j, i] = new
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
    return max_delta, skipped
