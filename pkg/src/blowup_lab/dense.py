"""Quintic Hermite interpolation of a scalar second-order ODE solution."""

from __future__ import annotations

import numpy as np


def hermite5(x, nodes, y, dy, ddy):
    """Evaluate the piecewise quintic Hermite interpolant and its derivative.

    Each interval matches value, first and second derivative at both ends,
    so the interpolation error is O(h^6) in the value and O(h^5) in the
    derivative. `x` must lie within [nodes[0], nodes[-1]].

    Returns
    -------
    (value, derivative) with the shape of `x`.
    """
    x = np.asarray(x, dtype=float)
    i = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(nodes) - 2)
    x0 = nodes[i]
    h = nodes[i + 1] - x0
    s = (x - x0) / h
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    s5 = s4 * s

    h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5
    h01 = 10 * s3 - 15 * s4 + 6 * s5
    h10 = s - 6 * s3 + 8 * s4 - 3 * s5
    h11 = -4 * s3 + 7 * s4 - 3 * s5
    h20 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5)
    h21 = 0.5 * (s3 - 2 * s4 + s5)

    d00 = -30 * s2 + 60 * s3 - 30 * s4
    d10 = 1 - 18 * s2 + 32 * s3 - 15 * s4
    d11 = -12 * s2 + 28 * s3 - 15 * s4
    d20 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4)
    d21 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4)

    y0, y1 = y[i], y[i + 1]
    v0, v1 = dy[i], dy[i + 1]
    a0, a1 = ddy[i], ddy[i + 1]
    h2 = h * h

    value = (y0 * h00 + y1 * h01 + h * (v0 * h10 + v1 * h11)
             + h2 * (a0 * h20 + a1 * h21))
    deriv = ((y1 - y0) * (-d00) / h + v0 * d10 + v1 * d11
             + h * (a0 * d20 + a1 * d21))
    return value, deriv
