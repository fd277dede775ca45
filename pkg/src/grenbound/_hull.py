"""Compiled kernels shared by the estimator and the Brownian functionals."""

from fractions import Fraction

import numba
import numpy as np

# relative error bound of the floating-point orientation determinant
_ORIENT_EPS = (3.0 + 16.0 * 2.0**-53) * 2.0**-53


@numba.njit(cache=True)
def _hull_kernel(x, y, checked):
    n = x.shape[0]
    idx = np.empty(n, np.int64)
    m = 0
    uncertain = False
    for i in range(n):
        while m >= 2:
            a = idx[m - 2]
            b = idx[m - 1]
            left = (y[b] - y[a]) * (x[i] - x[a])
            right = (y[i] - y[a]) * (x[b] - x[a])
            cross = left - right
            if checked and abs(cross) <= _ORIENT_EPS * (abs(left) + abs(right)):
                uncertain = True
            if cross > 0.0:
                break
            m -= 1
        idx[m] = i
        m += 1
    return idx[:m].copy(), uncertain


def upper_hull(x, y):
    """Indices of the upper concave hull of points sorted by strictly increasing x.

    Monotone chain: a point is kept only if it lies strictly above the chord
    joining its neighbours, so collinear middle points are dropped and the
    chord slopes of the result are strictly decreasing.  Floating-point
    orientation tests; near-collinear triples may be misjudged by an ulp.
    """
    return _hull_kernel(x, y, False)[0]


def _exact_hull(x, y):
    fx = [Fraction(v) for v in x]
    fy = [Fraction(v) for v in y]
    idx = []
    for i in range(len(fx)):
        while len(idx) >= 2:
            a, b = idx[-2], idx[-1]
            if (fy[b] - fy[a]) * (fx[i] - fx[a]) > (fy[i] - fy[a]) * (fx[b] - fx[a]):
                break
            idx.pop()
        idx.append(i)
    return np.array(idx, dtype=np.int64)


def exact_upper_hull(x, y):
    """Same as :func:`upper_hull`, with orientation decided in exact arithmetic.

    The compiled pass flags every test whose sign the rounding error could
    flip; only then is the hull recomputed with rationals.
    """
    idx, uncertain = _hull_kernel(x, y, True)
    if uncertain:
        return _exact_hull(x, y)
    return idx
