"""Compiled inner loops.

Fields are passed as 4-D C-contiguous views; a field of dimension d occupies
the trailing d axes and the leading 4-d axes have length one.  Lattice axis
j = 1..d is array axis 4-d+j-1, so C order over the view is lexicographic
order over sites.
"""
import math

import numpy as np
from numba import njit

TAN = 0
POWER = 1


@njit(cache=True, inline="always")
def _abs_pow(a, q):
    if a == 0.0:
        return 0.0
    if q == 1.0:
        return a
    return a**q


# below this argument the degree-9 Taylor polynomial of tan is exact to
# rounding (the first omitted term is ~1e-22 relative)
_TAN_SERIES_CUTOFF = 1e-2


@njit(cache=True, inline="always")
def _tan(x):
    if x < _TAN_SERIES_CUTOFF:
        x2 = x * x
        return x * (1.0 + x2 * (1.0 / 3.0 + x2 * (2.0 / 15.0 + x2 * (17.0 / 315.0 + x2 * (62.0 / 2835.0)))))
    return math.tan(x)


@njit(cache=True)
def advance(prev, curr, out, o0, o1, o2, o3, ndim, r, lam, center, mode, coef, scale, q, threshold):
    """Write the next level into ``out`` on the L1 ball of radius ``r``.

    mode TAN:   source = coef * |u|**q * tan(scale * |u|)
    mode POWER: source = coef * |u|**q

    Returns (sum, abs_sum, source_sum, max_abs, support_radius, hit, nonfinite)
    where sums run in lexicographic order, support_radius is -1 for an empty
    support and hit is the flat index of the first site with
    |value| >= threshold (-1 if none).
    """
    e0 = r if ndim >= 4 else 0
    e1 = r if ndim >= 3 else 0
    e2 = r if ndim >= 2 else 0
    s3 = out.shape[3]
    s2 = out.shape[2] * s3
    s1 = out.shape[1] * s2

    total = 0.0
    abs_total = 0.0
    src_total = 0.0
    peak = 0.0
    supp = -1
    hit = -1

    for a in range(-e0, e0 + 1):
        ra = r - abs(a)
        i0 = o0 + a
        lim1 = min(e1, ra)
        for b in range(-lim1, lim1 + 1):
            rb = ra - abs(b)
            i1 = o1 + b
            lim2 = min(e2, rb)
            for c in range(-lim2, lim2 + 1):
                rc = rb - abs(c)
                i2 = o2 + c
                base = abs(a) + abs(b) + abs(c)
                row = i0 * s1 + i1 * s2 + i2 * s3
                for k in range(-rc, rc + 1):
                    i3 = o3 + k
                    u = curr[i0, i1, i2, i3]
                    nb = 0.0
                    if ndim >= 4:
                        nb += curr[i0 - 1, i1, i2, i3] + curr[i0 + 1, i1, i2, i3]
                    if ndim >= 3:
                        nb += curr[i0, i1 - 1, i2, i3] + curr[i0, i1 + 1, i2, i3]
                    if ndim >= 2:
                        nb += curr[i0, i1, i2 - 1, i3] + curr[i0, i1, i2 + 1, i3]
                    nb += curr[i0, i1, i2, i3 - 1] + curr[i0, i1, i2, i3 + 1]

                    au = abs(u)
                    if mode == TAN:
                        src = coef * _abs_pow(au, q) * _tan(scale * au)
                    else:
                        src = coef * _abs_pow(au, q)
                    v = lam * nb + center * u - prev[i0, i1, i2, i3] + src
                    out[i0, i1, i2, i3] = v

                    total += v
                    src_total += src
                    av = abs(v)
                    abs_total += av
                    if av > peak:
                        peak = av
                    if v != 0.0:
                        l1 = base + abs(k)
                        if l1 > supp:
                            supp = l1
                    if hit < 0 and av >= threshold:
                        hit = row + i3
    # any NaN or infinity among the values propagates into the absolute sum
    nonfinite = not math.isfinite(abs_total)
    return total, abs_total, src_total, peak, supp, hit, nonfinite


@njit(cache=True)
def ordered_sum(flat):
    total = 0.0
    for k in range(flat.size):
        total += flat[k]
    return total


def as4d(values: np.ndarray) -> np.ndarray:
    return values.reshape((1,) * (4 - values.ndim) + values.shape)
