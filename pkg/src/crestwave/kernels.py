"""Pairwise sweep kernels, each with a jit loop form and a numpy twin.

Every public function dispatches to the compiled loop when available.
The numpy twins are chunked over rows so peak memory stays ~O(n * block)
instead of O(n^2).
"""

import numpy as np

from ._accel import maybe_jit, NUMBA_ENABLED

_BLOCK = 256


# ---------------------------------------------------------------------------
# A1 pair sum:  out[i] = h * ( sum_{j != i} |zt_i - zt_j|^2 / (a_i - a_j)^2
#                              + diag[i] )
# diag carries the removable-diagonal value |d zt / d alpha|^2(a_i).

def _a1_sum_loops(zt_re, zt_im, alpha, h, diag):
    n = alpha.shape[0]
    out = np.empty(n)
    for i in range(n):
        acc = diag[i]
        zr = zt_re[i]
        zi = zt_im[i]
        ai = alpha[i]
        for j in range(n):
            if j == i:
                continue
            dr = zr - zt_re[j]
            di = zi - zt_im[j]
            da = ai - alpha[j]
            acc += (dr * dr + di * di) / (da * da)
        out[i] = h * acc
    return out


_a1_sum_jit = maybe_jit(_a1_sum_loops)


def _a1_sum_numpy(zt_re, zt_im, alpha, h, diag):
    n = alpha.shape[0]
    out = np.empty(n)
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        dr = zt_re[lo:hi, None] - zt_re[None, :]
        di = zt_im[lo:hi, None] - zt_im[None, :]
        da = alpha[lo:hi, None] - alpha[None, :]
        q = dr * dr + di * di
        np.fill_diagonal(da[:, lo:hi], 1.0)  # dummy, the slot is overwritten
        q = q / (da * da)
        np.fill_diagonal(q[:, lo:hi], 0.0)
        out[lo:hi] = h * (q.sum(axis=1) + diag[lo:hi])
    return out


def a1_sum(zt_re, zt_im, alpha, h, diag):
    if _a1_sum_jit is not None:
        return _a1_sum_jit(zt_re, zt_im, alpha, h, diag)
    return _a1_sum_numpy(zt_re, zt_im, alpha, h, diag)


# ---------------------------------------------------------------------------
# Minimum chord/arc ratio over node pairs of an open polyline.
# s is the cumulative arclength at the nodes (monotone).

def _chord_arc_loops(x, y, s):
    n = x.shape[0]
    dmin = 2.0
    dmax = 0.0
    imin = 0
    jmin = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            arc = s[j] - s[i]
            if arc <= 0.0:
                continue
            dx = x[j] - x[i]
            dy = y[j] - y[i]
            r = np.sqrt(dx * dx + dy * dy) / arc
            if r < dmin:
                dmin = r
                imin = i
                jmin = j
            if r > dmax:
                dmax = r
    return dmin, dmax, imin, jmin


_chord_arc_jit = maybe_jit(_chord_arc_loops)


def _chord_arc_numpy(x, y, s):
    n = x.shape[0]
    dmin = 2.0
    dmax = 0.0
    imin = 0
    jmin = 0
    for i in range(n - 1):
        arc = s[i + 1:] - s[i]
        chord = np.hypot(x[i + 1:] - x[i], y[i + 1:] - y[i])
        ok = arc > 0.0
        if not ok.any():
            continue
        r = chord[ok] / arc[ok]
        k = int(np.argmin(r))
        if r[k] < dmin:
            dmin = float(r[k])
            imin = i
            jmin = i + 1 + np.flatnonzero(ok)[k]
        m = float(r.max())
        if m > dmax:
            dmax = m
    return dmin, dmax, imin, jmin


def chord_arc_scan(x, y, s):
    if _chord_arc_jit is not None:
        return _chord_arc_jit(x, y, s)
    return _chord_arc_numpy(x, y, s)


# ---------------------------------------------------------------------------
# Polyline self-intersection: proper crossings of non-adjacent segments.

def _self_intersect_loops(x, y):
    n = x.shape[0] - 1  # segments
    for i in range(n - 2):
        xlo = min(x[i], x[i + 1])
        xhi = max(x[i], x[i + 1])
        ylo = min(y[i], y[i + 1])
        yhi = max(y[i], y[i + 1])
        for j in range(i + 2, n):
            # bbox reject before the orientation test
            if min(x[j], x[j + 1]) > xhi or max(x[j], x[j + 1]) < xlo:
                continue
            if min(y[j], y[j + 1]) > yhi or max(y[j], y[j + 1]) < ylo:
                continue
            d1 = (x[i + 1] - x[i]) * (y[j] - y[i]) - (y[i + 1] - y[i]) * (x[j] - x[i])
            d2 = (x[i + 1] - x[i]) * (y[j + 1] - y[i]) - (y[i + 1] - y[i]) * (x[j + 1] - x[i])
            d3 = (x[j + 1] - x[j]) * (y[i] - y[j]) - (y[j + 1] - y[j]) * (x[i] - x[j])
            d4 = (x[j + 1] - x[j]) * (y[i + 1] - y[j]) - (y[j + 1] - y[j]) * (x[i + 1] - x[j])
            if d1 * d2 < 0.0 and d3 * d4 < 0.0:
                return i, j
    return -1, -1


_self_intersect_jit = maybe_jit(_self_intersect_loops)


def _self_intersect_numpy(x, y):
    n = x.shape[0] - 1
    ex = x[1:] - x[:-1]
    ey = y[1:] - y[:-1]
    for i in range(n - 2):
        j = np.arange(i + 2, n)
        d1 = ex[i] * (y[j] - y[i]) - ey[i] * (x[j] - x[i])
        d2 = ex[i] * (y[j + 1] - y[i]) - ey[i] * (x[j + 1] - x[i])
        d3 = ex[j] * (y[i] - y[j]) - ey[j] * (x[i] - x[j])
        d4 = ex[j] * (y[i + 1] - y[j]) - ey[j] * (x[i + 1] - x[j])
        hit = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)
        if hit.any():
            return i, int(j[hit][0])
    return -1, -1


def self_intersect(x, y):
    """Return first properly crossing non-adjacent segment pair, or (-1, -1)."""
    if _self_intersect_jit is not None:
        return _self_intersect_jit(x, y)
    return _self_intersect_numpy(x, y)


# ---------------------------------------------------------------------------
# Cusp separation sweep on a window:  over pairs i < j in [i0, i1),
#   worst K  = max  sqrt|a_i - a_j| / |Z_i - Z_j|
#   floor    = min  |Z_i - Z_j| / sqrt|a_i - a_j|

def _pair_bound_loops(x, y, alpha, i0, i1, x0, frac):
    worst = 0.0
    floor = np.inf
    for i in range(i0, i1 - 1):
        di = abs(alpha[i] - x0)
        for j in range(i + 1, i1):
            sep = alpha[j] - alpha[i]
            dj = abs(alpha[j] - x0)
            far = di if di > dj else dj
            if sep < frac * far:
                continue
            da = np.sqrt(sep)
            dz = np.sqrt((x[j] - x[i]) ** 2 + (y[j] - y[i]) ** 2)
            if dz == 0.0:
                return np.inf, 0.0
            r = da / dz
            if r > worst:
                worst = r
            if 1.0 / r < floor:
                floor = 1.0 / r
    return worst, floor


_pair_bound_jit = maybe_jit(_pair_bound_loops)


def _pair_bound_numpy(x, y, alpha, i0, i1, x0, frac):
    worst = 0.0
    floor = np.inf
    for i in range(i0, i1 - 1):
        sep = alpha[i + 1:i1] - alpha[i]
        far = np.maximum(abs(alpha[i] - x0), np.abs(alpha[i + 1:i1] - x0))
        keep = sep >= frac * far
        if not keep.any():
            continue
        da = np.sqrt(sep[keep])
        dz = np.hypot(x[i + 1:i1] - x[i], y[i + 1:i1] - y[i])[keep]
        if (dz == 0.0).any():
            return np.inf, 0.0
        r = da / dz
        worst = max(worst, float(r.max()))
        floor = min(floor, float((1.0 / r).min()))
    return worst, floor


def pair_bound(x, y, alpha, i0, i1, x0=0.0, frac=0.0):
    """Worst constants of the square-root separation bound over node pairs.

    Scans pairs (i, j) in [i0, i1) and returns (K, floor) with
    K = max sqrt|da|/|dZ| and floor = min |dZ|/sqrt|da|.  With frac > 0
    only scale-comparable pairs are scored: |a_j - a_i| at least frac
    times the farther distance to x0.  Pairs tighter than that probe the
    local derivative, where a square-root modulus is unattainable for any
    rectifiable curve and the bound carries no information.
    """
    if _pair_bound_jit is not None:
        return _pair_bound_jit(x, y, alpha, i0, i1, x0, frac)
    return _pair_bound_numpy(x, y, alpha, i0, i1, x0, frac)
