"""Pure NumPy/Python implementations of the hot kernels.

Signatures mirror the compiled ``_kernels`` extension exactly; the package
picks one of the two at import time (see :mod:`ccca._backend`).
"""

import numpy as np
from scipy.special import ndtr

_INV_2PI = 1.0 / (2.0 * np.pi)
_CHUNK = 512


def smoothed_cdf(sample, points, h):
    """Gaussian-kernel CDF of ``sample`` evaluated at ``points``."""
    sample = np.ascontiguousarray(sample, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.float64)
    out = np.empty(points.shape[0])
    for s in range(0, points.shape[0], _CHUNK):
        z = points[s:s + _CHUNK]
        out[s:s + _CHUNK] = ndtr((z[:, None] - sample[None, :]) / h).mean(axis=1)
    return out


def smoothed_cdf_at_samples(y, h):
    """Gaussian-kernel CDF of ``y`` evaluated at each of its own points."""
    return smoothed_cdf(y, y, h)


def copula_kde(d1, d2, q1, q2, H1, H2):
    """Product Gaussian kernel density of data (d1, d2) at queries (q1, q2)."""
    d1 = np.ascontiguousarray(d1, dtype=np.float64)
    d2 = np.ascontiguousarray(d2, dtype=np.float64)
    q1 = np.ascontiguousarray(q1, dtype=np.float64)
    q2 = np.ascontiguousarray(q2, dtype=np.float64)
    n = d1.shape[0]
    out = np.empty(q1.shape[0])
    for s in range(0, q1.shape[0], _CHUNK):
        a = (q1[s:s + _CHUNK, None] - d1[None, :]) / H1
        b = (q2[s:s + _CHUNK, None] - d2[None, :]) / H2
        out[s:s + _CHUNK] = np.exp(-0.5 * (a * a + b * b)).sum(axis=1)
    return out * (_INV_2PI / (n * H1 * H2))


def copula_kde_at_samples(u1, u2, H1, H2):
    return copula_kde(u1, u2, u1, u2, H1, H2)


def empirical_copula_counts(du, dv):
    """For each j, count k with du[k] <= du[j] and dv[k] <= dv[j] (self included)."""
    du = np.ascontiguousarray(du, dtype=np.int64)
    dv = np.ascontiguousarray(dv, dtype=np.int64)
    n = du.shape[0]
    out = np.empty(n, dtype=np.int64)
    for s in range(0, n, _CHUNK):
        a = du[s:s + _CHUNK, None] >= du[None, :]
        b = dv[s:s + _CHUNK, None] >= dv[None, :]
        out[s:s + _CHUNK] = (a & b).sum(axis=1)
    return out


def _lambda_scaled(k, U2, V2, n):
    # All quantities scaled by 4n^2 so they are exact integers in float64.
    c = 4.0 * n * k
    prod = float(U2) * float(V2)
    if c >= prod:
        bound = 2.0 * n * min(U2, V2)
    else:
        bound = max(2.0 * n * (U2 + V2) - 4.0 * n * n, 0.0)
    den = bound - prod
    if den == 0.0:
        return 0.0
    if (c - bound) * den >= 0.0:
        return 1.0  # on or beyond the bound (ties can push C_n past it)
    return (c - prod) / den


def cos_core(k, U2, V2):
    """Domain partition and relative-distance aggregation over a u-ordered sequence.

    Parameters
    ----------
    k : int64 array
        ``n * C_n`` at each sample point, in increasing-u order.
    U2, V2 : int64 arrays
        Doubled average ranks (``2 * n * u`` and ``2 * n * v``), same order.

    Returns
    -------
    (cos, m) : (float, int)
    """
    k = np.asarray(k, dtype=np.int64)
    U2 = np.asarray(U2, dtype=np.int64)
    V2 = np.asarray(V2, dtype=np.int64)
    n = k.shape[0]
    two_n = 2 * n

    starts = []
    ends = []
    start = 0
    direction = 0
    for j in range(1, n):
        d = k[j] - k[j - 1]
        if d == 0:
            continue
        s = 1 if d > 0 else -1
        if direction == 0:
            direction = s
        elif s != direction:
            starts.append(start)
            ends.append(j - 1)
            start = j - 1
            direction = s
    starts.append(start)
    ends.append(n - 1)
    m = len(starts)

    total = 0.0
    for i in range(m):
        a, b = starts[i], ends[i]
        jmin = jmax = -1
        for j in range(a, b + 1):
            if U2[j] == two_n or V2[j] == two_n:
                continue
            if jmin < 0 or k[j] < k[jmin]:
                jmin = j
            if jmax < 0 or k[j] > k[jmax]:
                jmax = j
        size = b - a + 1
        if jmin < 0:
            continue
        lmin = _lambda_scaled(k[jmin], U2[jmin], V2[jmin], n)
        lmax = _lambda_scaled(k[jmax], U2[jmax], V2[jmax], n)
        if lmin == 1.0 and lmax == 1.0:
            gamma = 1.0
        else:
            gamma = 0.5 * (lmin + lmax)
            pair = size + (ends[i + 1] - starts[i + 1] + 1 if i + 1 < m else 0)
            if pair > 4:
                for j in (jmin, jmax):
                    if 0 < j < n - 1 and abs(k[j] - k[j - 1]) <= 1 and abs(k[j + 1] - k[j]) <= 1:
                        gamma = 1.0
                        break
        total += size * gamma
    return total / (n + m - 1), m
