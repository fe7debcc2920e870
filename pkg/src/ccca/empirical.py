"""
Rank- and kernel-based estimators.

Pseudo-observations and the empirical copula, the Frechet-bound relative
distance, the copula statistic (CoS) dependence index, Gaussian-kernel
marginal CDFs, the product-kernel copula density and the rule-of-thumb
bandwidths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ._backend import kernels
from .exceptions import DegenerateSignalError

__all__ = [
    "PseudoObservations",
    "Bandwidths",
    "pseudo_observations",
    "empirical_copula",
    "frechet_lambda",
    "cos_index",
    "cos_matrix",
    "kernel_marginal_cdf",
    "kernel_copula_density",
    "bandwidths",
    "marginal_bandwidth",
    "copula_bandwidth",
    "smoothed_pseudo_observations",
    "MIN_COS_SAMPLES",
]

MIN_COS_SAMPLES = 10
_H_MARGINAL = (4.0 / 3.0) ** 0.2


@dataclass(frozen=True)
class PseudoObservations:
    """Normalised average ranks ``u`` and ``v`` of a bivariate sample, in (0, 1]."""

    u: np.ndarray
    v: np.ndarray

    def __len__(self):
        return self.u.shape[0]


@dataclass(frozen=True)
class Bandwidths:
    """Kernel smoothing windows: ``h`` for marginal CDFs, ``H`` for the copula density."""

    h: np.ndarray
    H: np.ndarray


def _vector(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def pseudo_observations(x, y) -> PseudoObservations:
    """Rank-transform a bivariate sample, ``u_j = rank(x_j) / n`` with average ranks for ties."""
    x, y = _vector(x, "x"), _vector(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    n = x.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    return PseudoObservations(rankdata(x) / n, rankdata(y) / n)


def empirical_copula(pobs: PseudoObservations, u, v):
    """C_n(u, v) = fraction of pseudo-observations with ``u_j <= u`` and ``v_j <= v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ub, vb = np.broadcast_arrays(u, v)
    flat_u, flat_v = ub.ravel(), vb.ravel()
    out = np.empty(flat_u.shape[0])
    for s in range(0, out.shape[0], 256):
        below = (pobs.u[None, :] <= flat_u[s:s + 256, None]) & (pobs.v[None, :] <= flat_v[s:s + 256, None])
        out[s:s + 256] = below.sum(axis=1)
    out /= len(pobs)
    return out.reshape(ub.shape) if ub.ndim else float(out[0])


def frechet_lambda(c, u, v):
    """Relative distance of a copula value from independence towards the Frechet bounds.

    Uses the upper bound ``min(u, v)`` when ``c >= uv`` and the lower bound
    ``max(u + v - 1, 0)`` otherwise. A zero denominator (``u`` or ``v`` on
    the boundary of the unit square) gives 0.
    """
    c, u, v = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (c, u, v)))
    prod = u * v
    bound = np.where(c >= prod, np.minimum(u, v), np.maximum(u + v - 1.0, 0.0))
    den = bound - prod
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(den == 0.0, 0.0, (c - prod) / np.where(den == 0.0, 1.0, den))
    lam = np.where((den != 0.0) & (c == bound), 1.0, lam)
    return lam if lam.ndim else float(lam)


def _dense_ranks(x):
    return rankdata(x, method="dense").astype(np.int64) - 1


def cos_index(x, y) -> float:
    """Copula statistic (CoS) between two samples, a dependence index in [0, 1].

    The sample is ordered by the ``x`` pseudo-observations, the sequence of
    empirical-copula values at the ordered points is split into maximal
    monotone domains (adjacent domains share their boundary point), and each
    domain contributes the mean relative Frechet distance at its smallest and
    largest copula value, or 1 when that extreme is judged a local optimum of
    a functional relation. Contributions are weighted by domain size and
    normalised by ``n + m - 1``.

    A constant input gives 0.

    Raises
    ------
    ValueError
        On length mismatch or fewer than 10 observations.
    """
    x, y = _vector(x, "x"), _vector(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    n = x.shape[0]
    if n < MIN_COS_SAMPLES:
        raise ValueError(f"CoS needs at least {MIN_COS_SAMPLES} observations, got {n}")
    if x.min() == x.max() or y.min() == y.max():
        return 0.0  # a constant is independent of everything
    # doubled average ranks are integers even with ties
    U2 = np.rint(2.0 * rankdata(x)).astype(np.int64)
    V2 = np.rint(2.0 * rankdata(y)).astype(np.int64)
    counts = kernels.empirical_copula_counts(_dense_ranks(x), _dense_ranks(y))
    order = np.argsort(U2, kind="stable")
    value, _ = kernels.cos_core(counts[order], U2[order], V2[order])
    return float(value)


def cos_matrix(X) -> np.ndarray:
    """Pairwise CoS of the rows of a p x T matrix; entry (i, j) is ``cos_index(X[i], X[j])``."""
    X = np.asarray(X, dtype=float)
    p = X.shape[0]
    out = np.eye(p)
    for i in range(p):
        for j in range(p):
            if i != j:
                out[i, j] = cos_index(X[i], X[j])
    return out


def kernel_marginal_cdf(sample, z, h):
    """Gaussian-kernel estimate of the distribution function of ``sample`` at ``z``.

    Computes ``mean(Phi((z - sample) / h))``, nondecreasing in ``z``.
    """
    sample = _vector(sample, "sample")
    if sample.shape[0] < 2:
        raise ValueError("need at least 2 sample points")
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    out = kernels.smoothed_cdf(sample, z_arr.ravel(), float(h)).reshape(z_arr.shape)
    return out if np.ndim(z) else float(out[0])


def kernel_copula_density(pobs_matrix, point, H):
    """Product Gaussian-kernel copula density of 2 x T pseudo-observations at ``point``.

    ``point`` may be a 2-vector or a 2 x q array of query points. ``H`` is a
    :class:`Bandwidths` (its ``H`` field is used) or a pair of positive floats.
    """
    P = np.asarray(pobs_matrix, dtype=float)
    if P.ndim != 2 or P.shape[0] != 2:
        raise ValueError(f"expected a 2 x T pseudo-observation matrix, got shape {P.shape}")
    H1, H2 = (H.H if isinstance(H, Bandwidths) else H)
    if not (H1 > 0 and H2 > 0):
        raise ValueError("bandwidths must be positive")
    q = np.asarray(point, dtype=float)
    single = q.ndim == 1
    q = q.reshape(2, -1)
    out = kernels.copula_kde(P[0], P[1], q[0], q[1], float(H1), float(H2))
    return float(out[0]) if single else out


def marginal_bandwidth(sigma, T: int):
    """``h = (4/3)^(1/5) T^(-1/5) sigma`` for the kernel marginal CDF."""
    return _H_MARGINAL * T ** -0.2 * np.asarray(sigma, dtype=float)


def copula_bandwidth(Sigma, T: int, p: int = 2):
    """``H = (4/(p+2))^(1/(p+4)) T^(-1/(p+4)) Sigma`` for the kernel copula density."""
    return (4.0 / (p + 2)) ** (1.0 / (p + 4)) * T ** (-1.0 / (p + 4)) * np.asarray(Sigma, dtype=float)


def _check_signal_matrix(Y):
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ValueError(f"expected a p x T matrix, got shape {Y.shape}")
    if Y.shape[1] < 2:
        raise ValueError("need at least 2 samples per channel")
    if not np.all(np.isfinite(Y)):
        raise ValueError("signal matrix contains non-finite values")
    return Y


def smoothed_pseudo_observations(Y):
    """Kernel-CDF pseudo-observations of every channel of ``Y`` and the bandwidths used.

    Returns
    -------
    F : ndarray, shape (p, T)
        ``F[i, n]`` is the kernel estimate of the CDF of channel ``i`` at ``Y[i, n]``.
    bw : Bandwidths
    """
    Y = _check_signal_matrix(Y)
    p, T = Y.shape
    sigma = Y.std(axis=1, ddof=1)
    bad = np.flatnonzero(~(sigma > 0))
    if bad.size:
        raise DegenerateSignalError(f"channel {int(bad[0])} has zero variance")
    h = marginal_bandwidth(sigma, T)
    F = np.empty_like(Y)
    for i in range(p):
        F[i] = kernels.smoothed_cdf_at_samples(Y[i], float(h[i]))
    Sigma = F.std(axis=1, ddof=1)
    H = copula_bandwidth(Sigma, T, p)
    return F, Bandwidths(h=h, H=H)


def bandwidths(Y) -> Bandwidths:
    """Rule-of-thumb smoothing windows for the rows of a p x T signal matrix.

    ``h_i = (4/3)^(1/5) T^(-1/5) sd(Y_i)`` for the marginal CDFs and
    ``H_i = (4/(p+2))^(1/(p+4)) T^(-1/(p+4)) sd(F_i)`` for the copula density,
    where ``F_i`` are the kernel-CDF values of channel ``i`` at its samples.
    Standard deviations use ``ddof=1``.

    Raises
    ------
    DegenerateSignalError
        If a channel has zero variance.
    """
    return smoothed_pseudo_observations(Y)[1]
