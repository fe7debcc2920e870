"""
Bivariate copula families used as source dependence models.

Five families are supported: Gumbel, Clayton, Frank, Gaussian and the
independence (product) copula. Every function is vectorised over ``u`` and
``v`` and is a pure function of its arguments.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri, owens_t

__all__ = [
    "CopulaFamily",
    "CopulaModel",
    "DENSITY_CLAMP",
    "copula_cdf",
    "copula_density",
    "copula_log_density",
    "conditional_cdf",
    "sample_copula",
    "pseudo_log_likelihood",
]

# Densities of Clayton/Gumbel diverge at the corners of the unit square.
DENSITY_CLAMP = 1e-6
# Frank and Gaussian collapse to the product copula below this |alpha|.
_INDEPENDENCE_TOL = 1e-8
_BISECTION_STEPS = 64


class CopulaFamily(str, enum.Enum):
    GUMBEL = "gumbel"
    CLAYTON = "clayton"
    FRANK = "frank"
    GAUSSIAN = "gaussian"
    INDEPENDENCE = "independence"

    @classmethod
    def parse(cls, value: "str | CopulaFamily") -> "CopulaFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown copula family {value!r}; expected one of {names}") from None

    @property
    def display_name(self) -> str:
        return self.value.capitalize()


def _check_alpha(family: CopulaFamily, alpha: float) -> None:
    if family is CopulaFamily.INDEPENDENCE:
        return
    if not np.isfinite(alpha):
        raise ValueError(f"{family.display_name} copula parameter must be finite, got {alpha}")
    if family is CopulaFamily.GUMBEL and alpha < 1.0:
        raise ValueError(f"Gumbel copula requires alpha >= 1, got {alpha}")
    if family is CopulaFamily.CLAYTON and alpha <= 0.0:
        raise ValueError(f"Clayton copula requires alpha > 0, got {alpha}")
    if family is CopulaFamily.FRANK and alpha == 0.0:
        raise ValueError("Frank copula requires alpha != 0")
    if family is CopulaFamily.GAUSSIAN and not -1.0 < alpha < 1.0:
        raise ValueError(f"Gaussian copula requires -1 < alpha < 1, got {alpha}")


@dataclass(frozen=True)
class CopulaModel:
    """A copula family together with its dependence parameter ``alpha``.

    ``alpha`` is ignored for the independence copula. Out-of-domain values
    raise ``ValueError`` at construction.
    """

    family: CopulaFamily
    alpha: float = 0.0

    def __post_init__(self):
        family = CopulaFamily.parse(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "alpha", float(self.alpha))
        _check_alpha(family, self.alpha)

    @property
    def is_independence(self) -> bool:
        """True when the model reduces to the product copula."""
        fam = self.family
        if fam is CopulaFamily.INDEPENDENCE:
            return True
        if fam in (CopulaFamily.FRANK, CopulaFamily.GAUSSIAN):
            return abs(self.alpha) < _INDEPENDENCE_TOL
        if fam is CopulaFamily.GUMBEL:
            return self.alpha == 1.0
        return False

    def __str__(self):
        if self.family is CopulaFamily.INDEPENDENCE:
            return "Independence"
        return f"{self.family.display_name}(alpha={self.alpha:g})"


def _as_arrays(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.broadcast_arrays(u, v)


# ---------------------------------------------------------------------------
# CDF
# ---------------------------------------------------------------------------


def _bivariate_normal_cdf(h, k, rho):
    """P(Z1 <= h, Z2 <= k) for a standard bivariate normal, via Owen's T."""
    h, k = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float))
    s = np.sqrt(1.0 - rho * rho)
    out = np.empty(h.shape)
    both_zero = (h == 0) & (k == 0)
    out[both_zero] = 0.25 + np.arcsin(rho) / (2.0 * np.pi)
    m = ~both_zero
    hm, km = h[m], k[m]
    with np.errstate(divide="ignore", invalid="ignore"):
        ah = np.where(hm == 0, np.copysign(np.inf, km - rho * hm), (km - rho * hm) / (hm * s))
        ak = np.where(km == 0, np.copysign(np.inf, hm - rho * km), (hm - rho * km) / (km * s))
    beta = np.where((hm * km > 0) | ((hm * km == 0) & (hm + km >= 0)), 0.0, 0.5)
    out[m] = 0.5 * (ndtr(hm) + ndtr(km)) - owens_t(hm, ah) - owens_t(km, ak) - beta
    return np.clip(out, 0.0, 1.0)


def copula_cdf(model: CopulaModel, u, v):
    """Evaluate the copula distribution function C(u, v) on [0, 1]^2."""
    u, v = _as_arrays(u, v)
    if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)):
        raise ValueError("copula arguments must lie in [0, 1]")
    if model.is_independence:
        return u * v

    out = np.minimum(u, v)  # exact value whenever one argument is 1
    edge = (u == 0) | (v == 0)
    inner = ~edge & (u < 1) & (v < 1)
    out = np.where(edge, 0.0, out)
    if not inner.any():
        return out
    a = model.alpha
    ui, vi = u[inner], v[inner]
    fam = model.family

    if fam is CopulaFamily.GUMBEL:
        s = (-np.log(ui)) ** a + (-np.log(vi)) ** a
        val = np.exp(-(s ** (1.0 / a)))
    elif fam is CopulaFamily.CLAYTON:
        # (u^-a + v^-a - 1)^(-1/a) written in logs to survive large a
        lu, lv = -a * np.log(ui), -a * np.log(vi)
        big = np.maximum(lu, lv)
        log_sum = big + np.log(np.exp(lu - big) + np.exp(lv - big) - np.exp(-big))
        val = np.exp(-log_sum / a)
    elif fam is CopulaFamily.FRANK:
        num = np.expm1(-a * ui) * np.expm1(-a * vi)
        val = -np.log1p(num / np.expm1(-a)) / a
    else:  # Gaussian
        val = _bivariate_normal_cdf(ndtri(ui), ndtri(vi), a)
    # Frechet-Hoeffding bounds absorb round-off
    lower = np.maximum(ui + vi - 1.0, 0.0)
    out[inner] = np.clip(val, lower, np.minimum(ui, vi))
    return out


# ---------------------------------------------------------------------------
# Density
# ---------------------------------------------------------------------------


def _clamp(u, v):
    lo, hi = DENSITY_CLAMP, 1.0 - DENSITY_CLAMP
    return np.clip(u, lo, hi), np.clip(v, lo, hi)


def copula_log_density(model: CopulaModel, u, v):
    """Natural log of the copula density, with (u, v) clamped away from the corners."""
    u, v = _as_arrays(u, v)
    u, v = _clamp(u, v)
    if model.is_independence:
        return np.zeros(u.shape)
    a = model.alpha
    fam = model.family

    if fam is CopulaFamily.GUMBEL:
        lx, ly = np.log(-np.log(u)), np.log(-np.log(v))
        log_s = np.logaddexp(a * lx, a * ly)
        s_root = np.exp(log_s / a)
        return (
            -s_root
            - np.log(u)
            - np.log(v)
            + (a - 1.0) * (lx + ly)
            + (1.0 / a - 2.0) * log_s
            + np.log(s_root + a - 1.0)
        )
    if fam is CopulaFamily.CLAYTON:
        lu, lv = np.log(u), np.log(v)
        big = np.maximum(-a * lu, -a * lv)
        log_t = big + np.log(np.exp(-a * lu - big) + np.exp(-a * lv - big) - np.exp(-big))
        return np.log1p(a) - (a + 1.0) * (lu + lv) - (2.0 + 1.0 / a) * log_t
    if fam is CopulaFamily.FRANK:
        em = -np.expm1(-a)  # 1 - e^{-a}
        den = em - (-np.expm1(-a * u)) * (-np.expm1(-a * v))
        return np.log(a * em) - a * (u + v) - 2.0 * np.log(np.abs(den))
    # Gaussian
    x, y = ndtri(u), ndtri(v)
    r2 = 1.0 - a * a
    return -0.5 * np.log(r2) - (a * a * (x * x + y * y) - 2.0 * a * x * y) / (2.0 * r2)


def copula_density(model: CopulaModel, u, v):
    """Copula density c(u, v) = d^2 C / du dv (clamped at the corners, always finite)."""
    return np.exp(copula_log_density(model, u, v))


def conditional_cdf(model: CopulaModel, u, v):
    """h-function P(V <= v | U = u), the partial derivative of C in u."""
    u, v = _as_arrays(u, v)
    u, v = _clamp(u, v)
    if model.is_independence:
        return v.copy()
    a = model.alpha
    fam = model.family
    if fam is CopulaFamily.GUMBEL:
        lx, ly = np.log(-np.log(u)), np.log(-np.log(v))
        log_s = np.logaddexp(a * lx, a * ly)
        log_h = -np.exp(log_s / a) - np.log(u) + (a - 1.0) * lx + (1.0 / a - 1.0) * log_s
        return np.exp(log_h)
    if fam is CopulaFamily.CLAYTON:
        t = u ** (-a) + v ** (-a) - 1.0
        return u ** (-a - 1.0) * t ** (-1.0 - 1.0 / a)
    if fam is CopulaFamily.FRANK:
        eu, ev = np.expm1(-a * u), np.expm1(-a * v)
        return (eu + 1.0) * ev / (np.expm1(-a) + eu * ev)
    x, y = ndtri(u), ndtri(v)
    return ndtr((y - a * x) / np.sqrt(1.0 - a * a))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

_OPEN_HI = np.nextafter(1.0, 0.0)
_OPEN_LO = np.finfo(float).tiny


def _inverse_conditional(model: CopulaModel, u, w):
    a = model.alpha
    fam = model.family
    if fam is CopulaFamily.CLAYTON:
        return (u ** (-a) * (w ** (-a / (1.0 + a)) - 1.0) + 1.0) ** (-1.0 / a)
    if fam is CopulaFamily.FRANK:
        b = w * np.expm1(-a) / (w + (1.0 - w) * np.exp(-a * u))
        return -np.log1p(b) / a
    if fam is CopulaFamily.GAUSSIAN:
        return ndtr(a * ndtri(u) + np.sqrt(1.0 - a * a) * ndtri(w))
    # Gumbel has no closed-form inverse; bisect the monotone h-function
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = conditional_cdf(model, u, mid) < w
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def sample_copula(model: CopulaModel, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` pairs from the copula by conditional inversion.

    Parameters
    ----------
    model : CopulaModel
    n : int
        Number of pairs, at least 1.
    seed : int
        Seed for a local :func:`numpy.random.default_rng`; equal seeds give
        identical output.

    Returns
    -------
    ndarray of shape (n, 2)
        Columns are ``u`` and ``v``, each strictly inside (0, 1).
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    uw = np.clip(rng.random((n, 2)), _OPEN_LO, _OPEN_HI)
    u, w = uw[:, 0], uw[:, 1]
    if model.is_independence:
        v = w
    elif model.family is CopulaFamily.GAUSSIAN:
        # Cholesky factor of [[1, a], [a, 1]] applied to normal scores
        a = model.alpha
        z1, z2 = ndtri(u), ndtri(w)
        v = ndtr(a * z1 + np.sqrt(1.0 - a * a) * z2)
    else:
        v = _inverse_conditional(model, u, w)
    v = np.clip(v, _OPEN_LO, _OPEN_HI)
    return np.column_stack([u, v])


def pseudo_log_likelihood(model: CopulaModel, pobs) -> float:
    """Sum of copula log-densities over pseudo-observations.

    ``pobs`` is a :class:`~ccca.empirical.PseudoObservations` or any
    ``(u, v)`` pair of equal-length arrays.
    """
    u, v = (pobs.u, pobs.v) if hasattr(pobs, "u") else pobs
    u = np.asarray(u, float)
    if u.size == 0:
        raise ValueError("pseudo-observations are empty")
    return float(np.sum(copula_log_density(model, u, v)))
