"""
Dependent-source separation by copula KL minimisation.

``ccca_separate`` runs gradient descent on the de-mixing matrix ``W``,
re-estimating the source-copula parameter from the CoS index of the current
estimates ``Y = W X`` at every iteration. ``cca_separate`` is the baseline
that re-estimates it by maximum pseudo-likelihood instead.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import rankdata

from . import metrics
from ._backend import kernels
from .copulas import DENSITY_CLAMP, CopulaFamily, CopulaModel, copula_log_density, pseudo_log_likelihood
from .empirical import MIN_COS_SAMPLES, cos_index, smoothed_pseudo_observations
from .exceptions import SingularMatrixError
from .regression import RegressionCoefficients, predict_alpha

__all__ = [
    "AlphaUpdate",
    "SeparationConfig",
    "IterationRecord",
    "SeparationTrace",
    "kl_divergence_estimate",
    "kl_gradient",
    "ccca_separate",
    "cca_separate",
    "validate_signals",
    "CCA_ALPHA_BOUNDS",
]

_DET_TOL = 1e-12

# Search intervals for the pseudo-likelihood alpha update of the baseline.
CCA_ALPHA_BOUNDS = {
    CopulaFamily.GUMBEL: (1.0, 20.0),
    CopulaFamily.CLAYTON: (0.001, 20.0),
    CopulaFamily.FRANK: (-20.0, 20.0),
    CopulaFamily.GAUSSIAN: (-0.99, 0.99),
}


class AlphaUpdate(str, enum.Enum):
    PER_ITERATION = "per_iteration"
    ONCE_FROM_OBSERVATIONS = "once_from_observations"


@dataclass(frozen=True)
class SeparationConfig:
    family: CopulaFamily
    coeffs: RegressionCoefficients | None = None
    mu: float = 0.1
    epsilon: float = 1e-3
    max_iter: int = 200
    fd_step: float = 1e-4
    alpha_update: AlphaUpdate = AlphaUpdate.PER_ITERATION

    def __post_init__(self):
        object.__setattr__(self, "family", CopulaFamily.parse(self.family))
        object.__setattr__(self, "alpha_update", AlphaUpdate(self.alpha_update))
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.fd_step > 0:
            raise ValueError(f"fd_step must be positive, got {self.fd_step}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.coeffs is not None and self.coeffs.family is not self.family:
            raise ValueError(
                f"coefficients were trained for {self.coeffs.family.value}, not {self.family.value}"
            )

    def as_dict(self):
        return {
            "family": self.family.value,
            "mu": self.mu,
            "epsilon": self.epsilon,
            "max_iter": int(self.max_iter),
            "fd_step": self.fd_step,
            "alpha_update": self.alpha_update.value,
        }


@dataclass
class IterationRecord:
    iteration: int
    kl: float
    cos: tuple
    alpha: float | None
    step_norm: float
    W: np.ndarray
    snr_db: np.ndarray | None = None
    isr: float | None = None


@dataclass
class SeparationTrace:
    method: str
    records: list = field(default_factory=list)
    converged: bool = False
    status: str = "running"
    best_iteration: int | None = None
    wall_time: float = 0.0

    def __len__(self):
        return len(self.records)

    @property
    def kl(self):
        return np.array([r.kl for r in self.records])

    @property
    def snr(self):
        if not self.records or self.records[0].snr_db is None:
            return None
        return np.array([r.snr_db for r in self.records])


def validate_signals(X, name="X"):
    """Check a 2 x T finite signal matrix with T >= 10 and return it as float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a p x T matrix, got shape {X.shape}")
    p, T = X.shape
    if p != 2:
        raise ValueError(f"{name} has {p} channels; only p = 2 is supported (run pairs separately)")
    if T < MIN_COS_SAMPLES:
        raise ValueError(f"{name} needs at least {MIN_COS_SAMPLES} samples, got {T}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def kl_divergence_estimate(Y, model: CopulaModel) -> float:
    """Sample-average log ratio of the kernel copula density of ``Y`` to the model density.

    Both densities are evaluated at the kernel-CDF pseudo-observations of
    ``Y``, clamped to ``[1e-6, 1 - 1e-6]``.
    """
    Y = validate_signals(Y, "Y")
    F, bw = smoothed_pseudo_observations(Y)
    U = np.clip(F, DENSITY_CLAMP, 1.0 - DENSITY_CLAMP)
    c_hat = kernels.copula_kde_at_samples(U[0], U[1], float(bw.H[0]), float(bw.H[1]))
    return float(np.mean(np.log(c_hat) - copula_log_density(model, U[0], U[1])))


def _nonsingular(W):
    return abs(np.linalg.det(W)) > _DET_TOL


def default_fd_step(W, base=1e-4):
    return base * max(1.0, float(np.abs(W).sum(axis=1).max()))


def kl_gradient(W, X, model: CopulaModel, fd_step: float | None = None) -> np.ndarray:
    """Central finite-difference gradient of the KL estimate with respect to ``W``.

    ``fd_step`` defaults to ``1e-4 * max(1, ||W||_inf)``. A perturbation that
    makes ``W`` singular is retried once with a ten times smaller step.
    """
    W = np.asarray(W, dtype=float)
    X = validate_signals(X)
    if not _nonsingular(W):
        raise SingularMatrixError(f"de-mixing matrix is singular (det={np.linalg.det(W):.3g})")
    if fd_step is None:
        fd_step = default_fd_step(W)
    p = W.shape[0]
    grad = np.empty_like(W)
    for i in range(p):
        for j in range(p):
            delta = fd_step
            for attempt in range(2):
                Wp, Wm = W.copy(), W.copy()
                Wp[i, j] += delta
                Wm[i, j] -= delta
                if _nonsingular(Wp) and _nonsingular(Wm):
                    break
                delta /= 10.0
            else:
                raise SingularMatrixError(f"perturbing W[{i}, {j}] makes it singular")
            grad[i, j] = (kl_divergence_estimate(Wp @ X, model) - kl_divergence_estimate(Wm @ X, model)) / (
                2.0 * delta
            )
    return grad


def _normalize_rows(W):
    return W / np.linalg.norm(W, axis=1, keepdims=True)


def _concordance_sign(y1, y2):
    r1, r2 = rankdata(y1), rankdata(y2)
    return -1.0 if np.corrcoef(r1, r2)[0, 1] < 0 else 1.0


def _cos_pair(Y):
    return (cos_index(Y[0], Y[1]), cos_index(Y[1], Y[0]))


def _alpha_from_cos(Y, family, coeffs, theta):
    alpha = predict_alpha(coeffs, 0.5 * (theta[0] + theta[1]))
    if family in (CopulaFamily.GAUSSIAN, CopulaFamily.FRANK):
        alpha *= _concordance_sign(Y[0], Y[1])
    return alpha


def _alpha_from_likelihood(Y, family):
    n = Y.shape[1]
    u, v = rankdata(Y[0]) / (n + 1), rankdata(Y[1]) / (n + 1)
    lo, hi = CCA_ALPHA_BOUNDS[family]

    def nll(a):
        if family is CopulaFamily.FRANK and a == 0.0:
            a = 1e-9
        return -pseudo_log_likelihood(CopulaModel(family, a), (u, v))

    res = minimize_scalar(nll, bounds=(lo, hi), method="bounded", options={"xatol": 1e-4})
    alpha = float(res.x)
    return 1e-9 if family is CopulaFamily.FRANK and alpha == 0.0 else alpha


def _run(X, config, method, alpha_step, sources=None, mixing=None, W0=None):
    X = validate_signals(X)
    if sources is not None:
        sources = validate_signals(sources, "sources")
        if sources.shape != X.shape:
            raise ValueError("sources must have the same shape as X")
    p = X.shape[0]
    W = np.eye(p) if W0 is None else np.array(W0, dtype=float)
    trace = SeparationTrace(method=method)
    start = time.perf_counter()
    fixed_alpha = None
    if config.family is not CopulaFamily.INDEPENDENCE and config.alpha_update is AlphaUpdate.ONCE_FROM_OBSERVATIONS:
        fixed_alpha = alpha_step(X)[1]

    for k in range(int(config.max_iter)):
        Y = W @ X
        if config.family is CopulaFamily.INDEPENDENCE:
            theta, alpha = _cos_pair(Y), None
            model = CopulaModel(CopulaFamily.INDEPENDENCE)
        else:
            theta, alpha = alpha_step(Y)
            if fixed_alpha is not None:
                alpha = fixed_alpha
            model = CopulaModel(config.family, alpha)
        kl = kl_divergence_estimate(Y, model)
        grad = kl_gradient(W, X, model, default_fd_step(W, config.fd_step))
        W_next = _normalize_rows(W - config.mu * grad)
        step = float(np.linalg.norm(W_next - W))
        record = IterationRecord(k, kl, theta, alpha, step, W.copy())
        if sources is not None:
            record.snr_db = metrics.snr_db(Y, sources)
        if mixing is not None:
            record.isr = metrics.isr(W @ mixing)
        trace.records.append(record)
        if not np.all(np.isfinite(W_next)) or not _nonsingular(W_next):
            trace.status = "singular"
            trace.wall_time = time.perf_counter() - start
            err = SingularMatrixError(
                f"{method}: de-mixing matrix became singular at iteration {k} "
                f"(det={np.linalg.det(W_next) if np.all(np.isfinite(W_next)) else float('nan'):.3g})"
            )
            err.trace = trace  # partial trace for reporting
            raise err
        W = W_next
        if step < config.epsilon:
            trace.converged = True
            break

    trace.wall_time = time.perf_counter() - start
    if trace.converged:
        trace.status = "converged"
        trace.best_iteration = len(trace.records) - 1
    else:
        trace.status = "max_iter"
        best = int(np.argmin(trace.kl))
        trace.best_iteration = best
        W = trace.records[best].W.copy()
    return W, W @ X, trace


def ccca_separate(X, config: SeparationConfig, sources=None, mixing=None):
    """Estimate a de-mixing matrix with the CoS-regression alpha update.

    Parameters
    ----------
    X : array, shape (2, T)
        Observed mixtures, one channel per row.
    config : SeparationConfig
        ``config.coeffs`` must be set unless the family is independence.
    sources, mixing : array, optional
        Ground truth, used only to log per-iteration SNR and ISR.

    Returns
    -------
    W : ndarray (2, 2)
        Last iterate if converged, otherwise the lowest-KL iterate.
    Y : ndarray (2, T)
        ``W @ X``.
    trace : SeparationTrace
        One record per iteration; ``trace.converged`` flags the exit reason.
    """
    fam = config.family
    if fam is not CopulaFamily.INDEPENDENCE and config.coeffs is None:
        raise ValueError(f"CoS regression coefficients are required for the {fam.value} family")

    def step(Y):
        theta = _cos_pair(Y)
        return theta, _alpha_from_cos(Y, fam, config.coeffs, theta)

    return _run(X, config, "ccca", step, sources, mixing)


def cca_separate(X, config: SeparationConfig, sources=None, mixing=None):
    """Baseline separation with a maximum pseudo-likelihood alpha update.

    Identical to :func:`ccca_separate` except that ``alpha`` is re-fitted at
    every iteration by bounded 1-D maximisation of the copula
    pseudo-log-likelihood of the current estimates; ``config.coeffs`` is
    ignored.
    """
    fam = config.family
    config = replace(config, coeffs=None)

    def step(Y):
        return _cos_pair(Y), _alpha_from_likelihood(Y, fam)

    return _run(X, config, "cca", step, sources, mixing)
