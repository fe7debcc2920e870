"""
Quadratic map from the CoS index to a copula dependence parameter.

For each family, ``alpha ~ a1 * cos**2 + a2 * cos + a3`` is fitted by least
squares on CoS values estimated from seeded copula samples over a grid of
``alpha``. Coefficients are persisted in an INI-style text file, one section
per family.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .copulas import CopulaFamily, CopulaModel, sample_copula
from .empirical import cos_index
from .exceptions import DataFormatError

__all__ = [
    "TRAINING_RANGES",
    "FAMILY_DOMAINS",
    "RegressionCoefficients",
    "TrainingGrid",
    "default_grid",
    "generate_training_data",
    "fit_alpha_regression",
    "predict_alpha",
    "train_all",
    "write_coefficients",
    "read_coefficients",
    "format_coefficients",
]

COEFFICIENTS_FORMAT_VERSION = 1

TRAINING_RANGES = {
    CopulaFamily.GAUSSIAN: (-0.99, 0.99),
    CopulaFamily.FRANK: (0.001, 20.0),
    CopulaFamily.CLAYTON: (0.001, 20.0),
    CopulaFamily.GUMBEL: (1.0, 20.0),
}

# Closed intervals usable for clamping; open ends are pulled in slightly.
FAMILY_DOMAINS = {
    CopulaFamily.GAUSSIAN: (-1.0 + 1e-6, 1.0 - 1e-6),
    CopulaFamily.FRANK: (-np.inf, np.inf),
    CopulaFamily.CLAYTON: (1e-6, np.inf),
    CopulaFamily.GUMBEL: (1.0, np.inf),
}

DEFAULT_GRID_POINTS = 50
DEFAULT_SAMPLES = 5000


@dataclass(frozen=True)
class RegressionCoefficients:
    family: CopulaFamily
    a1: float
    a2: float
    a3: float
    alpha_min: float
    alpha_max: float
    seed: int | None = None
    samples_per_point: int | None = None
    grid_points: int | None = None
    residual_norm: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", CopulaFamily.parse(self.family))
        if not all(np.isfinite([self.a1, self.a2, self.a3])):
            raise ValueError("regression coefficients must be finite")
        if not self.alpha_min <= self.alpha_max:
            raise ValueError("alpha_min must not exceed alpha_max")

    @property
    def coef(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3])


@dataclass(frozen=True)
class TrainingGrid:
    family: CopulaFamily
    alpha_values: tuple
    samples_per_point: int = DEFAULT_SAMPLES
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", CopulaFamily.parse(self.family))
        object.__setattr__(self, "alpha_values", tuple(float(a) for a in self.alpha_values))
        if self.samples_per_point < 100:
            raise ValueError("samples_per_point must be >= 100")
        if not self.alpha_values:
            raise ValueError("training grid is empty")
        for a in self.alpha_values:
            CopulaModel(self.family, a)  # validates the domain


def default_grid(family, points=DEFAULT_GRID_POINTS, samples_per_point=DEFAULT_SAMPLES, seed=0):
    """Evenly spaced grid over the family's training range."""
    family = CopulaFamily.parse(family)
    lo, hi = TRAINING_RANGES[family]
    return TrainingGrid(family, tuple(np.linspace(lo, hi, points)), samples_per_point, seed)


def _fold(family, alpha):
    # CoS is unsigned, so negative Gaussian dependence maps onto its magnitude.
    return abs(alpha) if family is CopulaFamily.GAUSSIAN else alpha


def generate_training_data(grid: TrainingGrid):
    """Return ``[(cos, alpha), ...]``, one pair per grid value.

    Grid point ``i`` is sampled with seed ``grid.seed + i``. Gaussian grid
    values are folded to ``|alpha|`` because the index does not carry a sign.
    """
    out = []
    for i, alpha in enumerate(grid.alpha_values):
        uv = sample_copula(CopulaModel(grid.family, alpha), grid.samples_per_point, grid.seed + i)
        out.append((cos_index(uv[:, 0], uv[:, 1]), _fold(grid.family, alpha)))
    return out


def fit_alpha_regression(data, family=CopulaFamily.GAUSSIAN, alpha_range=None, **meta):
    """Least-squares fit of ``alpha = a1 c^2 + a2 c + a3`` on ``(c, alpha)`` pairs.

    Parameters
    ----------
    data : sequence of (cos, alpha)
    family : CopulaFamily or str
    alpha_range : (float, float), optional
        Trained range stored with the coefficients; defaults to the span of
        the data.
    **meta
        ``seed``, ``samples_per_point``, ``grid_points`` recorded verbatim.

    Raises
    ------
    ValueError
        If fewer than three distinct CoS values are given.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("data must be a sequence of (cos, alpha) pairs")
    c, alpha = arr[:, 0], arr[:, 1]
    if np.unique(c).size < 3:
        raise ValueError("rank-deficient basis: need at least 3 distinct CoS values")
    basis = np.column_stack([c * c, c, np.ones_like(c)])
    coef, *_ = np.linalg.lstsq(basis, alpha, rcond=None)
    resid = float(np.linalg.norm(alpha - basis @ coef))
    family = CopulaFamily.parse(family)
    if alpha_range is None:
        alpha_range = (float(alpha.min()), float(alpha.max()))
    return RegressionCoefficients(
        family, float(coef[0]), float(coef[1]), float(coef[2]),
        float(alpha_range[0]), float(alpha_range[1]), residual_norm=resid, **meta,
    )


def predict_alpha(coeffs: RegressionCoefficients, cos: float) -> float:
    """Evaluate the fitted quadratic and clamp to the trained range and family domain."""
    raw = coeffs.a1 * cos * cos + coeffs.a2 * cos + coeffs.a3
    lo, hi = coeffs.alpha_min, coeffs.alpha_max
    dlo, dhi = FAMILY_DOMAINS.get(coeffs.family, (-np.inf, np.inf))
    lo, hi = max(lo, dlo), min(hi, dhi)
    value = float(np.clip(raw, lo, hi))
    if coeffs.family is CopulaFamily.FRANK and value == 0.0:
        value = 1e-9  # Frank excludes exactly 0; this is treated as independence
    return value


def train_all(families=None, points=DEFAULT_GRID_POINTS, samples_per_point=DEFAULT_SAMPLES, seed=0):
    """Generate data and fit coefficients for each family (default: all four parametric)."""
    families = [CopulaFamily.parse(f) for f in (families or TRAINING_RANGES)]
    out = {}
    for fam in families:
        if fam not in TRAINING_RANGES:
            raise ValueError(f"no training range for family {fam.value!r}")
        grid = default_grid(fam, points, samples_per_point, seed)
        data = generate_training_data(grid)
        out[fam] = fit_alpha_regression(
            data, fam, TRAINING_RANGES[fam],
            seed=seed, samples_per_point=samples_per_point, grid_points=points,
        )
    return out


# ---------------------------------------------------------------------------
# Coefficient file I/O
# ---------------------------------------------------------------------------

_FIELDS = ("a1", "a2", "a3", "alpha_min", "alpha_max")
_META_INT = ("seed", "samples_per_point", "grid_points")


def format_coefficients(coeffs) -> str:
    """Serialise a ``{family: RegressionCoefficients}`` mapping (or iterable) to text."""
    items = coeffs.values() if isinstance(coeffs, dict) else coeffs
    buf = io.StringIO()
    buf.write("# CoS -> alpha quadratic regression coefficients\n")
    buf.write(f"[meta]\nformat_version = {COEFFICIENTS_FORMAT_VERSION}\n\n")
    for rc in items:
        buf.write(f"[{rc.family.value}]\n")
        for name in _FIELDS:
            buf.write(f"{name} = {getattr(rc, name)!r}\n")
        for name in _META_INT:
            val = getattr(rc, name)
            if val is not None:
                buf.write(f"{name} = {int(val)}\n")
        if rc.residual_norm is not None:
            buf.write(f"residual_norm = {rc.residual_norm!r}\n")
        buf.write("\n")
    return buf.getvalue()


def write_coefficients(coeffs, path) -> None:
    text = format_coefficients(coeffs)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write coefficients to {os.fspath(path)!r}: {exc.strerror}") from exc


def read_coefficients(path) -> dict:
    """Parse a coefficients file into ``{CopulaFamily: RegressionCoefficients}``."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise OSError(f"cannot read coefficients from {os.fspath(path)!r}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise DataFormatError(f"{os.fspath(path)}: {exc}") from exc
    version = parser.get("meta", "format_version", fallback=None)
    if version is None or int(version) != COEFFICIENTS_FORMAT_VERSION:
        raise DataFormatError(f"{os.fspath(path)}: unsupported coefficients format version {version!r}")
    out = {}
    for section in parser.sections():
        if section == "meta":
            continue
        sec = parser[section]
        try:
            fam = CopulaFamily.parse(section)
            kwargs = {name: float(sec[name]) for name in _FIELDS}
            for name in _META_INT:
                if name in sec:
                    kwargs[name] = int(sec[name])
            if "residual_norm" in sec:
                kwargs["residual_norm"] = float(sec["residual_norm"])
            out[fam] = RegressionCoefficients(fam, **kwargs)
        except (KeyError, ValueError) as exc:
            raise DataFormatError(f"{os.fspath(path)}: bad record [{section}]: {exc}") from exc
    return out
