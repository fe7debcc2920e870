"""Copula component analysis with a CoS-driven dependence update.

Blind separation of two dependent sources: the de-mixing matrix is found by
minimising a kernel estimate of the KL divergence between the copula of the
outputs and a parametric source copula whose parameter is re-estimated from
the CoS dependence index. Hot loops run in a compiled extension when it is
available (``BACKEND == "cython"``) and in NumPy otherwise.
"""

from ._backend import BACKEND
from .copulas import (
    CopulaFamily,
    CopulaModel,
    conditional_cdf,
    copula_cdf,
    copula_density,
    copula_log_density,
    pseudo_log_likelihood,
    sample_copula,
)
from .empirical import (
    Bandwidths,
    PseudoObservations,
    bandwidths,
    copula_bandwidth,
    marginal_bandwidth,
    cos_index,
    cos_matrix,
    empirical_copula,
    frechet_lambda,
    kernel_copula_density,
    kernel_marginal_cdf,
    pseudo_observations,
    smoothed_pseudo_observations,
)
from .exceptions import CCCAError, DataFormatError, DegenerateSignalError, SingularMatrixError
from .metrics import ChannelAssignment, isr, match_sources, snr_db
from .regression import (
    RegressionCoefficients,
    TrainingGrid,
    default_grid,
    fit_alpha_regression,
    generate_training_data,
    predict_alpha,
    read_coefficients,
    train_all,
    write_coefficients,
)
from .separation import (
    AlphaUpdate,
    SeparationConfig,
    SeparationTrace,
    cca_separate,
    ccca_separate,
    kl_divergence_estimate,
    kl_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AlphaUpdate",
    "Bandwidths",
    "CCCAError",
    "ChannelAssignment",
    "CopulaFamily",
    "CopulaModel",
    "DataFormatError",
    "DegenerateSignalError",
    "PseudoObservations",
    "RegressionCoefficients",
    "SeparationConfig",
    "SeparationTrace",
    "SingularMatrixError",
    "TrainingGrid",
    "bandwidths",
    "copula_bandwidth",
    "marginal_bandwidth",
    "cca_separate",
    "ccca_separate",
    "conditional_cdf",
    "copula_cdf",
    "copula_density",
    "copula_log_density",
    "cos_index",
    "cos_matrix",
    "default_grid",
    "empirical_copula",
    "fit_alpha_regression",
    "frechet_lambda",
    "generate_training_data",
    "isr",
    "kernel_copula_density",
    "kernel_marginal_cdf",
    "kl_divergence_estimate",
    "kl_gradient",
    "match_sources",
    "predict_alpha",
    "pseudo_log_likelihood",
    "pseudo_observations",
    "read_coefficients",
    "sample_copula",
    "smoothed_pseudo_observations",
    "snr_db",
    "train_all",
    "write_coefficients",
]
