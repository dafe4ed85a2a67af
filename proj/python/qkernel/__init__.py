"""Fidelity-kernel simulation and analysis.

Thin bindings over the C++ library: feature-map embeddings, fidelity
kernels, normalized spectra, geometric difference, an SMO SVM, bandwidth
tuning and the experiment runner.
"""

from ._core import (
    NumericalError,
    SvmModel,
    ValidationError,
    __version__,
    build_kernel,
    cli,
    cross_kernel,
    default_config,
    default_lambda_grid,
    embed,
    gamma_max,
    gamma_max_curve,
    geometric_difference,
    iqp_phases,
    log_grid,
    mat_sqrt_psd,
    model_complexity,
    normalized_spectrum,
    pca_reduce,
    regularized_inverse,
    run_experiment,
    sample_dataset,
    sample_gennorm,
    standardize_normalize,
    svm_train,
)

__all__ = [
    "NumericalError",
    "SvmModel",
    "ValidationError",
    "__version__",
    "build_kernel",
    "cli",
    "cross_kernel",
    "default_config",
    "default_lambda_grid",
    "embed",
    "gamma_max",
    "gamma_max_curve",
    "geometric_difference",
    "iqp_phases",
    "log_grid",
    "mat_sqrt_psd",
    "model_complexity",
    "normalized_spectrum",
    "pca_reduce",
    "regularized_inverse",
    "run_experiment",
    "sample_dataset",
    "sample_gennorm",
    "standardize_normalize",
    "svm_train",
]
