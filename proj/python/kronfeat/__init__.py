"""Kronecker-product random feature maps for covariance descriptors."""

from ._core import (
    ContractError,
    DataError,
    DescriptorError,
    DivergenceError,
    DomainError,
    Error,
    FeatureMap,
    LinearSvm,
    NumericError,
    TooLargeError,
    c_rho,
    kron_trace,
    log_cov_descriptor,
    radial_descriptors,
    rbf_exact,
    sample_map,
    sweep,
    sym_eigh,
    sym_log,
    train_linear_svm,
    variance_bound,
)

__all__ = [
    "ContractError",
    "DataError",
    "DescriptorError",
    "DivergenceError",
    "DomainError",
    "Error",
    "FeatureMap",
    "LinearSvm",
    "NumericError",
    "TooLargeError",
    "c_rho",
    "kron_trace",
    "log_cov_descriptor",
    "radial_descriptors",
    "rbf_exact",
    "sample_map",
    "sweep",
    "sym_eigh",
    "sym_log",
    "train_linear_svm",
    "variance_bound",
]
