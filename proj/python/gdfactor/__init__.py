"""Gradient descent for overparametrized asymmetric matrix factorization."""

from ._gdfactor import (
    InvalidArgument,
    NumericalFailure,
    __version__,
    frobenius_norm,
    gaussian_matrix,
    gd_step,
    init_factors,
    operator_norm,
    psd_toy,
    psd_toy_stopping_time,
    relative_gap,
    rho_cap_log10,
    run,
    schedule,
    signal_ratio,
    stepsize_cap,
    svd,
    synth_matrix,
    truncate_rank,
)

__all__ = [
    "InvalidArgument",
    "NumericalFailure",
    "__version__",
    "frobenius_norm",
    "gaussian_matrix",
    "gd_step",
    "init_factors",
    "operator_norm",
    "psd_toy",
    "psd_toy_stopping_time",
    "relative_gap",
    "rho_cap_log10",
    "run",
    "schedule",
    "signal_ratio",
    "stepsize_cap",
    "svd",
    "synth_matrix",
    "truncate_rank",
]
