"""Geometric MCMC samplers on position-dependent metrics."""

from ._core import (
    Banana,
    GaussianMixture,
    LogisticRegression,
    TargetModel,
    __version__,
    autocovariance,
    ess,
    ess_report,
    mixture_components,
    run_chain,
    synth_banana,
    synth_logistic,
    synth_mixture,
    tune_step_size,
)

__all__ = [
    "Banana",
    "GaussianMixture",
    "LogisticRegression",
    "TargetModel",
    "__version__",
    "autocovariance",
    "ess",
    "ess_report",
    "mixture_components",
    "run_chain",
    "synth_banana",
    "synth_logistic",
    "synth_mixture",
    "tune_step_size",
]
