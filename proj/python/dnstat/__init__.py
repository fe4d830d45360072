"""Deferred Nörlund statistical convergence of random-variable sequences."""

from ._core import (
    ConfigError,
    DegenerateNormalizer,
    DomainError,
    Error,
    Model,
    ModelError,
    Schedule,
    ScheduleError,
    Weights,
    __version__,
    abs_moment,
    cdf,
    dn_mean,
    exceedance_prob,
    korovkin,
    mkz_apply,
    normalizer,
    run_cli,
    sample_exceedance,
    st_dndc,
    st_dnm,
    st_dnp,
    uniform_grid,
)

__all__ = [
    "ConfigError",
    "DegenerateNormalizer",
    "DomainError",
    "Error",
    "Model",
    "ModelError",
    "Schedule",
    "ScheduleError",
    "Weights",
    "__version__",
    "abs_moment",
    "cdf",
    "dn_mean",
    "exceedance_prob",
    "korovkin",
    "mkz_apply",
    "normalizer",
    "run_cli",
    "sample_exceedance",
    "st_dndc",
    "st_dnm",
    "st_dnp",
    "uniform_grid",
]
