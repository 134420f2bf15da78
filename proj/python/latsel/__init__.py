"""Exact model selection with combinatorial support penalties."""

from ._core import (
    ConfigError,
    Instance,
    InvalidArgument,
    __version__,
    lovasz_extension,
    make_instance,
    penalty_value,
    project_simplex,
    run_experiment,
    solve,
)

__all__ = [
    "ConfigError",
    "Instance",
    "InvalidArgument",
    "__version__",
    "lovasz_extension",
    "make_instance",
    "penalty_value",
    "project_simplex",
    "run_experiment",
    "solve",
]
