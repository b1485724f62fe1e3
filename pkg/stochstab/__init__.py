"""
stochstab package

Core modules of the autolyap stochastic stability toolkit.
"""
from . import (
    errors,
    utils,
    linalg,
    model,
    ou,
    khasminskii,
    asymptotics,
    nonlinear,
    config,
    commands,
    verify,
    cli_common,
)

__all__ = [
    "errors",
    "utils",
    "linalg",
    "model",
    "ou",
    "khasminskii",
    "asymptotics",
    "nonlinear",
    "config",
    "commands",
    "verify",
    "cli_common",
]
