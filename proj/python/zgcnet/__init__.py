"""Zigzag persistence features and graph forecasting (C++ core)."""

from ._core import (
    betti_violations,
    gen_synthetic,
    grad_check,
    render_zpi,
    run_command,
    wasserstein1,
    zigzag_persistence,
)

__all__ = [
    "betti_violations",
    "gen_synthetic",
    "grad_check",
    "render_zpi",
    "run_command",
    "wasserstein1",
    "zigzag_persistence",
]
