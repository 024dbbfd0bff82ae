"""Projector Monte Carlo for stoquastic models.

The walker kernel is compiled from ``_kernel.pyx`` when possible; otherwise
the numpy version in ``_kernel_py`` is used. Both give identical traces.
"""
from .backend import BACKEND_ENV, DEFAULT_BACKEND, available_backends, load_backend
from .engine import (
    BlockRecord,
    FeasibilityWarning,
    McConfig,
    McEstimate,
    initial_states,
    jackknife,
    kernel_params,
    mean_jump_rate,
    run_projector_mc,
    systematic_resample,
    table_defaults,
    trace_csv,
)

__all__ = [
    "BACKEND_ENV",
    "DEFAULT_BACKEND",
    "BlockRecord",
    "FeasibilityWarning",
    "McConfig",
    "McEstimate",
    "available_backends",
    "initial_states",
    "jackknife",
    "kernel_params",
    "load_backend",
    "mean_jump_rate",
    "run_projector_mc",
    "systematic_resample",
    "table_defaults",
    "trace_csv",
]
