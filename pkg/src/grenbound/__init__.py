"""Grenander estimator of a decreasing density and its behaviour at the boundaries."""

from .core import (
    ConcaveMajorant,
    Sample,
    StepDensity,
    ecdf_vertices,
    evaluate,
    grenander,
    ingest,
    inverse_process,
    lcm,
    read_sample,
    switching_check,
)

__all__ = [
    "ConcaveMajorant",
    "Sample",
    "StepDensity",
    "ecdf_vertices",
    "evaluate",
    "grenander",
    "ingest",
    "inverse_process",
    "lcm",
    "read_sample",
    "switching_check",
]
