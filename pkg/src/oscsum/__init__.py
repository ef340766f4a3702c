"""Oscillating Poisson-weighted sums: brute-force oracles, closed-form
asymptotics at any N (including N ~ 1e23) and heuristic error bounds."""
from .asymptotics import (
    FourierProfile,
    StageReport,
    gaussian_moment,
    stage_pipeline,
    z_closed,
    zdouble_closed,
    zf_quadrature,
    zs_closed,
    ztilde_closed,
)
from .model import (
    DoubleSumParams,
    Evaluation,
    Method,
    ParameterError,
    SumParams,
    validate,
    window,
)
from .oracle import (
    OracleConfig,
    OracleLimitError,
    sum_z_full,
    sum_z_windowed,
    sum_zdouble,
    sum_zf,
    sum_zs,
    sum_ztilde,
    tail_weight_exact,
)

__all__ = [
    "DoubleSumParams", "Evaluation", "FourierProfile", "Method", "OracleConfig",
    "OracleLimitError", "ParameterError", "StageReport", "SumParams",
    "gaussian_moment", "stage_pipeline", "sum_z_full", "sum_z_windowed",
    "sum_zdouble", "sum_zf", "sum_zs", "sum_ztilde", "tail_weight_exact",
    "validate", "window", "z_closed", "zdouble_closed", "zf_quadrature",
    "zs_closed", "ztilde_closed",
]
