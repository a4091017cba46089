"""Elastic enhancement factor of open resonance systems with broken time reversal.

Analytic evaluation of F(eta|kappa) across the full regular-to-chaotic
transition, the critical openness and inverse problem kappa(F_min), and a
random-matrix Monte Carlo laboratory that validates the formulas against
sampled resonance S-matrices.
"""

__version__ = "0.1.0"

from .errors import (
    CalibrationError,
    ConvergenceError,
    DomainError,
    EnhFactorError,
    NoCriticalPointError,
    SolverError,
    UnsupportedCaseError,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    IntegralResult,
    QuadratureConfig,
    bessel_i1_scaled,
    integrate_finite,
    integrate_semi_infinite,
    xi,
)
from .formfactor import (
    Chaoticity,
    ScaledTime,
    b2_gue,
    b2_transient,
    laplace_b2,
    laplace_b2_eta_derivative,
)
from .enhancement import (
    EnhancementValue,
    Method,
    Openness,
    approx_large_kappa,
    enhancement_exact,
    psi,
    repr_large_kappa,
    repr_small_kappa,
    saddle_points,
    series_small_kappa,
    slope_at_origin,
)
from .critical import CriticalPoint, df_deta, eta_critical, kappa_from_fmin
from .rmtsim import (
    DelayTimeStats,
    Ensemble,
    EnsembleKind,
    KappaCalibration,
    MCEstimate,
    ScatteringModel,
    SMatrix,
    Spectrum,
    calibrate_kappa,
    delay_time_stats,
    estimate_enhancement_mc,
    mean_s_and_transmission,
    sample_couplings,
    sample_spectrum,
    smatrix,
    solve_g,
)

__all__ = [
    "__version__",
    "EnhFactorError", "DomainError", "UnsupportedCaseError", "ConvergenceError",
    "NoCriticalPointError", "SolverError", "CalibrationError",
    "QuadratureConfig", "IntegralResult", "DEFAULT_QUADRATURE",
    "bessel_i1_scaled", "xi", "integrate_finite", "integrate_semi_infinite",
    "Chaoticity", "ScaledTime", "b2_gue", "b2_transient", "laplace_b2",
    "laplace_b2_eta_derivative",
    "Openness", "Method", "EnhancementValue", "psi", "enhancement_exact",
    "repr_small_kappa", "repr_large_kappa", "series_small_kappa",
    "approx_large_kappa", "slope_at_origin", "saddle_points",
    "CriticalPoint", "df_deta", "eta_critical", "kappa_from_fmin",
    "Spectrum", "Ensemble", "EnsembleKind", "ScatteringModel", "MCEstimate",
    "SMatrix", "DelayTimeStats", "KappaCalibration",
    "sample_spectrum", "sample_couplings", "smatrix", "solve_g",
    "estimate_enhancement_mc", "mean_s_and_transmission", "delay_time_stats",
    "calibrate_kappa",
]
