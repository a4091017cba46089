"""Transient two-level (binary) form factor of the regular-to-chaotic crossover.

Implements the broken-time-reversal (beta = 2) family B2(s|kappa) that
interpolates between uncorrelated levels (kappa = 0, B2 = 0) and the fully
chaotic limit (kappa = inf, B2 = (1-s)theta(1-s)), together with the
Laplace-type transforms that feed the enhancement factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedCaseError
from .numerics import (
    DEFAULT_QUADRATURE,
    BatchIntegralResult,
    QuadratureConfig,
    integrate_finite,
    integrate_finite_batch,
    integrate_semi_infinite,
)

__all__ = [
    "Chaoticity",
    "ScaledTime",
    "b2_gue",
    "b2_transient",
    "laplace_b2",
    "laplace_b2_eta_derivative",
]

# Certified bounds used for tail truncation of the outer s-integrals:
# |B2(s|kappa)| <= 1 + 2/pi * int(3 dtheta) <= 3 for every s, kappa.
_B2_BOUND = 3.0
# |(1 - eta*s) e^(-eta*s)| <= (1 + t)e^(-t) <= 1.22 e^(-t/2) in t = eta*s.
_DERIV_BOUND = 4.0


@dataclass(frozen=True)
class Chaoticity:
    """Crossover control parameter kappa >= 0.

    kappa = 0 means uncorrelated (regular) internal levels; the fully chaotic
    limit is the explicit infinite variant, constructed via ``infinite()`` and
    queried via ``is_infinite`` (stored as IEEE inf, never a finite sentinel).
    """

    kappa: float

    def __post_init__(self):
        k = float(self.kappa)
        if math.isnan(k) or k < 0:
            raise DomainError(f"chaoticity must be >= 0 (or infinite), got {self.kappa}")
        object.__setattr__(self, "kappa", k)

    @classmethod
    def infinite(cls) -> "Chaoticity":
        return cls(math.inf)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.kappa)

    @classmethod
    def coerce(cls, value) -> "Chaoticity":
        return value if isinstance(value, Chaoticity) else cls(value)


@dataclass(frozen=True)
class ScaledTime:
    """Time in units of the Heisenberg time; s >= 0."""

    s: float

    def __post_init__(self):
        s = float(self.s)
        if not (math.isfinite(s) and s >= 0):
            raise DomainError(f"scaled time must be finite and >= 0, got {self.s}")
        object.__setattr__(self, "s", s)

    @classmethod
    def coerce(cls, value) -> "ScaledTime":
        return value if isinstance(value, ScaledTime) else cls(value)


def _require_beta2(beta: int, what: str):
    if beta != 2:
        raise UnsupportedCaseError(
            f"{what} is only defined here for beta = 2 (broken time reversal); got beta = {beta}"
        )


def _b2_gue_array(s: np.ndarray) -> np.ndarray:
    return np.where(s < 1.0, 1.0 - s, 0.0)


def b2_gue(s) -> float:
    """Fully chaotic form factor (1 - s) theta(1 - s); exactly 0 at s = 1."""
    t = ScaledTime.coerce(s)
    return float(1.0 - t.s) if t.s < 1.0 else 0.0


def _correction_integrand(s: np.ndarray):
    """Build the theta-integrand matrix function for the crossover term at fixed kappa.

    After y = cos(theta) the integrand reads
        (2 sqrt(s) cos t + 1) sin^2 t / (s + 2 sqrt(s) cos t + 1) * exp(-kappa s (s + 2 sqrt(s) cos t + 1)),
    finite everywhere. Half-angle forms keep the denominator
    (sqrt(s)-1)^2 + 4 sqrt(s) cos^2(t/2) free of cancellation, including the
    removable point (s = 1, t = pi).
    """
    rs = np.sqrt(s)[:, None]

    def fmat(theta: np.ndarray) -> np.ndarray:
        c2 = np.cos(0.5 * theta) ** 2
        s2 = np.sin(0.5 * theta) ** 2
        cost = np.cos(theta)
        denom = (rs - 1.0) ** 2 + 4.0 * rs * c2
        num = (2.0 * rs * cost + 1.0) * 4.0 * s2 * c2
        safe = denom > 0.0
        ratio = np.where(safe, num / np.where(safe, denom, 1.0), (2.0 * rs * cost + 1.0) * s2)
        return ratio, denom

    return fmat


def _b2_correction_batch(s: np.ndarray, kappa: float,
                         cfg: QuadratureConfig) -> BatchIntegralResult:
    """(2/pi) * crossover integral for an array of s values, at finite kappa >= 0."""
    fmat = _correction_integrand(s)
    scol = s[:, None]

    def integrand(theta: np.ndarray) -> np.ndarray:
        ratio, denom = fmat(theta)
        # exponent -kappa*s*denom <= 0 always, so exp never overflows
        return ratio * np.exp(-kappa * scol * denom)

    res = integrate_finite_batch(integrand, 0.0, math.pi, cfg)
    return BatchIntegralResult((2.0 / math.pi) * res.values,
                               (2.0 / math.pi) * res.error_estimates,
                               res.evaluations)


def _b2_batch(s: np.ndarray, kappa: Chaoticity, cfg: QuadratureConfig) -> np.ndarray:
    if kappa.is_infinite:
        return _b2_gue_array(s)
    return _b2_gue_array(s) - _b2_correction_batch(s, kappa.kappa, cfg).values


def b2_transient(s, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE, beta: int = 2) -> float:
    """Crossover form factor B2(s|kappa) for beta = 2.

    Dispatches to the closed GUE form for infinite kappa; otherwise evaluates
    the crossover integral by adaptive quadrature (kappa = 0 comes out as 0 to
    within tolerance, which doubles as an internal consistency check).
    """
    _require_beta2(beta, "the transient form factor")
    t = ScaledTime.coerce(s)
    k = Chaoticity.coerce(kappa)
    if k.is_infinite:
        return b2_gue(t)
    res = _b2_batch(np.array([t.s]), k, cfg)
    return float(res[0])


def b2_transient_with_error(s, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                            beta: int = 2) -> tuple[float, float]:
    """B2(s|kappa) together with the quadrature error estimate (0 for exact limits)."""
    _require_beta2(beta, "the transient form factor")
    t = ScaledTime.coerce(s)
    k = Chaoticity.coerce(kappa)
    if k.is_infinite:
        return b2_gue(t), 0.0
    corr = _b2_correction_batch(np.array([t.s]), k.kappa, cfg)
    return float(b2_gue(t) - corr.values[0]), float(corr.error_estimates[0])


def _laplace_weighted(eta: float, kappa: Chaoticity, cfg: QuadratureConfig,
                      weight, tail_coeff: float, tail_rate: float) -> tuple[float, float]:
    """integral_0^inf weight(s) e^(-eta s) B2(s|kappa) ds, split at the s = 1 kink."""
    if kappa.is_infinite:
        def g(sv):
            return weight(sv) * np.exp(-eta * sv) * (1.0 - sv)

        res = integrate_finite(g, 0.0, 1.0, cfg)
        return res.value, res.error_estimate

    def g(sv):
        return weight(sv) * np.exp(-eta * sv) * _b2_batch(sv, kappa, cfg)

    head = integrate_finite(g, 0.0, 1.0, cfg)
    tail = integrate_semi_infinite(g, tail_rate, cfg, bound_coeff=tail_coeff, start=1.0)
    return head.value + tail.value, head.error_estimate + tail.error_estimate


def laplace_b2_with_error(eta, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                          beta: int = 2) -> tuple[float, float]:
    """eta * integral_0^inf e^(-eta s) B2(s|kappa) ds with its error estimate."""
    _require_beta2(beta, "the form-factor transform")
    e = float(eta)
    if math.isnan(e) or e < 0:
        raise DomainError(f"laplace_b2 requires eta >= 0, got {eta}")
    if not math.isfinite(e):
        raise DomainError(f"laplace_b2 requires finite eta, got {eta}")
    k = Chaoticity.coerce(kappa)
    if e == 0.0 or k.kappa == 0.0:
        # continuity limit at eta = 0; B2 vanishes identically at kappa = 0
        return 0.0, 0.0
    value, err = _laplace_weighted(e, k, cfg, weight=lambda sv: 1.0,
                                   tail_coeff=_B2_BOUND, tail_rate=e)
    return e * value, e * err


def laplace_b2(eta, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE, beta: int = 2) -> float:
    """eta * integral_0^inf e^(-eta s) B2(s|kappa) ds; lies in [0, 1].

    Returns 0 exactly at eta = 0 (continuity) and at kappa = 0; for infinite
    kappa the result reproduces 1 - (1 - e^-eta)/eta.
    """
    return laplace_b2_with_error(eta, kappa, cfg, beta)[0]


def laplace_b2_eta_derivative(eta, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                              beta: int = 2) -> float:
    """d/d_eta of laplace_b2: integral_0^inf e^(-eta s) (1 - eta s) B2(s|kappa) ds."""
    _require_beta2(beta, "the form-factor transform")
    e = float(eta)
    if not (math.isfinite(e) and e > 0):
        raise DomainError(f"laplace_b2_eta_derivative requires eta > 0, got {eta}")
    k = Chaoticity.coerce(kappa)
    if k.kappa == 0.0:
        return 0.0
    value, _ = _laplace_weighted(e, k, cfg, weight=lambda sv: 1.0 - e * sv,
                                 tail_coeff=_DERIV_BOUND * _B2_BOUND, tail_rate=0.5 * e)
    return value
