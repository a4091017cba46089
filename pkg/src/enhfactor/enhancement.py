"""Elastic enhancement factor F(eta|kappa) for broken time-reversal symmetry.

The primary path computes F = 2 - eta * L[B2](eta) from the crossover form
factor. Two alternative representations (built on the auxiliary function Psi),
a small-kappa power series, and a large-kappa closed form serve as
cross-checks and fast approximations. For beta = 2, F lies in [1, 2]: 2 for
regular internal dynamics, dipping toward the fully chaotic curve
1 + (1 - e^-eta)/eta as chaoticity grows.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import DomainError, UnsupportedCaseError
from .formfactor import Chaoticity, laplace_b2_with_error
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    integrate_finite,
    integrate_finite_batch,
    integrate_semi_infinite,
    xi,
)

__all__ = [
    "Openness",
    "Method",
    "EnhancementValue",
    "SaddlePointInfo",
    "ApproximationRegimeWarning",
    "psi",
    "enhancement_exact",
    "repr_small_kappa",
    "repr_large_kappa",
    "series_small_kappa",
    "approx_large_kappa",
    "slope_at_origin",
    "saddle_points",
]


class ApproximationRegimeWarning(UserWarning):
    """An expansion was evaluated outside the regime where it is meaningful."""


@dataclass(frozen=True)
class Openness:
    """Openness eta = t_H / t_W = M T: Heisenberg time over dwell time."""

    eta: float

    def __post_init__(self):
        e = float(self.eta)
        if not (math.isfinite(e) and e >= 0):
            raise DomainError(f"openness must be finite and >= 0, got {self.eta}")
        object.__setattr__(self, "eta", e)

    @classmethod
    def from_times(cls, heisenberg_time: float, dwell_time: float) -> "Openness":
        if not (dwell_time > 0 and heisenberg_time > 0):
            raise DomainError("both times must be > 0")
        return cls(heisenberg_time / dwell_time)

    @classmethod
    def from_channels(cls, n_channels: int, transmission: float) -> "Openness":
        if n_channels < 1 or not (0 < transmission <= 1):
            raise DomainError("need n_channels >= 1 and transmission in (0, 1]")
        return cls(n_channels * transmission)

    @classmethod
    def coerce(cls, value) -> "Openness":
        return value if isinstance(value, Openness) else cls(value)


class Method(str, enum.Enum):
    EXACT = "exact"
    REPR_SMALL_KAPPA = "repr_small_kappa"
    REPR_LARGE_KAPPA = "repr_large_kappa"
    SERIES_SMALL_KAPPA = "series_small_kappa"
    APPROX_LARGE_KAPPA = "approx_large_kappa"


@dataclass(frozen=True)
class EnhancementValue:
    f: float
    method: Method
    error_estimate: float


@dataclass(frozen=True)
class SaddlePointInfo:
    """Stationary points of the large-kappa integrand (diagnostics only).

    ``s_secondary`` is None once eta exceeds kappa/8, where that maximum
    disappears; the inflection point 9/16 marks the onset of its decay.
    """

    s_origin: float
    s_secondary: float | None
    s_inflection: float


def _gue_f(eta: float) -> float:
    """1 + (1 - e^-eta)/eta, continued to 2 at eta = 0."""
    if eta == 0.0:
        return 2.0
    return 1.0 - math.expm1(-eta) / eta


def psi(eta, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Auxiliary crossover function: 1 at kappa = 0, 0 at kappa = inf, in (0, 1].

    Evaluated in the overflow-free form
        eta * int_0^inf ds exp(-kappa s (sqrt(s)-1)^2 - s eta) * xi(2 kappa s^(3/2)),
    whose exponent is never positive.
    """
    e = Openness.coerce(eta).eta
    if e <= 0:
        raise DomainError(f"psi requires eta > 0, got {eta}")
    k = Chaoticity.coerce(kappa)
    if k.kappa == 0.0:
        return 1.0
    if k.is_infinite:
        return 0.0
    kap = k.kappa

    def integrand(s: np.ndarray) -> np.ndarray:
        root = np.sqrt(s)
        return np.exp(-kap * s * (root - 1.0) ** 2 - s * e) * xi(2.0 * kap * s * root)

    res = integrate_semi_infinite(integrand, e, cfg, bound_coeff=1.0, start=0.0)
    return e * res.value


def enhancement_exact(eta, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                      beta: int = 2) -> EnhancementValue:
    """F(eta|kappa) = 2 - eta * int e^(-eta s) B2(s|kappa) ds, the reference route.

    beta = 1 is accepted only at kappa = 0, where the form factor vanishes and
    the symmetry offset gives F = 3; any other beta = 1 request is unsupported.
    """
    e = Openness.coerce(eta).eta
    k = Chaoticity.coerce(kappa)
    if beta == 1:
        if k.kappa != 0.0:
            raise UnsupportedCaseError(
                "beta = 1 is available only in the kappa = 0 limit; the transient "
                "form factor for preserved time reversal is not implemented"
            )
        return EnhancementValue(3.0, Method.EXACT, 0.0)
    if beta != 2:
        raise DomainError(f"beta must be 1 or 2, got {beta}")
    value, err = laplace_b2_with_error(e, k, cfg)
    return EnhancementValue(2.0 - value, Method.EXACT, err)


def _kappa_prime_batch(s: np.ndarray, lo: float, hi: float,
                       cfg: QuadratureConfig) -> np.ndarray:
    """int_lo^hi dk' exp(-k' s (sqrt(s)-1)^2) xi(2 k' s^(3/2)) for each s (rows).

    The shared kappa'-panels start at the decay scale of the fastest-decaying
    row and grow geometrically, so narrow boundary layers near kappa' = lo are
    resolved for every s in the batch.
    """
    root = np.sqrt(s)
    a = (s * (root - 1.0) ** 2)[:, None]
    c = (2.0 * s * root)[:, None]

    def integrand(kp: np.ndarray) -> np.ndarray:
        return np.exp(-a * kp[None, :]) * xi(c * kp[None, :])

    a_max = float(a.max()) if a.size else 0.0
    width = hi - lo if a_max <= 0.0 else min(hi - lo, 1.0 / a_max)
    total = None
    left = lo
    while left < hi:
        right = min(left + width, hi)
        res = integrate_finite_batch(integrand, left, right, cfg)
        total = res.values if total is None else total + res.values
        left = right
        width *= 2.0
    return total if total is not None else np.zeros(len(s))


def repr_small_kappa(eta, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> EnhancementValue:
    """Representation built from Psi and its kappa'-integral over [0, kappa].

    The double eta-derivative is taken under the integral sign (bringing down
    s^2), so no numerical differentiation enters:
        F = 1 + Psi(eta|kappa) + eta * int_0^inf ds s^2 e^(-s eta) J(s, kappa),
        J(s, kappa) = int_0^kappa dk' exp(-k' s (sqrt(s)-1)^2) xi(2 k' s^(3/2)).
    """
    e = Openness.coerce(eta).eta
    if e <= 0:
        raise DomainError(f"repr_small_kappa requires eta > 0, got {eta}")
    k = Chaoticity.coerce(kappa)
    if k.is_infinite:
        raise DomainError("repr_small_kappa requires finite kappa")
    if k.kappa == 0.0:
        return EnhancementValue(2.0, Method.REPR_SMALL_KAPPA, 0.0)
    kap = k.kappa

    def outer(s: np.ndarray) -> np.ndarray:
        j = _kappa_prime_batch(s, 0.0, kap, cfg)
        return s * s * np.exp(-e * s) * j

    # J <= kappa, so the outer integrand is below kappa s^2 e^(-eta s)
    coeff = kap * (16.0 / (e * e)) * math.exp(-2.0)
    res = integrate_semi_infinite(outer, 0.5 * e, cfg, bound_coeff=coeff, start=0.0)
    value = 1.0 + psi(e, k, cfg) + e * res.value
    return EnhancementValue(value, Method.REPR_SMALL_KAPPA, e * res.error_estimate)


# Large-argument expansion of xi(u)/sqrt(2/pi)/u^(-3/2): 1 - 3/(8u) - 15/(128u^2) - 105/(1024u^3)
_XI_ASYMPTOTIC = (1.0, -3.0 / 8.0, -15.0 / 128.0, -105.0 / 1024.0)
_XI_ASYMPTOTIC_SWITCH = 50.0


def _upper_gamma_half_chain(x: float) -> list[float]:
    """Upper incomplete Gamma(s, x) for s = -1/2, -3/2, -5/2, -7/2 via downward recurrence."""
    g = math.sqrt(math.pi) * erfc(math.sqrt(x))  # Gamma(1/2, x)
    out = []
    spow = 0.5
    for _ in range(4):
        snext = spow - 1.0
        g = (g - x**snext * math.exp(-x)) / snext
        out.append(g)
        spow = snext
    return out


def _kappa_prime_tail(s: float, kap: float, cfg: QuadratureConfig) -> float:
    """int_kappa^inf dk' exp(-k' s (sqrt(s)-1)^2) xi(2 k' s^(3/2)) at a single s > 0.

    Away from s = 1 the exponential factor truncates the integral; in the
    slow-decay neighborhood of s = 1 the quadrature is carried to where the
    scaled-Bessel asymptotics hold and the remaining algebraic tail is summed
    in closed form through upper incomplete gamma functions.
    """
    root = math.sqrt(s)
    a = s * (root - 1.0) ** 2
    c = 2.0 * s * root

    def integrand(kp: np.ndarray) -> np.ndarray:
        return np.exp(-a * kp) * xi(c * kp)

    lam_asy = _XI_ASYMPTOTIC_SWITCH / c
    if a > 0.0:
        lam_exp = kap + 45.0 / a
        if lam_exp <= max(lam_asy, kap):
            # exponential cutoff wins before the asymptotic zone is reached
            if lam_exp <= kap:
                return 0.0
            return integrate_finite(integrand, kap, lam_exp, cfg).value
    lam = max(kap, lam_asy)
    value = 0.0
    if lam > kap:
        value = integrate_finite(integrand, kap, lam, cfg).value
    # algebraic tail: xi(u) ~ sqrt(2/pi) u^(-3/2) (1 - 3/(8u) - ...)
    tail = 0.0
    if a == 0.0:
        for j, coef in enumerate(_XI_ASYMPTOTIC):
            nu = 1.5 + j
            tail += coef * c**-nu * lam ** (1.0 - nu) / (nu - 1.0)
    else:
        gammas = _upper_gamma_half_chain(a * lam)
        for j, coef in enumerate(_XI_ASYMPTOTIC):
            nu = 1.5 + j
            tail += coef * c**-nu * a ** (nu - 1.0) * gammas[j]
    return value + math.sqrt(2.0 / math.pi) * tail


def repr_large_kappa(eta, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> EnhancementValue:
    """Representation anchored at the chaotic end, via the kappa'-tail of Psi.

    F = 1 + (1 - e^-eta)/eta + Psi - eta * int_0^inf ds s^2 e^(-s eta) Jtail(s, kappa),
    with Jtail the kappa'-integral over [kappa, inf). The s-integration is
    split at (1 +- 0.1)^2 to give the slowly decaying neighborhood of s = 1
    its own panels.
    """
    e = Openness.coerce(eta).eta
    if e <= 0:
        raise DomainError(f"repr_large_kappa requires eta > 0, got {eta}")
    k = Chaoticity.coerce(kappa)
    if k.kappa == 0.0:
        raise DomainError("repr_large_kappa requires kappa > 0")
    if k.is_infinite:
        return EnhancementValue(_gue_f(e), Method.REPR_LARGE_KAPPA, 0.0)
    kap = k.kappa

    def outer(s: np.ndarray) -> np.ndarray:
        out = np.zeros_like(s)
        for i, sv in enumerate(s):
            if sv > 0.0:
                out[i] = sv * sv * math.exp(-e * sv) * _kappa_prime_tail(sv, kap, cfg)
        return out

    total = 0.0
    err = 0.0
    for lo, hi in ((0.0, 0.81), (0.81, 1.21)):
        res = integrate_finite(outer, lo, hi, cfg)
        total += res.value
        err += res.error_estimate
    # beyond s = 1.21: Jtail <= 1/s^2, so the integrand is bounded by e^(-eta s)
    res = integrate_semi_infinite(outer, e, cfg, bound_coeff=1.0, start=1.21)
    total += res.value
    err += res.error_estimate
    value = _gue_f(e) + psi(e, k, cfg) - e * total
    return EnhancementValue(value, Method.REPR_LARGE_KAPPA, e * err)


def series_small_kappa(eta, kappa, order: int) -> EnhancementValue:
    """Truncated small-kappa expansion 2 - k/eta + (6+eta)k^2/eta^3 - (60+eta(20+eta))k^3/eta^5.

    ``order`` is the highest power of kappa kept (1, 2 or 3). Warns, without
    raising, when kappa/eta > 0.5 where the expansion loses meaning.
    """
    if order not in (1, 2, 3):
        raise DomainError(f"series order must be 1, 2 or 3, got {order}")
    e = Openness.coerce(eta).eta
    if e <= 0:
        raise DomainError(f"series_small_kappa requires eta > 0, got {eta}")
    k = Chaoticity.coerce(kappa)
    if k.is_infinite:
        raise DomainError("series_small_kappa requires finite kappa")
    kap = k.kappa
    if kap / e > 0.5:
        warnings.warn(
            f"small-kappa series evaluated at kappa/eta = {kap / e:.3g} > 0.5; "
            "the truncated expansion is unreliable there",
            ApproximationRegimeWarning,
            stacklevel=2,
        )
    terms = (
        -kap / e,
        (6.0 + e) * kap**2 / e**3,
        -(60.0 + e * (20.0 + e)) * kap**3 / e**5,
    )
    value = 2.0 + sum(terms[:order])
    # heuristic truncation error: magnitude of the first omitted / a geometric step down
    err = abs(terms[order]) if order < 3 else abs(terms[2]) * kap / e
    return EnhancementValue(value, Method.SERIES_SMALL_KAPPA, err)


def approx_large_kappa(eta, kappa) -> EnhancementValue:
    """Closed-form large-kappa approximation 1 + (1-e^-eta)/eta + eta/(eta+kappa) - eta/(eta+kappa)^2.

    No quadrature; intended for kappa >> 1. Returns exactly 2 at eta = 0.
    """
    e = Openness.coerce(eta).eta
    k = Chaoticity.coerce(kappa)
    if k.kappa == 0.0:
        raise DomainError("approx_large_kappa requires kappa > 0 (at kappa = eta = 0 the form is indeterminate)")
    if e == 0.0:
        return EnhancementValue(2.0, Method.APPROX_LARGE_KAPPA, 0.0)
    if k.is_infinite:
        return EnhancementValue(_gue_f(e), Method.APPROX_LARGE_KAPPA, 0.0)
    kap = k.kappa
    value = _gue_f(e) + e / (e + kap) - e / (e + kap) ** 2
    return EnhancementValue(value, Method.APPROX_LARGE_KAPPA, e / (e + kap) ** 3)


def slope_at_origin(kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """One-sided dF/d_eta at eta = 0+, by Richardson extrapolation of forward differences.

    For every kappa > 0 (finite or infinite) the result is the universal value
    -1/2; kappa = 0 is the excluded constant case, flagged by a warning and
    returning 0 exactly.
    """
    k = Chaoticity.coerce(kappa)
    if k.kappa == 0.0:
        warnings.warn(
            "slope_at_origin called with kappa = 0: F is identically 2 there, "
            "outside the universal-slope statement",
            ApproximationRegimeWarning,
            stacklevel=2,
        )
        return 0.0
    levels = 4
    h0 = 0.5
    diffs = []
    for i in range(levels):
        h = h0 / 2**i
        diffs.append((enhancement_exact(h, k, cfg).f - 2.0) / h)
    table = [diffs]
    for j in range(1, levels):
        prev = table[j - 1]
        table.append([
            (2**j * prev[i + 1] - prev[i]) / (2**j - 1.0) for i in range(len(prev) - 1)
        ])
    return table[-1][0]


def saddle_points(eta, kappa) -> SaddlePointInfo:
    """Stationary-point diagnostics of the large-kappa exponent (documentation/tests only)."""
    e = Openness.coerce(eta).eta
    k = Chaoticity.coerce(kappa)
    if k.kappa == 0.0 or k.is_infinite:
        raise DomainError("saddle_points requires finite kappa > 0")
    ratio = e / k.kappa
    secondary = None
    if ratio <= 0.125:
        secondary = (5.0 - 4.0 * ratio + 3.0 * math.sqrt(1.0 - 8.0 * ratio)) / 8.0
    return SaddlePointInfo(s_origin=0.0, s_secondary=secondary, s_inflection=9.0 / 16.0)
