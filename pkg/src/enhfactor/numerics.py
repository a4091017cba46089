"""Shared numerical kernel: scaled Bessel functions and adaptive panel quadrature.

All integrands passed to the integrators must accept a 1-D numpy array of
abscissae and evaluate elementwise (vectorized). Every routine here is a pure
function of its inputs and safe to call from multiple threads.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import i1e, roots_legendre

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureConfig",
    "IntegralResult",
    "BatchIntegralResult",
    "DEFAULT_QUADRATURE",
    "bessel_i1_scaled",
    "xi",
    "integrate_finite",
    "integrate_finite_batch",
    "integrate_semi_infinite",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and truncation policy used by every integral in the package.

    ``tail_cutoff`` controls where semi-infinite integrals are truncated: the
    certified bound on the discarded tail is kept below abs_tol * tail_cutoff.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_cutoff: float = 1e-2

    def __post_init__(self):
        if not (math.isfinite(self.abs_tol) and self.abs_tol > 0):
            raise DomainError(f"abs_tol must be finite and > 0, got {self.abs_tol}")
        if not (math.isfinite(self.rel_tol) and self.rel_tol > 0):
            raise DomainError(f"rel_tol must be finite and > 0, got {self.rel_tol}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be an integer >= 1, got {self.max_subdivisions}")
        if not (math.isfinite(self.tail_cutoff) and self.tail_cutoff > 0):
            raise DomainError(f"tail_cutoff must be finite and > 0, got {self.tail_cutoff}")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class BatchIntegralResult:
    """Result of integrating a vector-valued integrand component by component."""

    values: np.ndarray
    error_estimates: np.ndarray
    evaluations: int


# Embedded Gauss pair: a 15-point rule with a 7-point rule on the same panel
# supplies the error estimate, in the Gauss-Kronrod style of paired rules.
_NODES_LO, _WEIGHTS_LO = roots_legendre(7)
_NODES_HI, _WEIGHTS_HI = roots_legendre(15)
_N_HI = len(_NODES_HI)
_PANEL_EVALS = len(_NODES_LO) + len(_NODES_HI)


def bessel_i1_scaled(x):
    """Exponentially scaled modified Bessel function e^-x I_1(x) for x >= 0.

    Accepts a scalar or array; never overflows for any representable x.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"bessel_i1_scaled requires finite x >= 0, got {x!r}")
    out = i1e(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


# Taylor coefficients of 2 e^-u I1(u)/u about u = 0: 1 - u + (5/8)u^2 - (7/24)u^3.
_XI_SMALL_U = 1e-4


def xi(u):
    """2 e^-u I1(u)/u, continued to 1 at u = 0; strictly decreasing on [0, inf).

    Accepts a scalar or array.
    """
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"xi requires finite u >= 0, got {u!r}")
    scalar = np.isscalar(u) or arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    small = arr < _XI_SMALL_U
    us = arr[small]
    out[small] = 1.0 - us + 0.625 * us**2 - (7.0 / 24.0) * us**3
    ub = arr[~small]
    out[~small] = 2.0 * i1e(ub) / ub
    return float(out[0]) if scalar else out


def _eval_panel(f, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the embedded rule pair on [a, b]; returns (value, error) per component."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    xs = np.concatenate((mid + half * _NODES_HI, mid + half * _NODES_LO))
    ys = np.asarray(f(xs), dtype=float)
    if ys.shape[-1] != _PANEL_EVALS:
        raise DomainError(
            "integrand must evaluate elementwise on its input array "
            f"(expected trailing axis {_PANEL_EVALS}, got shape {ys.shape})"
        )
    if not np.all(np.isfinite(ys)):
        raise DomainError(f"non-finite integrand value encountered in [{a}, {b}]")
    hi = half * (ys[..., :_N_HI] @ _WEIGHTS_HI)
    lo = half * (ys[..., _N_HI:] @ _WEIGHTS_LO)
    return np.atleast_1d(hi), np.atleast_1d(np.abs(hi - lo))


def _adaptive(f, a: float, b: float, cfg: QuadratureConfig, n_components: int):
    """Globally adaptive bisection over panels; shared by scalar and batch fronts."""
    val, err = _eval_panel(f, a, b)
    evals = _PANEL_EVALS
    total_val = val.copy()
    total_err = err.copy()
    counter = 0
    heap = [(-float(err.max()), counter, a, b, val, err)]
    n_panels = 1
    while True:
        tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(total_val))
        if np.all(total_err <= tol):
            return total_val, total_err, evals
        if n_panels >= cfg.max_subdivisions:
            raise ConvergenceError(
                f"quadrature did not converge within {cfg.max_subdivisions} panels "
                f"(error estimate {float(total_err.max()):.3e})",
                best_estimate=(float(total_val[0]) if n_components == 1 else total_val),
                error_estimate=(float(total_err[0]) if n_components == 1 else total_err),
                evaluations=evals,
            )
        _, _, pa, pb, pval, perr = heapq.heappop(heap)
        pm = 0.5 * (pa + pb)
        if pm <= pa or pm >= pb:
            # interval too narrow to split further; keep its estimate as-is
            heapq.heappush(heap, (0.0, counter + 1, pa, pb, pval, perr))
            counter += 1
            n_panels += 1
            continue
        v1, e1 = _eval_panel(f, pa, pm)
        v2, e2 = _eval_panel(f, pm, pb)
        evals += 2 * _PANEL_EVALS
        total_val += v1 + v2 - pval
        total_err += e1 + e2 - perr
        counter += 1
        heapq.heappush(heap, (-float(e1.max()), counter, pa, pm, v1, e1))
        counter += 1
        heapq.heappush(heap, (-float(e2.max()), counter, pm, pb, v2, e2))
        n_panels += 1


def integrate_finite(f: Callable, a: float, b: float,
                     cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> IntegralResult:
    """Adaptive panel quadrature of a scalar integrand over [a, b].

    The integrand must accept a 1-D array and return values elementwise.
    Raises ConvergenceError (carrying the best estimate) if the panel budget
    runs out before |error| <= max(abs_tol, rel_tol * |value|).
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"integration bounds must be finite, got [{a}, {b}]")
    if a > b:
        raise DomainError(f"integrate_finite requires a <= b, got a={a}, b={b}")
    if a == b:
        return IntegralResult(0.0, 0.0, 0)
    val, err, evals = _adaptive(f, a, b, cfg, n_components=1)
    return IntegralResult(float(val[0]), float(err[0]), evals)


def integrate_finite_batch(f: Callable, a: float, b: float,
                           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> BatchIntegralResult:
    """Adaptive quadrature of a vector-valued integrand over [a, b].

    ``f(x)`` must map a 1-D array of k abscissae to an (m, k) array; the m
    components are integrated simultaneously on a shared panel subdivision,
    refined wherever the worst component error sits.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"integration bounds must be finite, got [{a}, {b}]")
    if a > b:
        raise DomainError(f"integrate_finite_batch requires a <= b, got a={a}, b={b}")
    probe = np.asarray(f(np.array([0.5 * (a + b) if a != b else a])), dtype=float)
    m = probe.shape[0] if probe.ndim == 2 else 1
    if a == b:
        return BatchIntegralResult(np.zeros(m), np.zeros(m), 0)
    val, err, evals = _adaptive(f, a, b, cfg, n_components=m)
    return BatchIntegralResult(val, err, evals)


def integrate_semi_infinite(f: Callable, decay_rate: float,
                            cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                            bound_coeff: float = 1.0,
                            start: float = 0.0) -> IntegralResult:
    """Integrate f over [start, inf) given a certified bound |f(s)| <= C e^(-alpha s).

    The domain is truncated at the point where the certified tail drops below
    abs_tol * tail_cutoff; that bound is added to the reported error estimate.
    The truncated range is covered by geometrically growing segments so that a
    feature near the left edge cannot slip between the nodes of one huge panel.
    """
    if not (math.isfinite(decay_rate) and decay_rate > 0):
        raise DomainError(f"decay_rate must be finite and > 0, got {decay_rate}")
    if not (math.isfinite(bound_coeff) and bound_coeff > 0):
        raise DomainError(f"bound_coeff must be finite and > 0, got {bound_coeff}")
    if not math.isfinite(start):
        raise DomainError(f"start must be finite, got {start}")
    target = cfg.abs_tol * cfg.tail_cutoff
    # cutoff L solves (C/alpha) e^(-alpha L) = target
    cutoff = math.log(bound_coeff / (decay_rate * target)) / decay_rate
    if cutoff <= start:
        tail_bound = (bound_coeff / decay_rate) * math.exp(-decay_rate * start)
        return IntegralResult(0.0, tail_bound, 0)
    seg_cfg = QuadratureConfig(abs_tol=target, rel_tol=cfg.rel_tol,
                               max_subdivisions=cfg.max_subdivisions,
                               tail_cutoff=cfg.tail_cutoff)
    total = 0.0
    err = target
    evals = 0
    lo = start
    width = min(1.0, 1.0 / decay_rate, cutoff - start)
    while lo < cutoff:
        hi = min(lo + width, cutoff)
        res = integrate_finite(f, lo, hi, seg_cfg)
        total += res.value
        err += res.error_estimate
        evals += res.evaluations
        lo = hi
        width *= 2.0
    return IntegralResult(total, err, evals)
