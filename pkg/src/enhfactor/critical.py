"""Critical openness eta_c(kappa), minimum enhancement, and the inverse map kappa(F_min).

At every finite kappa > 0 the enhancement curve starts at 2, falls with the
universal slope -1/2, attains an interior minimum F_min at eta_c(kappa), and
recovers toward 2. The inverse problem reads a measured F_min back into a
chaoticity estimate by root-finding on the (numerically verified) monotone map
kappa -> F_min(kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, NoCriticalPointError, SolverError
from .formfactor import Chaoticity, laplace_b2_eta_derivative
from .enhancement import enhancement_exact
from .numerics import DEFAULT_QUADRATURE, QuadratureConfig

__all__ = ["CriticalPoint", "df_deta", "eta_critical", "kappa_from_fmin"]

_DF_TOL = 1e-8
_ROUNDTRIP_TOL = 1e-6
_KAPPA_RANGE = (1e-3, 1e4)
_GRID_POINTS = 8


@dataclass(frozen=True)
class CriticalPoint:
    """Location eta_c and depth f_min of the enhancement minimum at fixed kappa."""

    eta_c: float
    f_min: float
    kappa: Chaoticity


def df_deta(eta, kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """dF/d_eta at finite kappa > 0: negative left of eta_c, positive beyond."""
    k = Chaoticity.coerce(kappa)
    if k.kappa == 0.0:
        raise DomainError("dF/d_eta is identically 0 at kappa = 0 (F is constant); no critical point")
    if k.is_infinite:
        raise DomainError("the fully chaotic curve decreases monotonically; no critical point")
    return -laplace_b2_eta_derivative(eta, k, cfg)


def _refine_bisection(kappa: Chaoticity, lo: float, hi: float, f_lo: float,
                      cfg: QuadratureConfig) -> float:
    """Bisection on the derivative sign change until |dF/d_eta| < 1e-8."""
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = df_deta(mid, kappa, cfg)
        if abs(f_mid) < _DF_TOL:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    raise ConvergenceError(
        f"derivative bisection stalled on [{lo}, {hi}] without reaching |dF/d_eta| < {_DF_TOL}",
        best_estimate=0.5 * (lo + hi),
    )


def eta_critical(kappa, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                 eta_max: float | None = None,
                 eta_hint: float | None = None) -> CriticalPoint:
    """Locate the interior minimum of F(.|kappa) for finite kappa > 0.

    A geometric grid over (0, eta_max] brackets the sign change of dF/d_eta
    (slope -1/2 at the origin guarantees a negative start); bisection then
    refines to |dF/d_eta| < 1e-8. ``eta_hint`` narrows the initial scan around
    a known nearby solution; the full scan is the fallback.
    """
    k = Chaoticity.coerce(kappa)
    if k.kappa == 0.0:
        raise NoCriticalPointError("F(eta|0) is identically 2: no critical point exists")
    if k.is_infinite:
        raise DomainError("eta_critical requires finite kappa (the fully chaotic curve has no minimum)")
    if eta_max is None:
        eta_max = max(100.0, 50.0 * k.kappa)

    if eta_hint is not None and eta_hint > 0:
        bracket = _scan_for_sign_change(k, eta_hint / 3.0, min(eta_hint * 3.0, eta_max), 24, cfg)
        if bracket is None:
            bracket = _scan_for_sign_change(k, _scan_start(k), eta_max, 80, cfg)
    else:
        bracket = _scan_for_sign_change(k, _scan_start(k), eta_max, 80, cfg)
    if bracket is None:
        raise NoCriticalPointError(
            f"no sign change of dF/d_eta found for kappa = {k.kappa} up to eta_max = {eta_max}"
        )
    lo, hi, f_lo = bracket
    eta_c = _refine_bisection(k, lo, hi, f_lo, cfg)
    f_min = enhancement_exact(eta_c, k, cfg).f
    return CriticalPoint(eta_c=eta_c, f_min=f_min, kappa=k)


def _scan_start(kappa: Chaoticity) -> float:
    # the minimum moves toward 0 with kappa; start below it in either regime
    return max(1e-6, min(0.05, kappa.kappa / 20.0))


def _scan_for_sign_change(kappa: Chaoticity, start: float, stop: float, points: int,
                          cfg: QuadratureConfig):
    """First (lo, hi, df(lo)) with df(lo) < 0 < df(hi) on a geometric grid, else None."""
    if start >= stop:
        return None
    grid = np.geomspace(start, stop, points)
    f_prev = df_deta(grid[0], kappa, cfg)
    attempts = 0
    while f_prev > 0 and attempts < 6:
        # started right of the minimum; move the left edge down
        grid = np.concatenate(([grid[0] / 10.0], grid))
        f_prev = df_deta(grid[0], kappa, cfg)
        attempts += 1
    if f_prev > 0:
        raise SolverError(
            f"dF/d_eta stayed positive down to eta = {grid[0]:.3g} at kappa = {kappa.kappa}; "
            "cannot bracket the minimum from the left"
        )
    prev = grid[0]
    for g in grid[1:]:
        f_g = df_deta(g, kappa, cfg)
        if f_g > 0:
            return prev, g, f_prev
        prev, f_prev = g, f_g
    return None


# startup grids for the inverse problem, keyed by (cfg, kappa range, points)
_FMIN_GRID_CACHE: dict = {}


def _fmin_grid(cfg: QuadratureConfig, kappa_range: tuple[float, float],
               grid_points: int):
    key = (cfg, kappa_range, grid_points)
    if key not in _FMIN_GRID_CACHE:
        kappas = np.geomspace(kappa_range[0], kappa_range[1], grid_points)
        fmins = []
        etas = []
        hint = None
        for kap in kappas:
            cp = eta_critical(kap, cfg, eta_hint=hint)
            fmins.append(cp.f_min)
            etas.append(cp.eta_c)
            hint = cp.eta_c
        fmins = np.asarray(fmins)
        if np.any(np.diff(fmins) > 1e-9):
            raise SolverError(
                "F_min(kappa) is not non-increasing on the startup grid; inversion aborted. "
                f"kappa grid: {kappas.tolist()}, F_min values: {fmins.tolist()}"
            )
        _FMIN_GRID_CACHE[key] = (kappas, fmins, np.asarray(etas))
    return _FMIN_GRID_CACHE[key]


def kappa_from_fmin(f_min_observed: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                    kappa_range: tuple[float, float] = _KAPPA_RANGE,
                    grid_points: int = _GRID_POINTS) -> Chaoticity:
    """Invert a measured minimum enhancement into a chaoticity estimate.

    Verifies monotonicity of F_min on a startup grid over ``kappa_range``
    (computed once per configuration and cached), then bisects on log kappa
    until the forward map reproduces the observation within 1e-6.
    """
    f = float(f_min_observed)
    if not (math.isfinite(f) and 1.0 < f < 2.0):
        raise DomainError(
            f"f_min_observed must lie strictly inside (1, 2), got {f_min_observed}; "
            "2 is the regular-dynamics ceiling"
        )
    kappas, fmins, etas = _fmin_grid(cfg, kappa_range, grid_points)
    if f < fmins[-1]:
        raise DomainError(
            f"f_min_observed = {f} is below the attainable floor "
            f"F_min({kappa_range[1]:g}) = {fmins[-1]:.8f} for kappa in "
            f"[{kappa_range[0]:g}, {kappa_range[1]:g}]"
        )
    if f > fmins[0]:
        raise DomainError(
            f"f_min_observed = {f} exceeds F_min({kappa_range[0]:g}) = {fmins[0]:.8f}; "
            f"values that close to 2 would require kappa below {kappa_range[0]:g}"
        )
    idx = int(np.searchsorted(-fmins, -f, side="right")) - 1
    idx = min(max(idx, 0), len(kappas) - 2)
    lo, hi = math.log10(kappas[idx]), math.log10(kappas[idx + 1])
    hint = 0.5 * (etas[idx] + etas[idx + 1])
    best_kappa = None
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        kap = 10.0**mid
        cp = eta_critical(kap, cfg, eta_hint=hint)
        hint = cp.eta_c
        best_kappa = kap
        if abs(cp.f_min - f) < _ROUNDTRIP_TOL:
            return Chaoticity(kap)
        if cp.f_min > f:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"kappa bisection did not reach |F_min - target| < {_ROUNDTRIP_TOL} within 100 steps",
        best_estimate=best_kappa,
    )
