"""Independent reference implementations used to generate expected test values.

Everything here deliberately avoids the package's own quadrature and special
function paths: power/asymptotic series with explicit terms, fixed-order
Chebyshev rules, dense trapezoid-free product grids, and mpmath for
high-precision cross checks.
"""

import math

import numpy as np


def i1_power_series(x: float, terms: int = 30) -> float:
    """I1(x) = sum_k (x/2)^(2k+1) / (k! (k+1)!), summed term by term."""
    total = 0.0
    half = x / 2.0
    for k in range(terms):
        total += half ** (2 * k + 1) / (math.factorial(k) * math.factorial(k + 1))
    return total


def i1e_series(x: float, terms: int = 30) -> float:
    """e^-x I1(x) from the power series; accurate for moderate x."""
    return math.exp(-x) * i1_power_series(x, terms)


def i1e_asymptotic(x: float, terms: int = 3) -> float:
    """e^-x I1(x) ~ (2 pi x)^(-1/2) (1 - 3/(8x) - 15/(128 x^2) - ...), large x."""
    coeffs = (1.0, -3.0 / 8.0, -15.0 / 128.0, -105.0 / 1024.0)
    s = sum(c / x**j for j, c in enumerate(coeffs[:terms]))
    return s / math.sqrt(2.0 * math.pi * x)


def chebyshev_u_rule(n: int):
    """Nodes/weights of the Gauss-Chebyshev rule for int_-1^1 f(y) sqrt(1-y^2) dy."""
    k = np.arange(1, n + 1)
    theta = k * np.pi / (n + 1)
    nodes = np.cos(theta)
    weights = np.pi / (n + 1) * np.sin(theta) ** 2
    return nodes, weights


def b2_crossover_bruteforce(s: float, kappa: float, n_nodes: int = 20000) -> float:
    """B2(s|kappa) from the original y-integral with a fixed high-order rule.

    The sqrt(1-y^2) endpoint weight is absorbed exactly by the Chebyshev rule,
    so this shares nothing with the package's cos-substitution + adaptive path.
    """
    if s == 0.0:
        return 0.0
    y, w = chebyshev_u_rule(n_nodes)
    rs = math.sqrt(s)
    denom = s + 2.0 * y * rs + 1.0
    integrand = (2.0 * y * rs + 1.0) / denom * np.exp(-kappa * s * denom)
    gue = (1.0 - s) if s < 1.0 else 0.0
    return gue - (2.0 / math.pi) * float(w @ integrand)


def laplace_b2_bruteforce(eta: float, kappa: float, s_max: float | None = None,
                          n_s: int = 4000, n_y: int = 4000) -> float:
    """eta * int_0^inf e^(-eta s) B2(s|kappa) ds on a dense fixed product grid.

    Outer integral by Gauss-Legendre on [0, s_max] split at the s = 1 kink;
    inner by the Chebyshev rule. Purely fixed-order, no adaptivity.
    """
    if s_max is None:
        s_max = max(3.0, 40.0 / eta)
    y, w = chebyshev_u_rule(n_y)
    total = 0.0
    for a, b in ((0.0, 1.0), (1.0, s_max)):
        if b <= a:
            continue
        xs, xw = np.polynomial.legendre.leggauss(n_s)
        s = 0.5 * (a + b) + 0.5 * (b - a) * xs
        sw = 0.5 * (b - a) * xw
        rs = np.sqrt(s)[:, None]
        denom = s[:, None] + 2.0 * y[None, :] * rs + 1.0
        inner = ((2.0 * y[None, :] * rs + 1.0) / denom
                 * np.exp(-kappa * s[:, None] * denom)) @ w
        gue = np.where(s < 1.0, 1.0 - s, 0.0)
        b2 = gue - (2.0 / math.pi) * inner
        total += float(sw @ (np.exp(-eta * s) * b2))
    return eta * total


def psi_bruteforce_mpmath(eta: float, kappa: float) -> float:
    """Psi(eta|kappa) with the unscaled Bessel function at high precision."""
    import mpmath as mp

    with mp.workdps(40):
        def integrand(s):
            if s == 0:
                return mp.mpf(1) * mp.exp(0)
            u = 2 * kappa * s ** mp.mpf(1.5)
            return mp.e ** (-kappa * s * (s + 1) - s * eta) * mp.besseli(1, u) / (kappa * s ** mp.mpf(1.5))

        val = eta * mp.quad(integrand, [0, 1, mp.inf])
    return float(val)


def gue_laplace_closed_form(eta: float) -> float:
    """eta * int_0^1 e^(-eta s)(1-s) ds = 1 - (1 - e^-eta)/eta."""
    return 1.0 + math.expm1(-eta) / eta


def gue_f_closed_form(eta: float) -> float:
    """Fully chaotic enhancement 1 + (1 - e^-eta)/eta."""
    return 1.0 - math.expm1(-eta) / eta


def gue_laplace_derivative_closed_form(eta: float) -> float:
    """d/d_eta of gue_laplace_closed_form: (1 - e^-eta - eta e^-eta)/eta^2."""
    return (1.0 - math.exp(-eta) - eta * math.exp(-eta)) / eta**2


def two_level_smatrix(levels, amplitudes, energy: float) -> complex:
    """Single-channel closed form S = (1 - i G/2)/(1 + i G/2), G = sum |a_n|^2/(E - E_n).

    Valid for any diagonal internal Hamiltonian with one channel; derived by
    rank-one inversion of the effective Hamiltonian.
    """
    g = sum(abs(a) ** 2 / (energy - e) for a, e in zip(amplitudes, levels))
    return (1.0 - 0.5j * g) / (1.0 + 0.5j * g)
