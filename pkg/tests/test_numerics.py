import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enhfactor.errors import ConvergenceError, DomainError
from enhfactor.numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    bessel_i1_scaled,
    integrate_finite,
    integrate_finite_batch,
    integrate_semi_infinite,
    xi,
)

from oracles import i1e_asymptotic, i1e_series


class TestQuadratureConfig:
    def test_defaults(self):
        assert DEFAULT_QUADRATURE.abs_tol == 1e-10
        assert DEFAULT_QUADRATURE.rel_tol == 1e-10
        assert DEFAULT_QUADRATURE.max_subdivisions == 2000

    @pytest.mark.parametrize("kwargs", [
        {"abs_tol": 0.0}, {"abs_tol": -1e-3}, {"rel_tol": 0.0},
        {"max_subdivisions": 0}, {"tail_cutoff": 0.0}, {"abs_tol": math.nan},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            QuadratureConfig(**kwargs)


class TestBesselI1Scaled:
    def test_zero(self):
        assert bessel_i1_scaled(0.0) == 0.0

    def test_against_series(self):
        # independent 30-term power series, small and moderate arguments
        for x in (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
            ref = i1e_series(x)
            assert bessel_i1_scaled(x) == pytest.approx(ref, rel=1e-10)

    def test_against_asymptotics(self):
        # the truncated expansion's own error is the next omitted term; the
        # implementation must sit inside that band, and at large x (where the
        # expansion supports it) match to 1e-10 relative
        for x in (50.0, 100.0, 300.0, 700.0):
            ref = i1e_asymptotic(x, terms=4)
            truncation = (14175.0 / 98304.0) / x**4 / math.sqrt(2 * math.pi * x)
            tol = 2.0 * truncation + 1e-10 * ref
            assert abs(bessel_i1_scaled(x) - ref) <= tol
        for x in (300.0, 700.0, 2000.0):
            assert bessel_i1_scaled(x) == pytest.approx(i1e_asymptotic(x, terms=4), rel=1e-10)

    def test_extreme_argument_no_overflow(self):
        v = bessel_i1_scaled(700.0)
        assert math.isfinite(v)
        assert v == pytest.approx(1.0 / math.sqrt(2 * math.pi * 700.0), rel=1e-2)
        assert math.isfinite(bessel_i1_scaled(1e300))

    @given(st.floats(min_value=0.0, max_value=1e6))
    @settings(max_examples=50, deadline=None)
    def test_range(self, x):
        v = bessel_i1_scaled(x)
        assert 0.0 <= v < 1.0

    @pytest.mark.parametrize("bad", [-1.0, -1e-300, math.nan, math.inf])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            bessel_i1_scaled(bad)

    def test_array_input(self):
        xs = np.array([0.0, 1.0, 10.0])
        out = bessel_i1_scaled(xs)
        assert out.shape == xs.shape
        assert out[0] == 0.0


class TestXi:
    def test_at_zero(self):
        assert xi(0.0) == 1.0

    def test_at_one_vs_series(self):
        assert xi(1.0) == pytest.approx(2.0 * i1e_series(1.0), rel=1e-12)

    def test_small_argument_continuity(self):
        # both branches around the series/ratio switch match the power series
        for u in (9.9e-5, 1.01e-4):
            ref = 2.0 * i1e_series(u) / u
            assert xi(u) == pytest.approx(ref, rel=1e-12)

    @given(st.tuples(st.floats(min_value=0.0, max_value=500.0),
                     st.floats(min_value=1e-9, max_value=500.0)))
    @settings(max_examples=60, deadline=None)
    def test_strictly_decreasing_and_bounded(self, pair):
        u, delta = pair
        lo, hi = xi(u), xi(u + delta)
        assert 0.0 < hi < lo <= 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            xi(-0.5)
        with pytest.raises(DomainError):
            xi(math.nan)


# ten closed-form integrals exercising smoothness, endpoints, and sqrt behavior
_CLOSED_FORMS = [
    (lambda x: np.ones_like(x), 0.0, 1.0, 1.0),
    (np.sin, 0.0, math.pi, 2.0),
    (lambda y: np.sqrt(1.0 - y * y), -1.0, 1.0, math.pi / 2.0),
    (lambda x: x * x, 0.0, 3.0, 9.0),
    (np.exp, 0.0, 1.0, math.e - 1.0),
    (lambda x: 1.0 / (1.0 + x * x), -1.0, 1.0, math.pi / 2.0),
    (np.cos, 0.0, math.pi / 2.0, 1.0),
    (lambda x: x * np.exp(-x), 0.0, 5.0, 1.0 - 6.0 * math.exp(-5.0)),
    (lambda x: np.log1p(x), 0.0, 1.0, 2.0 * math.log(2.0) - 1.0),
    (lambda x: np.exp(-x * x), -2.0, 2.0, math.sqrt(math.pi) * math.erf(2.0)),
]


class TestIntegrateFinite:
    @pytest.mark.parametrize("f,a,b,expected", _CLOSED_FORMS)
    def test_closed_forms(self, f, a, b, expected):
        res = integrate_finite(f, a, b)
        assert res.value == pytest.approx(expected, abs=5e-10, rel=5e-10)
        assert res.error_estimate >= 0.0
        assert res.evaluations > 0

    def test_empty_interval(self):
        res = integrate_finite(np.sin, 1.0, 1.0)
        assert res.value == 0.0 and res.evaluations == 0

    def test_reversed_bounds(self):
        with pytest.raises(DomainError):
            integrate_finite(np.sin, 1.0, 0.0)

    def test_nonfinite_bounds(self):
        with pytest.raises(DomainError):
            integrate_finite(np.sin, 0.0, math.inf)

    def test_nonfinite_integrand(self):
        with pytest.raises(DomainError):
            integrate_finite(lambda x: np.full_like(x, math.nan), 0.0, 1.0)

    def test_convergence_error_carries_best_estimate(self):
        cfg = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=3)
        with pytest.raises(ConvergenceError) as excinfo:
            integrate_finite(lambda x: np.sin(40.7 * x) + 0.1 * x, 0.0, math.pi, cfg)
        err = excinfo.value
        assert err.best_estimate is not None
        assert err.error_estimate > 0
        assert err.evaluations > 0

    def test_narrow_left_edge_feature(self):
        # boundary layer much narrower than the panel must still be found
        res = integrate_finite(lambda x: np.exp(-1000.0 * x), 0.0, 1.0)
        assert res.value == pytest.approx(1e-3 * -math.expm1(-1000.0), rel=1e-9)

    @given(st.lists(st.floats(min_value=-3, max_value=3), min_size=4, max_size=4))
    @settings(max_examples=25, deadline=None)
    def test_cubic_polynomials_exact(self, coeffs):
        poly = np.polynomial.Polynomial(coeffs)
        exact = poly.integ()(2.0) - poly.integ()(-1.0)
        res = integrate_finite(poly, -1.0, 2.0)
        assert res.value == pytest.approx(exact, abs=1e-9, rel=1e-9)


class TestIntegrateBatch:
    def test_simultaneous_rows(self):
        def f(x):
            return np.stack([np.ones_like(x), x, x * x, np.sin(x)])

        res = integrate_finite_batch(f, 0.0, 1.0)
        expected = [1.0, 0.5, 1.0 / 3.0, 1.0 - math.cos(1.0)]
        assert np.allclose(res.values, expected, atol=1e-10)
        assert res.error_estimates.shape == (4,)

    def test_refines_for_worst_row(self):
        def f(x):
            return np.stack([np.ones_like(x), np.exp(-200.0 * x)])

        res = integrate_finite_batch(f, 0.0, 1.0)
        assert res.values[1] == pytest.approx(-math.expm1(-200.0) / 200.0, rel=1e-8)


class TestIntegrateSemiInfinite:
    def test_exponential(self):
        res = integrate_semi_infinite(lambda s: np.exp(-s), 1.0)
        assert res.value == pytest.approx(1.0, abs=1e-9)

    def test_s_exponential(self):
        res = integrate_semi_infinite(lambda s: s * np.exp(-s), 1.0)
        assert res.value == pytest.approx(1.0, abs=1e-9)

    def test_windowed_kernel(self):
        # e^-s (1-s) theta(1-s) integrates to e^-1
        def f(s):
            return np.exp(-s) * (1.0 - s) * (s <= 1.0)

        res = integrate_semi_infinite(f, 1.0)
        assert res.value == pytest.approx(math.exp(-1.0), abs=1e-9)

    def test_tail_bound_in_error(self):
        res = integrate_semi_infinite(lambda s: np.exp(-s), 1.0)
        assert res.error_estimate >= DEFAULT_QUADRATURE.abs_tol * DEFAULT_QUADRATURE.tail_cutoff

    def test_start_offset(self):
        res = integrate_semi_infinite(lambda s: np.exp(-s), 1.0, start=2.0)
        assert res.value == pytest.approx(math.exp(-2.0), rel=1e-8)

    @pytest.mark.parametrize("alpha", [0.0, -1.0, math.nan])
    def test_bad_decay_rate(self, alpha):
        with pytest.raises(DomainError):
            integrate_semi_infinite(lambda s: np.exp(-s), alpha)

    def test_tiny_bound_short_circuits(self):
        res = integrate_semi_infinite(lambda s: np.exp(-s), 1.0, bound_coeff=1e-300)
        assert res.value == 0.0
        assert res.evaluations == 0
