import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enhfactor.errors import DomainError, UnsupportedCaseError
from enhfactor.formfactor import (
    Chaoticity,
    ScaledTime,
    b2_gue,
    b2_transient,
    laplace_b2,
    laplace_b2_eta_derivative,
)

from oracles import (
    b2_crossover_bruteforce,
    gue_laplace_closed_form,
    gue_laplace_derivative_closed_form,
    laplace_b2_bruteforce,
)


class TestChaoticity:
    def test_basic(self):
        assert Chaoticity(0.0).kappa == 0.0
        assert not Chaoticity(5.0).is_infinite

    def test_infinite_variant(self):
        k = Chaoticity.infinite()
        assert k.is_infinite
        assert Chaoticity(math.inf) == k

    @pytest.mark.parametrize("bad", [-1.0, -1e-9, math.nan])
    def test_invalid(self, bad):
        with pytest.raises(DomainError):
            Chaoticity(bad)

    def test_coerce(self):
        assert Chaoticity.coerce(2.0) == Chaoticity(2.0)
        k = Chaoticity(3.0)
        assert Chaoticity.coerce(k) is k


class TestScaledTime:
    def test_valid(self):
        assert ScaledTime(0.0).s == 0.0

    @pytest.mark.parametrize("bad", [-0.1, math.inf, math.nan])
    def test_invalid(self, bad):
        with pytest.raises(DomainError):
            ScaledTime(bad)


class TestB2Gue:
    @pytest.mark.parametrize("s,expected", [(0.0, 1.0), (0.25, 0.75), (1.0, 0.0), (1.5, 0.0)])
    def test_values(self, s, expected):
        assert b2_gue(s) == expected

    def test_negative(self):
        with pytest.raises(DomainError):
            b2_gue(-0.2)

    @given(st.floats(min_value=0.0, max_value=0.999))
    @settings(max_examples=40, deadline=None)
    def test_linear_below_one(self, s):
        assert b2_gue(s) == pytest.approx(1.0 - s, abs=1e-15)


class TestB2Transient:
    def test_kappa_zero_vanishes(self):
        for s in (0.1, 0.5, 0.9, 1.0, 1.7, 3.0):
            assert abs(b2_transient(s, 0.0)) < 1e-8

    def test_s_zero_vanishes_on_kappa_grid(self):
        for kappa in np.geomspace(1e-3, 1e3, 13):
            assert abs(b2_transient(0.0, float(kappa))) < 1e-8

    def test_infinite_kappa_is_gue(self):
        for s in (0.0, 0.3, 1.0, 2.0):
            assert b2_transient(s, Chaoticity.infinite()) == b2_gue(s)

    def test_against_bruteforce_oracle(self):
        # fixed-order Chebyshev rule with >= 10^4 nodes, original y-integral
        for s, kappa in ((0.5, 1.0), (0.25, 5.0), (1.5, 0.7)):
            ref = b2_crossover_bruteforce(s, kappa, n_nodes=20000)
            assert b2_transient(s, kappa) == pytest.approx(ref, abs=2e-9)

    def test_against_bruteforce_oracle_at_s_one(self):
        # at s = 1 the oracle's integrand has an integrable endpoint
        # singularity, so its O(1/n) error is removed by extrapolating the
        # 20k- and 80k-node values
        ref = (4.0 * b2_crossover_bruteforce(1.0, 2.0, 80000)
               - b2_crossover_bruteforce(1.0, 2.0, 20000)) / 3.0
        assert b2_transient(1.0, 2.0) == pytest.approx(ref, abs=5e-8)

    def test_large_kappa_approaches_gue(self):
        # pointwise approach holds for s above the shrinking ~1/kappa dip
        # layer at the origin (where B2 = 0 exactly for every finite kappa);
        # the slowest region is the neighborhood of s = 1
        grid = np.linspace(0.05, 2.0, 40)
        worst = max(abs(b2_transient(float(s), 1e3) - b2_gue(float(s))) for s in grid)
        assert worst < 0.02

    def test_beta_one_rejected(self):
        with pytest.raises(UnsupportedCaseError):
            b2_transient(0.5, 1.0, beta=1)

    def test_nonfinite_s_rejected(self):
        with pytest.raises(DomainError):
            b2_transient(math.inf, 1.0)
        with pytest.raises(DomainError):
            b2_transient(-0.5, 1.0)


class TestLaplaceB2:
    def test_kappa_zero(self):
        assert laplace_b2(1.0, 0.0) == 0.0

    def test_eta_zero_continuity(self):
        assert laplace_b2(0.0, 5.0) == 0.0

    def test_gue_closed_form(self):
        for eta in (0.1, 0.5, 1.0, 2.0, 10.0):
            ref = gue_laplace_closed_form(eta)
            assert laplace_b2(eta, Chaoticity.infinite()) == pytest.approx(ref, abs=1e-10)
        assert laplace_b2(1.0, Chaoticity.infinite()) == pytest.approx(math.exp(-1.0), abs=1e-10)

    def test_against_2d_bruteforce(self):
        ref = laplace_b2_bruteforce(2.0, 5.0)
        assert laplace_b2(2.0, 5.0) == pytest.approx(ref, abs=1e-7)

    def test_bounded_on_grid(self, loose_cfg):
        for eta in (0.2, 1.0, 5.0, 50.0):
            for kappa in (0.1, 1.0, 10.0, float("inf")):
                v = laplace_b2(eta, kappa, loose_cfg)
                assert -1e-8 <= v <= 1.0 + 1e-8

    def test_negative_eta(self):
        with pytest.raises(DomainError):
            laplace_b2(-0.5, 1.0)

    def test_beta_one_rejected(self):
        with pytest.raises(UnsupportedCaseError):
            laplace_b2(1.0, 5.0, beta=1)


class TestLaplaceDerivative:
    def test_kappa_zero(self):
        assert laplace_b2_eta_derivative(1.0, 0.0) == 0.0

    def test_gue_closed_form(self):
        ref = gue_laplace_derivative_closed_form(1.0)
        assert laplace_b2_eta_derivative(1.0, Chaoticity.infinite()) == pytest.approx(ref, abs=1e-10)
        assert ref == pytest.approx(1.0 - 2.0 * math.exp(-1.0))

    def test_matches_finite_differences(self):
        # central differences of laplace_b2 with h = 1e-4, tolerance 1e-6
        h = 1e-4
        for eta in (0.5, 1.0, 2.0, 5.0):
            for kappa in (0.5, 5.0, 50.0):
                fd = (laplace_b2(eta + h, kappa) - laplace_b2(eta - h, kappa)) / (2.0 * h)
                assert laplace_b2_eta_derivative(eta, kappa) == pytest.approx(fd, abs=1e-6)

    def test_specific_finite_difference_case(self):
        h = 1e-4
        fd = (laplace_b2(1.0 + h, 5.0) - laplace_b2(1.0 - h, 5.0)) / (2.0 * h)
        assert laplace_b2_eta_derivative(1.0, 5.0) == pytest.approx(fd, abs=1e-6)

    def test_eta_zero_rejected(self):
        with pytest.raises(DomainError):
            laplace_b2_eta_derivative(0.0, 5.0)
