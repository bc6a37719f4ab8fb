"""Tests for the van der Corput bound calculators and verification harness."""

import numpy as np
import pytest

from oscdecay.errors import MonotonicityRequired
from oscdecay.vdc import (
    VdcConstants,
    _osc_integral_1d,
    fresnel_ratio,
    poly_lower_abs_bound,
    vdc_bound_1d,
    vdc_bound_2d,
    vdc_verify,
)


class TestBound1d:
    def test_fresnel_bound_holds(self):
        # |int_0^1 e^{i lam x^2} dx| <= c_2 (2 lam)^{-1/2}, sharp up to ~0.16
        for lam in (1.0, 16.0, 1024.0):
            assert fresnel_ratio(lam) <= 1.0

    def test_fresnel_actual_value(self):
        # lam = 100: reduce to the Fresnel integral; reference by quadrature
        val = abs(_osc_integral_1d([0.0, 0.0, 100.0], [1.0], 0.0, 1.0))
        # for large lam, |int| -> sqrt(pi/2)/2 * lam^{-1/2} ~ 0.8862 lam^{-1/2}
        assert abs(val - 0.8862 / 10.0) < 0.02

    def test_zero_amplitude(self):
        assert vdc_bound_1d(2, 5.0, 0.0, 0.0) == 0.0

    def test_k1_monotone(self):
        bound = vdc_bound_1d(1, 50.0, 1.0, 0.0, monotone_derivative=True)
        actual = abs((np.exp(1j * 50.0) - 1.0) / (1j * 50.0))
        assert actual <= bound

    def test_k1_requires_flag(self):
        with pytest.raises(MonotonicityRequired):
            vdc_bound_1d(1, 50.0, 1.0, 0.0)

    def test_monotonicity_in_arguments(self):
        b = vdc_bound_1d(2, 4.0, 1.0, 1.0)
        assert vdc_bound_1d(2, 8.0, 1.0, 1.0) < b
        assert vdc_bound_1d(2, 4.0, 2.0, 1.0) > b
        assert vdc_bound_1d(2, 4.0, 1.0, 2.0) > b

    def test_scale_covariance(self):
        # P(sx) on [a/s, b/s] has M-tilde = s^k M and the integral rescales
        # by 1/s, so bound(scaled) * s == bound(original)
        k, M, s = 2, 7.0, 3.0
        b0 = vdc_bound_1d(k, M, 1.0, 0.5)
        b1 = vdc_bound_1d(k, M * s**k, 1.0, 0.5)
        assert abs(b1 * s - b0) < 1e-12


class TestBound2d:
    def test_hyperbolic_phase(self):
        lam = 300.0
        # |int_[0,1]^2 e^{i lam x y}| ~ ln(lam)/lam; the bound is C lam^{-1/2}
        nodes = np.linspace(0, 1, 4001)
        colv = np.where(nodes > 0, np.abs((np.exp(1j * lam * nodes) - 1) / (1j * lam * np.where(nodes == 0, 1, nodes))), 1.0)
        actual = np.trapezoid(colv, nodes)
        bound = vdc_bound_2d(lam, 1.0, 1.0, 1.0, k=2, l=1)
        assert actual <= bound

    def test_degenerate_rectangle(self):
        assert vdc_bound_2d(10.0, 1.0, 0.0, 1.0) == 0.0

    def test_large_M_limit(self):
        assert vdc_bound_2d(1e12, 1.0, 1.0, 1.0) < 1e-4

    def test_monotonicity(self):
        b = vdc_bound_2d(4.0, 1.0, 1.0, 1.0)
        assert vdc_bound_2d(8.0, 1.0, 1.0, 1.0) < b
        assert vdc_bound_2d(4.0, 2.0, 1.0, 1.0) > b
        assert vdc_bound_2d(4.0, 1.0, 2.0, 1.0) > b


class TestCertifiedBound:
    def test_certified_below_true_minimum(self):
        # q = 2 + x^2 on [-1, 1]: true min |q| = 2
        got = poly_lower_abs_bound([2.0, 0.0, 1.0], -1.0, 1.0)
        assert 0 < got <= 2.0

    def test_sign_change_gives_zero(self):
        assert poly_lower_abs_bound([-1.0, 0.0, 4.0], -1.0, 1.0) == 0.0


class TestVerify:
    def test_1d_no_violations(self):
        rep = vdc_verify(trials=100, seed=11, mode="1d", k_orders=(2, 3))
        assert rep.trials == 100
        assert rep.violations == 0
        assert rep.min_headroom >= 1.2

    def test_2d_no_violations(self):
        rep = vdc_verify(trials=100, seed=13, mode="2d")
        assert rep.trials == 100
        assert rep.violations == 0
        assert rep.min_headroom >= 1.2

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            vdc_verify(trials=0)

    def test_deterministic(self):
        a = vdc_verify(trials=20, seed=3, mode="1d")
        b = vdc_verify(trials=20, seed=3, mode="1d")
        assert a == b

    def test_constants_table(self):
        consts = VdcConstants()
        assert consts.c_k[2] == 8.0
        assert consts.c_k[3] == 18.0
        assert consts.C_kl[(2, 1)] == 26.0
