"""Tests for the oscillatory integral and sublevel Monte Carlo oracles."""

import numpy as np
import pytest

from oscdecay.errors import BudgetExceeded, NonIntegrable, SingularPoint
from oscdecay.exponents import DensitySpec
from oscdecay.numerics import (
    LambdaTriple,
    QuadConfig,
    density_eval,
    oscillatory_integral,
    oscillatory_integral_reference,
    oscillatory_sweep,
    sublevel_ladder,
    sublevel_measure,
)
from oscdecay.phase import PhasePoly


def phase(s):
    return PhasePoly.from_string(s)


def radial_bump_integral_exact(r):
    # integral of (1 - (rho/r)^2)^2 over the plane = pi r^2 / 3
    return np.pi * r * r / 3.0


def radial_reference(lam1, r):
    """Exact T for S = x^2+y^2 with the C^1 bump: pi * I(lam1) via parts."""
    R = r * r
    il = 1j * lam1
    if lam1 == 0:
        return radial_bump_integral_exact(r)
    term = -1.0 / il + (2.0 / (il * R)) * (-1.0 / il + (np.exp(il * R) - 1.0) / (il**2 * R))
    return np.pi * term


class TestDensityEval:
    def test_flat(self):
        ds = DensitySpec(alpha=0, beta=0)
        assert density_eval(ds, phase("x y"), 0.3, 0.2) == 1.0

    def test_weighted_point(self):
        ds = DensitySpec(alpha=1, beta=2)
        val = density_eval(ds, phase("x y"), 0.5, 0.5)
        assert abs(val - (0.25 * 0.5)) < 1e-15

    def test_cusp_negative_alpha(self):
        ds = DensitySpec(alpha=-1 / 3, beta=0)
        val = density_eval(ds, phase("y^2 - x^3"), 0.25, 0.2)
        expect = abs(0.2**2 - 0.25**3) ** (-1 / 3)
        assert abs(val - expect) < 1e-12
        assert abs(val - 3.448) < 2e-3

    def test_singular_point_raises(self):
        ds = DensitySpec(alpha=-1, beta=0)
        with pytest.raises(SingularPoint):
            density_eval(ds, phase("x y"), 0.5, 0.0)


class TestOscillatoryIntegral:
    def test_zero_amplitude(self):
        ds = DensitySpec(K_model="zero")
        val, err, n = oscillatory_integral(phase("x^2 + y^2"), ds, LambdaTriple(10.0))
        assert val == 0j and err == 0.0

    def test_static_radial_value(self):
        ds = DensitySpec(alpha=0, beta=0, r=1.0)
        val, err, _ = oscillatory_integral(
            phase("x^2 + y^2"), ds, LambdaTriple(0.0), check_integrability=False
        )
        assert abs(val.imag) < 1e-9
        assert abs(val.real - radial_bump_integral_exact(1.0)) < 1e-6

    @pytest.mark.parametrize("lam1", [10.0, 100.0, 1000.0, 31.7])
    def test_matches_radial_reference(self, lam1):
        ds = DensitySpec(alpha=0, beta=0, r=1.0)
        val, err, _ = oscillatory_integral(
            phase("x^2 + y^2"), ds, LambdaTriple(lam1), check_integrability=False
        )
        exact = radial_reference(lam1, 1.0)
        assert abs(val - exact) < max(3 * err, 2e-4 * abs(exact) + 1e-9)

    def test_decay_rate_radial(self):
        # delta = 1 at o = 2: |T| ~ c / lam1 across the ladder
        ds = DensitySpec(alpha=0, beta=0, r=1.0)
        lams = [10.0**k for k in range(2, 6)]
        sweep = oscillatory_sweep(
            phase("x^2 + y^2"), ds, [LambdaTriple(l) for l in lams]
        )
        vals = np.array([abs(v) for (_, v, _, _) in sweep])
        slopes = np.diff(np.log(vals)) / np.diff(np.log(lams))
        assert np.all(np.abs(slopes + 1.0) < 0.05)

    def test_conjugation_symmetry(self):
        ds = DensitySpec(alpha=0, beta=0, r=0.8)
        lam = LambdaTriple(37.0, 3.0, -2.0)
        v1, e1, _ = oscillatory_integral(phase("x y"), ds, lam, check_integrability=False)
        v2, e2, _ = oscillatory_integral(
            phase("x y"), ds, lam.negated(), check_integrability=False
        )
        assert abs(v2 - np.conj(v1)) < 3 * (e1 + e2) + 1e-10

    def test_amplitude_linearity(self):
        ds1 = DensitySpec(alpha=0, beta=0, r=0.8, k_scale=1.0)
        ds2 = DensitySpec(alpha=0, beta=0, r=0.8, k_scale=2.0)
        lam = LambdaTriple(55.0)
        v1, e1, _ = oscillatory_integral(phase("y^2 - x^3"), ds1, lam, check_integrability=False)
        v2, e2, _ = oscillatory_integral(phase("y^2 - x^3"), ds2, lam, check_integrability=False)
        assert abs(v2 - 2 * v1) < 3 * (2 * e1 + e2) + 1e-10

    def test_agrees_with_reference_quadrature(self):
        ds = DensitySpec(alpha=0, beta=0, r=0.8)
        for s in ("x y", "y^2 - x^3"):
            for lam in (LambdaTriple(20.0), LambdaTriple(60.0, 5.0, -4.0)):
                v, err, _ = oscillatory_integral(phase(s), ds, lam, check_integrability=False)
                ref = oscillatory_integral_reference(phase(s), ds, lam)
                assert abs(v - ref) < max(5 * err, 5e-5), (s, lam)

    def test_self_consistency_under_tolerance_halving(self):
        ds = DensitySpec(alpha=0, beta=0, r=0.8)
        lam = LambdaTriple(500.0)
        cfg1 = QuadConfig()
        cfg2 = QuadConfig(points_per_octave=48, points_uniform=6000, ray_panels=128)
        v1, e1, _ = oscillatory_integral(phase("y^2 - x^3"), ds, lam, cfg1, check_integrability=False)
        v2, _, _ = oscillatory_integral(phase("y^2 - x^3"), ds, lam, cfg2, check_integrability=False)
        assert abs(abs(v1) - abs(v2)) <= e1 + 1e-12

    def test_budget_exceeded(self):
        ds = DensitySpec(alpha=0, beta=0, r=0.8)
        cfg = QuadConfig(max_evals=1000)
        with pytest.raises(BudgetExceeded) as info:
            oscillatory_integral(phase("x y"), ds, LambdaTriple(10.0), cfg,
                                 check_integrability=False)
        assert info.value.partial is not None

    def test_non_integrable_rejected(self):
        ds = DensitySpec(alpha=-2, beta=0, r=0.8)
        with pytest.raises(NonIntegrable):
            oscillatory_integral(phase("x y"), ds, LambdaTriple(10.0))


class TestSublevel:
    def test_disk_area(self):
        ds = DensitySpec(alpha=0, beta=0)
        est = sublevel_measure(phase("x^2 + y^2"), ds, 0.01, r=1.0, seed=3)
        expect = np.pi * 0.01
        assert abs(est.value - expect) < max(3 * est.std_error, 2e-4)

    def test_weighted_disk(self):
        ds = DensitySpec(alpha=1, beta=0)
        est = sublevel_measure(phase("x^2 + y^2"), ds, 0.01, r=1.0, seed=3)
        expect = np.pi / 2 * 0.01**2
        assert abs(est.value - expect) < max(3 * est.std_error, 2e-6)

    def test_hyperbola_area(self):
        eps = 1e-3
        ds = DensitySpec(alpha=0, beta=0)
        est = sublevel_measure(phase("x y"), ds, eps, r=1.0, n=8192, seed=5)
        xs = np.linspace(1e-9, 1.0, 2_000_001)
        cols = np.minimum(np.sqrt(np.clip(1 - xs**2, 0, None)), eps / xs)
        expect = 4 * np.trapezoid(cols, xs)
        assert abs(est.value - expect) < 3 * est.std_error + 1e-5

    def test_monotone_in_epsilon(self):
        ds = DensitySpec(alpha=0, beta=0)
        ladder = sublevel_ladder(phase("y^2 - x^3"), ds,
                                 [2.0**-k for k in range(6, 16)], r=0.8, seed=9)
        vals = [e.value for e in sorted(ladder, key=lambda e: e.epsilon)]
        assert all(a <= b * (1 + 1e-12) for a, b in zip(vals[:-1], vals[1:]))

    def test_deterministic(self):
        ds = DensitySpec(alpha=0, beta=0)
        a = sublevel_measure(phase("x y"), ds, 0.01, r=1.0, n=512, seed=42)
        b = sublevel_measure(phase("x y"), ds, 0.01, r=1.0, n=512, seed=42)
        assert a == b

    def test_epsilon_domain(self):
        ds = DensitySpec()
        with pytest.raises(ValueError):
            sublevel_measure(phase("x y"), ds, 0.9, r=1.0)

    def test_non_integrable(self):
        ds = DensitySpec(alpha=-2)
        with pytest.raises(NonIntegrable):
            sublevel_measure(phase("x y"), ds, 0.01, r=1.0)
