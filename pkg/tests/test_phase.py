"""Tests for exact phase arithmetic, Newton polygons and Puiseux branches."""

import itertools
from fractions import Fraction

import pytest

from oscdecay.errors import DepthExceeded, EmptyPolynomial, TruncationInsufficient
from oscdecay.phase import (
    NewtonPolygon,
    PhasePoly,
    PuiseuxSeries,
    newton_polygon,
    puiseux_branches,
    shift_substitute,
)

F = Fraction


def brute_force_hull(points):
    """Independent oracle: lower-left hull via exhaustive minimization.

    A support point is a hull vertex iff it is the unique minimizer of
    i + e*j for some weight e > 0 (scan a fine rational weight grid plus
    all pairwise critical weights).
    """
    crit = set()
    for (i1, j1), (i2, j2) in itertools.combinations(points, 2):
        if j1 != j2:
            e = Fraction(i2 - i1, j1 - j2)
            if e > 0:
                crit.add(e)
    weights = sorted(crit)
    probes = []
    grid = [Fraction(1, 100), Fraction(10000)]
    for a, b in zip([Fraction(0)] + weights, weights + [weights[-1] * 2 if weights else Fraction(1)]):
        probes.append((a + b) / 2 if a < b else a + 1)
    probes.extend(grid)
    verts = set()
    for e in probes:
        if e <= 0:
            continue
        vals = {p: p[0] + e * p[1] for p in points}
        m = min(vals.values())
        argmins = [p for p, v in vals.items() if v == m]
        if len(argmins) == 1:
            verts.add(argmins[0])
    return verts


class TestNewtonPolygon:
    def test_single_monomial(self):
        poly = newton_polygon(PhasePoly.from_string("x y"))
        assert poly.vertices == ((1, 1),)
        assert poly.edges == ()

    def test_cusp(self):
        poly = newton_polygon(PhasePoly.from_string("y^2 - x^3"))
        assert poly.vertices == ((3, 0), (0, 2))
        assert len(poly.edges) == 1
        assert poly.edges[0].slope == F(-2, 3)
        assert poly.edges[0].scale == F(3, 2)

    def test_three_vertices(self):
        p = PhasePoly.from_string("x^2 y + x y^3 + x^5")
        poly = newton_polygon(p)
        assert poly.vertices == ((5, 0), (2, 1), (1, 3))
        assert brute_force_hull(list(p.terms)) == set(poly.vertices)

    def test_hull_matches_brute_force(self):
        supports = [
            {(0, 2), (3, 0)},
            {(0, 3), (1, 1), (4, 0)},
            {(0, 4), (2, 2), (1, 3), (5, 0), (3, 1)},
            {(2, 1)},
            {(0, 2), (2, 0), (1, 1)},
        ]
        for supp in supports:
            p = PhasePoly({k: F(1) for k in supp})
            poly = newton_polygon(p)
            assert set(poly.vertices) == brute_force_hull(list(supp)), supp

    def test_slopes_strictly_decrease(self):
        p = PhasePoly.from_string("x^2 y + x y^3 + x^5 + y^6")
        poly = newton_polygon(p)
        slopes = [e.slope for e in poly.edges]
        assert all(s < 0 for s in slopes)
        assert all(a > b for a, b in zip(slopes, slopes[1:]))

    def test_scaling_invariance(self):
        p = PhasePoly.from_string("y^2 - x^3 + x y")
        for c in (2, -1, F(7, 3)):
            q = p.scaled(c)
            assert newton_polygon(q).vertices == newton_polygon(p).vertices

    def test_empty_raises(self):
        with pytest.raises(EmptyPolynomial):
            PhasePoly({})

    def test_edge_polynomial(self):
        poly = newton_polygon(PhasePoly.from_string("y^2 - x^3"))
        assert poly.edges[0].edge_polynomial == (F(-1), F(0), F(1))


class TestShiftSubstitute:
    def test_identity_shift(self):
        p = PhasePoly.from_string("y^2 - x^3")
        q = shift_substitute(p, PuiseuxSeries.zero(), +1)
        assert dict(q.terms) == {(F(0), 2): F(1), (F(3), 0): F(-1)}

    def test_linear_shift_oracle(self):
        # (y + x)^2 - 2x(y + x) + x^2 - x^3 == y^2 - x^3, expanded by hand
        p = PhasePoly.from_string("y^2 - 2 x y + x^2 - x^3")
        phi = PuiseuxSeries.from_terms([(F(1), F(1))], exact=True)
        q = shift_substitute(p, phi, +1)
        assert dict(q.terms) == {(F(0), 2): F(1), (F(3), 0): F(-1)}

    def test_fractional_shift_oracle(self):
        p = PhasePoly.from_string("y^2 - x^3")
        phi = PuiseuxSeries.from_terms([(F(3, 2), F(1))], exact=True)
        q = shift_substitute(p, phi, +1)
        assert dict(q.terms) == {(F(0), 2): F(1), (F(3, 2), 1): F(2)}

    def test_negative_sign(self):
        # p(x, -y + x^{3/2}) = y^2 - 2 x^{3/2} y
        p = PhasePoly.from_string("y^2 - x^3")
        phi = PuiseuxSeries.from_terms([(F(3, 2), F(1))], exact=True)
        q = shift_substitute(p, phi, -1)
        assert dict(q.terms) == {(F(0), 2): F(1), (F(3, 2), 1): F(-2)}

    def test_shift_then_unshift_roundtrip(self):
        p = PhasePoly.from_string("y^3 + x^2 y - x^4")
        phi = PuiseuxSeries.from_terms([(F(1), F(2)), (F(2), F(-3))], exact=True)
        q = shift_substitute(p, phi, +1)
        back = q
        for e, c in sorted(phi.terms, key=lambda t: -t[0]):
            back = back.shift_y(-c, e, 1)
        assert {k: v for k, v in back.terms.items()} == {
            (F(i), j): c for (i, j), c in p.terms.items()
        }

    def test_truncation_guard(self):
        p = PhasePoly.from_string("y^2 - x^3")
        phi = PuiseuxSeries.from_terms([(F(3, 2), F(1))], truncation_order=F(2))
        with pytest.raises(TruncationInsufficient):
            shift_substitute(p, phi, +1, order=F(3))


def eval_branch(p, phi, x):
    return p(x, phi(x))


class TestPuiseuxBranches:
    def test_cusp_branches(self):
        p = PhasePoly.from_string("y^2 - x^3")
        branches = puiseux_branches(p)
        assert len(branches) == 2
        exps = sorted(tuple(b.terms) for b in branches)
        assert exps == [((F(3, 2), F(-1)),), ((F(3, 2), F(1)),)]
        assert all(b.exact for b in branches)

    def test_perturbed_double_root(self):
        # (y - x)^2 - x^5: complete the square -> y = x ± x^{5/2}
        p = PhasePoly.from_string("y^2 - 2 x y + x^2 - x^5")
        branches = puiseux_branches(p)
        assert len(branches) == 2
        for b in branches:
            assert b.terms[0] == (F(1), F(1))
            assert b.terms[1][0] == F(5, 2)
        coeffs = sorted(b.terms[1][1] for b in branches)
        assert coeffs == [F(-1), F(1)]

    def test_no_real_branches(self):
        p = PhasePoly.from_string("y^2 + x^2")
        assert puiseux_branches(p) == []

    def test_branch_approximates_zero_curve(self):
        # along each branch, |p(x, phi(x))| decays faster than along any
        # slightly-off direction at the same x-scale
        p = PhasePoly.from_string("y^2 - x^3")
        for phi in puiseux_branches(p):
            for j in range(5, 21):
                x = 2.0**-j
                on = abs(eval_branch(p, phi, x))
                off = abs(p(x, phi(x) * 1.01))
                assert on <= off * 1e-2 or on == 0.0

    def test_depth_guard(self):
        p = PhasePoly.from_string("y^2 - 2 x y + x^2 - x^5")
        with pytest.raises(DepthExceeded):
            puiseux_branches(p, max_depth=1)

    def test_separation_is_pairwise(self):
        p = PhasePoly.from_string("y^2 - 2 x y + x^2 - x^5")
        branches = puiseux_branches(p)
        a, b = branches
        assert tuple(a.terms) != tuple(b.terms)


class TestPhasePoly:
    def test_order(self):
        assert PhasePoly.from_string("y^2 - x^3").order_o == 2
        assert PhasePoly.from_string("x^2 y").order_o == 3

    def test_rotation_preserves_order(self):
        p = PhasePoly.from_string("x y")
        q = p.rotated(3, 4, 5)
        assert q.order_o == 2
        # S0 of the rotation has nonvanishing pure powers
        assert (2, 0) in q.terms and (0, 2) in q.terms

    def test_rotation_is_isometry_numerically(self):
        p = PhasePoly.from_string("x^2 y - y^3 + x^4")
        q = p.rotated(3, 4, 5)
        for (x, y) in [(0.2, 0.1), (-0.3, 0.25)]:
            u = (3 * x - 4 * y) / 5, (4 * x + 3 * y) / 5
            assert abs(p(u[0], u[1]) - q(x, y)) < 1e-12

    def test_reflections(self):
        p = PhasePoly.from_string("x^2 y")
        q = p.reflected(-1, 1, swap=False)
        assert q.terms == {(2, 1): F(1)}
        q = p.reflected(1, -1, swap=False)
        assert q.terms == {(2, 1): F(-1)}
        q = p.reflected(1, 1, swap=True)
        assert q.terms == {(1, 2): F(1)}

    def test_json_roundtrip(self):
        p = PhasePoly.from_string("3/2 x^2 y - x^5 + y^4")
        q = PhasePoly.from_json_terms(p.to_json_terms())
        assert q == p
