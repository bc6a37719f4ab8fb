"""Exact bivariate phase polynomials, Newton polygons and Puiseux branches.

Coefficient convention: `PhasePoly` terms are exact `Fraction`s.  Derived
objects (shifted polynomials, branch coefficients) stay exact as long as
every root extraction is rational; otherwise they degrade gracefully to
high-precision mpmath floats (>= 160 bits here, far above the 64-bit
mantissa floor the design calls for).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import mpmath
from mpmath import mp

from .errors import (
    DepthExceeded,
    EmptyPolynomial,
    RamificationOverflow,
    TruncationInsufficient,
)

if mp.dps < 50:
    mp.dps = 50

# Relative magnitude below which an mpmath coefficient is treated as an
# exact cancellation artifact.  Genuine desk-scale coefficients after a
# dozen shifts stay far above this.
_CHOP_REL = mpmath.mpf("1e-34")

# Two numeric roots of an edge polynomial closer than this (relatively)
# are one cluster.
ROOT_CLUSTER_RTOL = 1e-9

RAMIFICATION_CAP = 64


def _as_coeff(value):
    """Coerce a user value to Fraction if possible, else mpf."""
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, mpmath.mpf):
        return value
    if isinstance(value, float):
        return Fraction(int(value)) if value == int(value) else mpmath.mpf(value)
    raise TypeError(f"unsupported coefficient type {type(value)!r}")


def _to_mpf(a):
    if isinstance(a, Fraction):
        return mpmath.mpf(a.numerator) / a.denominator
    return mpmath.mpf(a)


def _cadd(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return _to_mpf(a) + _to_mpf(b)


def _cmul(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    return _to_mpf(a) * _to_mpf(b)


def _cfloat(a) -> float:
    return float(a)


def _is_exact_zero(a) -> bool:
    return isinstance(a, Fraction) and a == 0


# ---------------------------------------------------------------------------
# PhasePoly
# ---------------------------------------------------------------------------


class PhasePoly:
    """Bivariate polynomial S(x, y) with exact rational coefficients.

    Invariants: no stored coefficient is zero, S(0,0) = 0, and the
    polynomial is nonconstant.  ``order_o`` is the order of the zero at
    the origin (minimal total degree of a stored term).
    """

    __slots__ = ("terms", "order_o")

    def __init__(self, terms):
        clean = {}
        for (i, j), c in dict(terms).items():
            c = _as_coeff(c)
            if not isinstance(c, Fraction):
                raise TypeError("PhasePoly coefficients must be exact rationals")
            if c == 0:
                continue
            if i < 0 or j < 0 or i != int(i) or j != int(j):
                raise ValueError("PhasePoly exponents must be nonnegative integers")
            clean[(int(i), int(j))] = c
        if not clean:
            raise EmptyPolynomial("phase polynomial has no terms")
        if (0, 0) in clean:
            raise ValueError("phase must vanish at the origin (constant term present)")
        self.terms = clean
        self.order_o = min(i + j for (i, j) in clean)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_string(cls, text: str) -> "PhasePoly":
        """Parse forms like ``"y^2 - x^3"`` or ``"3/2 x^2 y - x^5"``."""
        text = text.replace("**", "^").replace("*", " ")
        tokens = re.findall(r"[+-]?[^+-]+", text.replace(" ", ""))
        terms: dict[tuple[int, int], Fraction] = {}
        for tok in tokens:
            if not tok:
                continue
            m = re.fullmatch(
                r"([+-]?)(\d+(?:/\d+)?)?(?:x(?:\^(\d+))?)?(?:y(?:\^(\d+))?)?", tok
            )
            if m is None or (m.group(2) is None and "x" not in tok and "y" not in tok):
                raise ValueError(f"cannot parse term {tok!r}")
            sign = -1 if m.group(1) == "-" else 1
            coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            i = 0
            if "x" in tok:
                i = int(m.group(3)) if m.group(3) else 1
            j = 0
            if "y" in tok:
                j = int(m.group(4)) if m.group(4) else 1
            key = (i, j)
            terms[key] = terms.get(key, Fraction(0)) + sign * coeff
        return cls(terms)

    def to_json_terms(self):
        return [
            {"c": str(c), "i": i, "j": j}
            for (i, j), c in sorted(self.terms.items())
        ]

    @classmethod
    def from_json_terms(cls, items) -> "PhasePoly":
        return cls({(int(t["i"]), int(t["j"])): Fraction(str(t["c"])) for t in items})

    # -- algebra ---------------------------------------------------------

    def degree_form(self, degree=None):
        """Terms of the given total degree (default: order_o), as a PhasePoly."""
        d = self.order_o if degree is None else degree
        part = {k: c for k, c in self.terms.items() if k[0] + k[1] == d}
        return PhasePoly(part)

    def scaled(self, c) -> "PhasePoly":
        c = Fraction(c)
        if c == 0:
            raise ValueError("scaling by zero")
        return PhasePoly({k: v * c for k, v in self.terms.items()})

    def reflected(self, sx: int, sy: int, swap: bool) -> "PhasePoly":
        """S(sx*u, sy*v) or S(sx*v, sy*u): the eight octant symmetries."""
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in self.terms.items():
            coeff = c * (sx**i) * (sy**j)
            key = (j, i) if swap else (i, j)
            out[key] = out.get(key, Fraction(0)) + coeff
        return PhasePoly(out)

    def rotated(self, a: int, b: int, c: int) -> "PhasePoly":
        """Exact rotation by the rational matrix [[a,-b],[b,a]]/c, a^2+b^2=c^2."""
        if a * a + b * b != c * c:
            raise ValueError("(a, b, c) must be a Pythagorean triple")
        xs = {(1, 0): Fraction(a, c), (0, 1): Fraction(-b, c)}
        ys = {(1, 0): Fraction(b, c), (0, 1): Fraction(a, c)}
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j), coeff in self.terms.items():
            prod = {(0, 0): coeff}
            for _ in range(i):
                prod = _poly2_mul(prod, xs)
            for _ in range(j):
                prod = _poly2_mul(prod, ys)
            for k, v in prod.items():
                out[k] = out.get(k, Fraction(0)) + v
        return PhasePoly({k: v for k, v in out.items() if v != 0})

    def partial(self, wrt: str):
        """Partial derivative as a RawPoly (no phase invariants), or None."""
        out = {}
        for (i, j), c in self.terms.items():
            if wrt == "x" and i > 0:
                out[(i - 1, j)] = out.get((i - 1, j), Fraction(0)) + c * i
            elif wrt == "y" and j > 0:
                out[(i, j - 1)] = out.get((i, j - 1), Fraction(0)) + c * j
        return RawPoly(out) if out else None

    # -- evaluation ------------------------------------------------------

    def __call__(self, x, y):
        """Evaluate at floats or numpy arrays."""
        total = 0.0
        for (i, j), c in self.terms.items():
            total = total + float(c) * x**i * y**j
        return total

    def eval_exact(self, x: Fraction, y: Fraction) -> Fraction:
        return sum((c * x**i * y**j for (i, j), c in self.terms.items()), Fraction(0))

    def y_degree(self) -> int:
        return max(j for (_, j) in self.terms)

    def total_degree(self) -> int:
        return max(i + j for (i, j) in self.terms)

    def as_puiseux(self) -> "PuiseuxPoly":
        return PuiseuxPoly({(Fraction(i), j): c for (i, j), c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, PhasePoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        parts = []
        for (i, j), c in sorted(self.terms.items(), key=lambda t: (t[0][0] + t[0][1], t[0])):
            parts.append(f"{c}*x^{i}*y^{j}")
        return " + ".join(parts)


def _poly2_mul(p, q):
    out = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, Fraction(0)) + c1 * c2
    return out


class RawPoly:
    """Plain bivariate polynomial (derivatives etc.), no phase invariants."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = {k: Fraction(v) for k, v in terms.items() if v != 0}

    def __call__(self, x, y):
        total = 0.0
        for (i, j), c in self.terms.items():
            total = total + float(c) * x**i * y**j
        return total

    def partial(self, wrt: str):
        out = {}
        for (i, j), c in self.terms.items():
            if wrt == "x" and i > 0:
                out[(i - 1, j)] = out.get((i - 1, j), Fraction(0)) + c * i
            elif wrt == "y" and j > 0:
                out[(i, j - 1)] = out.get((i, j - 1), Fraction(0)) + c * j
        return RawPoly(out) if out else None


# ---------------------------------------------------------------------------
# PuiseuxPoly: polynomial in (x^{1/N}, y) with rational-or-mpf coefficients
# ---------------------------------------------------------------------------


class PuiseuxPoly:
    """Finite sum  c * x^e * y^j  with rational exponents e >= 0, integer j >= 0.

    The working representation for shifted phases inside the resolution:
    exponents stay exact, coefficients stay exact while they can.
    """

    __slots__ = ("terms",)

    def __init__(self, terms, chop=True):
        clean = {}
        maxabs = mpmath.mpf(0)
        for (e, j), c in terms.items():
            if _is_exact_zero(c):
                continue
            clean[(Fraction(e), int(j))] = c
            if not isinstance(c, Fraction):
                maxabs = max(maxabs, abs(c))
        if chop and maxabs > 0:
            cut = maxabs * _CHOP_REL
            clean = {
                k: c
                for k, c in clean.items()
                if isinstance(c, Fraction) or abs(c) > cut
            }
        self.terms = clean

    def is_zero(self) -> bool:
        return not self.terms

    def y_valuation(self) -> int:
        if not self.terms:
            raise EmptyPolynomial("zero polynomial")
        return min(j for (_, j) in self.terms)

    def support(self):
        return list(self.terms.keys())

    def shift_y(self, coeff, exponent: Fraction, sign: int) -> "PuiseuxPoly":
        """Return p(x, coeff*x^exponent + sign*y), expanded exactly."""
        exponent = Fraction(exponent)
        # group by y-degree: p = sum_j  A_j(x) y^j
        by_j: dict[int, dict[Fraction, object]] = {}
        for (e, j), c in self.terms.items():
            by_j.setdefault(j, {})[e] = c
        out: dict[tuple[Fraction, int], object] = {}
        jmax = max(by_j) if by_j else 0
        # binomial powers of (coeff*x^exponent + sign*y)
        # pow_k maps m -> coefficient of y^m in the k-th power, times x-exponent offset
        for j, coeffs in by_j.items():
            # (c0 x^E + s y)^j = sum_m C(j,m) (c0 x^E)^{j-m} s^m y^m
            for m in range(j + 1):
                binom = _binomial(j, m)
                if coeff == 0 and j - m > 0:
                    continue
                cc = _cmul(binom * (sign**m), _cpow(coeff, j - m))
                if _is_exact_zero(cc) or (not isinstance(cc, Fraction) and cc == 0):
                    continue
                xoff = exponent * (j - m)
                for e, c in coeffs.items():
                    key = (e + xoff, m)
                    prev = out.get(key)
                    out[key] = _cadd(prev, _cmul(c, cc)) if prev is not None else _cmul(c, cc)
        return PuiseuxPoly(out)

    def partial(self, wrt: str) -> "PuiseuxPoly":
        out = {}
        for (e, j), c in self.terms.items():
            if wrt == "x":
                if e != 0:
                    out[(e - 1, j)] = _cmul(c, e)
            else:
                if j != 0:
                    out[(e, j - 1)] = _cmul(c, j)
        return PuiseuxPoly(out, chop=False)

    def eval_float(self, x, y):
        """Numpy-friendly evaluation for x > 0."""
        total = 0.0
        for (e, j), c in self.terms.items():
            total = total + _cfloat(c) * x ** float(e) * y**j
        return total

    def ramification(self) -> int:
        n = 1
        for (e, _) in self.terms:
            n = lcm(n, e.denominator)
        return n

    def max_abs_coeff(self) -> float:
        return max(abs(_cfloat(c)) for c in self.terms.values())

    def __repr__(self):
        parts = []
        for (e, j), c in sorted(self.terms.items()):
            parts.append(f"({c})x^{e}y^{j}")
        return " + ".join(parts) if parts else "0"


def _binomial(n: int, k: int) -> Fraction:
    out = 1
    for t in range(k):
        out = out * (n - t) // (t + 1)
    return Fraction(out)


def _cpow(c, k: int):
    if k == 0:
        return Fraction(1)
    if isinstance(c, Fraction):
        return c**k
    return _to_mpf(c) ** k


# ---------------------------------------------------------------------------
# Newton polygon
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolygonEdge:
    start: tuple  # (i, j) with larger i, smaller j
    end: tuple
    slope: Fraction  # strictly negative
    scale: Fraction  # -1/slope: root magnitude exponent y ~ x^scale
    edge_points: tuple  # support points on the edge, j ascending
    edge_polynomial: tuple  # coefficients of u^0..u^(jspan) for e(1, u), offset j_min


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple  # lower-left hull, x-axis end first (j ascending)
    edges: tuple


def _lower_left_hull(points):
    """Vertices of conv(points + first quadrant), from min-j end to min-i end."""
    pts = sorted(set(points), key=lambda p: (p[1], p[0]))
    start = pts[0]  # minimal j, then minimal i
    verts = [start]
    current = start
    while True:
        best = None
        best_slope = None
        for q in pts:
            if q[0] < current[0] and q[1] > current[1]:
                s = Fraction(q[1] - current[1], q[0] - current[0])
                if best_slope is None or s > best_slope or (
                    s == best_slope and q[1] > best[1]
                ):
                    best, best_slope = q, s
        if best is None:
            break
        verts.append(best)
        current = best
    return verts


def newton_polygon_support(support, coeff_of) -> NewtonPolygon:
    """Newton polygon machinery shared by PhasePoly and PuiseuxPoly."""
    if not support:
        raise EmptyPolynomial("no terms")
    verts = _lower_left_hull(support)
    edges = []
    for a, b in zip(verts, verts[1:]):
        slope = Fraction(b[1] - a[1], b[0] - a[0])
        scale = -1 / slope
        jmin = a[1]
        onedge = [
            p
            for p in support
            if p[1] >= a[1] and p[1] <= b[1] and (p[1] - a[1]) * (b[0] - a[0]) == (p[0] - a[0]) * (b[1] - a[1])
        ]
        onedge.sort(key=lambda p: p[1])
        degree_span = b[1] - jmin
        coeffs = [Fraction(0)] * (degree_span + 1)
        exact = True
        for p in onedge:
            c = coeff_of(p)
            coeffs[p[1] - jmin] = c
            exact = exact and isinstance(c, Fraction)
        edges.append(
            PolygonEdge(
                start=a,
                end=b,
                slope=slope,
                scale=scale,
                edge_points=tuple(onedge),
                edge_polynomial=tuple(coeffs),
            )
        )
    return NewtonPolygon(vertices=tuple(verts), edges=tuple(edges))


def newton_polygon(p: PhasePoly) -> NewtonPolygon:
    """Lower-left Newton polygon of a phase polynomial, edges annotated."""
    if not isinstance(p, PhasePoly):
        raise TypeError("newton_polygon expects a PhasePoly")
    return newton_polygon_support(list(p.terms.keys()), lambda k: p.terms[k])


def polygon_of(q: PuiseuxPoly) -> NewtonPolygon:
    return newton_polygon_support(q.support(), lambda k: q.terms[k])


def vertex_for_scale_interval(poly: NewtonPolygon, lo: Fraction, hi=None):
    """The unique support vertex minimizing i + e*j for e in (lo, hi).

    Caller guarantees no edge scale lies strictly inside (lo, hi); hi=None
    means (lo, infinity).  Vertex idx is minimal exactly for scales between
    its adjacent edge scales: edges[idx].scale < e < edges[idx-1].scale
    (edge scales decrease along the returned vertex order).
    """
    verts = poly.vertices
    edges = poly.edges
    for idx, v in enumerate(verts):
        left = edges[idx - 1].scale if idx > 0 else None  # None = +infinity
        right = edges[idx].scale if idx < len(edges) else None  # None = 0
        left_ok = left is None if hi is None else (left is None or hi <= left)
        right_ok = right is None or right <= lo
        if left_ok and right_ok:
            return v
    raise ValueError("no single vertex for the requested scale interval")


# ---------------------------------------------------------------------------
# Puiseux series and branches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PuiseuxSeries:
    """Truncated real fractional-power series y = sum c_k x^{e_k}.

    ``exact`` marks series that terminate (the tail is identically zero),
    in which case ``truncation_order`` is just a formal bound.
    """

    ramification_N: int
    terms: tuple  # ((Fraction exponent, coefficient), ...) exponents increasing
    truncation_order: Fraction
    exact: bool = False

    def __post_init__(self):
        last = None
        for e, c in self.terms:
            if e < 1:
                raise ValueError("shift exponents must be >= 1")
            if last is not None and e <= last:
                raise ValueError("exponents must increase strictly")
            if _is_exact_zero(c) or (not isinstance(c, Fraction) and c == 0):
                raise ValueError("zero coefficient stored")
            if e.denominator > self.ramification_N or self.ramification_N % e.denominator:
                raise ValueError("exponent denominator incompatible with ramification")
            last = e
        if self.terms and self.truncation_order <= self.terms[-1][0]:
            raise ValueError("truncation_order must exceed the largest exponent")
        if self.ramification_N > RAMIFICATION_CAP:
            raise RamificationOverflow(
                f"ramification {self.ramification_N} exceeds cap {RAMIFICATION_CAP}"
            )

    @classmethod
    def from_terms(cls, terms, truncation_order=None, exact=False) -> "PuiseuxSeries":
        terms = tuple((Fraction(e), c) for e, c in terms)
        n = 1
        for e, _ in terms:
            n = lcm(n, e.denominator)
        if truncation_order is None:
            truncation_order = (terms[-1][0] + 1) if terms else Fraction(1)
        return cls(
            ramification_N=n,
            terms=terms,
            truncation_order=Fraction(truncation_order),
            exact=exact,
        )

    @classmethod
    def zero(cls) -> "PuiseuxSeries":
        return cls(ramification_N=1, terms=(), truncation_order=Fraction(1), exact=True)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, x):
        """Evaluate at positive floats / numpy arrays."""
        total = 0.0
        for e, c in self.terms:
            total = total + _cfloat(c) * x ** float(e)
        return total

    def negated(self) -> "PuiseuxSeries":
        return PuiseuxSeries(
            ramification_N=self.ramification_N,
            terms=tuple((e, -c) for e, c in self.terms),
            truncation_order=self.truncation_order,
            exact=self.exact,
        )

    def leading(self):
        """(exponent, coefficient) of the lowest-order term, or None."""
        return self.terms[0] if self.terms else None

    def appended(self, exponent, coeff, exact=False) -> "PuiseuxSeries":
        terms = self.terms + ((Fraction(exponent), coeff),)
        return PuiseuxSeries.from_terms(
            terms, truncation_order=Fraction(exponent) + 1, exact=exact
        )

    def describe(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({_cfloat(c):.12g})x^{e}" for e, c in self.terms)


def shift_substitute(p, phi: PuiseuxSeries, sign: int, order=None) -> PuiseuxPoly:
    """Expand p(x, sign*y + phi(x)) in powers of x^{1/N} and y.

    ``order``, when given, truncates the x-order of the result and must not
    exceed what phi's truncation supports.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if order is not None and not phi.exact and Fraction(order) > phi.truncation_order:
        raise TruncationInsufficient(
            f"requested order {order} exceeds truncation {phi.truncation_order}"
        )
    q = p.as_puiseux() if isinstance(p, PhasePoly) else p
    for e, c in phi.terms:
        q = q.shift_y(c, e, 1)  # y -> c x^e + y, composable in any order
    if sign == -1:
        q = PuiseuxPoly(
            {(e, j): _cmul(c, (-1) ** j) for (e, j), c in q.terms.items()}, chop=False
        )
    if order is not None:
        q = PuiseuxPoly(
            {k: c for k, c in q.terms.items() if k[0] <= Fraction(order)}, chop=False
        )
    return q


# -- edge-root extraction ----------------------------------------------------


def _rational_roots(coeffs):
    """Exact nonzero rational roots (root, multiplicity) of sum c_k u^k, Fraction coeffs.

    Deflates each found root; returns (roots, remaining_coeffs).
    """
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    # strip u^v factor
    val = 0
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
        val += 1
    roots = []
    if len(coeffs) <= 1:
        return roots, coeffs
    den = lcm(*(c.denominator for c in coeffs))
    ints = [int(c * den) for c in coeffs]
    a0, an = ints[0], ints[-1]

    def divisors(n):
        n = abs(n)
        out = set()
        d = 1
        while d * d <= n:
            if n % d == 0:
                out.add(d)
                out.add(n // d)
            d += 1
        return sorted(out)

    candidates = sorted(
        {
            Fraction(sp * pnum, qden)
            for pnum in divisors(a0)
            for qden in divisors(an)
            for sp in (1, -1)
        }
    )
    changed = True
    while changed and len(coeffs) > 1:
        changed = False
        for r in candidates:
            acc = Fraction(0)
            for c in reversed(coeffs):
                acc = acc * r + c
            if acc == 0:
                # synthetic division of ascending coeffs by (u - r)
                b = [Fraction(0)] * (len(coeffs) - 1)
                b[-1] = coeffs[-1]
                for k in range(len(coeffs) - 2, 0, -1):
                    b[k - 1] = coeffs[k] + r * b[k]
                coeffs = b
                for entry in roots:
                    if entry[0] == r:
                        entry[1] += 1
                        break
                else:
                    roots.append([r, 1])
                changed = True
                break
    return [(r, m) for r, m in roots], coeffs


def edge_roots(edge_polynomial):
    """Nonzero roots of an edge polynomial with multiplicity, exact when possible.

    Returns a list of (root, multiplicity, is_real) with root either Fraction
    or mpmath complex; numerically close roots are clustered (ROOT_CLUSTER_RTOL).
    """
    coeffs = list(edge_polynomial)
    out = []
    rest = coeffs
    if all(isinstance(c, Fraction) for c in coeffs):
        rats, rest = _rational_roots(coeffs)
        out.extend((r, m, True) for r, m in rats)
    # strip trailing/leading exact zeros of the (possibly deflated) remainder
    rest = list(rest)
    while rest and _is_exact_zero(rest[-1]):
        rest.pop()
    while rest and _is_exact_zero(rest[0]):
        rest.pop(0)
    if len(rest) > 1:
        mp_coeffs = list(reversed([_to_mpf(c) for c in rest]))  # descending powers
        roots = mpmath.polyroots(mp_coeffs, maxsteps=200, extraprec=80)
        scale = max(abs(r) for r in roots) if roots else mpmath.mpf(1)
        clusters: list[list] = []
        for r in roots:
            for cl in clusters:
                if abs(r - cl[0]) <= ROOT_CLUSTER_RTOL * max(abs(cl[0]), scale):
                    cl[1] += 1
                    cl[0] = cl[0] + (r - cl[0]) / cl[1]
                    break
            else:
                clusters.append([r, 1])
        for centre, mult in clusters:
            is_real = abs(mpmath.im(centre)) <= ROOT_CLUSTER_RTOL * max(
                mpmath.mpf(1), abs(centre)
            )
            root = mpmath.re(centre) if is_real else centre
            out.append((root, mult, is_real))
    return out


def puiseux_branches(p: PhasePoly, max_depth: int = 12):
    """All real Puiseux branches y = phi(x), x -> 0+, with exponents >= 1.

    Branches are truncated where they separate from every other branch or
    their multiplicity drops to 1; exact terminating branches are flagged.
    The trivial branch y = 0 (when y divides p) is implicit and not listed.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be positive")
    q0 = p.as_puiseux()
    results = []

    def recurse(q: PuiseuxPoly, prefix: PuiseuxSeries, min_scale: Fraction, depth: int):
        if depth > max_depth:
            raise DepthExceeded(
                f"branches failed to separate within {max_depth} refinement steps"
            )
        poly = polygon_of(q)
        for edge in poly.edges:
            if edge.scale <= min_scale or edge.scale < 1:
                continue
            for root, mult, is_real in edge_roots(edge.edge_polynomial):
                if not is_real:
                    continue
                new_prefix = prefix.appended(edge.scale, root)
                if new_prefix.ramification_N > RAMIFICATION_CAP:
                    raise RamificationOverflow(
                        f"ramification exceeds {RAMIFICATION_CAP}"
                    )
                shifted = q.shift_y(root, edge.scale, 1)
                if shifted.is_zero() or shifted.y_valuation() >= 1:
                    # exact root: branch terminates here
                    results.append(
                        PuiseuxSeries.from_terms(new_prefix.terms, exact=True)
                    )
                elif mult == 1:
                    results.append(new_prefix)
                else:
                    recurse(shifted, new_prefix, edge.scale, depth + 1)

    recurse(q0, PuiseuxSeries.zero(), Fraction(0), 1)
    results.sort(key=lambda s: tuple((float(e), _cfloat(c)) for e, c in s.terms))
    return results
