"""Constructive wedge decomposition of a polynomial phase near the origin.

A neighborhood of the origin is split into eight octant triangles, each
mapped to the model sector T_b = {x > 0, 0 < y < b x}.  Inside a sector the
phase is recursively split, scale by scale, into wedge domains on which a
shifted copy of the phase is comparable (within a relative tolerance eta)
to a single monomial d * x^A * y^B.  Scales and shift coefficients come
from the Newton polygon of the running shifted polynomial; real positive
edge roots open cluster recursions, everything else is handled by slicing.
"""

from __future__ import annotations

import concurrent.futures
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _rng
from .errors import (
    DegenerateForm,
    DepthExceeded,
    EmptyPolynomial,
    SampleOutsideDomain,
)
from .phase import (
    PhasePoly,
    PuiseuxPoly,
    PuiseuxSeries,
    _cfloat,
    edge_roots,
    polygon_of,
    shift_substitute,
    vertex_for_scale_interval,
)

SLOPE_CANDIDATES = [
    Fraction(1, 2), Fraction(1, 3), Fraction(2, 5), Fraction(3, 7),
]
SLOPE_CANDIDATES_RETRY = [
    Fraction(1, 4), Fraction(2, 7), Fraction(3, 8), Fraction(5, 9),
    Fraction(1, 5), Fraction(4, 9), Fraction(3, 10), Fraction(5, 11),
]
ROTATIONS = [(3, 4, 5), (5, 12, 13), (8, 15, 17), (20, 21, 29)]

GUARD_REL = 1e-6  # boundary guard band, assigned to the lower-indexed wedge
STOP_GAP = 1  # residual-scale gap beyond which branch extension stops

# The eight reflections (sx, sy, swap): model (u,v) -> plane (X,Y),
# X = sx*(v if swap else u), Y = sy*(u if swap else v).
_REFLECTIONS = [
    (1, 1, False),
    (1, 1, True),
    (-1, 1, True),
    (-1, 1, False),
    (-1, -1, False),
    (-1, -1, True),
    (1, -1, True),
    (1, -1, False),
]


@dataclass(frozen=True)
class OctantMap:
    """One of the eight octant symmetries plus its sector bound."""

    index: int
    reflection: tuple  # (sx, sy, swap)
    slicing_slopes: tuple  # (m_plus, m_minus)
    b: Fraction

    def to_plane(self, u, v):
        sx, sy, swap = self.reflection
        if swap:
            return sx * v, sy * u
        return sx * u, sy * v

    def from_plane(self, X, Y):
        sx, sy, swap = self.reflection
        if swap:
            return sy * Y, sx * X
        return sx * X, sy * Y


def _sector_bounds(m_plus: Fraction, m_minus: Fraction):
    return [m_plus, 1 / m_plus, -1 / m_minus, -m_minus,
            m_plus, 1 / m_plus, -1 / m_minus, -m_minus]


def make_octants(p: PhasePoly, candidates=None):
    """Split the plane into eight sector contexts with reflected polynomials.

    The two slicing lines y = m x must avoid the zero directions of the
    degree-o form of p; candidates are tried in a fixed order for
    reproducibility.
    """
    form = p.degree_form()
    cands = list(candidates) if candidates is not None else list(SLOPE_CANDIDATES)
    cands = cands + [c for c in SLOPE_CANDIDATES_RETRY if c not in cands]

    def form_ok(m: Fraction) -> bool:
        return form.eval_exact(Fraction(1), m) != 0

    m_plus = next((m for m in cands if form_ok(m)), None)
    m_minus = next((-m for m in cands if form_ok(-m)), None)
    if m_plus is None or m_minus is None:
        raise DegenerateForm(
            "no slicing slope among the candidates avoids the degree-o form"
        )
    bounds = _sector_bounds(m_plus, m_minus)
    out = []
    for idx, (refl, b) in enumerate(zip(_REFLECTIONS, bounds)):
        sx, sy, swap = refl
        q = p.reflected(sx, sy, swap)
        out.append(
            (
                OctantMap(
                    index=idx,
                    reflection=refl,
                    slicing_slopes=(m_plus, m_minus),
                    b=b,
                ),
                q,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Wedge domains
# ---------------------------------------------------------------------------


@dataclass
class WedgeDomain:
    """Region (in octant model coordinates, after the shift eta) on which the
    shifted phase is comparable to d * x^x_exp * y^y_exp.

    The region is {0 < x < radius, lower < y < upper} with upper the single
    term H x^M and lower either h x^m (m > M) or the x-axis.  ``sample_floor``
    marks the residual scale of a truncated shift; sampling stays above it,
    the exponent math treats the wedge with its declared boundaries.
    """

    octant: OctantMap
    shift: PuiseuxSeries
    sign: int
    x_exp: Fraction
    y_exp: int
    d: float
    upper: tuple  # (M: Fraction, H: float)
    lower: tuple | None  # (m, h) with m > M, or None for the x-axis
    radius: float
    eta: float
    index: int = -1
    sample_floor: tuple | None = None  # (exponent, coeff) below which sampling is unreliable
    q: PuiseuxPoly | None = field(default=None, repr=False)  # S∘eta, cached

    def __post_init__(self):
        M, H = self.upper
        if M < 1:
            raise ValueError("upper exponent must be >= 1")
        if H <= 0:
            raise ValueError("upper coefficient must be positive")
        if self.y_exp == 0 and self.lower is not None:
            raise ValueError("a y-free wedge must rest on the x-axis")
        if self.lower is not None and self.lower[0] <= M:
            raise ValueError("lower exponent must exceed the upper exponent")
        if self.d == 0:
            raise ValueError("comparability constant must be nonzero")

    # region evaluation in wedge coordinates ------------------------------

    def upper_at(self, x):
        M, H = self.upper
        return float(H) * x ** float(M)

    def lower_at(self, x):
        if self.lower is None:
            return 0.0 * x
        m, h = self.lower
        return float(h) * x ** float(m)

    def monomial_at(self, x, y):
        return self.d * x ** float(self.x_exp) * y**self.y_exp

    def contains_model(self, x, y_model, guard=GUARD_REL):
        """Membership for points given in octant model coordinates."""
        inside = (x > 0) & (x <= self.radius)
        yw = self.sign * (y_model - self.shift(x))
        hi = self.upper_at(x)
        lo = self.lower_at(x)
        band = guard * (hi - lo)
        return inside & (yw >= lo - band) & (yw <= hi + band)

    def sample(self, n, rng):
        """Uniform-ish interior samples (x, y) in wedge coordinates.

        Sampling stays above the truncation floor, so the x-range is capped
        where the floor would meet the upper boundary.
        """
        M = float(self.upper[0])
        x_max = self.radius
        if self.sample_floor is not None:
            fe, fc = self.sample_floor
            if float(fe) > float(M):
                x_max = min(x_max, 0.9 * (float(self.upper[1]) / (2 * float(fc))) ** (1.0 / (float(fe) - M)))
        u = rng.random(n)
        x = x_max * u ** (1.0 / (1.0 + M))
        lo = self.lower_at(x)
        hi = self.upper_at(x)
        floor = lo
        if self.sample_floor is not None:
            fe, fc = self.sample_floor
            floor = np.maximum(lo, float(fc) * x ** float(fe))
        v = rng.random(n)
        inset = 1e-9
        y = floor + (inset + v * (1 - 2 * inset)) * (hi - floor)
        if np.any(y < lo - 1e-12 * hi) or np.any(y > hi * (1 + 1e-12)):
            raise SampleOutsideDomain("sampler produced out-of-wedge points")
        return x, y

    def to_json_dict(self):
        M, H = self.upper
        out = {
            "index": self.index,
            "octant": self.octant.index,
            "shift": [[str(e), repr(_cfloat(c))] for e, c in self.shift.terms],
            "sign": self.sign,
            "monomial": {
                "x_exp": str(self.x_exp),
                "y_exp": self.y_exp,
                "d": repr(self.d),
            },
            "upper": {"M": str(M), "H": repr(float(H))},
            "lower": None
            if self.lower is None
            else {"m": str(self.lower[0]), "h": repr(float(self.lower[1]))},
            "radius": repr(self.radius),
            "eta": repr(self.eta),
        }
        return out


@dataclass
class Decomposition:
    phase: PhasePoly
    wedges: list
    coverage_radius: float
    eta: float
    octants: list
    rotation: tuple | None = None

    def locate(self, X, Y):
        """Index of the wedge containing each plane point, or -1.

        Points in a guard band around a boundary go to the lower-indexed
        wedge because wedges are scanned in index order.
        """
        X = np.atleast_1d(np.asarray(X, dtype=float))
        Y = np.atleast_1d(np.asarray(Y, dtype=float))
        if self.rotation is not None:
            a, b, c = self.rotation
            X, Y = (a * X + b * Y) / c, (-b * X + a * Y) / c
        out = np.full(X.shape, -1, dtype=int)
        for w in self.wedges:
            todo = out < 0
            if not np.any(todo):
                break
            u, v = w.octant.from_plane(X[todo], Y[todo])
            ok = (u > 0) & (v >= 0) & (v <= float(w.octant.b) * u)
            hit = np.zeros(ok.shape, dtype=bool)
            if np.any(ok):
                hit[ok] = w.contains_model(u[ok], v[ok])
            idx = np.where(todo)[0][hit]
            out.flat[idx] = w.index
        return out

    def coverage(self, n=20000, seed=7):
        rng = _rng.stream(seed, 0xC0FE)
        r = self.coverage_radius
        pts = rng.random((n, 2)) * 2 - 1
        keep = pts[:, 0] ** 2 + pts[:, 1] ** 2 <= 1
        pts = pts[keep] * r
        found = self.locate(pts[:, 0], pts[:, 1])
        return float(np.mean(found >= 0))

    def pairwise_overlap(self, n=20000, seed=11):
        """Largest fraction of samples claimed by two wedges (guard bands aside)."""
        rng = _rng.stream(seed, 0xAB)
        r = self.coverage_radius
        pts = rng.random((n, 2)) * 2 - 1
        keep = pts[:, 0] ** 2 + pts[:, 1] ** 2 <= 1
        pts = pts[keep] * r
        X, Y = pts[:, 0], pts[:, 1]
        if self.rotation is not None:
            a, b, c = self.rotation
            X, Y = (a * X + b * Y) / c, (-b * X + a * Y) / c
        claims = np.zeros(len(X), dtype=int)
        for w in self.wedges:
            u, v = w.octant.from_plane(X, Y)
            ok = (u > 0) & (v >= 0) & (v <= float(w.octant.b) * u)
            hit = np.zeros(ok.shape, dtype=bool)
            if np.any(ok):
                hit[ok] = w.contains_model(u[ok], v[ok], guard=0.0)
            claims += hit.astype(int)
        return float(np.mean(claims > 1))

    def to_json(self) -> str:
        doc = {
            "phase": self.phase.to_json_terms(),
            "rotation": list(self.rotation) if self.rotation else None,
            "eta": repr(self.eta),
            "coverage_radius": repr(self.coverage_radius),
            "octants": [
                {
                    "index": o.index,
                    "reflection": list(o.reflection),
                    "slicing_slopes": [str(s) for s in o.slicing_slopes],
                    "b": str(o.b),
                }
                for o in self.octants
            ],
            "wedges": [w.to_json_dict() for w in self.wedges],
        }
        return json.dumps(doc, indent=1, sort_keys=False)


# ---------------------------------------------------------------------------
# Sector decomposition
# ---------------------------------------------------------------------------


def _weight_poly(q: PuiseuxPoly, e: Fraction):
    """Minimal weight w = min(i + e*j) and the tie coefficients {j: c}."""
    w = min(i + e * j for (i, j) in q.terms)
    coeffs = {j: c for (i, j), c in q.terms.items() if i + e * j == w}
    return w, coeffs


def _fpoly_eval(coeffs: dict, u: np.ndarray):
    out = np.zeros_like(u)
    for j, c in coeffs.items():
        out = out + _cfloat(c) * u**j
    return out


def _nice_fraction(x: float) -> Fraction:
    return Fraction(round(x * 2**24), 2**24)


def _deriv_weight(w, e, j) -> float:
    """Worst ratio inflation of a tie term over derivative orders (l, m) <= (1, 1)."""
    return max(1.0, abs(float(w) - float(e) * j)) * max(1.0, j)


def _solve_tail_threshold(ratios, powers, target):
    """Largest u with sum |r_k| u^{p_k} <= target (p_k > 0), via bisection."""
    if not ratios:
        return None
    hi = 1.0
    while sum(r * hi**p for r, p in zip(ratios, powers)) <= target:
        hi *= 2
        if hi > 1e9:
            return None
    lo = hi / 2
    while sum(r * lo**p for r, p in zip(ratios, powers)) > target:
        hi = lo
        lo /= 2
        if lo < 1e-12:
            return None
    for _ in range(60):
        mid = (lo + hi) / 2
        if sum(r * mid**p for r, p in zip(ratios, powers)) <= target:
            lo = mid
        else:
            hi = mid
    return lo


class _SectorBuilder:
    """Recursive wedge construction for one octant sector."""

    def __init__(self, octant, poly: PhasePoly, eta: float, max_depth: int,
                 extra_terms: int, sep_factor: float = 0.5):
        self.octant = octant
        self.poly = poly
        self.eta = eta
        self.eta_build = eta * sep_factor  # asymptotic margin; x-corrections eat the rest
        self.max_depth = max_depth
        self.extra_terms = extra_terms
        self.blueprints = []

    # -- helpers ----------------------------------------------------------

    def _emit(self, psi_terms, sign, q, x_exp, y_exp, d, upper, lower, floor=None):
        shift = PuiseuxSeries.from_terms(psi_terms, exact=True) if psi_terms else PuiseuxSeries.zero()
        self.blueprints.append(
            dict(
                shift=shift,
                sign=sign,
                q=q,
                x_exp=Fraction(x_exp),
                y_exp=int(y_exp),
                d=float(d),
                upper=upper,
                lower=lower,
                sample_floor=floor,
            )
        )

    @staticmethod
    def _append_shift(psi_terms, e, c):
        psi_terms = list(psi_terms)
        if psi_terms and psi_terms[-1][0] == e:
            merged = psi_terms[-1][1] + c
            psi_terms.pop()
            if merged != 0:
                psi_terms.append((e, merged))
        else:
            psi_terms.append((Fraction(e), c))
        return tuple(psi_terms)

    def _slice_points(self, coeffs, e, w, u_lo: float, u_hi: float):
        """Partition [u_lo, u_hi] into pieces on which the shifted-to-lower
        slice wedge meets the comparability tolerance, including the x-
        derivative ratio |w (F - d) - e u F'| / |d| (the monomial is x^w, so
        the derivative comparison carries no y-term to cancel against)."""
        pieces = []
        stack = [(u_lo, u_hi)]
        tol = self.eta_build
        dcoeffs = {j: _cfloat(c) * j for j, c in coeffs.items() if j != 0}
        guard = 0
        while stack:
            a, b = stack.pop()
            grid = np.linspace(a, b, 33)
            vals = _fpoly_eval(coeffs, grid)
            split = np.any(vals == 0) or np.min(vals) * np.max(vals) < 0
            if not split:
                lo, hi = np.min(np.abs(vals)), np.max(np.abs(vals))
                d = 0.5 * (np.min(vals) + np.max(vals))
                # d/dx of q(x, a x^e + y) on y = (u-a) x^e is
                # x^{w-1} (w F(u) - e (u-a) F'(u)); compare against w d x^{w-1}
                Fp = _fpoly_eval(dcoeffs, grid) / np.where(grid == 0, 1.0, grid)
                deriv = np.max(
                    np.abs(float(w) * (vals - d) - float(e) * (grid - a) * Fp)
                )
                split = (hi - lo) > tol * (hi + lo) or deriv > tol * abs(d)
            if not split:
                pieces.append((a, b))
            else:
                mid = 0.5 * (a + b)
                stack.extend([(a, mid), (mid, b)])
                guard += 1
                if guard > 8000:
                    raise DepthExceeded("slice refinement did not converge")
        pieces.sort()
        return pieces

    # -- main recursion ----------------------------------------------------

    def run(self, b: Fraction):
        q0 = self.poly.as_puiseux()
        self.region(q0, (), 1, Fraction(1), Fraction(b), depth=1, ext=None)
        return self.blueprints

    def region(self, q, psi_terms, sign, E, B, depth, ext):
        """Decompose {0 < y < B x^E} for the current shifted polynomial q.

        ``ext`` is the remaining extension budget once the active branch is
        a separated simple root (None while clusters are still splitting).
        """
        if depth > self.max_depth + self.extra_terms + 2:
            raise DepthExceeded("wedge recursion exceeded the depth budget")
        poly = polygon_of(q)
        scales = sorted({edge.scale for edge in poly.edges if edge.scale > E})
        cur_scale, cur_top = Fraction(E), B
        while True:
            w, coeffs = _weight_poly(q, cur_scale)
            j_lo = min(coeffs)
            c_lo = coeffs[j_lo]
            roots = edge_roots([coeffs.get(j, Fraction(0)) for j in range(max(coeffs) + 1)]) if len(coeffs) > 1 else []
            real_in = sorted(
                (float(r), m) for r, m, is_real in roots
                if is_real and 0 < float(r) < float(cur_top)
            )
            # tail threshold: below u_low, F(u) is within eta_build of its
            # lowest-order term c_lo * u^{j_lo}, with first-derivative ratios
            # weighted in (they lack the vertex's exact cancellation headroom)
            ratios = [
                abs(_cfloat(c) / _cfloat(c_lo)) * _deriv_weight(w, cur_scale, j)
                for j, c in coeffs.items() if j != j_lo
            ]
            powers = [j - j_lo for j in coeffs if j != j_lo]
            u_low = _solve_tail_threshold(ratios, powers, self.eta_build)
            u_low = float(cur_top) if u_low is None else min(u_low, float(cur_top))

            # cluster intervals around real positive edge roots in range
            landmarks = []
            for k, (c, mult) in enumerate(real_in):
                seps = [abs(c - other[0]) for kk, other in enumerate(real_in) if kk != k]
                seps += [abs(c - float(cur_top)), c]
                width = 0.25 * min(s for s in seps if s > 0)
                width = min(width, 0.5 * c)
                landmarks.append((c, width, mult))
            if landmarks:
                u_low = min(u_low, max(1e-12, landmarks[0][0] - landmarks[0][1]) * 0.999)
            u_low_frac = _nice_fraction(u_low)
            if u_low_frac <= 0:
                u_low_frac = Fraction(u_low)

            # slices over [u_low, cur_top] minus cluster intervals
            gaps = []
            lo_edge = u_low_frac
            for (c, width, mult) in landmarks:
                gaps.append((lo_edge, _nice_fraction(c - width)))
                lo_edge = _nice_fraction(c + width)
            gaps.append((lo_edge, Fraction(cur_top)))
            for (ga, gb) in gaps:
                if gb <= ga:
                    continue
                for (sa, sb) in self._slice_points(coeffs, cur_scale, w, float(ga), float(gb)):
                    sa_f = _nice_fraction(sa) if sa != float(ga) else ga
                    sb_f = _nice_fraction(sb) if sb != float(gb) else gb
                    if sb_f <= sa_f:
                        continue
                    q_slice = q.shift_y(sa_f, cur_scale, 1)
                    grid = np.linspace(float(sa_f), float(sb_f), 65)
                    vals = _fpoly_eval(coeffs, grid)
                    d = 0.5 * (np.min(vals) + np.max(vals))
                    self._emit(
                        self._append_shift(psi_terms, cur_scale, sign * sa_f),
                        sign,
                        q_slice,
                        w,
                        0,
                        d,
                        (cur_scale, float(sb_f - sa_f)),
                        None,
                    )

            # cluster recursions
            for (c, width, mult) in landmarks:
                c_exact = None
                for r, m, is_real in roots:
                    if is_real and abs(_cfloat(r) - c) <= 1e-12 * max(1.0, abs(c)):
                        c_exact = r
                        break
                shift_c = c_exact if c_exact is not None else c
                q_up = q.shift_y(shift_c, cur_scale, 1)
                q_dn = PuiseuxPoly(
                    {(e, j): (cc if j % 2 == 0 else -cc) for (e, j), cc in q_up.terms.items()},
                    chop=False,
                )
                width_f = _nice_fraction(width)
                new_psi = self._append_shift(psi_terms, cur_scale, sign * shift_c)
                terminal = q_up.is_zero() or q_up.y_valuation() >= 1
                if ext is not None:
                    next_ext = ext - 1
                elif mult == 1 and not terminal:
                    next_ext = self.extra_terms
                else:
                    next_ext = None
                for (qq, sgn) in ((q_up, sign), (q_dn, -sign)):
                    self.region(qq, new_psi, sgn, cur_scale, width_f,
                                depth + 1, None if terminal else next_ext)

            # descend below this scale band
            deeper = [s for s in scales if s > cur_scale]
            # a separated simple branch is extended only while its residual
            # scale is close enough to matter for sampling; the terminal
            # wedge keeps a sampling floor above the residual curve
            stop_ext = ext is not None and (
                ext <= 0 or (deeper and deeper[0] - cur_scale >= STOP_GAP)
            )
            if not deeper or stop_ext:
                vertex = vertex_for_scale_interval(
                    poly, cur_scale, deeper[0] if deeper else None
                )
                floor = None
                if deeper:
                    # keep sampling above the residual zero curve, high enough
                    # that every below-monomial term (they all sit on the
                    # polygon edge at s_res or above) meets the weighted
                    # ratio tolerance uniformly in x
                    s_res = deeper[0]
                    _, cres = _weight_poly(q, s_res)
                    res_roots = edge_roots(
                        [cres.get(j, Fraction(0)) for j in range(max(cres) + 1)]
                    )
                    mag = max(
                        (abs(complex(_cfloat(r) if is_real else complex(r))) for r, _, is_real in res_roots),
                        default=max(abs(_cfloat(c)) for c in cres.values()),
                    )
                    A, Bj = vertex
                    dmag = abs(self._vertex_coeff(q, vertex))
                    fc = 4.0 * mag
                    for (i, j), cc in q.terms.items():
                        if j >= Bj:
                            continue
                        if (i - A) + s_res * (j - Bj) <= 0:
                            wgt = max(1.0, float(i)) * (max(1.0, j) if j >= 1 else 1.0)
                            need = (abs(_cfloat(cc)) / dmag * wgt / self.eta_build) ** (
                                1.0 / (Bj - j)
                            )
                            fc = max(fc, need)
                    floor = (s_res, fc)
                self._emit(
                    psi_terms, sign, q,
                    vertex[0], vertex[1], self._vertex_coeff(q, vertex),
                    (cur_scale, float(u_low_frac)),
                    None,
                    floor=floor,
                )
                return
            s_next = deeper[0]
            w_next, coeffs_next = _weight_poly(q, s_next)
            j_hi = max(coeffs_next)
            c_hi = coeffs_next[j_hi]
            ratios = [
                abs(_cfloat(c) / _cfloat(c_hi)) * _deriv_weight(w_next, s_next, j)
                for j, c in coeffs_next.items() if j != j_hi
            ]
            powers = [j_hi - j for j in coeffs_next if j != j_hi]
            # above u_hi_next, F_next is within eta_build of its top term:
            # sum r_k u^{-p_k} <= target  =>  in 1/u it is the tail problem
            inv = _solve_tail_threshold(ratios, powers, self.eta_build)
            u_hi_next = 1.0 / inv if (inv is not None and inv > 0) else 1.0
            u_hi_frac = _nice_fraction(max(u_hi_next, 1e-9))
            vertex = vertex_for_scale_interval(poly, cur_scale, s_next)
            self._emit(
                psi_terms, sign, q,
                vertex[0], vertex[1], self._vertex_coeff(q, vertex),
                (cur_scale, float(u_low_frac)),
                (s_next, float(u_hi_frac)),
            )
            cur_scale, cur_top = s_next, u_hi_frac

    @staticmethod
    def _vertex_coeff(q: PuiseuxPoly, vertex) -> float:
        for (i, j), cc in q.terms.items():
            if j == vertex[1] and i == vertex[0]:
                return _cfloat(cc)
        raise AssertionError("polygon vertex missing from support")


# ---------------------------------------------------------------------------
# decompose + verification
# ---------------------------------------------------------------------------


@dataclass
class ComparabilityReport:
    wedge_index: int
    n_samples: int
    eta: float
    max_ratios: dict  # (l, m) -> max over samples
    passed: bool


def verify_comparability(w: WedgeDomain, p: PhasePoly, samples: int = 10000,
                         derivative_orders=(0, 0), seed: int = 2024):
    """Sampled check of the comparability inequalities on a wedge.

    Ratios |d^l_x d^m_y (S∘eta) - ff(A,l) ff(B,m) d x^{A-l} y^{B-m}| over
    (|d| x^{A-l} y^{B-m}) for all requested derivative orders; passes when
    every max ratio is <= eta.
    """
    l_max, m_max = derivative_orders
    if l_max > int(w.x_exp):
        raise ValueError("l_max exceeds the integer part of the x-exponent")
    if m_max > w.y_exp:
        raise ValueError("m_max exceeds the y-exponent")
    rng = _rng.stream(seed, w.index + 1)
    x, y = w.sample(samples, rng)
    q = w.q
    if q is None:
        q = shift_substitute(p.reflected(*w.octant.reflection), w.shift, w.sign)
    ratios = {}
    ok = True
    for l in range(l_max + 1):
        for m in range(m_max + 1):
            qd = q
            for _ in range(l):
                qd = qd.partial("x")
            for _ in range(m):
                qd = qd.partial("y")
            ff = 1.0
            for t in range(l):
                ff *= float(w.x_exp) - t
            for t in range(m):
                ff *= w.y_exp - t
            target = w.d * ff * x ** (float(w.x_exp) - l) * y ** (w.y_exp - m)
            denom = abs(w.d) * x ** (float(w.x_exp) - l) * y ** (w.y_exp - m)
            err = np.abs(qd.eval_float(x, y) - target) / denom
            ratios[(l, m)] = float(np.max(err))
            ok = ok and ratios[(l, m)] <= w.eta
    return ComparabilityReport(
        wedge_index=w.index,
        n_samples=samples,
        eta=w.eta,
        max_ratios=ratios,
        passed=ok,
    )


def _quick_ok(w: WedgeDomain, n=400, seed=5):
    orders = (min(1, int(w.x_exp)), min(1, w.y_exp))
    rep = verify_comparability(w, None, samples=n, derivative_orders=orders, seed=seed)
    return rep.passed


def _build_octant(args):
    octant, q, eta, max_depth, extra_terms = args
    builder = _SectorBuilder(octant, q, eta, max_depth, extra_terms)
    return builder.run(octant.b)


def decompose(p: PhasePoly, eta: float = 0.25, a_max: float = 0.5,
              max_depth: int = 12, extra_terms: int = 4, seed: int = 0,
              _candidates=None) -> Decomposition:
    """Wedge decomposition of a disk around the origin for the phase p.

    The coverage radius starts at a_max and is halved until every wedge
    passes a sampled comparability check (including first derivatives) at
    tolerance eta.
    """
    if not (0 < eta < 0.5):
        raise ValueError("eta must lie in (0, 1/2)")
    rotation = None
    poly = p
    try:
        octants = make_octants(poly, candidates=_candidates)
    except DegenerateForm:
        for rot in ROTATIONS:
            cand = poly.rotated(*rot)
            try:
                octants = make_octants(cand, candidates=_candidates)
                poly, rotation = cand, rot
                break
            except DegenerateForm:
                continue
        else:
            raise

    n_threads = int(os.environ.get("OSCDECAY_THREADS", "1") or "1")
    jobs = [(o, q, eta, max_depth, extra_terms) for (o, q) in octants]
    if n_threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_threads) as ex:
            per_octant = list(ex.map(_build_octant, jobs))
    else:
        per_octant = [_build_octant(j) for j in jobs]

    wedges = []
    idx = 0
    a = a_max
    for (octant, _), blueprints in zip(octants, per_octant):
        for bp in blueprints:
            w = WedgeDomain(
                octant=octant,
                shift=bp["shift"],
                sign=bp["sign"],
                x_exp=bp["x_exp"],
                y_exp=bp["y_exp"],
                d=bp["d"],
                upper=bp["upper"],
                lower=bp["lower"],
                radius=a_max,
                eta=eta,
                index=idx,
                sample_floor=bp["sample_floor"],
                q=bp["q"],
            )
            wedges.append(w)
            idx += 1
            if w.lower is not None:
                # the wedge is nonempty only while h x^m < H x^M
                M, H = w.upper
                m, h = w.lower
                crossing = (H / h) ** (1.0 / float(m - M))
                a = min(a, 0.75 * crossing)
            if w.sample_floor is not None and float(w.sample_floor[0]) > float(w.upper[0]):
                # the certified part of a truncated wedge sits above the floor
                fe, fc = w.sample_floor
                M, H = w.upper
                crossing = (float(H) / (2 * float(fc))) ** (1.0 / (float(fe) - float(M)))
                a = min(a, 0.75 * crossing)

    for w in wedges:
        w.radius = a
    # sampled ratios only improve as x -> 0, so wedges that pass at a given
    # radius are not retested at smaller ones
    pending = list(wedges)
    for _ in range(24):
        pending = [w for w in pending if not _quick_ok(w, seed=seed + 5)]
        if not pending:
            break
        a *= 0.5
        for w in wedges:
            w.radius = a
    else:
        raise DepthExceeded("comparability did not stabilize while shrinking the radius")

    return Decomposition(
        phase=p,
        wedges=wedges,
        coverage_radius=a,
        eta=eta,
        octants=[o for (o, _) in octants],
        rotation=rotation,
    )
