"""Numerical oracles: direct oscillatory-integral evaluation and stratified
Monte Carlo sublevel measures.

The oscillatory integral is evaluated through the distribution function of
the phase: per x-column (dyadic Gauss panels), the y-integral of the
weighted amplitude is accumulated over a global dyadic grid in the phase
value t = S(x,y) - the |S|-band decomposition, with the |t|^alpha factor
resolved by the grid's refinement toward t = 0.  The lambda1-oscillation
then lives in a single 1-D integral against the assembled, piecewise-linear
distribution function (exact per-interval antiderivatives), so the cost is
independent of lambda1.  A conventional phase-panel quadrature over columns
is kept as an independent reference for moderate frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _rng
from .errors import BudgetExceeded, NonIntegrable, SingularPoint
from .exponents import DIVERGENT, DensitySpec, critical_exponent
from .phase import PhasePoly
from .resolution import decompose


@dataclass(frozen=True)
class LambdaTriple:
    lam1: float
    lam2: float = 0.0
    lam3: float = 0.0

    def __post_init__(self):
        for v in (self.lam1, self.lam2, self.lam3):
            if not np.isfinite(v):
                raise ValueError("lambda components must be finite")

    def negated(self):
        return LambdaTriple(-self.lam1, -self.lam2, -self.lam3)


@dataclass
class QuadConfig:
    dyadic_depth: int = 48  # innermost |S|-band at max|S| * 2^-depth
    per_cell_rule: int = 8  # Gauss-Legendre order inside bands/panels
    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    max_evals: int = 80_000_000
    seed: int = 0
    points_per_octave: int = 24  # t-grid resolution (dyadic part)
    points_uniform: int = 3000  # t-grid resolution (uniform fill)
    ray_panels: int = 64  # base angular panels (before lam2/lam3 refinement)

    def __post_init__(self):
        if self.dyadic_depth < 4:
            raise ValueError("dyadic depth must be at least 4")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class SublevelEstimate:
    value: float
    std_error: float
    n_samples: int
    epsilon: float

    def __post_init__(self):
        if self.std_error < 0 or self.value < 0:
            raise ValueError("estimate must be nonnegative")


# ---------------------------------------------------------------------------
# density evaluation
# ---------------------------------------------------------------------------


def density_eval(ds: DensitySpec, p: PhasePoly, x, y, model: bool = False):
    """Measure density |S|^alpha (x^2+y^2)^{beta/2}, or g(S) K with models.

    Raises SingularPoint on the zero set of S when alpha < 0 (and at the
    origin when beta < 0).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = p(x, y)
    rho2 = x * x + y * y
    alpha = float(ds.alpha)
    beta = float(ds.beta)
    if np.any((rho2 == 0) & ((beta < 0) or (alpha != 0))):
        raise SingularPoint("density evaluated at the origin")
    if alpha < 0 and np.any(s == 0):
        raise SingularPoint("density evaluated on the zero set of the phase")
    if model:
        return ds.g(s) * ds.K(x, y)
    out = rho2 ** (beta / 2.0)
    if alpha != 0:
        out = out * np.abs(s) ** alpha
    return out


# ---------------------------------------------------------------------------
# column helpers
# ---------------------------------------------------------------------------


def _y_coeff_polys(p: PhasePoly):
    """For S(x,y) = sum_j c_j(x) y^j, the x-polynomials c_j as coefficient rows."""
    ydeg = p.y_degree()
    xdeg = max(i for (i, _) in p.terms)
    table = np.zeros((ydeg + 1, xdeg + 1))
    for (i, j), c in p.terms.items():
        table[j, i] = float(c)
    return table


def _coeffs_at(table, x: float):
    xs = x ** np.arange(table.shape[1])
    return table @ xs


def _real_roots_in(coeffs, lo, hi):
    """Real roots of sum c_k y^k inside [lo, hi], ascending."""
    c = np.asarray(coeffs, dtype=float)
    mask = np.abs(c) > 1e-300
    if not mask.any():
        return []
    deg = np.max(np.nonzero(mask))
    c = c[: deg + 1]
    if deg == 0:
        return []
    roots = np.roots(c[::-1])
    out = [
        float(r.real)
        for r in roots
        if abs(r.imag) < 1e-9 * max(1.0, abs(r)) and lo < r.real < hi
    ]
    return sorted(out)


def _phase_max_bound(p: PhasePoly, r: float) -> float:
    return sum(abs(float(c)) * r ** (i + j) for (i, j), c in p.terms.items())


def _critical_values(p: PhasePoly, r: float):
    """Nonzero critical values of S in the disk (sampled + Newton-polished)."""
    px, py = p.partial("x"), p.partial("y")
    if px is None or py is None:
        return []
    g = np.linspace(-r, r, 81)
    X, Y = np.meshgrid(g, g)
    inside = X**2 + Y**2 <= r**2
    gx = px(X, Y)
    gy = py(X, Y)
    mag = np.hypot(gx, gy)
    scale = np.percentile(mag[inside], 90) + 1e-300
    cand = inside & (mag < 0.05 * scale)
    pts = np.column_stack([X[cand], Y[cand]])
    pxx = px.partial("x")
    pxy = px.partial("y")
    pyy = py.partial("y")

    def hess(x, y):
        a = pxx(x, y) if pxx else 0.0
        b = pxy(x, y) if pxy else 0.0
        c = pyy(x, y) if pyy else 0.0
        return np.array([[a, b], [b, c]])

    values = []
    for x0, y0 in pts[:200]:
        x1, y1 = x0, y0
        for _ in range(30):
            H = hess(x1, y1)
            gvec = np.array([px(x1, y1), py(x1, y1)])
            det = np.linalg.det(H)
            if abs(det) < 1e-14:
                break
            step = np.linalg.solve(H, gvec)
            x1, y1 = x1 - step[0], y1 - step[1]
            if np.hypot(*gvec) < 1e-13:
                break
        if x1 * x1 + y1 * y1 <= r * r and np.hypot(px(x1, y1), py(x1, y1)) < 1e-9:
            v = float(p(x1, y1))
            if abs(v) > 1e-13 and all(abs(v - u) > 1e-10 for u in values):
                values.append(v)
    return values


def _t_grid(p: PhasePoly, ds: DensitySpec, cfg: QuadConfig, r: float):
    """Dyadic grid in the phase value, refined toward 0 and critical values."""
    tmax = _phase_max_bound(p, r) * 1.000001
    tmin = tmax * 2.0 ** (-cfg.dyadic_depth)
    n = max(8, cfg.points_per_octave) * cfg.dyadic_depth
    base = np.geomspace(tmin, tmax, n)
    uniform = np.linspace(-tmax, tmax, max(16, cfg.points_uniform))
    pieces = [np.array([0.0]), base, -base, uniform]
    for tc in _critical_values(p, r):
        w = np.abs(tc) * np.geomspace(2.0**-40, 0.25, 10 * 40 // 4)
        pieces.append(tc + w)
        pieces.append(tc - w)
    grid = np.concatenate(pieces)
    grid = grid[np.abs(grid) <= tmax]
    grid = np.unique(np.concatenate([grid, [-tmax, tmax]]))
    return grid


_GL4 = np.polynomial.legendre.leggauss(4)
_GL2 = np.polynomial.legendre.leggauss(2)


def _horner(cy, z):
    """Row-wise polynomial evaluation: cy (n, deg+1) ascending, z (n,)."""
    out = cy[:, -1].copy()
    for k in range(cy.shape[1] - 2, -1, -1):
        out = out * z + cy[:, k]
    return out


def _horner_many(cy, z):
    """Row-wise evaluation at many points: cy (n, deg+1), z (n, m)."""
    out = np.broadcast_to(cy[:, -1][:, None], z.shape).copy()
    for k in range(cy.shape[1] - 2, -1, -1):
        out = out * z + cy[:, k][:, None]
    return out


def _row_searchsorted(sorted_rows, targets):
    """searchsorted per row (both arguments row-sorted), via the offset trick."""
    n, m = sorted_rows.shape
    span = max(
        np.abs(sorted_rows).max(initial=0.0), np.abs(targets).max(initial=0.0), 1.0
    )
    offset = 4.0 * span * np.arange(1, n + 1)[:, None]
    flat = (sorted_rows + offset).ravel()
    pos = np.searchsorted(flat, (targets + offset).ravel())
    return (pos.reshape(targets.shape) - m * np.arange(n)[:, None]).astype(int)


def _critical_roots_rows(cols, lo_arr, hi_arr):
    """Per-row real roots of the derivative polynomials inside (lo, hi),
    padded with hi so segment bounds stay nondecreasing."""
    n = cols.shape[0]
    deg = cols.shape[1] - 1
    Y = hi_arr
    L = lo_arr
    if deg == 0:
        return np.zeros((n, 0))
    if deg == 1:
        c0, c1 = cols[:, 0], cols[:, 1]
        root = np.where(np.abs(c1) > 1e-300, -c0 / np.where(c1 == 0, 1, c1), np.inf)
        out = np.where((root > L) & (root < Y), root, Y)
        return out[:, None]
    if deg == 2:
        c0, c1, c2 = cols[:, 0], cols[:, 1], cols[:, 2]
        disc = c1 * c1 - 4 * c2 * c0
        sq = np.sqrt(np.clip(disc, 0.0, None))
        with np.errstate(divide="ignore", invalid="ignore"):
            quad = np.abs(c2) > 1e-300
            r1 = np.where(quad, (-c1 - sq) / (2 * np.where(c2 == 0, 1, c2)), np.inf)
            r2 = np.where(quad, (-c1 + sq) / (2 * np.where(c2 == 0, 1, c2)), np.inf)
            lin = (np.abs(c1) > 1e-300) & ~quad
            r1 = np.where(lin, -c0 / np.where(c1 == 0, 1, c1), r1)
            r2 = np.where(lin, np.inf, r2)
        r1 = np.where(disc < 0, np.inf, r1)
        r2 = np.where(disc < 0, np.inf, r2)
        lo = np.minimum(r1, r2)
        hi = np.maximum(r1, r2)
        lo = np.where((lo > L) & (lo < Y), lo, Y)
        hi = np.where((hi > L) & (hi < Y), hi, Y)
        out = np.stack([np.minimum(lo, hi), np.maximum(lo, hi)], axis=1)
        return out
    out = np.full((n, deg), np.inf)
    for i in range(n):
        roots = _real_roots_in(cols[i], L[i], Y[i])
        out[i, : len(roots)] = roots
    out = np.where(np.isfinite(out), out, Y[:, None])
    out = np.sort(np.where((out > L[:, None]) & (out < Y[:, None]), out, Y[:, None]), axis=1)
    return out


class RayAssembly:
    """Distribution function of the phase value accumulated over polar rays.

    V(t) = integral over {S < t} of g(S) K e^{i(lam2 x + lam3 y)} rho drho dphi,
    assembled on a dyadic-plus-uniform grid in t.  Rays are the natural
    columns here: radius annuli crossed with |S|-bands per ray resolve the
    singular |S|^alpha factor, and for phases whose critical radius sits at
    the origin the level sets are born at t-grid points, so the angular
    aggregation stays smooth.  One assembly serves every lam1.
    """

    def __init__(self, p: PhasePoly, ds: DensitySpec, lam2: float, lam3: float,
                 cfg: QuadConfig, coarse: bool = False):
        self.p = p
        self.ds = ds
        self.lam2 = lam2
        self.lam3 = lam3
        self.cfg = cfg
        self.r = ds.r
        self.tgrid = _t_grid(p, ds, cfg, self.r)
        if coarse:
            self.tgrid = np.unique(
                np.concatenate([self.tgrid[::2], self.tgrid[[0, -1]]])
            )
        self.n_evals = [0]
        self._kinks = [0.0] + _critical_values(p, self.r)
        self._build(coarse)

    def _ray_angles(self, coarse):
        cfg = self.cfg
        order = max(4, cfg.per_cell_rule * (1 if coarse else 2))
        nodes, wts = np.polynomial.legendre.leggauss(order)
        swing = np.hypot(self.lam2, self.lam3) * self.r
        n_panels = max(cfg.ray_panels // (2 if coarse else 1),
                       int(swing / 4.0) + 1)
        edges = np.linspace(0.0, 2 * np.pi, n_panels + 1)
        phis = []
        ww = []
        for a, b in zip(edges[:-1], edges[1:]):
            phis.append(0.5 * (a + b) + 0.5 * (b - a) * nodes)
            ww.append(0.5 * (b - a) * wts)
        return np.concatenate(phis), np.concatenate(ww)

    def _build(self, coarse):
        p, ds = self.p, self.ds
        phis, wphi = self._ray_angles(coarse)
        cphi, sphi = np.cos(phis), np.sin(phis)
        deg = p.total_degree()
        n = len(phis)
        coeffs = np.zeros((n, deg + 1))
        for (i, j), c in p.terms.items():
            coeffs[:, i + j] += float(c) * cphi**i * sphi**j
        self._cphi, self._sphi = cphi, sphi
        self._kfac = self.lam2 * cphi + self.lam3 * sphi
        self._wray = wphi
        dcoeffs = coeffs[:, 1:] * np.arange(1, deg + 1)[None, :]
        lo = np.zeros(n)
        hi = np.full(n, self.r)
        crit = _critical_roots_rows(dcoeffs, lo, hi)
        bounds = np.concatenate([lo[:, None], crit, hi[:, None]], axis=1)
        tg = self.tgrid
        incr = np.zeros(len(tg) - 1, dtype=complex)
        for s in range(bounds.shape[1] - 1):
            ya = bounds[:, s]
            yb = bounds[:, s + 1]
            ta = _horner(coeffs, ya)
            tb = _horner(coeffs, yb)
            counts = np.searchsorted(tg, np.maximum(ta, tb), side="right") - \
                np.searchsorted(tg, np.minimum(ta, tb), side="left")
            order = np.argsort(-counts, kind="stable")
            chunk = max(16, 6_000_000 // max(len(tg), 1))
            for k in range(0, n, chunk):
                sel = order[k : k + chunk]
                self._segment_batch(incr, sel, coeffs[sel], ya[sel], yb[sel])
        self.incr = incr

    def _segment_batch(self, incr, sel, cy, ya, yb):
        """Bin the weighted measure of monotone rho-segments (batched over
        rays; decreasing segments are reflected so every row increases)."""
        tg = self.tgrid
        width_ok = (yb - ya) > 1e-15
        if not np.any(width_ok):
            return
        deg = cy.shape[1] - 1
        ta = _horner(cy, ya)
        tb = _horner(cy, yb)
        flip = tb < ta
        signs = (-1.0) ** np.arange(deg + 1)
        cyz = np.where(flip[:, None], cy * signs[None, :], cy)
        za = np.where(flip, -yb, ya)
        zb = np.where(flip, -ya, yb)
        orient = np.where(flip, -1.0, 1.0)
        tlo = np.minimum(ta, tb)
        thi = np.maximum(ta, tb)
        k0 = np.searchsorted(tg, tlo, side="left")
        k1 = np.searchsorted(tg, thi, side="right")
        counts = np.maximum(k1 - k0, 0)
        maxn = int(counts.max()) if counts.size else 0
        if maxn > 0:
            offs = np.arange(maxn)
            idx = k0[:, None] + offs[None, :]
            valid = (idx < k1[:, None]) & width_ok[:, None]
            tvals = tg[np.clip(idx, 0, len(tg) - 1)]
            z0 = _invert_monotone(cyz, za, zb, tvals)
            zedges = np.concatenate(
                [za[:, None], np.where(valid, z0, zb[:, None]), zb[:, None]], axis=1
            )
            zedges = np.maximum.accumulate(zedges, axis=1)
            bins = k0[:, None] - 1 + np.arange(maxn + 1)[None, :]
        else:
            zedges = np.stack([za, zb], axis=1)
            bins = (k0 - 1)[:, None]
        vals = self._interval_integrals(sel, cyz, orient, zedges)
        vals = vals * self._wray[sel][:, None]
        good = (bins >= 0) & (bins < incr.size) & width_ok[:, None]
        good &= np.diff(zedges, axis=1) > 0
        np.add.at(incr, bins[good], vals[good])

    def _interval_integrals(self, sel, cyz, orient, zedges):
        """GL integrals of g(S) K rho e^{i kfac rho} over consecutive
        z-intervals (rho = orient * z); bins are at most one t-cell wide."""
        nodes, wts = _GL4
        a = zedges[:, :-1]
        b = zedges[:, 1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        zz = mid[..., None] + half[..., None] * nodes
        ww = half[..., None] * wts
        ncol = zz.shape[0]
        s = _horner_many(cyz, zz.reshape(ncol, -1)).reshape(zz.shape)
        rho = orient[:, None, None] * zz
        x = rho * self._cphi[sel][:, None, None]
        y = rho * self._sphi[sel][:, None, None]
        w = self.ds.K(x, y) * rho
        alpha = float(self.ds.alpha)
        if alpha != 0:
            gs = np.where(s == 0.0, 0.0, np.abs(np.where(s == 0.0, 1.0, s)) ** alpha)
            w = w * gs
        kf = self._kfac[sel][:, None, None]
        out = w * np.exp(1j * kf * rho) if np.any(kf) else w.astype(complex)
        self.n_evals[0] += zz.size
        return np.sum(out * ww, axis=-1)

    # -- evaluation ---------------------------------------------------------

    def distribution(self):
        return np.concatenate([[0.0 + 0.0j], np.cumsum(self.incr)])

    def integral(self, lam1: float):
        return _oscillatory_against_distribution(
            self.tgrid, self.distribution(), lam1, kinks=self._kinks
        )


def _invert_monotone(cyz, za, zb, tvals):
    """Row-wise inversion of increasing polynomials: find z in [za, zb] with
    p(z) = t.  Graded bracketing handles the dyadic clustering of targets
    near the segment-end values, bisection is the safeguard, Newton polishes.
    """
    deg = cyz.shape[1] - 1
    lin = np.linspace(0.0, 1.0, 17)
    geo = np.geomspace(2.0**-52, 0.5, 14)
    frac = np.unique(np.concatenate([lin, geo, 1.0 - geo]))
    zsamp = za[:, None] + (zb - za)[:, None] * frac[None, :]
    ssamp = _horner_many(cyz, zsamp)
    ssamp = np.maximum.accumulate(ssamp, axis=1)  # guard rounding wiggles
    pos = _row_searchsorted(ssamp, tvals)
    pos = np.clip(pos, 1, frac.size - 1)
    lo = np.take_along_axis(zsamp, pos - 1, axis=1)
    hi = np.take_along_axis(zsamp, pos, axis=1)
    for _ in range(26):
        mid = 0.5 * (lo + hi)
        below = _horner_many(cyz, mid) < tvals
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    z0 = 0.5 * (lo + hi)
    dcyz = cyz[:, 1:] * np.arange(1, deg + 1)[None, :] if deg >= 1 else None
    for _ in range(3):
        f = _horner_many(cyz, z0) - tvals
        df = _horner_many(dcyz, z0) if dcyz is not None else np.ones_like(z0)
        step = np.where(np.abs(df) > 1e-300, f / np.where(df == 0, 1.0, df), 0.0)
        z0 = np.clip(z0 - step, lo, hi)
    return z0


def _exp_moments(z, kmax=2):
    """E_k(z) = integral_0^1 u^k e^{z u} du for k = 0..kmax, vectorized.

    Upward recursion E_k = (e^z - k E_{k-1})/z is stable away from 0; a
    series handles small |z|.
    """
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.7
    zs = np.where(small, 0.0, z)
    ez = np.exp(z)
    out = []
    with np.errstate(divide="ignore", invalid="ignore"):
        ek = np.where(small, 0.0, (ez - 1.0) / np.where(zs == 0, 1.0, zs))
        for k in range(0, kmax + 1):
            if k > 0:
                ek = np.where(small, 0.0, (ez - k * ek_prev) / np.where(zs == 0, 1.0, zs))
            # series for small z
            series = np.zeros_like(z)
            term = np.ones_like(z)
            for m in range(0, 14):
                series = series + term / (k + m + 1)
                term = term * z / (m + 1)
            ek = np.where(small, series, ek)
            out.append(ek)
            ek_prev = ek
    return out


def _oscillatory_against_distribution(t, V, lam1, kinks=()):
    """integral of e^{i lam1 t} dV for V sampled on t, via a C^1 cubic
    Hermite model of V with one-sided slopes at the kink nodes; per-interval
    closed forms, so the cost is lam1-independent."""
    if lam1 == 0.0:
        return complex(V[-1])
    t = np.asarray(t, dtype=float)
    V = np.asarray(V, dtype=complex)
    dt = np.diff(t)
    dv = np.diff(V)
    sec = dv / dt
    n = len(t)
    # interior central slopes (nonuniform weights), one-sided at the ends
    m = np.empty(n, dtype=complex)
    m[1:-1] = (dt[1:] * sec[:-1] + dt[:-1] * sec[1:]) / (dt[:-1] + dt[1:])
    m[0] = sec[0]
    m[-1] = sec[-1]
    m_left = m[:-1].copy()   # slope used at interval starts
    m_right = m[1:].copy()   # slope used at interval ends
    for tk in kinks:
        k = int(np.searchsorted(t, tk))
        for kk in (k - 1, k, k + 1):
            if 0 <= kk < n - 1:
                m_left[kk] = sec[kk]
                m_right[kk] = sec[kk]
    c2 = (3 * sec - 2 * m_left - m_right) / dt
    c3 = (m_left + m_right - 2 * sec) / dt**2
    z = 1j * lam1 * dt
    e0, e1, e2 = _exp_moments(z, 2)
    contrib = np.exp(1j * lam1 * t[:-1]) * dt * (
        m_left * e0 + 2 * c2 * dt * e1 + 3 * c3 * dt**2 * e2
    )
    return complex(np.sum(contrib))


# ---------------------------------------------------------------------------
# public oscillatory integral
# ---------------------------------------------------------------------------


def oscillatory_integral(p: PhasePoly, ds: DensitySpec, lam, cfg: QuadConfig | None = None,
                         check_integrability: bool = True, _assemblies=None):
    """T(lambda) with an error estimate: (value, err_est, n_evals).

    Richardson-style estimate: the assembly is repeated with half the t-grid
    and coarser column panels; the reported error is a padded difference.
    """
    cfg = cfg or QuadConfig()
    if isinstance(lam, tuple):
        lam = LambdaTriple(*lam)
    if max(abs(lam.lam1), abs(lam.lam2), abs(lam.lam3)) > 1e6 * 1.0001:
        raise ValueError("lambda beyond the supported desk scale 1e6")
    if ds.K_model == "zero":
        return 0j, 0.0, 0
    if check_integrability:
        pair = critical_exponent(p, ds)
        if pair == DIVERGENT:
            raise NonIntegrable("density is not integrable; T is undefined")
    if _assemblies is None:
        fine = RayAssembly(p, ds, lam.lam2, lam.lam3, cfg, coarse=False)
        coarse = RayAssembly(p, ds, lam.lam2, lam.lam3, cfg, coarse=True)
    else:
        fine, coarse = _assemblies
    n_evals = fine.n_evals[0] + coarse.n_evals[0]
    if n_evals > cfg.max_evals:
        partial = fine.integral(lam.lam1)
        raise BudgetExceeded(
            "evaluation budget exhausted", partial=partial,
            error_bound=abs(partial - coarse.integral(lam.lam1)),
        )
    v_fine = fine.integral(lam.lam1)
    v_coarse = coarse.integral(lam.lam1)
    err = 3.0 * abs(v_fine - v_coarse) + cfg.abs_tol
    return v_fine, err, n_evals


def oscillatory_sweep(p: PhasePoly, ds: DensitySpec, lams, cfg: QuadConfig | None = None):
    """Evaluate T over a list of LambdaTriple, sharing column assemblies
    across identical lam3 values (deterministic order)."""
    cfg = cfg or QuadConfig()
    pair = critical_exponent(p, ds)
    if pair == DIVERGENT:
        raise NonIntegrable("density is not integrable; T is undefined")
    cache = {}
    out = []
    for lam in lams:
        if isinstance(lam, tuple):
            lam = LambdaTriple(*lam)
        key = (lam.lam2, lam.lam3)
        if key not in cache:
            if ds.K_model == "zero":
                cache[key] = None
            else:
                cache[key] = (
                    RayAssembly(p, ds, lam.lam2, lam.lam3, cfg, coarse=False),
                    RayAssembly(p, ds, lam.lam2, lam.lam3, cfg, coarse=True),
                )
        if cache[key] is None:
            out.append((lam, 0j, 0.0, 0))
            continue
        val, err, n = oscillatory_integral(
            p, ds, lam, cfg, check_integrability=False, _assemblies=cache[key]
        )
        out.append((lam, val, err, n))
    return out


def oscillatory_integral_reference(p: PhasePoly, ds: DensitySpec, lam,
                                   max_phase_per_panel: float = 1.5,
                                   order: int = 8):
    """Independent slow path: phase-resolved panel quadrature per column.

    Practical for |lam1| max|S| + |lam2| r + |lam3| r up to a few thousand
    radians; used to cross-check the assembled evaluator.
    """
    if isinstance(lam, tuple):
        lam = LambdaTriple(*lam)
    r = ds.r
    tmax = _phase_max_bound(p, r)
    budget = abs(lam.lam1) * tmax + (abs(lam.lam2) + abs(lam.lam3)) * r
    if budget > 2e4:
        raise ValueError("reference quadrature is limited to moderate frequencies")
    nodes, wts = np.polynomial.legendre.leggauss(order)
    table = _y_coeff_polys(p)
    # x panels: dyadic toward 0 plus lam2-phase splitting
    edges = [r * 2.0**-k for k in range(24)] + [0.0]
    edges = np.array(sorted(set(edges)))
    panels = []
    for a, b in zip(edges[:-1], edges[1:]):
        n_split = max(1, int(abs(lam.lam2) * (b - a) / max_phase_per_panel),
                      int(abs(lam.lam1) * tmax * (b - a) / r / (4 * max_phase_per_panel)))
        sub = np.linspace(a, b, n_split + 1)
        panels.extend(zip(sub[:-1], sub[1:]))
    total = 0j
    for a, b in panels:
        xq = 0.5 * (a + b) + 0.5 * (b - a) * nodes
        wq = 0.5 * (b - a) * wts
        for sgn in (1.0, -1.0):
            for x, wx in zip(sgn * xq, wq):
                Y = np.sqrt(max(r * r - x * x, 0.0))
                if Y <= 0:
                    continue
                cy = _coeffs_at(table, x)
                # phase-resolved y panels
                yg = np.linspace(-Y, Y, 257)
                ph = lam.lam1 * np.polynomial.polynomial.polyval(yg, cy) + lam.lam3 * yg
                tv = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(ph)))])
                n_pan = max(4, int(tv[-1] / max_phase_per_panel) + 1)
                targets = np.linspace(0.0, tv[-1], n_pan + 1)
                yedges = np.interp(targets, tv, yg)
                ya = yedges[:-1]
                yb = yedges[1:]
                ym = 0.5 * (ya + yb)[:, None] + 0.5 * (yb - ya)[:, None] * nodes[None, :]
                yw = 0.5 * (yb - ya)[:, None] * wts[None, :]
                s = np.polynomial.polynomial.polyval(ym, cy)
                amp = ds.g(s) * ds.K(np.full_like(ym, x), ym)
                phase = np.exp(1j * (lam.lam1 * s + lam.lam2 * x + lam.lam3 * ym))
                total += wx * np.sum(amp * phase * yw)
    return complex(total)


# ---------------------------------------------------------------------------
# sublevel measures (stratified Monte Carlo over columns)
# ---------------------------------------------------------------------------


def _column_sublevel_values(p, ds, x, Y, eps_sorted, table, dtable):
    """Exact weighted y-measure of {|S(x, .)| < eps} for every eps at once."""
    cy = _coeffs_at(table, x)
    dcy = _coeffs_at(dtable, x) if dtable.shape[0] else np.array([0.0])
    crit = _real_roots_in(dcy, -Y, Y)
    bounds = [-Y] + crit + [Y]
    alpha = float(ds.alpha)
    beta = float(ds.beta)
    out = np.zeros(len(eps_sorted))
    nodes, wts = _GL4
    eps_max = eps_sorted[-1]
    for ya, yb in zip(bounds[:-1], bounds[1:]):
        if yb - ya < 1e-15:
            continue
        ta = float(np.polynomial.polynomial.polyval(ya, cy))
        tb = float(np.polynomial.polynomial.polyval(yb, cy))
        tlo, thi = min(ta, tb), max(ta, tb)
        if tlo > eps_max or thi < -eps_max:
            continue
        # dyadic t-levels of |S| within range, both signs
        levels = [0.0]
        for sign in (1.0, -1.0):
            lv = sign * eps_max * 2.0 ** -np.arange(0, 60, dtype=float)
            levels.extend(lv[(lv > tlo) & (lv < thi)])
        levels.extend([max(tlo, -eps_max), min(thi, eps_max)])
        levels = np.unique(np.clip(levels, tlo, thi))
        # invert to y on the segment (reflected so the polynomial increases)
        if tb < ta:
            signs = (-1.0) ** np.arange(len(cy))
            cyz = (cy * signs)[None, :]
            zcuts = _invert_monotone(cyz, np.array([-yb]), np.array([-ya]), levels[None, :])[0]
            ycuts = -zcuts
        else:
            ycuts = _invert_monotone(cy[None, :], np.array([ya]), np.array([yb]), levels[None, :])[0]
        order = np.argsort(ycuts)
        ycuts = ycuts[order]
        lev_sorted = levels[order]
        if ycuts.size < 2:
            continue
        a_edges = ycuts[:-1]
        b_edges = ycuts[1:]
        ym = 0.5 * (a_edges + b_edges)[:, None] + 0.5 * (b_edges - a_edges)[:, None] * nodes[None, :]
        yw = 0.5 * (b_edges - a_edges)[:, None] * wts[None, :]
        s = np.polynomial.polynomial.polyval(ym, cy)
        if alpha != 0:
            # nodes that land exactly on the zero set carry no measure
            w = np.where(s == 0.0, 0.0, np.abs(np.where(s == 0.0, 1.0, s)) ** alpha)
        else:
            w = np.ones_like(s)
        if beta != 0:
            w = w * (x * x + ym * ym) ** (beta / 2.0)
        cell = np.sum(w * yw, axis=1)
        # |S| level of each cell: max of its edge levels
        cell_level = np.maximum(np.abs(lev_sorted[:-1]), np.abs(lev_sorted[1:]))
        for k, eps in enumerate(eps_sorted):
            out[k] += float(np.sum(cell[cell_level <= eps * (1 + 1e-12)]))
    return out


def sublevel_ladder(p: PhasePoly, ds: DensitySpec, epsilons, r: float,
                    n: int = 4096, seed: int = 0, n_strata: int = 14,
                    check_integrability: bool = True):
    """Stratified MC estimates of the weighted sublevel measure for a whole
    epsilon ladder at once (shared samples, per-stratum variances)."""
    if check_integrability:
        if critical_exponent(p, ds) == DIVERGENT:
            raise NonIntegrable("weighted sublevel integral diverges")
    eps_sorted = np.sort(np.asarray(list(epsilons), dtype=float))
    if np.any(eps_sorted <= 0):
        raise ValueError("epsilon must be positive")
    table = _y_coeff_polys(p)
    dtable = table[1:, :] * np.arange(1, table.shape[0])[:, None]
    per = max(8, n // n_strata)
    total = np.zeros(len(eps_sorted))
    var = np.zeros(len(eps_sorted))
    n_used = 0
    for j in range(n_strata):
        hi = r * 2.0**-j
        lo = r * 2.0 ** -(j + 1) if j < n_strata - 1 else 0.0
        rng = _rng.stream(seed, j)
        xs = rng.uniform(lo, hi, per) * rng.choice([-1.0, 1.0], per)
        vals = np.zeros((per, len(eps_sorted)))
        for i, x in enumerate(xs):
            Y = np.sqrt(max(r * r - x * x, 0.0))
            vals[i] = _column_sublevel_values(p, ds, float(x), Y, eps_sorted, table, dtable)
        vol = 2.0 * (hi - lo)
        total += vol * vals.mean(axis=0)
        var += vol**2 * vals.var(axis=0, ddof=1) / per
        n_used += per
    return [
        SublevelEstimate(
            value=float(total[k]),
            std_error=float(np.sqrt(var[k])),
            n_samples=n_used,
            epsilon=float(eps_sorted[k]),
        )
        for k in range(len(eps_sorted))
    ]


def sublevel_measure(p: PhasePoly, ds: DensitySpec, eps: float, r: float,
                     n: int = 4096, seed: int = 0) -> SublevelEstimate:
    """Unbiased stratified-MC estimate of the weighted sublevel measure.

    Strata are dyadic slabs in |x|; within a stratum each sampled column
    contributes its exact 1-D weighted measure (with dyadic |S|-cells), so
    the singular |S|^alpha factor never inflates the variance.
    """
    if not (0 < eps < 0.5):
        raise ValueError("epsilon must lie in (0, 1/2)")
    return sublevel_ladder(p, ds, [eps], r, n=n, seed=seed)[0]
