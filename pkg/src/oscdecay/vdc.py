"""Van der Corput decay bounds (1-D k-th derivative and 2-D mixed
derivative forms) and a randomized verification harness.

The admissible constants are configuration, not theorems: c_1 = 3 and
c_k = 5 * 2^(k-1) - 2 are the classical values; the mixed-derivative
constant follows the proof skeleton (absolute-value part 2N sqrt(l1 l2/M),
plus k*l intervals each split into at most k monotone pieces handled by
the first-derivative bound).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .errors import MonotonicityRequired, OracleFailure


def c_k(k: int) -> float:
    if k < 1:
        raise ValueError("derivative order must be >= 1")
    if k == 1:
        return 3.0
    return 5.0 * 2.0 ** (k - 1) - 2.0


def C_kl(k: int, l: int) -> float:
    if k < 2 or l < 1:
        raise ValueError("need k >= 2 and l >= 1")
    return 2.0 + 6.0 * k * k * l


@dataclass(frozen=True)
class VdcConstants:
    c_k: dict = field(default_factory=lambda: {k: c_k(k) for k in range(1, 7)})
    C_kl: dict = field(
        default_factory=lambda: {
            (k, l): C_kl(k, l) for k in range(2, 5) for l in range(1, 4)
        }
    )


def vdc_bound_1d(k: int, M: float, psi_end: float, psi_var: float,
                 monotone_derivative: bool = False) -> float:
    """c_k M^{-1/k} (|psi(b)| + int |psi'|), valid when |P^(k)| > M on [a,b].

    k = 1 additionally requires P' monotone; the caller asserts that via
    the flag.
    """
    if M <= 0:
        raise ValueError("derivative lower bound must be positive")
    if psi_end < 0 or psi_var < 0:
        raise ValueError("amplitude data must be nonnegative")
    if k == 1 and not monotone_derivative:
        raise MonotonicityRequired("k = 1 needs the monotone-derivative flag")
    return c_k(k) * M ** (-1.0 / k) * (psi_end + psi_var)


def vdc_bound_2d(M: float, N: float, l1: float, l2: float,
                 k: int = 2, l: int = 1) -> float:
    """C_kl N sqrt(l1 l2 / M) under |d_xy P| > M, d_y^k P != 0, amplitude
    bounds N, and vertical sections of R' in at most l intervals.

    Pure formula; hypothesis checking is the harness's job.
    """
    if M <= 0 or N < 0 or l1 < 0 or l2 < 0:
        raise ValueError("bound inputs out of range")
    return C_kl(k, l) * N * np.sqrt(l1 * l2 / M)


# ---------------------------------------------------------------------------
# certified polynomial range bounds (interval subdivision)
# ---------------------------------------------------------------------------


def poly_lower_abs_bound(coeffs, a: float, b: float, pieces: int = 256):
    """Certified lower bound for |q| on [a, b], q = sum coeffs[k] x^k.

    Centered-form interval bound on a subdivision: on each piece,
    |q| >= |q(mid)| - L * h/2 with L a global bound for |q'|.  Returns 0.0
    when no positive bound is certified (possible sign change).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if len(coeffs) == 0:
        return 0.0
    span = max(abs(a), abs(b), 1e-30)
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))
    L = float(np.sum(np.abs(dcoeffs) * span ** np.arange(len(dcoeffs))))
    edges = np.linspace(a, b, pieces + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    h = (b - a) / pieces
    vals = np.polynomial.polynomial.polyval(mids, coeffs)
    if np.min(vals) < 0 < np.max(vals):
        return 0.0
    lower = np.min(np.abs(vals)) - L * h / 2
    return float(max(lower, 0.0))


def _amplitude_data(coeffs, a: float, b: float):
    """|psi(b)| and the exact total variation of psi on [a, b]."""
    coeffs = np.asarray(coeffs, dtype=float)
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))
    psi_end = float(abs(np.polynomial.polynomial.polyval(b, coeffs)))
    if len(dcoeffs) == 0:
        return psi_end, 0.0
    roots = [r.real for r in np.roots(dcoeffs[::-1])
             if abs(r.imag) < 1e-12 and a < r.real < b] if len(dcoeffs) > 1 else []
    pts = sorted([a] + roots + [b])
    vals = np.polynomial.polynomial.polyval(np.array(pts), coeffs)
    var = float(np.sum(np.abs(np.diff(vals))))
    return psi_end, var


def _osc_integral_1d(pcoeffs, acoeffs, a: float, b: float, tol: float = 1e-9):
    """Reference quadrature of int_a^b e^{iP} psi dx, phase-resolved panels."""
    pcoeffs = np.asarray(pcoeffs, dtype=float)
    grid = np.linspace(a, b, 4097)
    phase = np.polynomial.polynomial.polyval(grid, pcoeffs)
    tv = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(phase)))])
    n_pan = int(tv[-1] / 2.0) + 16
    targets = np.linspace(0.0, tv[-1], n_pan + 1)
    edges = np.interp(targets, tv, grid)
    nodes, wts = np.polynomial.legendre.leggauss(10)
    xa, xb = edges[:-1], edges[1:]
    xm = 0.5 * (xa + xb)[:, None] + 0.5 * (xb - xa)[:, None] * nodes[None, :]
    ww = 0.5 * (xb - xa)[:, None] * wts[None, :]
    ph = np.polynomial.polynomial.polyval(xm, pcoeffs)
    amp = np.polynomial.polynomial.polyval(xm, np.asarray(acoeffs, dtype=float))
    val = np.sum(np.exp(1j * ph) * amp * ww)
    # convergence check with doubled panels
    n2 = 2 * n_pan
    targets2 = np.linspace(0.0, tv[-1], n2 + 1)
    edges2 = np.interp(targets2, tv, grid)
    xa2, xb2 = edges2[:-1], edges2[1:]
    xm2 = 0.5 * (xa2 + xb2)[:, None] + 0.5 * (xb2 - xa2)[:, None] * nodes[None, :]
    ww2 = 0.5 * (xb2 - xa2)[:, None] * wts[None, :]
    ph2 = np.polynomial.polynomial.polyval(xm2, pcoeffs)
    amp2 = np.polynomial.polynomial.polyval(xm2, np.asarray(acoeffs, dtype=float))
    val2 = np.sum(np.exp(1j * ph2) * amp2 * ww2)
    if abs(val - val2) > max(tol, 1e-9 * abs(val2)) * 50:
        raise OracleFailure("reference quadrature did not converge")
    return complex(val2)


# ---------------------------------------------------------------------------
# randomized verification
# ---------------------------------------------------------------------------


@dataclass
class VdcReport:
    trials: int
    violations: int
    min_headroom: float
    worst_case: dict

    def to_json_dict(self):
        return {
            "trials": self.trials,
            "violations": self.violations,
            "min_headroom": repr(self.min_headroom),
            "worst_case": self.worst_case,
        }


def _trial_1d(rng, k: int, lam: float):
    """One random certified 1-D trial; returns (actual, bound) or None."""
    deg = k + rng.integers(0, 3)
    coeffs = rng.normal(0, 1, deg + 1)
    coeffs[k] = rng.choice([-1.0, 1.0]) * (1.0 + abs(coeffs[k]))
    coeffs = coeffs * lam
    a, b = 0.0, float(1.0 + rng.random())
    # k-th derivative coefficients
    dk = coeffs.copy()
    for _ in range(k):
        dk = dk[1:] * np.arange(1, len(dk))
    M = poly_lower_abs_bound(dk, a, b)
    if M <= 1e-9 * lam:
        return None
    acoeffs = rng.normal(0, 1, 3)
    psi_end, psi_var = _amplitude_data(acoeffs, a, b)
    bound = vdc_bound_1d(k, M, psi_end, psi_var)
    actual = abs(_osc_integral_1d(coeffs, acoeffs, a, b))
    return actual, bound


def _trial_2d(rng, lam: float):
    """One random certified 2-D trial: P = a xy + d y^2 + e x^2 + f x^2 y."""
    l1 = float(0.4 + rng.random())
    l2 = float(0.4 + rng.random())
    a_c = float(rng.choice([-1.0, 1.0]) * (1.0 + rng.random()) * lam)
    d_c = float(rng.choice([-1.0, 1.0]) * (0.5 + rng.random()) * lam)
    e_c = float(rng.normal(0, 0.5) * lam)
    f_c = float(rng.normal(0, 0.2) * lam)
    # d_xy P = a + 2 f x: certified minimum on [0, l1]
    v0, v1 = a_c, a_c + 2 * f_c * l1
    if v0 * v1 <= 0:
        return None
    M = min(abs(v0), abs(v1))
    # d_yy P = 2 d != 0 everywhere
    sx = rng.normal(0, 1, 2)
    sy = rng.normal(0, 1, 2)
    # amplitude sigma(x) tau(y): N bounds sup|Psi| and sup_x int |d_y Psi|
    xs = np.linspace(0, l1, 257)
    ys = np.linspace(0, l2, 257)
    sigma = sx[0] + sx[1] * xs
    tau = sy[0] + sy[1] * ys
    sup_psi = np.max(np.abs(sigma)) * np.max(np.abs(tau))
    var_y = np.max(np.abs(sigma)) * abs(sy[1]) * l2
    N = max(sup_psi, var_y)
    bound = vdc_bound_2d(M, N, l1, l2, k=2, l=1)
    # tensor phase-resolved quadrature
    nodes, wts = np.polynomial.legendre.leggauss(8)
    nx = int(abs(a_c) * l1 * l2 / 3 + abs(e_c) * l1 * l1 / 3) + 8
    ny = int((abs(a_c) * l1 + abs(f_c) * l1 * l1) * l2 / 3 + abs(d_c) * l2 * l2 / 3) + 8
    nx, ny = min(nx, 3000), min(ny, 3000)
    ex = np.linspace(0, l1, nx + 1)
    ey = np.linspace(0, l2, ny + 1)
    xm = (0.5 * (ex[:-1] + ex[1:])[:, None] + 0.5 * np.diff(ex)[:, None] * nodes).ravel()
    wx = (0.5 * np.diff(ex)[:, None] * wts).ravel()
    ym = (0.5 * (ey[:-1] + ey[1:])[:, None] + 0.5 * np.diff(ey)[:, None] * nodes).ravel()
    wy = (0.5 * np.diff(ey)[:, None] * wts).ravel()
    X = xm[:, None]
    Yv = ym[None, :]
    P = a_c * X * Yv + d_c * Yv**2 + e_c * X**2 + f_c * X**2 * Yv
    Psi = (sx[0] + sx[1] * X) * (sy[0] + sy[1] * Yv)
    val = np.einsum("i,j,ij->", wx, wy, np.exp(1j * P) * Psi)
    return abs(val), bound


def vdc_verify(trials: int = 100, seed: int = 0, degree_bound: int = 5,
               lam_ladder=(8.0, 64.0, 512.0), mode: str = "1d",
               k_orders=(2, 3)) -> VdcReport:
    """Randomized check that the bounds hold with headroom.

    Derivative lower bounds come from certified interval arithmetic, never
    sampling; trials whose certification fails are redrawn.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    done = 0
    violations = 0
    min_headroom = np.inf
    worst = {}
    attempt = 0
    while done < trials:
        rng = _rng.stream(seed, hash((mode, attempt)) & 0xFFFFFFFF)
        attempt += 1
        lam = float(lam_ladder[attempt % len(lam_ladder)])
        if mode == "1d":
            k = int(k_orders[attempt % len(k_orders)])
            out = _trial_1d(rng, k, lam)
        else:
            out = _trial_2d(rng, lam)
        if out is None:
            continue
        actual, bound = out
        done += 1
        if actual > 1e-12:
            headroom = bound / actual
            if headroom < min_headroom:
                min_headroom = headroom
                worst = {"trial": attempt, "actual": repr(actual), "bound": repr(bound), "lam": lam}
            if actual > bound:
                violations += 1
    return VdcReport(
        trials=done,
        violations=violations,
        min_headroom=float(min_headroom),
        worst_case=worst,
    )


def fresnel_ratio(lam: float) -> float:
    """|int_0^1 e^{i lam x^2} dx| over the k = 2 bound with M = 2 lam."""
    val = _osc_integral_1d([0.0, 0.0, lam], [1.0], 0.0, 1.0)
    bound = vdc_bound_1d(2, 2.0 * lam, 1.0, 0.0)
    return abs(val) / bound
