"""Critical integrability exponents, decay envelopes and bound certificates.

Per wedge, the weighted sublevel integral of the comparable monomial model
has computable asymptotics  C eps^delta (ln 1/eps)^d; the phase-level pair
is the min over wedges (log term breaking ties).  All exponent arithmetic
stays in exact rationals whenever the density exponents are rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NonIntegrable
from .phase import PhasePoly
from .resolution import Decomposition, WedgeDomain, decompose

_EPS_EQ = 1e-12


class Divergent:
    """First-class result: the weighted integral diverges on some wedge."""

    def __repr__(self):
        return "Divergent"

    def __eq__(self, other):
        return isinstance(other, Divergent)

    def __hash__(self):
        return hash("Divergent")


DIVERGENT = Divergent()


def _as_exponent(v):
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float) and v == int(v):
        return Fraction(int(v))
    return float(v)


def _eq(x, y) -> bool:
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return x == y
    return abs(float(x) - float(y)) < _EPS_EQ


def _lt(x, y) -> bool:
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return x < y
    return float(x) < float(y) - _EPS_EQ


@dataclass(frozen=True)
class ExponentPair:
    """Sublevel growth exponents: measure ~ eps^delta * |ln eps|^d."""

    delta: object  # Fraction (preferred) or float
    d: int

    def __post_init__(self):
        if self.d not in (0, 1):
            raise ValueError("log power d must be 0 or 1")
        if float(self.delta) <= 0:
            raise ValueError("delta must be positive")

    def as_float(self):
        return float(self.delta), self.d


@dataclass
class DensitySpec:
    """Density model |S|^alpha * radius^beta with amplitude realizations.

    ``g_model`` is the symbol factor g(z) (pure power |z|^alpha); ``K_model``
    chooses the cutoff: a C^1 radial bump (1 - (rho/r)^2)^2 scaled by
    rho^beta, or zero.  ``bound_const`` is the constant of the envelope
    hypotheses; the models satisfy it with value 1.
    """

    alpha: object = 0
    beta: object = 0
    bound_const: float = 1.0
    g_model: str = "power"
    K_model: str = "bump"
    r: float = 0.8
    k_scale: float = 1.0

    def __post_init__(self):
        self.alpha = _as_exponent(self.alpha)
        self.beta = _as_exponent(self.beta)
        if self.bound_const <= 0:
            raise ValueError("bound constant must be positive")
        if self.g_model not in ("power",):
            raise ValueError(f"unknown g model {self.g_model!r}")
        if self.K_model not in ("bump", "zero"):
            raise ValueError(f"unknown K model {self.K_model!r}")
        if self.r <= 0:
            raise ValueError("support radius must be positive")

    # model evaluations (numpy-friendly) ----------------------------------

    def g(self, s):
        a = float(self.alpha)
        if a == 0:
            return np.ones_like(np.asarray(s, dtype=float))
        return np.abs(s) ** a

    def K(self, x, y):
        if self.K_model == "zero":
            return np.zeros_like(np.asarray(x, dtype=float))
        rho2 = x * x + y * y
        out = np.where(rho2 < self.r**2, (1.0 - rho2 / self.r**2) ** 2, 0.0)
        b = float(self.beta)
        if b != 0:
            out = out * rho2 ** (b / 2.0)
        return self.k_scale * out

    def validate_integrability(self, dec: Decomposition):
        """Raise NonIntegrable unless every wedge integral converges."""
        for w in dec.wedges:
            if wedge_exponent(w, self) == DIVERGENT:
                raise NonIntegrable(
                    f"density (alpha={self.alpha}, beta={self.beta}) diverges on wedge {w.index}"
                )


# ---------------------------------------------------------------------------
# Lemma-level computation: one wedge
# ---------------------------------------------------------------------------


def wedge_exponent(w: WedgeDomain, ds: DensitySpec):
    """Exponent pair of the weighted sublevel integral over one wedge.

    The integrand is x^a y^b with a = alpha*x_exp + beta, b = alpha*y_exp on
    {x^x_exp y^y_exp < eps} between the wedge boundaries; the closed-form
    asymptotics split on the sign of B = (b+1)/y_exp and the position of
    A = a - x_exp*B relative to -1.  Returns DIVERGENT when the full wedge
    integral already diverges.
    """
    ai = w.x_exp
    bi = w.y_exp
    alpha, beta = ds.alpha, ds.beta
    if isinstance(alpha, Fraction) and isinstance(beta, Fraction):
        a = alpha * ai + beta
        b = alpha * bi
        one = Fraction(1)
    else:
        a = float(alpha) * float(ai) + float(beta)
        b = float(alpha) * bi
        one = 1.0
        ai = float(ai)
    M = w.upper[0] if isinstance(a, Fraction) else float(w.upper[0])
    if bi == 0:
        if float(ai) == 0:
            raise ValueError("wedge monomial cannot be constant")
        num = a + M + one
        if float(num) <= 0:
            return DIVERGENT
        return ExponentPair(num / ai, 0)

    B = (b + one) / bi
    A = a - ai * B
    Q = ai + M * bi
    if w.lower is None:
        if float(B) <= 0 or float(A + B * Q) <= -1:
            return DIVERGENT
        if _eq(A, -one):
            return ExponentPair(B, 1)
        if _lt(-one, A):
            return ExponentPair(B, 0)
        return ExponentPair(B + (A + one) / Q, 0)

    m = w.lower[0] if isinstance(a, Fraction) else float(w.lower[0])
    P = ai + m * bi
    if float(B) > 0:
        if float(A + B * Q) <= -1:
            return DIVERGENT
        if _eq(A, -one):
            return ExponentPair(B, 1)
        if _lt(-one, A):
            return ExponentPair(B + (A + one) / P, 0)
        return ExponentPair(B + (A + one) / Q, 0)
    if _eq(B, 0 * one):
        if not _lt(-one, A):
            return DIVERGENT
        return ExponentPair((A + one) / P, 0)
    if float(A + B * P) <= -1:
        return DIVERGENT
    return ExponentPair(B + (A + one) / P, 0)


def combine_exponents(pairs):
    """Aggregate wedge pairs: smallest delta wins, log term breaks ties."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no wedge exponents to combine")
    if any(p == DIVERGENT for p in pairs):
        raise ValueError("combine_exponents expects finite pairs only")
    best = min(float(p.delta) for p in pairs)
    attaining = [p for p in pairs if abs(float(p.delta) - best) < _EPS_EQ]
    exact = [p.delta for p in attaining if isinstance(p.delta, Fraction)]
    delta = min(exact) if len(exact) == len(attaining) else best
    d = max(p.d for p in attaining)
    return ExponentPair(delta, d)


def critical_exponent(p: PhasePoly, ds: DensitySpec, eta: float = 0.25,
                      dec: Decomposition | None = None):
    """(delta, d) of the phase w.r.t. the weighted density, or DIVERGENT."""
    if dec is None:
        dec = decompose(p, eta=eta)
    pairs = []
    for w in dec.wedges:
        pair = wedge_exponent(w, ds)
        if pair == DIVERGENT:
            return DIVERGENT
        pairs.append(pair)
    return combine_exponents(pairs)


def smooth_shift_check(pair0: ExponentPair, alpha):
    """Shift identity for beta = 0: (delta, d) = (alpha + delta0, d0)."""
    alpha = _as_exponent(alpha)
    if isinstance(alpha, Fraction) and isinstance(pair0.delta, Fraction):
        if alpha <= -pair0.delta:
            raise NonIntegrable("alpha <= -delta0: density not integrable")
        return ExponentPair(alpha + pair0.delta, pair0.d)
    if float(alpha) <= -float(pair0.delta) + _EPS_EQ:
        raise NonIntegrable("alpha <= -delta0: density not integrable")
    return ExponentPair(float(alpha) + float(pair0.delta), pair0.d)


# ---------------------------------------------------------------------------
# Theorem-level envelope
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundEnvelope:
    """Uniform decay envelope (1+lam)^(-exponent) * ln(e+lam)^log_power."""

    case: str  # 'a', 'b' or 'c'
    exponent: object
    log_power: int
    threshold: Fraction

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = (1.0 + lam) ** (-float(self.exponent))
        if self.log_power:
            out = out * np.log(np.e + lam) ** self.log_power
        return out


def envelope(e: ExponentPair, o: int) -> BoundEnvelope:
    """Select the decay envelope by comparing delta with 1/3 + 1/(3o)."""
    if o < 2:
        raise ValueError("order of the zero must be at least 2")
    threshold = Fraction(1, 3) + Fraction(1, 3 * o)
    delta = e.delta
    if isinstance(delta, Fraction):
        if delta < threshold:
            return BoundEnvelope("a", delta, e.d, threshold)
        if delta > threshold:
            return BoundEnvelope("b", threshold, 0, threshold)
        return BoundEnvelope("c", threshold, e.d + 1, threshold)
    dv, tv = float(delta), float(threshold)
    if abs(dv - tv) < _EPS_EQ:
        return BoundEnvelope("c", threshold, e.d + 1, threshold)
    if dv < tv:
        return BoundEnvelope("a", dv, e.d, threshold)
    return BoundEnvelope("b", threshold, 0, threshold)


# ---------------------------------------------------------------------------
# Bound certificate: the two-term majorant evaluated on a wedge
# ---------------------------------------------------------------------------


def _column_power_integral(y0, y1, b):
    """Integral of y^b over [y0, y1] (numpy arrays), log form at b = -1."""
    y0 = np.maximum(y0, 0.0)
    y1 = np.maximum(y1, y0)
    if abs(b + 1.0) < 1e-14:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(np.where(y0 > 0, y1 / np.where(y0 > 0, y0, 1.0), 1.0))
        return np.where(y0 > 0, out, np.inf * (y1 > y0))
    return (y1 ** (b + 1.0) - y0 ** (b + 1.0)) / (b + 1.0)


def bound_certificate(w: WedgeDomain, ds: DensitySpec, e: ExponentPair,
                      o: int, lam: float, rel_tol: float = 1e-6) -> float:
    """Value of the two-part majorant on one wedge at frequency lam.

    mu{|S_i| < 1/lam}  +  lam^{-theta} * integral_{|S_i| >= 1/lam} |S_i|^{-theta} dmu
    with theta = 1/3 + 1/(3o), both terms evaluated for the comparable
    monomial model |S_i| = |d| x^X y^Y by exact column integrals and
    log-spaced Gauss panels in x.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    theta = float(Fraction(1, 3) + Fraction(1, 3 * o))
    X, Y = float(w.x_exp), w.y_exp
    dmag = abs(w.d)
    a = float(ds.alpha) * X + float(ds.beta)
    b = float(ds.alpha) * Y
    t = np.inf if lam == 0 else 1.0 / lam
    nodes, wts = np.polynomial.legendre.leggauss(12)

    def evaluate(n_panels):
        edges = np.geomspace(w.radius * 1e-9, w.radius, n_panels + 1)
        total1 = 0.0
        total2 = 0.0
        for lo_e, hi_e in zip(edges[:-1], edges[1:]):
            x = 0.5 * (hi_e + lo_e) + 0.5 * (hi_e - lo_e) * nodes
            ww = 0.5 * (hi_e - lo_e) * wts
            hi = w.upper_at(x)
            lo = np.minimum(w.lower_at(x), hi)
            dens = dmag ** float(ds.alpha) * x**a
            if Y == 0:
                inside = (dmag * x**X < t).astype(float)
                col = _column_power_integral(lo, hi, b)
                total1 += np.sum(ww * dens * col * inside)
                if np.isfinite(t):
                    out_fac = (dmag * x**X) ** (-theta)
                    total2 += np.sum(ww * dens * col * (1.0 - inside) * out_fac)
            else:
                if np.isfinite(t):
                    y_cut = (t / (dmag * x**X)) ** (1.0 / Y)
                else:
                    y_cut = np.full_like(x, np.inf)
                y_mid = np.minimum(hi, np.maximum(lo, y_cut))
                total1 += np.sum(ww * dens * _column_power_integral(lo, y_mid, b))
                if np.isfinite(t):
                    col2 = _column_power_integral(y_mid, hi, b - theta * Y)
                    total2 += np.sum(
                        ww * dens * x ** (-theta * X) * dmag ** (-theta) * col2
                    )
        if lam == 0:
            return float(total1)
        return float(total1 + lam ** (-theta) * total2)

    n = 160
    value = evaluate(n)
    for _ in range(4):
        refined = evaluate(2 * n)
        if abs(refined - value) <= rel_tol * max(abs(refined), 1e-300):
            return refined
        value, n = refined, 2 * n
    return value
