"""Decay-exponent regression and the envelope uniformity scan."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSpan, NonPositiveValue
from .exponents import BoundEnvelope, DensitySpec
from .numerics import LambdaTriple, QuadConfig, oscillatory_sweep
from .phase import PhasePoly


@dataclass(frozen=True)
class DecayFit:
    delta_fit: float
    d_fit: int
    C: float
    rms_residual: float
    lambda_range: tuple

    def __post_init__(self):
        if not np.isfinite(self.delta_fit):
            raise ValueError("fitted exponent must be finite")
        if self.rms_residual < 0:
            raise ValueError("residual must be nonnegative")


def fit_decay(samples, direction: str = "decay") -> DecayFit:
    """Fit value = C u^{-delta} (ln u)^d with d in {0, 1} chosen by residual.

    ``direction="decay"`` reads samples as (lambda, value) with u = lambda;
    ``"growth"`` reads (epsilon, value) with u = 1/epsilon, so delta is the
    sublevel growth exponent.  Needs >= 6 points spanning >= 2 decades.
    """
    pts = sorted((float(a), float(v)) for a, v in samples)
    if any(v <= 0 for _, v in pts):
        raise NonPositiveValue("fit values must be strictly positive")
    if len(pts) < 6:
        raise InsufficientSpan("need at least 6 ladder points")
    absc = np.array([a for a, _ in pts])
    vals = np.array([v for _, v in pts])
    if absc.min() <= 0 or absc.max() / absc.min() < 100.0 * (1 - 1e-12):
        raise InsufficientSpan("abscissae must span at least two decades")
    if direction == "decay":
        u = np.log(absc)
    elif direction == "growth":
        u = -np.log(absc)
    else:
        raise ValueError("direction must be 'decay' or 'growth'")
    if np.any(u <= 0):
        raise InsufficientSpan("abscissae must keep ln(u) positive for the log term")
    logv = np.log(vals)
    best = None
    for d in (0, 1):
        design = [np.ones_like(u), -u]
        rhs = logv - d * np.log(u)
        coef, *_ = np.linalg.lstsq(np.column_stack(design), rhs, rcond=None)
        resid = rhs - np.column_stack(design) @ coef
        rms = float(np.sqrt(np.mean(resid**2)))
        fit = DecayFit(
            delta_fit=float(coef[1]),
            d_fit=d,
            C=float(np.exp(coef[0])),
            rms_residual=rms,
            lambda_range=(float(absc.min()), float(absc.max())),
        )
        if best is None or rms < best.rms_residual:
            best = fit
    return best


@dataclass
class UniformityReport:
    C_hat: float
    argmax: tuple  # (lam1, lam2, lam3)
    top_decade_slope: float
    top_decade_variation: float
    ratios: list  # (lam1, max-over-grid ratio)
    passed: bool

    def to_json_dict(self):
        return {
            "C_hat": repr(self.C_hat),
            "argmax": list(self.argmax),
            "top_decade_slope": repr(self.top_decade_slope),
            "top_decade_variation": repr(self.top_decade_variation),
            "ratios": [[repr(l), repr(r)] for l, r in self.ratios],
            "passed": self.passed,
        }


def uniformity_scan(p: PhasePoly, ds: DensitySpec, envelope: BoundEnvelope,
                    lam1_ladder, lam23_grid, cfg: QuadConfig | None = None,
                    slope_tol: float = 0.05) -> UniformityReport:
    """Max of |T| / envelope over a (lam2, lam3) grid along a lam1 ladder.

    ``lam23_grid`` is a list of (lam2, lam3) pairs or a callable lam1 ->
    pairs.  The scan passes when the ratio shows no growth trend across the
    top decade of the ladder (log-log slope <= slope_tol); a genuinely
    uniform constant shows a flat or decaying ratio there.
    """
    lam1s = sorted(float(l) for l in lam1_ladder)
    triples = []
    for lam1 in lam1s:
        pairs = lam23_grid(lam1) if callable(lam23_grid) else lam23_grid
        for lam2, lam3 in pairs:
            triples.append(LambdaTriple(lam1, float(lam2), float(lam3)))
    sweep = oscillatory_sweep(p, ds, triples, cfg)
    per_lam1 = {}
    argmax = None
    C_hat = 0.0
    for lam, val, err, _ in sweep:
        ratio = abs(val) / float(envelope(lam.lam1))
        if ratio > per_lam1.get(lam.lam1, -1.0):
            per_lam1[lam.lam1] = ratio
        if ratio > C_hat:
            C_hat = ratio
            argmax = (lam.lam1, lam.lam2, lam.lam3)
    ratios = sorted(per_lam1.items())
    top_cut = lam1s[-1] / 10.0
    top = [(l, r) for l, r in ratios if l >= top_cut]
    if C_hat == 0.0:
        return UniformityReport(0.0, (lam1s[-1], 0.0, 0.0), 0.0, 1.0, ratios, True)
    if len(top) >= 2:
        xs = np.log([l for l, _ in top])
        ys = np.log([max(r, 1e-300) for _, r in top])
        slope = float(np.polyfit(xs, ys, 1)[0])
        variation = float(max(r for _, r in top) / max(min(r for _, r in top), 1e-300))
    else:
        slope = 0.0
        variation = 1.0
    return UniformityReport(
        C_hat=C_hat,
        argmax=argmax,
        top_decade_slope=slope,
        top_decade_variation=variation,
        ratios=ratios,
        passed=slope <= slope_tol,
    )
