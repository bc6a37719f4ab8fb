"""Command-line surface: configuration, pipelines, artifact persistence.

Exit codes: 0 when every oracle check passes, 2 when the tool ran but a
mathematical check failed, 1 on errors (bad input, non-integrable density,
budget exhaustion).  All artifacts are byte-deterministic for a fixed
config and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import OscdecayError
from .exponents import (
    DIVERGENT,
    DensitySpec,
    combine_exponents,
    critical_exponent,
    envelope,
    wedge_exponent,
)
from .fit import fit_decay, uniformity_scan
from .numerics import LambdaTriple, QuadConfig, oscillatory_sweep, sublevel_ladder
from .phase import PhasePoly
from .resolution import decompose, verify_comparability
from .vdc import fresnel_ratio, vdc_verify


@dataclass
class JobConfig:
    """Fully-explicit job description; parses round-trip stable."""

    phase_terms: list
    alpha: str = "0"
    beta: str = "0"
    g_model: str = "power"
    K_model: str = "bump"
    r: float = 0.8
    eta: float = 0.25
    a_max: float = 0.5
    seed: int = 0
    lambda_j_min: int = 7
    lambda_j_max: int = 14
    epsilon_j_min: int = 7
    epsilon_j_max: int = 16
    lambda23: str = "zero"  # "zero" or "sqrt" (the +-sqrt(lam1) grid)
    sublevel_samples: int = 2048
    vdc_trials: int = 25
    comparability_samples: int = 2000
    rel_tol: float = 1e-6
    max_evals: int = 80_000_000
    out_dir: str = "oscdecay-out"

    @classmethod
    def from_json(cls, doc: dict) -> "JobConfig":
        phase = doc["phase"]["terms"]
        known = {f: doc[f] for f in cls.__dataclass_fields__ if f in doc}
        known.pop("phase_terms", None)
        density = doc.get("density", {})
        for key in ("alpha", "beta", "g_model", "K_model", "r"):
            if key in density:
                known[key] = density[key]
        return cls(phase_terms=phase, **known)

    def to_json_dict(self) -> dict:
        out = {"phase": {"terms": self.phase_terms}}
        out["density"] = {
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "g_model": self.g_model,
            "K_model": self.K_model,
            "r": self.r,
        }
        for f in self.__dataclass_fields__:
            # out_dir is a placement detail, not part of the job identity
            if f in ("phase_terms", "alpha", "beta", "g_model", "K_model", "r", "out_dir"):
                continue
            out[f] = getattr(self, f)
        return out

    def phase(self) -> PhasePoly:
        return PhasePoly.from_json_terms(self.phase_terms)

    def density(self) -> DensitySpec:
        return DensitySpec(
            alpha=self.alpha, beta=self.beta, g_model=self.g_model,
            K_model=self.K_model, r=self.r,
        )

    def quad(self) -> QuadConfig:
        return QuadConfig(rel_tol=self.rel_tol, max_evals=self.max_evals,
                          seed=self.seed)

    def lambda_ladder(self):
        return [float(2**j) for j in range(self.lambda_j_min, self.lambda_j_max + 1)]

    def epsilon_ladder(self):
        return [2.0**-j for j in range(self.epsilon_j_min, self.epsilon_j_max + 1)]

    def lambda23_grid(self, lam1: float):
        if self.lambda23 == "zero":
            return [(0.0, 0.0)]
        s = float(np.sqrt(lam1))
        vals = (-s, 0.0, s)
        return [(a, b) for a in vals for b in vals]


# ---------------------------------------------------------------------------
# artifact helpers
# ---------------------------------------------------------------------------


def _write(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def _json_text(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _fraction_str(v) -> str:
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def _svg_loglog(path, series, title, xlabel, ylabel):
    """Minimal standalone log-log SVG plot (deterministic bytes)."""
    W, H, pad = 640, 440, 56
    pts_all = [(x, y) for _, pts in series for (x, y) in pts if x > 0 and y > 0]
    if not pts_all:
        _write(path, "<svg xmlns='http://www.w3.org/2000/svg'/>\n")
        return
    lx = [np.log10(x) for x, _ in pts_all]
    ly = [np.log10(y) for _, y in pts_all]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(v):
        return pad + (np.log10(v) - x0) / (x1 - x0) * (W - 2 * pad)

    def sy(v):
        return H - pad - (np.log10(v) - y0) / (y1 - y0) * (H - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{W}' height='{H}'>",
        f"<rect width='{W}' height='{H}' fill='white'/>",
        f"<text x='{W//2}' y='24' text-anchor='middle' font-size='15'>{title}</text>",
        f"<text x='{W//2}' y='{H-10}' text-anchor='middle' font-size='12'>{xlabel}</text>",
        f"<text x='16' y='{H//2}' font-size='12' transform='rotate(-90 16 {H//2})' text-anchor='middle'>{ylabel}</text>",
        f"<rect x='{pad}' y='{pad}' width='{W-2*pad}' height='{H-2*pad}' fill='none' stroke='#888'/>",
    ]
    for idx, (label, pts) in enumerate(series):
        good = [(x, y) for x, y in pts if x > 0 and y > 0]
        if not good:
            continue
        path_d = " ".join(
            f"{'M' if i == 0 else 'L'}{sx(x):.2f},{sy(y):.2f}" for i, (x, y) in enumerate(good)
        )
        color = colors[idx % len(colors)]
        parts.append(f"<path d='{path_d}' fill='none' stroke='{color}' stroke-width='1.6'/>")
        parts.append(
            f"<text x='{W-pad-4}' y='{pad+16+14*idx}' text-anchor='end' font-size='11' fill='{color}'>{label}</text>"
        )
    parts.append("</svg>")
    _write(path, "\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _decomposition(cfg: JobConfig):
    return decompose(cfg.phase(), eta=cfg.eta, a_max=cfg.a_max, seed=cfg.seed)


def cmd_decompose(cfg: JobConfig) -> int:
    dec = _decomposition(cfg)
    _write(os.path.join(cfg.out_dir, "decomposition.json"), dec.to_json() + "\n")
    return 0


def _exponent_doc(cfg: JobConfig, dec):
    ds = cfg.density()
    pairs = []
    per_wedge = []
    for w in dec.wedges:
        pair = wedge_exponent(w, ds)
        if pair == DIVERGENT:
            return None, None
        pairs.append(pair)
        per_wedge.append(
            {
                "wedge": w.index,
                "delta": _fraction_str(pair.delta),
                "d": pair.d,
            }
        )
    combined = combine_exponents(pairs)
    o = cfg.phase().order_o
    env = envelope(combined, o)
    doc = {
        "delta": _fraction_str(combined.delta),
        "d": combined.d,
        "case": env.case,
        "threshold": str(env.threshold),
        "order": o,
        "per_wedge": per_wedge,
    }
    return doc, (combined, env)


def cmd_exponent(cfg: JobConfig) -> int:
    dec = _decomposition(cfg)
    doc, info = _exponent_doc(cfg, dec)
    if doc is None:
        raise OscdecayError("exponents: density is not integrable (Divergent)")
    _write(os.path.join(cfg.out_dir, "exponents.json"), _json_text(doc))
    return 0


def cmd_integrate(cfg: JobConfig) -> int:
    p, ds = cfg.phase(), cfg.density()
    triples = []
    for lam1 in cfg.lambda_ladder():
        for lam2, lam3 in cfg.lambda23_grid(lam1):
            triples.append(LambdaTriple(lam1, lam2, lam3))
    sweep = oscillatory_sweep(p, ds, triples, cfg.quad())
    rows = [
        (lam.lam1, lam.lam2, lam.lam3, val.real, val.imag, abs(val), err, n)
        for (lam, val, err, n) in sweep
    ]
    _write(
        os.path.join(cfg.out_dir, "sweep.csv"),
        _csv_text(
            ["lambda1", "lambda2", "lambda3", "reT", "imT", "absT", "err_est", "n_evals"],
            rows,
        ),
    )
    return 0


def cmd_sublevel(cfg: JobConfig) -> int:
    p, ds = cfg.phase(), cfg.density()
    ests = sublevel_ladder(
        p, ds, cfg.epsilon_ladder(), r=cfg.r, n=cfg.sublevel_samples, seed=cfg.seed
    )
    rows = [(e.epsilon, e.value, e.std_error, e.n_samples) for e in ests]
    _write(
        os.path.join(cfg.out_dir, "sublevel.csv"),
        _csv_text(["epsilon", "value", "std_error", "n"], rows),
    )
    return 0


def cmd_vdc(cfg: JobConfig) -> int:
    rep1 = vdc_verify(trials=cfg.vdc_trials, seed=cfg.seed, mode="1d")
    rep2 = vdc_verify(trials=cfg.vdc_trials, seed=cfg.seed + 1, mode="2d")
    doc = {"oneD": rep1.to_json_dict(), "twoD": rep2.to_json_dict()}
    _write(os.path.join(cfg.out_dir, "vdc.json"), _json_text(doc))
    return 0 if rep1.violations == 0 and rep2.violations == 0 else 2


def cmd_fit(cfg: JobConfig) -> int:
    p, ds = cfg.phase(), cfg.density()
    ests = sublevel_ladder(
        p, ds, cfg.epsilon_ladder(), r=cfg.r, n=cfg.sublevel_samples, seed=cfg.seed
    )
    sub_fit = fit_decay([(e.epsilon, e.value) for e in ests], direction="growth")
    sweep = oscillatory_sweep(
        p, ds, [LambdaTriple(l) for l in cfg.lambda_ladder()], cfg.quad()
    )
    dec_fit = fit_decay([(lam.lam1, abs(v)) for (lam, v, _, _) in sweep])
    doc = {
        "sublevel_fit": _fit_doc(sub_fit),
        "decay_fit": _fit_doc(dec_fit),
    }
    _write(os.path.join(cfg.out_dir, "fits.json"), _json_text(doc))
    return 0


def _fit_doc(f):
    return {
        "delta_fit": repr(f.delta_fit),
        "d_fit": f.d_fit,
        "C": repr(f.C),
        "rms_residual": repr(f.rms_residual),
        "range": [repr(f.lambda_range[0]), repr(f.lambda_range[1])],
    }


def cmd_analyze(cfg: JobConfig) -> int:
    p, ds = cfg.phase(), cfg.density()
    dec = _decomposition(cfg)
    _write(os.path.join(cfg.out_dir, "decomposition.json"), dec.to_json() + "\n")

    doc, info = _exponent_doc(cfg, dec)
    if doc is None:
        raise OscdecayError("exponents: density is not integrable (Divergent)")
    _write(os.path.join(cfg.out_dir, "exponents.json"), _json_text(doc))
    combined, env = info
    env_doc = {
        "case": env.case,
        "exponent": _fraction_str(env.exponent),
        "log_power": env.log_power,
        "threshold": str(env.threshold),
    }
    _write(os.path.join(cfg.out_dir, "envelope.json"), _json_text(env_doc))

    checks = {}

    # comparability certificates
    comp_ok = True
    for w in dec.wedges:
        orders = (min(1, int(w.x_exp)), min(1, w.y_exp))
        rep = verify_comparability(
            w, dec.phase, samples=cfg.comparability_samples,
            derivative_orders=orders, seed=cfg.seed,
        )
        comp_ok = comp_ok and rep.passed
    coverage = dec.coverage(seed=cfg.seed + 1)
    checks["comparability"] = comp_ok
    checks["coverage"] = coverage >= 0.999

    # sublevel ladder vs exact exponents
    ests = sublevel_ladder(
        p, ds, cfg.epsilon_ladder(), r=cfg.r, n=cfg.sublevel_samples, seed=cfg.seed
    )
    rows = [(e.epsilon, e.value, e.std_error, e.n_samples) for e in ests]
    _write(
        os.path.join(cfg.out_dir, "sublevel.csv"),
        _csv_text(["epsilon", "value", "std_error", "n"], rows),
    )
    sub_fit = fit_decay([(e.epsilon, e.value) for e in ests], direction="growth")
    checks["sublevel_fit"] = (
        abs(sub_fit.delta_fit - float(combined.delta)) <= 0.05
        and sub_fit.d_fit == combined.d
    )

    # oscillatory sweep + envelope scan
    triples = []
    for lam1 in cfg.lambda_ladder():
        for lam2, lam3 in cfg.lambda23_grid(lam1):
            triples.append(LambdaTriple(lam1, lam2, lam3))
    sweep = oscillatory_sweep(p, ds, triples, cfg.quad())
    _write(
        os.path.join(cfg.out_dir, "sweep.csv"),
        _csv_text(
            ["lambda1", "lambda2", "lambda3", "reT", "imT", "absT", "err_est", "n_evals"],
            [
                (lam.lam1, lam.lam2, lam.lam3, v.real, v.imag, abs(v), err, n)
                for (lam, v, err, n) in sweep
            ],
        ),
    )
    axis = [(lam.lam1, abs(v)) for (lam, v, _, _) in sweep if lam.lam2 == 0 and lam.lam3 == 0]
    dec_fit = fit_decay(axis)
    scan = uniformity_scan(
        p, ds, env, cfg.lambda_ladder(), cfg.lambda23_grid, cfg.quad()
    )
    checks["uniformity"] = scan.passed
    _write(
        os.path.join(cfg.out_dir, "fits.json"),
        _json_text(
            {
                "sublevel_fit": _fit_doc(sub_fit),
                "decay_fit": _fit_doc(dec_fit),
                "scan": scan.to_json_dict(),
            }
        ),
    )

    # plots
    env_pts = [(l, float(env(l))) for l in cfg.lambda_ladder()]
    _svg_loglog(
        os.path.join(cfg.out_dir, "decay.svg"),
        [("abs T on axis", axis), ("envelope", env_pts)],
        "Oscillatory decay vs envelope", "lambda1", "abs T",
    )
    _svg_loglog(
        os.path.join(cfg.out_dir, "sublevel.svg"),
        [("sublevel measure", [(e.epsilon, max(e.value, 1e-300)) for e in ests])],
        "Weighted sublevel measure", "epsilon", "measure",
    )

    report = _report_md(cfg, dec, doc, env, sub_fit, dec_fit, scan, coverage, checks)
    _write(os.path.join(cfg.out_dir, "report.md"), report)
    return 0 if all(checks.values()) else 2


def _report_md(cfg, dec, expdoc, env, sub_fit, dec_fit, scan, coverage, checks):
    lines = [
        "# oscdecay analysis report",
        "",
        f"Phase terms: {cfg.phase_terms!r}",
        f"Density: alpha = {cfg.alpha}, beta = {cfg.beta}, K = {cfg.K_model}, r = {cfg.r}",
        "",
        "## Exponents",
        f"- critical integrability pair: delta = {expdoc['delta']}, d = {expdoc['d']}",
        f"- envelope case: **{env.case}** (threshold 1/3 + 1/(3 o) = {env.threshold})",
        f"- envelope: (1+lambda)^(-{env.exponent}) * ln(e+lambda)^{env.log_power}",
        "",
        "## Decomposition certificate",
        f"- wedges: {len(dec.wedges)}, coverage radius a = {dec.coverage_radius!r}",
        f"- Monte Carlo coverage inside the certified disk: {coverage:.5f}",
        f"- comparability (eta = {dec.eta}) passed: {checks['comparability']}",
    ]
    if dec.coverage_radius < cfg.r:
        lines.append(
            f"- NOTE: certified radius {dec.coverage_radius!r} is smaller than the "
            f"amplitude support r = {cfg.r}; envelope constants carry no certificate "
            "outside the certified disk."
        )
    lines += [
        "",
        "## Oracles",
        f"- sublevel MC fit: delta_fit = {sub_fit.delta_fit:.4f}, d = {sub_fit.d_fit} "
        f"(target {expdoc['delta']}, {expdoc['d']}) -> {'ok' if checks['sublevel_fit'] else 'MISMATCH'}",
        f"- |T| axis fit: delta_fit = {dec_fit.delta_fit:.4f}, d = {dec_fit.d_fit}",
        f"- uniformity scan: C_hat = {scan.C_hat:.6g} at {scan.argmax}, "
        f"top-decade slope {scan.top_decade_slope:.3f} -> {'stable' if scan.passed else 'GROWING'}",
        "",
        f"All checks passed: {all(checks.values())}",
        "",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


_COMMANDS = {
    "analyze": cmd_analyze,
    "decompose": cmd_decompose,
    "exponent": cmd_exponent,
    "integrate": cmd_integrate,
    "sublevel": cmd_sublevel,
    "vdc": cmd_vdc,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oscdecay",
        description="Decay analysis for 2-D oscillatory integrals with "
        "polynomial phase and singular density",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the JSON job config")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--lambda-max", type=float, default=None,
                        help="cap the lambda ladder at this value")
    parser.add_argument("--eta", type=float, default=None,
                        help="comparability tolerance override")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as f:
            doc = json.load(f)
        cfg = JobConfig.from_json(doc)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out
        if args.eta is not None:
            cfg.eta = args.eta
        if args.lambda_max is not None:
            while cfg.lambda_j_max > cfg.lambda_j_min and 2**cfg.lambda_j_max > args.lambda_max:
                cfg.lambda_j_max -= 1
        os.makedirs(cfg.out_dir, exist_ok=True)
        _write(os.path.join(cfg.out_dir, "config.json"), _json_text(cfg.to_json_dict()))
        return _COMMANDS[args.command](cfg)
    except OscdecayError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
