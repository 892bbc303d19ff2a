"""Command-line front end: ``bubbleforge {constants,delta,scan,verify}``.

Reports are JSON (schema 1) or CSV. Exit codes: 0 success, 1 a verification
check failed, 2 usage or domain error, 3 quadrature did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .energy import (
    ConvergenceError,
    error_norm_report,
    f_beta_expansion_check,
    lemma_a1_check,
    loglog_slope,
    reduction_integrals,
    richardson,
    zkt_norm_check,
)
from .fields import (
    CouplingRegime,
    error_field,
    field_U,
    field_V,
    field_Zkt,
    kernel_residual,
    rot_tag,
    yamabe_residual,
)
from .multicomponent import (
    MSystemConfig,
    build_components,
    msystem_residual,
    reduction_identity_check,
)
from .quadrature import QuadratureSpec
from .scaling import NoRootError, beta_for_delta, constants, g, solve_delta_beta
from .symmetry import PolygonConfig, SymmetrySpec, sample_points, symmetry_violation

SCHEMA = 1
DEFAULT_BETA = -math.exp(4) / 8.0
PAPER_BETA_LIMIT = -math.sqrt(2.0)
SUITES = ("identities", "symmetry", "lemmaA1", "error-norms", "zkt", "reduction", "msystem")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


def num(value, tolerance=None, provenance="derived-oracle") -> dict:
    return {"value": float(value), "tolerance": tolerance, "provenance": provenance}


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    provenance: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {"name": self.name, "pass": bool(self.passed),
             "measured": num(self.measured, self.tolerance, self.provenance)}
        if self.detail:
            d["detail"] = self.detail
        return d


def _emit(args, payload: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _spec(args) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=args.rel_tol, abs_tol=args.abs_tol)


def _delta(args) -> tuple:
    """(beta, delta, warnings) from --beta or an explicit --delta override."""
    warnings = []
    if getattr(args, "delta", None) is not None:
        d = args.delta
        if not 0 < d < math.exp(-2):
            raise UsageError(f"--delta must lie in (0, e^-2), got {d}")
        beta = beta_for_delta(d)
    else:
        beta = args.beta
        try:
            d = solve_delta_beta(beta).delta
        except NoRootError as exc:
            raise UsageError(str(exc)) from exc
    if beta > PAPER_BETA_LIMIT:
        warnings.append(f"beta={beta:.6g} lies above -sqrt(2), outside the regime of the existence results")
    return beta, d, warnings


# --- commands ---------------------------------------------------------------------------

def cmd_constants(args) -> int:
    try:
        c = constants(args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = {
        "schema": SCHEMA, "command": "constants", "config": {"k": args.k},
        "result": {
            "c1": num(c.c1, 1e-12, "paper"), "c2": num(c.c2, 1e-12, "paper"),
            "c1_tilde": num(c.c1_tilde, 1e-12, "paper"), "c2_tilde": num(c.c2_tilde, 1e-12, "paper"),
            "t_star": num(c.t_star, 1e-12, "paper"), "t_star_tilde": num(c.t_star_tilde, 1e-12, "paper"),
            "g_at_t_star": num(g(args.k, c.t_star), 1e-12, "derived-oracle"),
        },
    }
    _emit(args, _dump(out))
    return EXIT_OK


def cmd_delta(args) -> int:
    try:
        s = solve_delta_beta(args.beta)
    except NoRootError as exc:
        raise UsageError(str(exc)) from exc
    warnings = []
    if args.beta > PAPER_BETA_LIMIT:
        warnings.append("beta lies above -sqrt(2), outside the regime of the existence results")
        print(f"warning: {warnings[0]}", file=sys.stderr)
    out = {
        "schema": SCHEMA, "command": "delta", "config": {"beta": args.beta},
        "result": {
            "delta": num(s.delta, 1e-12, "derived-oracle"),
            "log_delta": num(math.log(s.delta), 1e-12, "derived-oracle"),
            "residual": num(s.residual, 1e-12, "derived-oracle"),
        },
        "warnings": warnings,
    }
    _emit(args, _dump(out))
    return EXIT_OK


def cmd_scan(args) -> int:
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if not 0 < args.t_min < args.t_max:
        raise UsageError("need 0 < t-min < t-max")
    try:
        constants(args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    beta, d, warnings = _delta(args)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    spec = _spec(args)
    rows = []
    status = EXIT_OK
    for t in np.linspace(args.t_min, args.t_max, args.steps):
        t = float(t)
        try:
            r = f_beta_expansion_check(args.k, t, beta, spec)
            rows.append((t, r.F_numeric, r.F_predicted, r.theta, True))
        except ConvergenceError:
            pred = (args.k + 1) / 3.0 * 3.0**1.5 * math.pi**2 / 4.0 + d * g(args.k, t)
            rows.append((t, float("nan"), pred, float("nan"), False))
            status = EXIT_NONCONV
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "F_numeric", "F_predicted", "theta", "converged"])
        for t, fn, fp, th, ok in rows:
            w.writerow([repr(t), repr(fn), repr(fp), repr(th), int(ok)])
        _emit(args, buf.getvalue())
    else:
        out = {
            "schema": SCHEMA, "command": "scan",
            "config": {"k": args.k, "beta": beta, "delta": d, "t_min": args.t_min, "t_max": args.t_max,
                       "steps": args.steps, "rel_tol": args.rel_tol},
            "rows": [{"t": t, "F_numeric": num(fn, args.rel_tol, "derived-oracle"),
                      "F_predicted": num(fp, None, "paper"), "theta": num(th, None, "fitted"),
                      "converged": ok} for t, fn, fp, th, ok in rows],
            "argmin_t_predicted": num(min(rows, key=lambda r: r[2])[0], None, "derived-oracle"),
            "warnings": warnings,
        }
        _emit(args, _dump(out))
    return status


# --- verification suites --------------------------------------------------------------------

def _suite_identities(args, spec) -> list:
    rng_pts = sample_points(400, r_min=1e-2, r_max=1e2, seed=args.seed)
    out = []
    base = max(float(np.max(np.abs(yamabe_residual(rng_pts)))),
               max(float(np.max(np.abs(kernel_residual(l, rng_pts)))) for l in range(4)))
    out.append(Check("pde_residuals_base", base, 1e-9, "paper", base < 1e-9))
    xi = (0.6, 0.8, 0.0)
    pts = rng_pts + np.asarray(xi)
    resc = max(float(np.max(np.abs(yamabe_residual(pts, 1e-4, xi)))),
               max(float(np.max(np.abs(kernel_residual(l, pts, 1e-4, xi)))) for l in range(4)))
    out.append(Check("pde_residuals_rescaled", resc, 1e-9, "paper", resc < 1e-9))
    return out


def _suite_symmetry(args, spec) -> list:
    cfg = PolygonConfig(args.k, args.t, _delta(args)[1])
    sym = SymmetrySpec(args.k)
    x = sample_points(500, seed=args.seed)
    out = []
    regime = CouplingRegime(_delta(args)[0])
    for f in (field_U(), field_V(cfg), field_Zkt(cfg), error_field("E1", cfg, regime), error_field("E2", cfg, regime)):
        gens = [g_ for g_ in ("flip_x2", "flip_x3", "kelvin") if g_ in f.symmetry]
        if rot_tag(args.k) in f.symmetry or "radial" in f.symmetry:
            gens.append("rotation")
        v = symmetry_violation(f, sym, x, generators=gens)
        scale = max(1.0, float(np.max(np.abs(f(x)))))
        out.append(Check(f"symmetry_{f.name}", v / scale, 1e-11, "paper", v / scale < 1e-11,
                         {"generators": gens}))
    return out


def _suite_lemma(args, spec) -> list:
    out = []
    for nu, gamma in ((18 / 5, 0.0), (0.0, 6.0), (3.0, 0.0)):
        r = lemma_a1_check(nu, gamma, args.k, [1e-2, 1e-3], 1.0, spec)
        out.append(Check(f"lemmaA1_growth_nu{nu:g}_gamma{gamma:g}", r.growth(), 10.0, "fitted",
                         r.growth() <= 10.0, {"fitted_C": num(r.fitted_C, None, "fitted")}))
    return out


def _suite_error_norms(args, spec) -> list:
    grid = [math.exp(-8), math.exp(-10)]
    e1, e2 = [], []
    for d in grid:
        b = beta_for_delta(d)
        r = error_norm_report(PolygonConfig(args.k, args.t, d), CouplingRegime(b), spec)
        e1.append(r.E1 / abs(b))
        e2.append(r.E2 / (1.0 + abs(b)))
    s1, s2 = loglog_slope(grid, e1), loglog_slope(grid, e2)
    return [Check("error_norm_E1_slope", s1, 0.1, "paper", abs(s1 - 1) <= 0.1),
            Check("error_norm_E2_slope", s2, 0.1, "paper", abs(s2 - 1) <= 0.1)]


def _suite_zkt(args, spec) -> list:
    grid = [1e-2, 1e-3]
    reps = [zkt_norm_check(PolygonConfig(args.k, 1.0, d), spec) for d in grid]
    rel = abs(reps[-1].value / reps[-1].limit - 1)
    slope = loglog_slope(grid, [r.off_diagonal for r in reps])
    return [Check("zkt_norm_relative_gap", rel, 1e-3, "paper", rel < 1e-3),
            Check("zkt_off_diagonal_slope", slope, 0.15, "derived-oracle", abs(slope - 1) <= 0.15)]


def _suite_reduction(args, spec) -> list:
    grid = [1e-3, 1e-4]
    c1t = constants(args.k).c1_tilde
    ratios = []
    i3_zero = 0.0
    for d in grid:
        r = reduction_integrals(PolygonConfig(args.k, 1.0, d, q=args.q),
                                CouplingRegime(beta_for_delta(d), 0.0, args.q), spec)
        ratios.append(r.I1 / d)
        i3_zero = max(i3_zero, abs(r.I3))
    lim = richardson(grid, ratios)
    rel = abs(lim / c1t - 1)
    return [Check("I1_extrapolated_vs_c1_tilde", rel, 1e-2, "paper", rel <= 1e-2,
                  {"extrapolated": num(lim, None, "fitted"), "c1_tilde": num(c1t, 1e-12, "paper")}),
            Check("I3_vanishes_at_alpha_zero", i3_zero, 0.0, "derived-oracle", i3_zero == 0.0)]


def _suite_msystem(args, spec) -> list:
    beta, d, _ = _delta(args)
    ms = MSystemConfig.build(args.q, args.k, args.t, d, beta, args.alpha)
    v = field_V(ms.cfg)
    cs = build_components(field_U(), v, ms)
    x = sample_points(200, seed=args.seed)
    ident = reduction_identity_check(v, ms, x)
    two = msystem_residual(cs, ms, x[:100]).max_discrepancy
    return [Check("reduction_identity", ident, 1e-11, "derived-oracle", ident < 1e-11),
            Check("msystem_two_path", two, 1e-10, "derived-oracle", two < 1e-10)]


SUITE_RUNNERS: dict[str, Callable] = {
    "identities": _suite_identities, "symmetry": _suite_symmetry, "lemmaA1": _suite_lemma,
    "error-norms": _suite_error_norms, "zkt": _suite_zkt, "reduction": _suite_reduction,
    "msystem": _suite_msystem,
}


def cmd_verify(args) -> int:
    beta, d, warnings = _delta(args)
    if args.k < 2 or args.q < 1:
        raise UsageError("need k >= 2 and q >= 1")
    spec = _spec(args)
    names = SUITES if args.suite == "all" else (args.suite,)
    suites = {}
    status = EXIT_OK
    for name in names:
        try:
            checks = SUITE_RUNNERS[name](args, spec)
            suites[name] = {"checks": [c.as_dict() for c in checks],
                            "pass": all(c.passed for c in checks)}
            if not suites[name]["pass"] and status == EXIT_OK:
                status = EXIT_FAIL
        except ConvergenceError as exc:
            suites[name] = {"checks": [], "pass": False, "error": str(exc)}
            status = EXIT_NONCONV
    out = {
        "schema": SCHEMA, "command": "verify", "version": __version__,
        "config": {"suite": args.suite, "k": args.k, "q": args.q, "t": args.t, "beta": beta, "delta": d,
                   "alpha": args.alpha, "seed": args.seed, "rel_tol": args.rel_tol, "abs_tol": args.abs_tol},
        "suites": suites,
        "pass": status == EXIT_OK,
        "warnings": warnings,
    }
    _emit(args, _dump(out))
    return status


# --- parser -------------------------------------------------------------------------------

def _add_common(p, beta=True):
    if beta:
        p.add_argument("--beta", type=float, default=DEFAULT_BETA,
                       help="coupling beta < -e/2 (default -e^4/8, for which delta = e^-8)")
        p.add_argument("--delta", type=float, default=None, help="override delta instead of solving from beta")
    p.add_argument("--rel-tol", type=float, default=1e-7)
    p.add_argument("--abs-tol", type=float, default=1e-14)
    p.add_argument("--out", default=None, help="write the report to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bubbleforge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="reduced-energy constants for polygon order k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("delta", help="solve sqrt(delta)|log delta| = -1/beta")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("scan", help="energy landscape over a grid of t")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--t-min", type=float, default=0.1)
    p.add_argument("--t-max", type=float, default=0.4)
    p.add_argument("--steps", type=int, default=31)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def _attach_negative_values(argv: list) -> list:
    # argparse reads "-1e6" as an option flag; glue such values to their option
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and tok.startswith("-"):
            try:
                float(tok)
            except ValueError:
                pass
            else:
                out[-1] = f"{out[-1]}={tok}"
                continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
