"""Energies, error norms and interaction integrals of the polygonal ansatz.

Everything here reduces to quadratures of bubble-algebra densities. Where a
quantity is a large closed-form constant plus a small correction, only the
correction is integrated, so that differences of size O(delta) are not
computed by subtracting two O(1) numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fields as F
from .fields import A, CouplingRegime, ScalarField
from .quadrature import (
    QuadratureResult,
    QuadratureSpec,
    Wedge,
    WholeSpace,
    integrate,
    integrate_whole_by_wedges,
)
from .scaling import constants, g, solve_delta_beta
from .symmetry import PolygonConfig, rotate

SEXTIC_NORM = 3.0**1.5 * math.pi**2 / 4.0
KERNEL_NORM = 15.0 * math.sqrt(3.0) * math.pi**2 / 64.0
THETA_ENVELOPE = 5.0

LEMMA_A1_PAIRS = (
    (18 / 5, 0.0), (0.0, 18 / 5), (12 / 5, 0.0), (0.0, 12 / 5), (24 / 5, 6 / 5), (0.0, 6.0),
    (3.0, 0.0), (3 / 2, 0.0), (0.0, 3 / 2), (9 / 2, 0.0), (0.0, 9 / 2),
)


class ConvergenceError(RuntimeError):
    pass


def _value(res: QuadratureResult, what: str) -> float:
    if not res.converged:
        raise ConvergenceError(f"{what}: quadrature did not converge (err {res.err_est:.3g})")
    return res.value


def _small(spec: QuadratureSpec, scale: float) -> QuadratureSpec:
    """Same spec with the absolute floor shrunk to the expected magnitude."""
    return spec.with_(abs_tol=min(spec.abs_tol, spec.abs_tol * scale))


# --- the energy functional ---------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    gradient_part: float
    sextic_part: float
    coupling_part: float
    total: float
    beta: float

    @classmethod
    def assemble(cls, grad: float, sextic: float, coupling: float, beta: float) -> "EnergyReport":
        return cls(grad, sextic, coupling, grad / 2.0 - sextic / 6.0 - beta / 3.0 * coupling, beta)


def _is_zero(f) -> bool:
    return f is None or f is F.ZERO


def _dirichlet(u: ScalarField, spec: QuadratureSpec) -> float:
    if u.laplacian is not None:
        integrand = ScalarField(lambda x: -u.laplacian(x) * u.value(x), hot_spots=u.hot_spots, name="-u Lap u")
    elif u.grad is not None:
        integrand = ScalarField(lambda x: np.sum(u.grad(x) ** 2, axis=-1), hot_spots=u.hot_spots, name="|grad u|^2")
    else:
        raise ValueError(f"{u.name} needs an analytic gradient or Laplacian")
    return _value(integrate(integrand, WholeSpace(), spec), "gradient part")


def j_beta(u, v, regime: CouplingRegime, spec: QuadratureSpec = QuadratureSpec()) -> EnergyReport:
    """Energy 1/2 int(|grad u|^2 + |grad v|^2) - 1/6 int(u+^6 + v+^6) - beta/3 int u+^3 v+^3.

    Gradient terms use int |grad u|^2 = int (-Lap u) u when a Laplacian is
    available, which holds for the decaying fields of the bubble algebra.
    """
    grad = sextic = coupling = 0.0
    for w in (u, v):
        if _is_zero(w):
            continue
        grad += _dirichlet(w, spec)
        sextic += _value(integrate(w.positive_part() ** 6, WholeSpace(), spec), "sextic part")
    if not (_is_zero(u) or _is_zero(v)):
        cpl = (u.positive_part() ** 3) * (v.positive_part() ** 3)
        coupling = _value(integrate(cpl, WholeSpace(), spec), "coupling part")
    return EnergyReport.assemble(grad, sextic, coupling, regime.beta)


@dataclass(frozen=True)
class AnsatzPieces:
    """Small corrections of the energy of (U, V) beyond (k+1)/3 |U|_6^6."""

    cross_gradient: float
    cross_sextic: float
    coupling: float
    n_evals: int


def ansatz_pieces(cfg: PolygonConfig, spec: QuadratureSpec = QuadratureSpec()) -> AnsatzPieces:
    """sum_{i!=j} int U_i^5 U_j,  int (V^6 - sum U_i^6)  and  int U^3 V^3."""
    small = _small(spec, cfg.scale)
    spots = F._merge_spots(F.field_U().hot_spots, F.polygon_hot_spots(cfg))
    tags = F._polygon_tags(cfg, kelvin=False)

    def cross_grad(x):
        terms = F.bubble_terms(cfg, x)
        v = np.sum(terms, axis=-1)
        return np.sum(terms**5 * (v[..., None] - terms), axis=-1)

    def cross_sextic(x):
        return F.power_excess(F.bubble_terms(cfg, x), 6)

    def coupling(x):
        return (F.eval_U(x) * F.eval_V(cfg, x)) ** 3

    out = []
    n = 0
    for fn, name in ((cross_grad, "cross gradient"), (cross_sextic, "cross sextic"), (coupling, "coupling")):
        res = _wedges(ScalarField(fn, symmetry=tags, hot_spots=spots, name=name), cfg, small)
        out.append(_value(res, name))
        n += res.n_evals
    return AnsatzPieces(out[0], out[1], out[2], n)


def _wedges(f: ScalarField, cfg: PolygonConfig, spec: QuadratureSpec) -> QuadratureResult:
    if cfg.k == 1:
        return integrate(f, WholeSpace(), spec)
    return integrate_whole_by_wedges(f, cfg, spec)


def ansatz_energy(cfg: PolygonConfig, regime: CouplingRegime,
                  spec: QuadratureSpec = QuadratureSpec()) -> EnergyReport:
    """Energy of the ansatz pair (U, V) using -Lap U_i = U_i^5 and the closed form of |U|_6^6."""
    p = ansatz_pieces(cfg, spec)
    base = (cfg.k + 1) * SEXTIC_NORM
    return EnergyReport.assemble(base + p.cross_gradient, base + p.cross_sextic, p.coupling, regime.beta)


@dataclass(frozen=True)
class ExpansionReport:
    k: int
    t: float
    beta: float
    delta: float
    F_numeric: float
    F_predicted: float
    theta: float
    theta_bound: float
    fitted_C: float

    @property
    def scaled_theta(self) -> float:
        """|theta| |log delta| / delta."""
        return abs(self.theta) * abs(math.log(self.delta)) / self.delta


def f_beta_expansion_check(k: int, t: float, beta: float,
                           spec: QuadratureSpec = QuadratureSpec()) -> ExpansionReport:
    d = solve_delta_beta(beta).delta
    cfg = PolygonConfig(k, t, d)
    p = ansatz_pieces(cfg, spec)
    base = (k + 1) / 3.0 * SEXTIC_NORM
    correction = p.cross_gradient / 2.0 - p.cross_sextic / 6.0 - beta / 3.0 * p.coupling
    lead = d * g(k, t)
    theta = correction - lead
    envelope = d / abs(math.log(d))
    return ExpansionReport(k, t, beta, d, base + correction, base + lead, theta,
                           THETA_ENVELOPE * envelope, abs(theta) / envelope)


# --- error norms ------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorNormReport:
    delta: float
    beta: float
    E1: float
    E2: float
    E1tilde: float
    E2tilde: float
    converged: bool


def error_norm_report(cfg: PolygonConfig, regime: CouplingRegime,
                      spec: QuadratureSpec = QuadratureSpec()) -> ErrorNormReport:
    """L^{6/5} norms of the four error densities, by wedge reduction."""
    p = 6.0 / 5.0
    small = _small(spec, cfg.delta ** p)
    norms = {}
    ok = True
    for which in F.ERROR_KINDS:
        if which.endswith("tilde") and regime.q == 1:
            norms[which] = norms[which[:2]]
            continue
        f = F.error_field(which, cfg, regime)
        res = _wedges(f.abs() ** p, cfg.with_(q=regime.q, r=1), small)
        ok &= res.converged
        norms[which] = res.value ** (1.0 / p)
    return ErrorNormReport(cfg.delta, regime.beta, norms["E1"], norms["E2"],
                           norms["E1tilde"], norms["E2tilde"], ok)


# --- integral lemma ---------------------------------------------------------------------

@dataclass(frozen=True)
class LemmaA1Row:
    delta: float
    integral: float
    bound: float
    ratio: float


@dataclass(frozen=True)
class LemmaA1Report:
    nu: float
    gamma: float
    k: int
    t: float
    rows: tuple
    fitted_C: float

    @property
    def ratios(self) -> list:
        return [r.ratio for r in self.rows]

    def growth(self) -> float:
        """Largest ratio relative to the ratio at the coarsest delta."""
        coarsest = max(self.rows, key=lambda r: r.delta)
        return max(r.ratio for r in self.rows) / coarsest.ratio


def lemma_a1_f1(k: int, nu: float, gamma: float) -> float:
    lk = math.log(k)
    if nu < 2:
        return k ** (gamma - 1)
    if nu == 2:
        return k ** (gamma - 1) * lk ** (gamma + 1)
    return k ** (nu + gamma - 3) * lk**gamma


def lemma_a1_f2(delta: float, k: int, nu: float, gamma: float) -> float:
    if nu < 3:
        return delta ** ((nu + gamma) / 2) * k ** (nu - 3)
    if nu == 3:
        return delta ** ((3 + gamma) / 2) * abs(math.log(delta))
    return delta ** (3 + (gamma - nu) / 2)


def lemma_a1_bound(delta: float, k: int, nu: float, gamma: float) -> float:
    """Right-hand side of the integral lemma with constant 1."""
    return (delta ** ((nu + gamma) / 2) * lemma_a1_f1(k, nu, gamma)
            + (k * math.log(k)) ** gamma * lemma_a1_f2(delta, k, nu, gamma))


def lemma_a1_integrand(nu: float, gamma: float, cfg: PolygonConfig) -> ScalarField:
    """U^{6-nu-gamma} U_{t,1}^nu (sum_{j>=2} U_{t,j})^gamma."""
    rest = 6.0 - nu - gamma

    def fn(x):
        terms = F.bubble_terms(cfg, x)
        out = np.ones(terms.shape[:-1])
        if rest:
            out = out * F.eval_U(x) ** rest
        if nu:
            out = out * terms[..., 0] ** nu
        if gamma:
            out = out * np.sum(terms[..., 1:], axis=-1) ** gamma
        return out

    spots = F._merge_spots(F.field_U().hot_spots, F.polygon_hot_spots(cfg))
    return ScalarField(fn, hot_spots=spots, name=f"A1[{nu:g},{gamma:g}]")


def lemma_a1_check(nu: float, gamma: float, k: int, delta_grid, t: float = 1.0,
                   spec: QuadratureSpec = QuadratureSpec()) -> LemmaA1Report:
    if nu < 0 or gamma < 0:
        raise ValueError("nu and gamma must be nonnegative")
    if nu + gamma > 6 + 1e-12:
        raise ValueError(f"need nu + gamma <= 6, got {nu + gamma:g}")
    if k < 2:
        raise ValueError("the integral lemma needs k >= 2")
    rows = []
    for d in sorted(delta_grid, reverse=True):
        cfg = PolygonConfig(k, t, d)
        b = lemma_a1_bound(d, k, nu, gamma)
        res = integrate(lemma_a1_integrand(nu, gamma, cfg), Wedge.of(cfg), _small(spec, b))
        val = _value(res, f"lemma integral (nu={nu:g}, gamma={gamma:g}, delta={d:g})")
        rows.append(LemmaA1Row(d, val, b, val / b))
    return LemmaA1Report(nu, gamma, k, t, tuple(rows), max(r.ratio for r in rows))


# --- kernel norm ---------------------------------------------------------------

@dataclass(frozen=True)
class ZktNormReport:
    value: float
    limit: float
    diagonal: float
    off_diagonal: float


def zkt_norm_check(cfg: PolygonConfig, spec: QuadratureSpec = QuadratureSpec()) -> ZktNormReport:
    """|grad Z_{k,t}|^2 integrated via int grad Z_i . grad Z_j = 5 int U_i^4 Z_i Z_j."""
    s = cfg.scale
    spots = F.polygon_hot_spots(cfg)
    tags = F._polygon_tags(cfg, kelvin=False)

    def per_vertex(x):
        _, w = F._polygon_terms(cfg, x)
        u = A * math.sqrt(s) / np.sqrt(w)
        z = 0.5 * A * math.sqrt(s) * (w**-0.5 - 2.0 * s * s * w**-1.5)
        return u, z

    def diag(x):
        u, z = per_vertex(x)
        return 5.0 * np.sum(u**4 * z * z, axis=-1)

    def off(x):
        u, z = per_vertex(x)
        ztot = np.sum(z, axis=-1)
        return 5.0 * np.sum(u**4 * z * (ztot[..., None] - z), axis=-1)

    d = _value(_wedges(ScalarField(diag, symmetry=tags, hot_spots=spots), cfg, spec), "diagonal")
    if cfg.k == 1:
        o = 0.0
    else:
        o = _value(_wedges(ScalarField(off, symmetry=tags, hot_spots=spots), cfg, _small(spec, s)),
                   "off-diagonal")
    return ZktNormReport(d + o, KERNEL_NORM * cfg.k, d, o)


# --- reduction integrals ------------------------------------------------------------

@dataclass(frozen=True)
class ReductionIntegrals:
    I1: float
    I2: float
    I3: float
    I1_leading: float
    I2_leading: float
    I3_scale: float

    @property
    def I1_ratio(self) -> float:
        return self.I1 / self.I1_leading

    @property
    def I2_ratio(self) -> float:
        return self.I2 / self.I2_leading


def reduction_integrals(cfg: PolygonConfig, regime: CouplingRegime,
                        spec: QuadratureSpec = QuadratureSpec()) -> ReductionIntegrals:
    """Projections of the three error pieces onto Z_{k,t}.

    I1 = int (V^5 - sum U_j^5) Z_{k,t}, I2 = beta int U^3 V^2 Z_{k,t} and
    I3 = alpha int V^2 (sum_{r>=2} V_r)^3 Z_{k,t}. The leading terms are
    c1~ t delta and c2~ beta (t delta)^{3/2} |log delta|; I3 is paired with
    its expected size delta^3 |log delta|.
    """
    if cfg.k < 2:
        raise ValueError("reduction integrals need k >= 2")
    q = regime.q
    base = cfg.with_(q=q, r=1)
    s, d = base.scale, base.delta
    ld = abs(math.log(d))
    c = constants(base.k)
    spots = F._merge_spots(F.field_U().hot_spots, F.polygon_hot_spots(base))
    tags = F._polygon_tags(base, kelvin=False)

    def i1(x):
        return F.power_excess(F.bubble_terms(base, x), 5) * F.eval_Zkt(base, x)

    def i2(x):
        return F.eval_U(x) ** 3 * F.eval_V(base, x) ** 2 * F.eval_Zkt(base, x)

    v1 = _value(_wedges(ScalarField(i1, symmetry=tags, hot_spots=spots), base, _small(spec, s)), "I1")
    v2 = regime.beta * _value(
        _wedges(ScalarField(i2, symmetry=tags, hot_spots=spots), base, _small(spec, s**1.5)), "I2")
    i3_scale = d**3 * ld
    if regime.alpha == 0.0 or q < 2:
        v3 = 0.0
    else:
        thetas = [(r - 1) / q * 2.0 * math.pi / base.k for r in range(2, q + 1)]

        def i3(x):
            fam = np.zeros(x.shape[:-1])
            for th in thetas:
                fam = fam + F.eval_V(base, rotate(th, x))
            return F.eval_V(base, x) ** 2 * fam**3 * F.eval_Zkt(base, x)

        fam_spots = F._merge_spots(spots, F._nonlocal_spots(base))
        v3 = regime.alpha * _value(
            _wedges(ScalarField(i3, symmetry=tags, hot_spots=fam_spots), base, _small(spec, i3_scale)), "I3")
    return ReductionIntegrals(v1, v2, v3, c.c1_tilde * s, c.c2_tilde * regime.beta * s**1.5 * ld, i3_scale)


def richardson(xs, ys, order: int = 1) -> float:
    """Value at x = 0 of the least-squares polynomial of the given order through (xs, ys)."""
    coef = np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), order)
    return float(coef[-1])


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.abs(np.asarray(ys, dtype=float))), 1)[0])
