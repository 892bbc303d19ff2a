"""Reduction of the (q+1)-component system to a nonlocal pair (u, v).

Components are u_i(x) = v(R_{i,k} x) for i = 1..q and u_{q+1} = u, where
R_{i,k} rotates by ((i-1)/q)(2 pi/k). Couplings are 1 on the diagonal,
alpha inside the v-family and beta between the family and u.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import CouplingRegime, ScalarField
from .symmetry import (
    TWO_PI,
    PolygonConfig,
    min_pairwise_distance,
    rotate,
    sample_points,
)

DEFAULT_PROBE = (0.9, 0.21, 0.13)
PRECONDITION_SAMPLES = 64
PRECONDITION_TOL = 1e-9


class SymmetryPreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class MSystemConfig:
    q: int
    k: int
    regime: CouplingRegime
    cfg: PolygonConfig

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.regime.q != self.q or self.cfg.q != self.q:
            raise ValueError("q must agree across MSystemConfig, its regime and its polygon config")
        if self.cfg.k != self.k:
            raise ValueError("k must agree between MSystemConfig and its polygon config")

    @classmethod
    def build(cls, q: int, k: int, t: float, delta: float, beta: float, alpha: float = 0.0) -> "MSystemConfig":
        return cls(q, k, CouplingRegime(beta, alpha, q), PolygonConfig(k, t, delta, q=q))

    @property
    def m(self) -> int:
        return self.q + 1

    def angle(self, i: int) -> float:
        """Rotation angle of the i-th family member (1-based)."""
        return (i - 1) / self.q * TWO_PI / self.k


@dataclass(frozen=True)
class ComponentSet:
    components: tuple
    u: ScalarField
    v: ScalarField
    distinct_at_probe: bool

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> ScalarField:
        return self.components[i]


def _relative_violation(f: ScalarField, g, x) -> float:
    a = f(x)
    b = f(g(x))
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a))))


def build_components(u: ScalarField, v: ScalarField, ms: MSystemConfig,
                     probe=DEFAULT_PROBE) -> ComponentSet:
    x = sample_points(PRECONDITION_SAMPLES, seed=0)
    viol = _relative_violation(v, lambda y: rotate(TWO_PI / ms.k, y), x)
    if viol > PRECONDITION_TOL:
        raise SymmetryPreconditionError(f"v is not 2pi/{ms.k}-periodic (violation {viol:.3g})")
    for r in range(2, ms.q + 1):
        viol = _relative_violation(u, lambda y, r=r: rotate(ms.angle(r), y), x)
        if viol > PRECONDITION_TOL:
            raise SymmetryPreconditionError(f"u is not invariant under R_{{{r},k}} (violation {viol:.3g})")
    family = tuple(v.rotated(ms.angle(i)).with_name(f"u{i}") for i in range(1, ms.q + 1))
    p = np.asarray(probe, dtype=float)
    vals = [float(c(p)) for c in family]
    distinct = all(abs(vals[i] - vals[j]) > 1e-12 * max(1.0, abs(vals[i]))
                   for i in range(len(vals)) for j in range(i + 1, len(vals)))
    return ComponentSet(family + (u.with_name(f"u{ms.q + 1}"),), u, v, distinct)


def min_center_distance(ms: MSystemConfig) -> float:
    """Smallest distance between bubble centers across all rotated copies of the polygon."""
    pts = []
    base = ms.cfg.with_(r=1)
    from .symmetry import polygon_centers
    for i in range(1, ms.q + 1):
        pts.extend(rotate(-ms.angle(i), polygon_centers(base)))
    return min_pairwise_distance(np.array(pts))


def expected_min_center_distance(ms: MSystemConfig) -> float:
    return 2.0 * math.sin(math.pi / (ms.q * ms.k)) * ms.cfg.radius


def reduction_identity_check(v: ScalarField, ms: MSystemConfig, samples) -> float:
    """max over samples and i of |sum_{r>=2} v_r^3(R_{i,k} x) - sum_{j!=i} u_j^3(x)|."""
    x = np.asarray(samples, dtype=float).reshape(-1, 3)
    if ms.q == 1:
        return 0.0
    cubes = [v(rotate(ms.angle(j), x)) ** 3 for j in range(1, ms.q + 1)]
    worst = 0.0
    for i in range(1, ms.q + 1):
        xi = rotate(ms.angle(i), x)
        lhs = np.zeros(x.shape[0])
        for r in range(2, ms.q + 1):
            lhs = lhs + v(rotate(ms.angle(r), xi)) ** 3
        rhs = np.zeros(x.shape[0])
        for j in range(1, ms.q + 1):
            if j != i:
                rhs = rhs + cubes[j - 1]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


@dataclass(frozen=True)
class MSystemResidual:
    direct: np.ndarray
    nonlocal_: np.ndarray

    @property
    def max_discrepancy(self) -> float:
        return float(np.max(np.abs(self.direct - self.nonlocal_)))


def _neg_lap(f: ScalarField, x) -> np.ndarray:
    return -f.laplacian_at(x)


def direct_residuals(cs: ComponentSet, ms: MSystemConfig, x) -> np.ndarray:
    """Residuals of the m-component system, one row per component."""
    x = np.asarray(x, dtype=float)
    beta, alpha = ms.regime.beta, ms.regime.alpha
    q = ms.q
    vals = [c(x) for c in cs.components]
    u = vals[q]
    out = []
    for i in range(q):
        ui = vals[i]
        others = sum((vals[j] ** 3 for j in range(q) if j != i), np.zeros_like(ui))
        out.append(_neg_lap(cs.components[i], x) - ui**5 - beta * ui**2 * u**3 - alpha * ui**2 * others)
    fam = sum((vals[j] ** 3 for j in range(q)), np.zeros_like(u))
    out.append(_neg_lap(cs.components[q], x) - u**5 - beta * u**2 * fam)
    return np.array(out)


def nonlocal_residuals(u: ScalarField, v: ScalarField, ms: MSystemConfig, y) -> tuple:
    """Residuals (R_u, R_v) of the nonlocal two-component system at y."""
    y = np.asarray(y, dtype=float)
    beta, alpha = ms.regime.beta, ms.regime.alpha
    uu, vv = u(y), v(y)
    fam = np.zeros_like(vv)
    for r in range(2, ms.q + 1):
        fam = fam + v(rotate(ms.angle(r), y)) ** 3
    ru = _neg_lap(u, y) - uu**5 - beta * uu**2 * vv**3 - beta * uu**2 * fam
    rv = _neg_lap(v, y) - vv**5 - beta * uu**3 * vv**2 - alpha * vv**2 * fam
    return ru, rv


def msystem_residual(cs: ComponentSet, ms: MSystemConfig, x) -> MSystemResidual:
    """Both evaluations of the m residuals: direct, and via the nonlocal pair at R_{i,k} x."""
    x = np.asarray(x, dtype=float)
    direct = direct_residuals(cs, ms, x)
    rows = []
    for i in range(1, ms.q + 1):
        _, rv = nonlocal_residuals(cs.u, cs.v, ms, rotate(ms.angle(i), x))
        rows.append(rv)
    ru, _ = nonlocal_residuals(cs.u, cs.v, ms, x)
    rows.append(ru)
    return MSystemResidual(direct, np.array(rows))
