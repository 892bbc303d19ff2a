"""Scalar fields of the bubble algebra.

A ``ScalarField`` is a vectorized evaluation rule on arrays of shape
``(..., 3)`` plus optional analytic gradient and Laplacian, a set of symmetry
tags and a tuple of hot spots (centers and widths of concentrated bubbles)
that the quadrature engine refines around.

Closed forms used below, with ``a = 3**0.25``, ``y = x - xi`` and
``w = delta**2 + |y|**2``::

    U_{delta,xi}      = a sqrt(delta) w^{-1/2}
    Z0_{delta,xi}     = (a sqrt(delta)/2) (w^{-1/2} - 2 delta^2 w^{-3/2})
    Z_l_{delta,xi}    = a delta^{3/2} y_l w^{-3/2}

so that -Lap U = U^5 and -Lap Z = 5 U^4 Z hold exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .symmetry import TWO_PI, PolygonConfig, polygon_centers, rotate, rotation_matrix

A = 3.0**0.25

FLIP2 = "flip_x2"
FLIP3 = "flip_x3"
KELVIN = "kelvin"
RADIAL = "radial"


def rot_tag(k: int) -> str:
    return f"rot{k}"


def symmetric_tags(k: int, kelvin: bool = True) -> frozenset:
    tags = {FLIP2, FLIP3, rot_tag(k)}
    if kelvin:
        tags.add(KELVIN)
    return frozenset(tags)


RADIAL_TAGS = frozenset({FLIP2, FLIP3, KELVIN, RADIAL})


@dataclass(frozen=True)
class HotSpot:
    center: tuple
    scale: float


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ValueError(f"points must have a trailing axis of length 3, got shape {x.shape}")
    return x


def _merge_spots(*groups) -> tuple:
    seen = {}
    for g in groups:
        for h in g:
            seen.setdefault((tuple(float(c) for c in h.center), float(h.scale)), h)
    return tuple(seen.values())


def _rot_orders(tags: frozenset) -> Optional[set]:
    if RADIAL in tags:
        return None
    return {t for t in tags if t.startswith("rot")}


def _meet(a: frozenset, b: frozenset, keep_kelvin: bool) -> frozenset:
    base = (a & b) & {FLIP2, FLIP3, KELVIN, RADIAL}
    if not keep_kelvin:
        base = base - {KELVIN}
    ra, rb = _rot_orders(a), _rot_orders(b)
    if ra is None and rb is None:
        rots = set()
    elif ra is None:
        rots = rb
    elif rb is None:
        rots = ra
    else:
        rots = ra & rb
    return frozenset(base | rots)


@dataclass(frozen=True, eq=False)
class ScalarField:
    value: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    laplacian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    symmetry: frozenset = field(default_factory=frozenset)
    hot_spots: tuple = ()
    name: str = "f"

    def __call__(self, x) -> np.ndarray:
        return self.value(_as_points(x))

    def gradient_at(self, x) -> np.ndarray:
        if self.grad is None:
            raise NotImplementedError(f"{self.name} has no analytic gradient")
        return self.grad(_as_points(x))

    def laplacian_at(self, x) -> np.ndarray:
        if self.laplacian is None:
            raise NotImplementedError(f"{self.name} has no analytic Laplacian")
        return self.laplacian(_as_points(x))

    # arithmetic keeps derivatives whenever both operands carry them

    def __add__(self, other):
        if np.isscalar(other):
            c = float(other)
            return ScalarField(
                lambda x: self.value(x) + c, self.grad, self.laplacian,
                self.symmetry - {KELVIN}, self.hot_spots, f"({self.name}+{c:g})",
            )
        g = lap = None
        if self.grad is not None and other.grad is not None:
            g = lambda x: self.grad(x) + other.grad(x)
        if self.laplacian is not None and other.laplacian is not None:
            lap = lambda x: self.laplacian(x) + other.laplacian(x)
        return ScalarField(
            lambda x: self.value(x) + other.value(x), g, lap,
            _meet(self.symmetry, other.symmetry, keep_kelvin=True),
            _merge_spots(self.hot_spots, other.hot_spots), f"({self.name}+{other.name})",
        )

    __radd__ = __add__

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other if isinstance(other, ScalarField) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def scaled(self, c: float) -> "ScalarField":
        c = float(c)
        return ScalarField(
            lambda x: c * self.value(x),
            None if self.grad is None else (lambda x: c * self.grad(x)),
            None if self.laplacian is None else (lambda x: c * self.laplacian(x)),
            self.symmetry, self.hot_spots, f"{c:g}*{self.name}",
        )

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scaled(other)
        f, h = self, other
        g = lap = None
        if f.grad is not None and h.grad is not None:
            g = lambda x: f.grad(x) * h.value(x)[..., None] + h.grad(x) * f.value(x)[..., None]
            if f.laplacian is not None and h.laplacian is not None:
                lap = lambda x: (
                    f.laplacian(x) * h.value(x)
                    + h.laplacian(x) * f.value(x)
                    + 2.0 * np.sum(f.grad(x) * h.grad(x), axis=-1)
                )
        return ScalarField(
            lambda x: f.value(x) * h.value(x), g, lap,
            _meet(f.symmetry, h.symmetry, keep_kelvin=False),
            _merge_spots(f.hot_spots, h.hot_spots), f"{f.name}*{h.name}",
        )

    __rmul__ = __mul__

    def __pow__(self, p: float):
        p = float(p)
        f = self
        g = lap = None
        if f.grad is not None:
            g = lambda x: p * (f.value(x) ** (p - 1.0))[..., None] * f.grad(x)
            if f.laplacian is not None:
                def lap(x):
                    u = f.value(x)
                    du = f.grad(x)
                    return p * u ** (p - 1.0) * f.laplacian(x) + p * (p - 1.0) * u ** (p - 2.0) * np.sum(du * du, axis=-1)
        return ScalarField(
            lambda x: f.value(x) ** p, g, lap,
            f.symmetry - {KELVIN} if p != 1.0 else f.symmetry,
            f.hot_spots, f"{f.name}^{p:g}",
        )

    def map(self, fn: Callable[[np.ndarray], np.ndarray], name: str | None = None, kelvin: bool = False):
        """Pointwise ``fn(f(x))`` without derivatives."""
        sym = self.symmetry if kelvin else self.symmetry - {KELVIN}
        return ScalarField(lambda x: fn(self.value(x)), symmetry=sym, hot_spots=self.hot_spots,
                           name=name or f"map({self.name})")

    def positive_part(self) -> "ScalarField":
        return self.map(lambda v: np.maximum(v, 0.0), f"({self.name})+", kelvin=True)

    def abs(self) -> "ScalarField":
        return self.map(np.abs, f"|{self.name}|", kelvin=True)

    def rotated(self, theta: float) -> "ScalarField":
        """The field x -> f(R_theta x)."""
        theta = math.remainder(theta, TWO_PI)
        R = rotation_matrix(theta)
        f = self
        g = None if f.grad is None else (lambda x: f.grad(rotate(theta, x)) @ R)
        lap = None if f.laplacian is None else (lambda x: f.laplacian(rotate(theta, x)))
        spots = tuple(HotSpot(tuple(rotate(-theta, np.asarray(h.center))), h.scale) for h in f.hot_spots)
        return ScalarField(lambda x: f.value(rotate(theta, x)), g, lap, f.symmetry, spots,
                           f"{f.name}∘R({theta:.6g})")

    def with_name(self, name: str) -> "ScalarField":
        return ScalarField(self.value, self.grad, self.laplacian, self.symmetry, self.hot_spots, name)


def constant(c: float) -> ScalarField:
    c = float(c)
    return ScalarField(
        lambda x: np.full(x.shape[:-1], c),
        lambda x: np.zeros(x.shape),
        lambda x: np.zeros(x.shape[:-1]),
        frozenset({FLIP2, FLIP3, RADIAL}), (), f"{c:g}",
    )


ZERO = constant(0.0)


# --- bubbles -----------------------------------------------------------------

@dataclass(frozen=True)
class BubbleParams:
    delta: float = 1.0
    xi: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        object.__setattr__(self, "xi", tuple(float(c) for c in self.xi))


def _shift(x, xi):
    y = x - np.asarray(xi, dtype=float)
    return y, np.sum(y * y, axis=-1)


def eval_U(x) -> np.ndarray:
    x = _as_points(x)
    return A / np.sqrt(1.0 + np.sum(x * x, axis=-1))


def eval_bubble(p: BubbleParams, x) -> np.ndarray:
    _, r2 = _shift(_as_points(x), p.xi)
    d = p.delta
    return A * math.sqrt(d) / np.sqrt(d * d + r2)


def _bubble_grad(p: BubbleParams, x):
    y, r2 = _shift(x, p.xi)
    w = p.delta**2 + r2
    return -(A * math.sqrt(p.delta)) * (w ** -1.5)[..., None] * y


def _bubble_lap(p: BubbleParams, x):
    _, r2 = _shift(x, p.xi)
    d2 = p.delta**2
    return -3.0 * A * math.sqrt(p.delta) * d2 * (d2 + r2) ** -2.5


def bubble_field(p: BubbleParams = BubbleParams()) -> ScalarField:
    centered = all(c == 0.0 for c in p.xi)
    unit = centered and abs(p.delta**2 + sum(c * c for c in p.xi) - 1.0) < 1e-15
    tags = RADIAL_TAGS if unit else (frozenset({FLIP2, FLIP3, RADIAL}) if centered else frozenset())
    return ScalarField(
        lambda x: eval_bubble(p, x),
        lambda x: _bubble_grad(p, x),
        lambda x: _bubble_lap(p, x),
        tags, (HotSpot(p.xi, p.delta),), f"U[{p.delta:g}]",
    )


def field_U() -> ScalarField:
    return ScalarField(eval_U, lambda x: _bubble_grad(BubbleParams(), x),
                       lambda x: _bubble_lap(BubbleParams(), x),
                       RADIAL_TAGS, (HotSpot((0.0, 0.0, 0.0), 1.0),), "U")


# --- kernel functions ------------------------------------------------------------

def _check_l(l: int):
    if l not in (0, 1, 2, 3):
        raise ValueError(f"kernel index l must be in 0..3, got {l}")


def eval_Z(l: int, x, delta: float = 1.0, xi=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Kernel functions of the linearized Yamabe operator, rescaled by (delta, xi)."""
    _check_l(l)
    y, r2 = _shift(_as_points(x), xi)
    d2 = delta * delta
    w = d2 + r2
    if l == 0:
        return 0.5 * A * math.sqrt(delta) * (r2 - d2) * w**-1.5
    return A * delta**1.5 * y[..., l - 1] * w**-1.5


def _Z_grad(l, x, delta, xi):
    y, r2 = _shift(x, xi)
    d2 = delta * delta
    w = d2 + r2
    if l == 0:
        c = 0.5 * A * math.sqrt(delta) * (-(w**-1.5) + 6.0 * d2 * w**-2.5)
        return c[..., None] * y
    out = -3.0 * (y[..., l - 1] * w**-2.5)[..., None] * y
    out[..., l - 1] += w**-1.5
    return A * delta**1.5 * out


def _Z_lap(l, x, delta, xi):
    y, r2 = _shift(x, xi)
    d2 = delta * delta
    w = d2 + r2
    if l == 0:
        return 0.5 * A * math.sqrt(delta) * (-15.0 * d2 * w**-2.5 + 30.0 * d2 * d2 * w**-3.5)
    return -15.0 * A * delta**1.5 * d2 * y[..., l - 1] * w**-3.5


def z_field(l: int, delta: float = 1.0, xi=(0.0, 0.0, 0.0)) -> ScalarField:
    _check_l(l)
    xi = tuple(float(c) for c in xi)
    tags = frozenset()
    if l == 0 and xi == (0.0, 0.0, 0.0):
        tags = frozenset({FLIP2, FLIP3, RADIAL})
    return ScalarField(
        lambda x: eval_Z(l, x, delta, xi),
        lambda x: _Z_grad(l, x, delta, xi),
        lambda x: _Z_lap(l, x, delta, xi),
        tags, (HotSpot(xi, delta),), f"Z{l}[{delta:g}]",
    )


def yamabe_residual(x, delta: float = 1.0, xi=(0.0, 0.0, 0.0)) -> np.ndarray:
    """-Lap U - U^5 for the bubble of width ``delta`` centered at ``xi``."""
    x = _as_points(x)
    p = BubbleParams(delta, xi)
    u = eval_bubble(p, x)
    return -_bubble_lap(p, x) - u**5


def kernel_residual(l: int, x, delta: float = 1.0, xi=(0.0, 0.0, 0.0)) -> np.ndarray:
    """-Lap Z_l - 5 U^4 Z_l for the kernel function of the (delta, xi) bubble."""
    _check_l(l)
    x = _as_points(x)
    u = eval_bubble(BubbleParams(delta, xi), x)
    return -_Z_lap(l, x, delta, xi) - 5.0 * u**4 * eval_Z(l, x, delta, xi)


# --- polygonal ansatz ------------------------------------------------------------

def _polygon_terms(cfg: PolygonConfig, x):
    """Shifted coordinates (..., k, 3) and w = s^2 + |x - xi_j|^2 (..., k)."""
    c = polygon_centers(cfg)
    y = x[..., None, :] - c
    s = cfg.scale
    return y, s * s + np.sum(y * y, axis=-1)


def bubble_terms(cfg: PolygonConfig, x) -> np.ndarray:
    """The k values U_{t,j}(x) along a trailing axis."""
    _, w = _polygon_terms(cfg, _as_points(x))
    return A * math.sqrt(cfg.scale) / np.sqrt(w)


def eval_V(cfg: PolygonConfig, x) -> np.ndarray:
    return np.sum(bubble_terms(cfg, x), axis=-1)


def _V_grad(cfg, x):
    y, w = _polygon_terms(cfg, x)
    return -(A * math.sqrt(cfg.scale)) * np.sum((w**-1.5)[..., None] * y, axis=-2)


def _V_lap(cfg, x):
    _, w = _polygon_terms(cfg, x)
    s2 = cfg.scale**2
    return -3.0 * A * math.sqrt(cfg.scale) * s2 * np.sum(w**-2.5, axis=-1)


def polygon_hot_spots(cfg: PolygonConfig) -> tuple:
    return tuple(HotSpot(tuple(float(v) for v in c), cfg.scale) for c in polygon_centers(cfg))


def _polygon_tags(cfg: PolygonConfig, kelvin: bool = True) -> frozenset:
    if cfg.k == 1:
        return frozenset({FLIP2, FLIP3} | ({KELVIN} if kelvin else set())) if cfg.phase == 0 else frozenset()
    if cfg.phase != 0.0:
        # phase-shifted polygons lose the x2-reflection
        return frozenset({FLIP3, rot_tag(cfg.k)} | ({KELVIN} if kelvin else set()))
    return symmetric_tags(cfg.k, kelvin)


def field_V(cfg: PolygonConfig) -> ScalarField:
    kel = abs(cfg.radius**2 + cfg.scale**2 - 1.0) < 1e-14
    return ScalarField(
        lambda x: eval_V(cfg, x), lambda x: _V_grad(cfg, x), lambda x: _V_lap(cfg, x),
        _polygon_tags(cfg, kelvin=kel), polygon_hot_spots(cfg), f"V[k={cfg.k},r={cfg.r}]",
    )


def field_bubble_at_vertex(cfg: PolygonConfig, j: int) -> ScalarField:
    """U_{t,j}, the j-th bubble of the polygon (1-based)."""
    if not 1 <= j <= cfg.k:
        raise ValueError(f"vertex index must lie in 1..{cfg.k}, got {j}")
    xi = tuple(polygon_centers(cfg)[j - 1])
    return bubble_field(BubbleParams(cfg.scale, xi)).with_name(f"U[t,{j}]")


def field_V_rotated(cfg: PolygonConfig, r: int) -> ScalarField:
    """V_r(x) = V(R_{r,k} x) for the base polygon of ``cfg``."""
    if not 1 <= r <= cfg.q:
        raise ValueError(f"r must lie in 1..{cfg.q}, got {r}")
    base = field_V(cfg.with_(r=1))
    theta = (r - 1) / cfg.q * TWO_PI / cfg.k
    return base.rotated(theta).with_name(f"V_{r}")


def nonlocal_sum_cubes(cfg: PolygonConfig, x) -> np.ndarray:
    """sum_{r=2}^q V(R_{r,k} x)^3 with V the polygon of ``cfg`` itself."""
    out = np.zeros(np.shape(x)[:-1])
    for r in range(2, cfg.q + 1):
        theta = (r - 1) / cfg.q * TWO_PI / cfg.k
        out = out + eval_V(cfg, rotate(theta, x)) ** 3
    return out


def _nonlocal_spots(cfg: PolygonConfig) -> tuple:
    spots = []
    for r in range(2, cfg.q + 1):
        spots.extend(field_V(cfg).rotated((r - 1) / cfg.q * TWO_PI / cfg.k).hot_spots)
    return tuple(spots)


def eval_Zkt(cfg: PolygonConfig, x) -> np.ndarray:
    _, w = _polygon_terms(cfg, _as_points(x))
    s = cfg.scale
    s2 = s * s
    return 0.5 * A * math.sqrt(s) * np.sum(w**-0.5 - 2.0 * s2 * w**-1.5, axis=-1)


def _Zkt_grad(cfg, x):
    y, w = _polygon_terms(cfg, x)
    s = cfg.scale
    c = 0.5 * A * math.sqrt(s) * (-(w**-1.5) + 6.0 * s * s * w**-2.5)
    return np.sum(c[..., None] * y, axis=-2)


def _Zkt_lap(cfg, x):
    _, w = _polygon_terms(cfg, x)
    s2 = cfg.scale**2
    return 0.5 * A * math.sqrt(cfg.scale) * np.sum(-15.0 * s2 * w**-2.5 + 30.0 * s2 * s2 * w**-3.5, axis=-1)


def field_Zkt(cfg: PolygonConfig) -> ScalarField:
    # not Kelvin-invariant: Z0 of a bubble off the origin is not mapped to itself
    return ScalarField(
        lambda x: eval_Zkt(cfg, x), lambda x: _Zkt_grad(cfg, x), lambda x: _Zkt_lap(cfg, x),
        _polygon_tags(cfg, kelvin=False), polygon_hot_spots(cfg), f"Zkt[k={cfg.k}]",
    )


def dV_dt(cfg: PolygonConfig, x) -> np.ndarray:
    """Derivative of V with respect to the scale multiplier t at fixed delta."""
    x = _as_points(x)
    t, d = cfg.t, cfg.delta
    s = cfg.scale
    if s >= 1.0:
        raise ValueError("dV/dt requires t*delta < 1")
    c = polygon_centers(cfg)
    y, w = _polygon_terms(cfg, x)
    dots = np.sum(y * c, axis=-1)
    drift = A * t**1.5 * d**2.5 / (1.0 - s * s) * np.sum(dots * w**-1.5, axis=-1)
    return eval_Zkt(cfg, x) / t - drift


def field_dV_dt(cfg: PolygonConfig) -> ScalarField:
    return ScalarField(lambda x: dV_dt(cfg, x), symmetry=_polygon_tags(cfg, kelvin=True),
                       hot_spots=polygon_hot_spots(cfg), name="dV/dt")


# --- error and coupling densities -------------------------------------------------

@dataclass(frozen=True)
class CouplingRegime:
    """Coupling constants: beta between u and the v-family, alpha inside the family."""

    beta: float
    alpha: float = 0.0
    q: int = 1

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")

    @property
    def m(self) -> int:
        return self.q + 1


def power_excess(terms: np.ndarray, p: int) -> np.ndarray:
    """(sum_j u_j)^p - sum_j u_j^p for nonnegative terms along the last axis.

    Grouped around the dominant term so that no digits are lost when one
    bubble outweighs the others by many orders of magnitude.
    """
    terms = np.asarray(terms, dtype=float)
    j = np.argmax(terms, axis=-1)[..., None]
    dom = np.take_along_axis(terms, j, axis=-1)[..., 0]
    mask = np.zeros(terms.shape, dtype=bool)
    np.put_along_axis(mask, j, True, axis=-1)
    rest = np.sum(np.where(mask, 0.0, terms), axis=-1)
    rest_p = np.sum(np.where(mask, 0.0, terms**p), axis=-1)
    out = np.zeros_like(dom)
    for m in range(1, p + 1):
        out = out + math.comb(p, m) * dom ** (p - m) * rest**m
    return out - rest_p


ERROR_KINDS = ("E1", "E2", "E1tilde", "E2tilde")
COUPLING_KINDS = ("N1", "N2", "N1tilde", "N2tilde")


def error_field(which: str, cfg: PolygonConfig, regime: CouplingRegime) -> ScalarField:
    """Right-hand-side error densities of the ansatz (U, V)."""
    if which not in ERROR_KINDS:
        raise ValueError(f"unknown error field {which!r}; expected one of {ERROR_KINDS}")
    if cfg.q != regime.q:
        cfg = cfg.with_(q=regime.q, r=1)
    beta, alpha = regime.beta, regime.alpha

    def e1(x):
        u = eval_U(x)
        return beta * u * u * eval_V(cfg, x) ** 3

    def e2(x):
        terms = bubble_terms(cfg, x)
        v = np.sum(terms, axis=-1)
        return power_excess(terms, 5) + beta * eval_U(x) ** 3 * v * v

    if which == "E1":
        fn = e1
    elif which == "E2":
        fn = e2
    elif which == "E1tilde":
        fn = lambda x: e1(x) + beta * eval_U(x) ** 2 * nonlocal_sum_cubes(cfg, x)
    else:
        fn = lambda x: e2(x) + alpha * eval_V(cfg, x) ** 2 * nonlocal_sum_cubes(cfg, x)
    spots = _merge_spots(((HotSpot((0.0, 0.0, 0.0), 1.0)),), polygon_hot_spots(cfg))
    if which.endswith("tilde"):
        spots = _merge_spots(spots, _nonlocal_spots(cfg))
    return ScalarField(fn, symmetry=_polygon_tags(cfg, kelvin=False), hot_spots=spots, name=which)


def _pos(v):
    return np.maximum(v, 0.0)


def coupling_field(which: str, cfg: PolygonConfig, regime: CouplingRegime,
                   phi: ScalarField, psi: ScalarField) -> ScalarField:
    """Nonlinear remainder densities for the perturbed pair (U + phi, V + psi)."""
    if which not in COUPLING_KINDS:
        raise ValueError(f"unknown coupling field {which!r}; expected one of {COUPLING_KINDS}")
    if cfg.q != regime.q:
        cfg = cfg.with_(q=regime.q, r=1)
    beta, alpha = regime.beta, regime.alpha
    thetas = [(r - 1) / cfg.q * TWO_PI / cfg.k for r in range(2, cfg.q + 1)]

    def pieces(x):
        u, v = eval_U(x), eval_V(cfg, x)
        return u, v, phi(x), psi(x)

    def n1(x):
        u, v, f, g = pieces(x)
        up, vp = _pos(u + f), _pos(v + g)
        return up**5 - u**5 - 5.0 * u**4 * f + beta * (up * up * vp**3 - u * u * v**3)

    def n2(x):
        u, v, f, g = pieces(x)
        up, vp = _pos(u + f), _pos(v + g)
        return vp**5 - v**5 - 5.0 * v**4 * g + beta * (vp * vp * up**3 - v * v * u**3)

    def family(x):
        # sum_{r>=2} V_r^3 and sum_{r>=2} (V_r + psi_r)_+^3
        plain = np.zeros(x.shape[:-1])
        shifted = np.zeros(x.shape[:-1])
        for th in thetas:
            xr = rotate(th, x)
            vr = eval_V(cfg, xr)
            plain = plain + vr**3
            shifted = shifted + _pos(vr + psi(xr)) ** 3
        return plain, shifted

    if which == "N1":
        fn = n1
    elif which == "N2":
        fn = n2
    elif which == "N1tilde":
        def fn(x):
            plain, shifted = family(x)
            u = eval_U(x)
            return n1(x) + beta * (_pos(u + phi(x)) ** 2 * shifted - u * u * plain)
    else:
        def fn(x):
            plain, shifted = family(x)
            v = eval_V(cfg, x)
            return n2(x) + alpha * (_pos(v + psi(x)) ** 2 * shifted - v * v * plain)
    spots = _merge_spots((HotSpot((0.0, 0.0, 0.0), 1.0),), polygon_hot_spots(cfg),
                         phi.hot_spots, psi.hot_spots)
    return ScalarField(fn, symmetry=frozenset(), hot_spots=spots, name=which)


def perturbation_U(eps: float) -> ScalarField:
    """Built-in perturbation family eps * U."""
    return field_U().scaled(eps).with_name(f"{eps:g}*U")


def perturbation_Zkt(cfg: PolygonConfig, eps: float) -> ScalarField:
    """Built-in perturbation family eps * Z_{k,t}."""
    return field_Zkt(cfg).scaled(eps).with_name(f"{eps:g}*Zkt")


FIELD_CATALOG = {
    "U": field_U,
    "bubble": bubble_field,
    "U_tj": field_bubble_at_vertex,
    "V": field_V,
    "V_r": field_V_rotated,
    "Z": z_field,
    "Zkt": field_Zkt,
    "dV_dt": field_dV_dt,
    "error": error_field,
    "coupling": coupling_field,
}
