"""Rotations, Kelvin inversion and polygon geometry for the symmetry class X_k.

Points are plain numpy arrays whose last axis has length 3; every function
here broadcasts over leading axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:
    from .fields import ScalarField

TWO_PI = 2.0 * math.pi
MIN_SAMPLE_RADIUS = 1e-8


@dataclass(frozen=True)
class SymmetrySpec:
    k: int
    q: int = 1

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"polygon order k must be >= 2, got {self.k}")
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")


@dataclass(frozen=True)
class PolygonConfig:
    """Concentration geometry: k bubbles of width t*delta on a circle.

    ``r`` selects the phase-shifted polygon of the m >= 3 construction; the
    centers then sit at angles 2*pi*(j-1)/k + (r-1)*2*pi/(q*k).
    """

    k: int
    t: float
    delta: float
    q: int = 1
    r: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")
        if not 0 < self.delta < math.exp(-2):
            raise ValueError(f"delta must lie in (0, e^-2), got {self.delta}")
        if self.t * self.delta > 1:
            raise ValueError("t*delta must not exceed 1")
        if self.q < 1 or not 1 <= self.r <= self.q:
            raise ValueError(f"need q >= 1 and 1 <= r <= q, got q={self.q}, r={self.r}")

    @property
    def scale(self) -> float:
        """Common bubble width t*delta."""
        return self.t * self.delta

    @property
    def radius(self) -> float:
        """Circle radius sqrt(1 - t^2 delta^2) carrying the centers."""
        return math.sqrt(max(0.0, 1.0 - self.scale * self.scale))

    @property
    def phase(self) -> float:
        return (self.r - 1) * TWO_PI / (self.q * self.k)

    def with_(self, **changes) -> "PolygonConfig":
        fields = dict(k=self.k, t=self.t, delta=self.delta, q=self.q, r=self.r)
        fields.update(changes)
        return PolygonConfig(**fields)


def _reduce_angle(theta: float) -> float:
    return math.remainder(theta, TWO_PI)


def rotation_matrix(theta: float) -> np.ndarray:
    theta = _reduce_angle(theta)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotate(theta: float, x) -> np.ndarray:
    """Rotate points by ``theta`` in the (x1, x2)-plane; x3 is untouched."""
    x = np.asarray(x, dtype=float)
    theta = _reduce_angle(theta)
    c, s = math.cos(theta), math.sin(theta)
    out = np.empty_like(x)
    out[..., 0] = c * x[..., 0] - s * x[..., 1]
    out[..., 1] = s * x[..., 0] + c * x[..., 1]
    out[..., 2] = x[..., 2]
    return out


def reduction_rotation(r: int, spec: SymmetrySpec) -> float:
    """Angle ((r-1)/q)(2 pi/k) of the r-th rotated copy."""
    if not 1 <= r <= spec.q:
        raise ValueError(f"r must lie in 1..{spec.q}, got {r}")
    return (r - 1) / spec.q * TWO_PI / spec.k


def kelvin_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(n2 == 0.0):
        raise ValueError("Kelvin inversion is undefined at the origin")
    return x / n2


def kelvin_pullback(f: "ScalarField") -> "ScalarField":
    """The field x -> f(x/|x|^2)/|x|."""
    from .fields import ScalarField

    def value(x):
        x = np.asarray(x, dtype=float)
        n = np.linalg.norm(x, axis=-1)
        if np.any(n == 0.0):
            raise ValueError("Kelvin pullback is undefined at the origin")
        return f(kelvin_point(x)) / n

    spots = []
    for h in f.hot_spots:
        c = np.asarray(h.center)
        n2 = float(c @ c)
        # bubble U_{d,c} is mapped to U_{d',c'} with d' = d/(|c|^2+d^2)
        den = n2 + h.scale**2
        spots.append(type(h)(tuple(c / den), h.scale / den))
    return ScalarField(value, symmetry=f.symmetry, hot_spots=tuple(spots), name=f"K[{f.name}]")


def polygon_centers(cfg: PolygonConfig) -> np.ndarray:
    """The k centers as a (k, 3) array."""
    j = np.arange(cfg.k)
    ang = TWO_PI * j / cfg.k + cfg.phase
    ang = np.remainder(ang + math.pi, TWO_PI) - math.pi
    out = np.zeros((cfg.k, 3))
    out[:, 0] = cfg.radius * np.cos(ang)
    out[:, 1] = cfg.radius * np.sin(ang)
    return out


def in_fundamental_domain(x, cfg: PolygonConfig) -> np.ndarray:
    """Membership in the Voronoi cell of the first center.

    Implemented as the half-open wedge test on the planar angle, which
    coincides with the nearest-center definition off the bisector planes.
    Points on the x3-axis are equidistant from all centers and excluded.
    """
    x = np.asarray(x, dtype=float)
    ang = np.arctan2(x[..., 1], x[..., 0]) - cfg.phase
    ang = np.remainder(ang + math.pi, TWO_PI) - math.pi
    half = math.pi / cfg.k
    on_axis = (x[..., 0] == 0.0) & (x[..., 1] == 0.0)
    inside = (ang > -half) & (ang <= half)
    if cfg.k == 1:
        inside = np.ones_like(inside)
    return inside & ~on_axis


def nearest_center_index(x, cfg: PolygonConfig) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    c = polygon_centers(cfg)
    d2 = np.sum((x[..., None, :] - c) ** 2, axis=-1)
    return np.argmin(d2, axis=-1)


GENERATORS = ("flip_x2", "flip_x3", "rotation", "kelvin")


def symmetry_violation(
    f: "ScalarField",
    spec: SymmetrySpec,
    samples,
    generators: Iterable[str] | None = None,
    include_family: bool = False,
) -> float:
    """Largest |f(gx) - f(x)| over samples and generators g of X_k.

    The Kelvin generator compares f(x) with |x|^-1 f(x/|x|^2). With
    ``include_family`` the rotations R_{r,k}, r = 2..q, are added.
    """
    x = np.asarray(samples, dtype=float).reshape(-1, 3)
    if x.shape[0] == 0:
        raise ValueError("need at least one sample")
    gens = list(GENERATORS if generators is None else generators)
    if include_family and "family" not in gens:
        gens.append("family")
    base = f(x)
    worst = 0.0
    for g in gens:
        if g == "flip_x2":
            other = f(x * np.array([1.0, -1.0, 1.0]))
        elif g == "flip_x3":
            other = f(x * np.array([1.0, 1.0, -1.0]))
        elif g == "rotation":
            other = f(rotate(TWO_PI / spec.k, x))
        elif g == "kelvin":
            n = np.linalg.norm(x, axis=-1)
            other = f(kelvin_point(x)) / n
        elif g == "family":
            for r in range(2, spec.q + 1):
                other = f(rotate(reduction_rotation(r, spec), x))
                worst = max(worst, float(np.max(np.abs(other - base))))
            continue
        else:
            raise ValueError(f"unknown generator {g!r}")
        worst = max(worst, float(np.max(np.abs(other - base))))
    return worst


def sample_points(n: int, r_min: float = 0.2, r_max: float = 5.0, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in the shell r_min < |x| < r_max.

    Radii are spread log-uniformly and directions uniformly on the sphere.
    """
    from scipy.stats import qmc

    r_min = max(r_min, MIN_SAMPLE_RADIUS)
    u = qmc.Halton(d=3, scramble=True, seed=seed).random(n)
    r = r_min * (r_max / r_min) ** u[:, 0]
    mu = 2.0 * u[:, 1] - 1.0
    phi = TWO_PI * u[:, 2]
    s = np.sqrt(1.0 - mu * mu)
    return r[:, None] * np.stack([s * np.cos(phi), s * np.sin(phi), mu], axis=1)


def min_pairwise_distance(points: Sequence) -> float:
    p = np.asarray(points, dtype=float)
    d = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1)
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())
