"""Globally adaptive cubature for the bubble algebra on R^3.

Regions are parametrized by spherical charts (R, theta, phi) around a chart
center. Unbounded regions are compactified with a Kelvin chart
(sigma = 1/R, theta, phi) whose Jacobian sigma^-4 sin(theta) turns the
|x|^-6 tails of bubble-algebra integrands into bounded functions.

Each parameter box carries a tensor Gauss-Kronrod 7/15 rule; the box error
is |K15 - G7| and the split direction is the one whose single-axis G7
substitution changes the estimate most. Before the adaptive loop, boxes
touching a hot spot (a bubble center of width ``scale``) are bisected until
their physical extent is at most ``split_radius * scale``; without this
seeding a narrow bubble can be missed entirely by the coarse rule.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .fields import HotSpot, ScalarField
from .symmetry import TWO_PI, PolygonConfig, polygon_centers, rotate, sample_points

# QUADPACK qk15 abscissae and weights
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
W_KRONROD = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
W_GAUSS = np.zeros(15)
W_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:3], [_WG[3]], _WG[2::-1]])
POINTS_PER_BOX = 15**3

CHUNK_BOXES = 48
HOT_SPOT_REACH = 50.0


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-7
    abs_tol: float = 1e-14
    max_subdivisions: int = 10**6
    # boxes touching a hot spot are refined to physical size split_radius * scale
    split_radius: float = 1.0
    batch_size: int = 64

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not self.split_radius > 0:
            raise ValueError("split_radius must be positive")

    def with_(self, **changes) -> "QuadratureSpec":
        d = dict(rel_tol=self.rel_tol, abs_tol=self.abs_tol, max_subdivisions=self.max_subdivisions,
                 split_radius=self.split_radius, batch_size=self.batch_size)
        d.update(changes)
        return QuadratureSpec(**d)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    err_est: float
    n_evals: int
    converged: bool = True
    n_boxes: int = 0

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(self.value + other.value, self.err_est + other.err_est,
                                self.n_evals + other.n_evals, self.converged and other.converged,
                                self.n_boxes + other.n_boxes)

    def scaled(self, c: float) -> "QuadratureResult":
        return QuadratureResult(c * self.value, abs(c) * self.err_est, self.n_evals,
                                self.converged, self.n_boxes)


# --- regions ------------------------------------------------------------------------

@dataclass(frozen=True)
class WholeSpace:
    pass


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


@dataclass(frozen=True)
class Wedge:
    """{x : planar angle of x within pi/k of ``phase``}, the cell of the first vertex."""

    k: int
    phase: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"wedge order must be >= 1, got {self.k}")

    @classmethod
    def of(cls, cfg: PolygonConfig) -> "Wedge":
        return cls(cfg.k, cfg.phase)


@dataclass(frozen=True)
class WedgeBall:
    """Wedge intersected with the origin-centered ball of the given radius."""

    k: int
    radius: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Complement:
    """R^3 minus a finite union of pairwise disjoint balls."""

    balls: tuple

    def __post_init__(self):
        if not self.balls:
            raise ValueError("complement needs at least one ball")
        bs = self.balls
        for i in range(len(bs)):
            for j in range(i + 1, len(bs)):
                gap = np.linalg.norm(np.subtract(bs[i].center, bs[j].center))
                if gap < bs[i].radius + bs[j].radius:
                    raise ValueError("complement balls must be disjoint")

    @classmethod
    def around_polygon(cls, cfg: PolygonConfig, r0: float | None = None) -> "Complement":
        """Space outside balls of radius ``r0`` about each polygon center.

        The default r0 is half the minimal center distance, the largest radius
        keeping the balls disjoint.
        """
        centers = polygon_centers(cfg)
        if r0 is None:
            if len(centers) < 2:
                raise ValueError("a default separation radius needs at least two centers")
            gaps = [np.linalg.norm(np.subtract(centers[i], centers[j]))
                    for i in range(len(centers)) for j in range(i + 1, len(centers))]
            r0 = 0.5 * float(min(gaps))
        return cls(tuple(Ball(tuple(c), r0) for c in centers))


Region = Union[WholeSpace, Ball, Wedge, WedgeBall, Complement]


# --- charts ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Chart:
    center: tuple
    kelvin: bool
    lo: tuple
    hi: tuple

    def to_physical(self, u0, u1, u2):
        st, ct = np.sin(u1), np.cos(u1)
        sp, cp = np.sin(u2), np.cos(u2)
        if self.kelvin:
            rad = 1.0 / u0
            jac = u0**-4 * st
        else:
            rad = u0
            jac = u0 * u0 * st
        c = self.center
        x = np.stack([c[0] + rad * st * cp, c[1] + rad * st * sp, c[2] + rad * ct], axis=-1)
        return x, jac

    def physical_extent(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        th0, th1 = lo[:, 1], hi[:, 1]
        smax = np.where((th0 <= math.pi / 2) & (th1 >= math.pi / 2), 1.0,
                        np.maximum(np.sin(th0), np.sin(th1)))
        if self.kelvin:
            with np.errstate(divide="ignore"):
                rmax = np.where(lo[:, 0] > 0, 1.0 / np.where(lo[:, 0] > 0, lo[:, 0], 1.0), np.inf)
                rmin = 1.0 / hi[:, 0]
            dr = rmax - rmin
        else:
            rmax = hi[:, 0]
            dr = hi[:, 0] - lo[:, 0]
        return np.stack([dr, rmax * (th1 - th0), rmax * smax * (hi[:, 2] - lo[:, 2])], axis=1)

    def param_of(self, p) -> np.ndarray:
        """Chart coordinates of a physical point; NaN marks an undefined angle."""
        y = np.asarray(p, dtype=float) - np.asarray(self.center)
        r = float(np.linalg.norm(y))
        if r == 0.0:
            return np.array([np.inf if self.kelvin else 0.0, np.nan, np.nan])
        th = math.acos(max(-1.0, min(1.0, y[2] / r)))
        rho = math.hypot(y[0], y[1])
        if rho <= 1e-15 * r:
            ph = np.nan
        else:
            ph = math.atan2(y[1], y[0])
            ph = self.lo[2] + (ph - self.lo[2]) % TWO_PI
            # of the two representatives pick the one nearer the phi range
            if ph > self.hi[2] and (ph - self.hi[2]) > (self.lo[2] - (ph - TWO_PI)):
                ph -= TWO_PI
        return np.array([1.0 / r if self.kelvin else r, th, ph])

    def from_param(self, u) -> np.ndarray:
        u = np.where(np.isnan(u), 0.0, u)
        x, _ = self.to_physical(np.array([u[0]]), np.array([u[1]]), np.array([u[2]]))
        return x[0]


def _phi_start(angles: Sequence[float]) -> float:
    """Start of a full phi period placed in the widest gap between hot-spot angles."""
    if not angles:
        return -math.pi
    a = np.sort(np.mod(np.asarray(angles), TWO_PI))
    gaps = np.diff(np.concatenate([a, [a[0] + TWO_PI]]))
    i = int(np.argmax(gaps))
    start = a[i] + gaps[i] / 2
    return math.remainder(start, TWO_PI)


def _split_radius_for(spots: Sequence[HotSpot], center) -> float:
    radii = [float(np.linalg.norm(np.subtract(h.center, center))) for h in spots]
    radii = [r for r in radii if r > 0]
    if radii and max(radii) - min(radii) <= 1e-12 * max(radii) and 0.1 <= radii[0] <= 10.0:
        return radii[0]
    return 1.0


def _charts(region, spots: Sequence[HotSpot]) -> list:
    origin = (0.0, 0.0, 0.0)
    if isinstance(region, WholeSpace):
        angles = []
        for h in spots:
            c = h.center
            if math.hypot(c[0], c[1]) > 0:
                angles.append(math.atan2(c[1], c[0]))
        p0 = _phi_start(angles)
        rho0 = _split_radius_for(spots, origin)
        return [
            _Chart(origin, False, (0.0, 0.0, p0), (rho0, math.pi, p0 + TWO_PI)),
            _Chart(origin, True, (0.0, 0.0, p0), (1.0 / rho0, math.pi, p0 + TWO_PI)),
        ]
    if isinstance(region, Wedge):
        h = math.pi / region.k
        rho0 = _split_radius_for(spots, origin)
        return [
            _Chart(origin, False, (0.0, 0.0, region.phase - h), (rho0, math.pi, region.phase + h)),
            _Chart(origin, True, (0.0, 0.0, region.phase - h), (1.0 / rho0, math.pi, region.phase + h)),
        ]
    if isinstance(region, WedgeBall):
        h = math.pi / region.k
        return [_Chart(origin, False, (0.0, 0.0, region.phase - h), (region.radius, math.pi, region.phase + h))]
    if isinstance(region, Ball):
        return [_Chart(region.center, False, (0.0, 0.0, -math.pi), (region.radius, math.pi, math.pi))]
    if isinstance(region, Complement) and len(region.balls) == 1:
        b = region.balls[0]
        return [_Chart(b.center, True, (0.0, 0.0, -math.pi), (1.0 / b.radius, math.pi, math.pi))]
    raise TypeError(f"unsupported region {region!r}")


# --- the adaptive engine ------------------------------------------------------------------

def _thread_count() -> int:
    try:
        n = int(os.environ.get("BUBBLEFORGE_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, min(n, os.cpu_count() or 1))


def _rule_on_boxes(fn, chart: _Chart, lo: np.ndarray, hi: np.ndarray):
    """Values, error estimates, per-axis estimates and |f| integrals for a batch of boxes."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    n = lo.shape[0]
    u0 = (mid[:, 0, None] + half[:, 0, None] * NODES)[:, :, None, None]
    u1 = (mid[:, 1, None] + half[:, 1, None] * NODES)[:, None, :, None]
    u2 = (mid[:, 2, None] + half[:, 2, None] * NODES)[:, None, None, :]
    u0, u1, u2 = np.broadcast_arrays(u0, u1, u2)
    x, jac = chart.to_physical(u0, u1, u2)
    vals = np.asarray(fn(x.reshape(-1, 3)), dtype=float).reshape(n, 15, 15, 15)
    F = vals * jac
    vol = np.prod(half, axis=1)
    tk = F @ W_KRONROD
    tg = F @ W_GAUSS
    kk = tk @ W_KRONROD
    i_kkk = kk @ W_KRONROD
    e0 = np.abs(i_kkk - kk @ W_GAUSS)
    e1 = np.abs(i_kkk - (tk @ W_GAUSS) @ W_KRONROD)
    e2 = np.abs(i_kkk - (tg @ W_KRONROD) @ W_KRONROD)
    i_ggg = (tg @ W_GAUSS) @ W_GAUSS
    absval = ((np.abs(F) @ W_KRONROD) @ W_KRONROD) @ W_KRONROD
    if not np.all(np.isfinite(i_kkk)):
        raise FloatingPointError("integrand produced non-finite values")
    return (vol * i_kkk, vol * np.abs(i_kkk - i_ggg),
            vol[:, None] * np.stack([e0, e1, e2], axis=1), vol * absval)


class _BoxPool:
    def __init__(self, fn, charts, threads: int):
        self.fn = fn
        self.charts = charts
        self.threads = threads
        self.n_evals = 0

    def evaluate(self, cid: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        n = lo.shape[0]
        val = np.empty(n)
        err = np.empty(n)
        edir = np.empty((n, 3))
        absv = np.empty(n)
        jobs = []
        for c in np.unique(cid):
            idx = np.flatnonzero(cid == c)
            for s in range(0, idx.size, CHUNK_BOXES):
                jobs.append((int(c), idx[s:s + CHUNK_BOXES]))

        def run(job):
            c, idx = job
            return idx, _rule_on_boxes(self.fn, self.charts[c], lo[idx], hi[idx])

        if self.threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                results = list(ex.map(run, jobs))
        else:
            results = [run(j) for j in jobs]
        for idx, (v, e, d, a) in results:
            val[idx], err[idx], edir[idx], absv[idx] = v, e, d, a
        self.n_evals += n * POINTS_PER_BOX
        return val, err, edir, absv


def _initial_boxes(chart: _Chart, spots_u: list) -> tuple:
    lo, hi = np.array(chart.lo), np.array(chart.hi)
    cuts = []
    for d in range(3):
        pts = {lo[d], hi[d]}
        if d == 1:
            pts.add(math.pi / 2)
        if d == 2 and hi[2] - lo[2] > math.pi:
            n = int(math.ceil((hi[2] - lo[2]) / (math.pi / 2)))
            pts.update(np.linspace(lo[2], hi[2], n + 1).tolist())
        for u, _ in spots_u:
            if np.isfinite(u[d]) and lo[d] < u[d] < hi[d]:
                pts.add(float(u[d]))
        pts = np.array(sorted(pts))
        keep = [pts[0]]
        for p in pts[1:]:
            if p - keep[-1] > 1e-12 * (hi[d] - lo[d]):
                keep.append(p)
            else:
                keep[-1] = p if p == hi[d] else keep[-1]
        keep[-1] = hi[d]
        cuts.append(np.array(keep))
    g = np.meshgrid(*[np.arange(len(c) - 1) for c in cuts], indexing="ij")
    ia, ib, ic = (a.ravel() for a in g)
    blo = np.stack([cuts[0][ia], cuts[1][ib], cuts[2][ic]], axis=1)
    bhi = np.stack([cuts[0][ia + 1], cuts[1][ib + 1], cuts[2][ic + 1]], axis=1)
    return blo, bhi


def _localize_spots(chart: _Chart, spots: Sequence[HotSpot]) -> list:
    """Hot spots in chart coordinates, clipped onto the chart when just outside it."""
    out = []
    lo, hi = np.array(chart.lo), np.array(chart.hi)
    for h in spots:
        u = chart.param_of(h.center)
        if not np.isfinite(u[0]):
            continue
        uc = u.copy()
        fin = np.isfinite(uc)
        uc[fin] = np.clip(uc[fin], lo[fin], hi[fin])
        if np.array_equal(uc[fin], u[fin]):
            out.append((u, h.scale))
            continue
        gap = float(np.linalg.norm(chart.from_param(uc) - np.asarray(h.center)))
        if gap <= HOT_SPOT_REACH * h.scale:
            out.append((uc, h.scale))
    return out


def _seed(chart: _Chart, lo: np.ndarray, hi: np.ndarray, spots_u: list, split_radius: float):
    """Bisect boxes touching a hot spot until their physical size is below split_radius*scale."""
    span = np.array(chart.hi) - np.array(chart.lo)
    done_lo, done_hi = [], []
    for _ in range(200):
        if lo.shape[0] == 0:
            break
        need = np.zeros(lo.shape, dtype=bool)
        ext = chart.physical_extent(lo, hi)
        for u, s in spots_u:
            tol = 1e-12 * span
            inside = np.all(np.isnan(u) | ((lo - tol <= u) & (u <= hi + tol)), axis=1)
            flag = inside[:, None] & (ext > split_radius * s)
            if np.isnan(u[1]):
                # spot at the chart center: angular extents shrink with r, so refine r alone
                # first; splitting angles too would multiply boxes fourfold per radial level
                flag[flag[:, 0], 1:] = False
            need |= flag
        # boxes already at floating-point resolution stay as they are
        need &= (hi - lo) > 1e-13 * np.maximum(1.0, np.abs(hi))
        split = np.any(need, axis=1)
        done_lo.append(lo[~split])
        done_hi.append(hi[~split])
        lo, hi, need = lo[split], hi[split], need[split]
        if lo.shape[0] == 0:
            break
        # split every flagged axis at its midpoint
        for d in range(3):
            m = need[:, d]
            if not np.any(m):
                continue
            mid = 0.5 * (lo[m, d] + hi[m, d])
            lo2, hi2 = lo[m].copy(), hi[m].copy()
            hi2_left = hi2.copy()
            hi2_left[:, d] = mid
            lo2[:, d] = mid
            new_lo = np.concatenate([lo[~m], lo[m], lo2])
            new_hi = np.concatenate([hi[~m], hi2_left, hi2])
            new_need = np.concatenate([need[~m], need[m], need[m]])
            lo, hi, need = new_lo, new_hi, new_need
    done_lo.append(lo)
    done_hi.append(hi)
    return np.concatenate(done_lo), np.concatenate(done_hi)


def _as_field(f) -> ScalarField:
    if isinstance(f, ScalarField):
        return f
    if callable(f):
        return ScalarField(lambda x: f(x), name=getattr(f, "__name__", "f"))
    raise TypeError("integrand must be a ScalarField or a callable on (..., 3) arrays")


def _adaptive(f: ScalarField, charts: list, spec: QuadratureSpec) -> QuadratureResult:
    spots = f.hot_spots
    pool = _BoxPool(f.value, charts, _thread_count())
    los, his, cids = [], [], []
    for c, ch in enumerate(charts):
        su = _localize_spots(ch, spots)
        lo, hi = _initial_boxes(ch, su)
        lo, hi = _seed(ch, lo, hi, su, spec.split_radius)
        los.append(lo)
        his.append(hi)
        cids.append(np.full(lo.shape[0], c))
    lo, hi, cid = np.concatenate(los), np.concatenate(his), np.concatenate(cids)
    val, err, edir, absv = pool.evaluate(cid, lo, hi)
    frozen = np.zeros(lo.shape[0], dtype=bool)
    n_sub = 0
    converged = True
    while True:
        total = math.fsum(val)
        tot_err = math.fsum(err)
        floor = 64 * np.finfo(float).eps * math.fsum(absv)
        tol = max(spec.abs_tol, spec.rel_tol * abs(total), floor)
        if tot_err <= tol:
            break
        live_err = np.where(frozen, 0.0, err)
        if not np.any(live_err > 0):
            converged = False
            break
        if n_sub >= spec.max_subdivisions:
            converged = False
            break
        order = np.argsort(-live_err, kind="stable")
        cum = np.cumsum(live_err[order])
        m = int(np.searchsorted(cum, tot_err - 0.5 * tol)) + 1
        cap = max(spec.batch_size, lo.shape[0] // 8)
        m = max(1, min(m, cap, spec.max_subdivisions - n_sub, int(np.count_nonzero(live_err > 0))))
        pick = order[:m]
        d = np.argmax(edir[pick], axis=1)
        plo, phi_, pc = lo[pick], hi[pick], cid[pick]
        rows = np.arange(m)
        mid = 0.5 * (plo[rows, d] + phi_[rows, d])
        splittable = (mid > plo[rows, d]) & (mid < phi_[rows, d])
        if not np.all(splittable):
            frozen[pick[~splittable]] = True
            pick, plo, phi_, pc, d, mid = (a[splittable] for a in (pick, plo, phi_, pc, d, mid))
            rows = np.arange(pick.size)
            if pick.size == 0:
                continue
        left_hi = phi_.copy()
        left_hi[rows, d] = mid
        right_lo = plo.copy()
        right_lo[rows, d] = mid
        clo = np.concatenate([plo, right_lo])
        chi = np.concatenate([left_hi, phi_])
        ccid = np.concatenate([pc, pc])
        cval, cerr, cedir, cabs = pool.evaluate(ccid, clo, chi)
        keep = np.ones(lo.shape[0], dtype=bool)
        keep[pick] = False
        lo = np.concatenate([lo[keep], clo])
        hi = np.concatenate([hi[keep], chi])
        cid = np.concatenate([cid[keep], ccid])
        val = np.concatenate([val[keep], cval])
        err = np.concatenate([err[keep], cerr])
        edir = np.concatenate([edir[keep], cedir])
        absv = np.concatenate([absv[keep], cabs])
        frozen = np.concatenate([frozen[keep], np.zeros(clo.shape[0], dtype=bool)])
        n_sub += pick.size
    return QuadratureResult(math.fsum(val), math.fsum(err), pool.n_evals, converged, lo.shape[0])


class NonIntegrableError(ValueError):
    pass


_FAR_DIRECTIONS = np.array([(a, b, c) for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1)
                            if (a, b, c) != (0, 0, 0)], dtype=float)
_FAR_DIRECTIONS /= np.linalg.norm(_FAR_DIRECTIONS, axis=1)[:, None]


def check_far_field(f, near: float = 1e4, far: float = 1e8) -> None:
    """Reject integrands whose tails are not o(|x|^-3) along 26 fixed rays."""
    f = _as_field(f)
    a = near**3 * float(np.max(np.abs(f(near * _FAR_DIRECTIONS))))
    b = far**3 * float(np.max(np.abs(f(far * _FAR_DIRECTIONS))))
    if not (np.isfinite(a) and np.isfinite(b)):
        raise NonIntegrableError("integrand is not finite far from the origin")
    if b > 0.5 * a and b > 0.0:
        raise NonIntegrableError("integrand does not decay faster than |x|^-3 and is not integrable")


def integrate(f, region: Region = WholeSpace(), spec: QuadratureSpec = QuadratureSpec()) -> QuadratureResult:
    """Integral of ``f`` over ``region``.

    Unbounded regions first pass a far-field decay probe; integrands that
    are not integrable at infinity raise ``NonIntegrableError``.
    """
    f = _as_field(f)
    if isinstance(region, (WholeSpace, Wedge, Complement)):
        check_far_field(f)
    if isinstance(region, Complement) and len(region.balls) > 1:
        res = integrate(f, WholeSpace(), spec)
        for b in region.balls:
            res = res + integrate(f, b, spec).scaled(-1.0)
        return res
    return _adaptive(f, _charts(region, f.hot_spots), spec)


def lp_norm(f, p: float, spec: QuadratureSpec = QuadratureSpec(), region: Region = WholeSpace()) -> float:
    """(integral of |f|^p)^(1/p); raises if the quadrature did not converge."""
    res = lp_norm_result(f, p, spec, region)
    if not res.converged:
        raise RuntimeError(f"L^{p} norm quadrature did not converge (err {res.err_est:.3g})")
    return res.value ** (1.0 / p)


def lp_norm_result(f, p: float, spec: QuadratureSpec = QuadratureSpec(),
                   region: Region = WholeSpace()) -> QuadratureResult:
    """Quadrature result for the integral of |f|^p (not yet raised to 1/p)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    f = _as_field(f)
    g = f.abs() ** p if p != 1 else f.abs()
    return integrate(g, region, spec)


class SymmetryError(ValueError):
    pass


def check_rotation_invariance(f, k: int, n: int = 128, seed: int = 0, tol: float = 1e-9) -> float:
    """Sampled relative violation of f(R_{2pi/k} x) = f(x); raises above ``tol``."""
    f = _as_field(f)
    x = sample_points(n, seed=seed)
    base = f(x)
    other = f(rotate(TWO_PI / k, x))
    scale = max(1.0, float(np.max(np.abs(base))))
    viol = float(np.max(np.abs(other - base))) / scale
    if viol > tol:
        raise SymmetryError(f"integrand is not invariant under rotation by 2pi/{k}: violation {viol:.3g}")
    return viol


def integrate_whole_by_wedges(f, cfg: PolygonConfig, spec: QuadratureSpec = QuadratureSpec()) -> QuadratureResult:
    """k times the integral over the first-vertex wedge, for 2pi/k-invariant f."""
    f = _as_field(f)
    check_rotation_invariance(f, cfg.k)
    return integrate(f, Wedge.of(cfg), spec).scaled(float(cfg.k))
