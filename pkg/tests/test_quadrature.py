import math

import numpy as np
import pytest
from scipy import integrate as sci

from bubbleforge.fields import (
    BubbleParams,
    HotSpot,
    ScalarField,
    bubble_field,
    field_U,
    field_V,
    z_field,
)
from bubbleforge.quadrature import (
    Ball,
    Complement,
    NonIntegrableError,
    QuadratureResult,
    QuadratureSpec,
    SymmetryError,
    Wedge,
    WedgeBall,
    WholeSpace,
    integrate,
    integrate_whole_by_wedges,
    lp_norm,
)
from bubbleforge.symmetry import PolygonConfig

SEXTIC = 3**1.5 * math.pi**2 / 4


def radial_oracle(profile, a=0.0, b=np.inf):
    """4 pi int_a^b r^2 profile(r) dr by adaptive 1D quadrature."""
    val, _ = sci.quad(lambda r: 4 * math.pi * r * r * profile(r), a, b, epsabs=0, epsrel=1e-13, limit=500)
    return val


def U_profile(r):
    return 3**0.25 / math.sqrt(1 + r * r)


# --- radial oracles ----------------------------------------------------------------

def test_inverse_cube_profile():
    f = ScalarField(lambda x: (1 + np.sum(x * x, axis=-1)) ** -3, hot_spots=(HotSpot((0, 0, 0), 1.0),))
    res = integrate(f)
    assert res.converged
    assert res.value == pytest.approx(math.pi**2 / 4, rel=1e-7)
    assert res.value == pytest.approx(radial_oracle(lambda r: (1 + r * r) ** -3), rel=1e-7)
    assert 0 <= res.err_est < 1e-6 and res.n_evals > 0


@pytest.mark.parametrize("power", [4, 5, 6])
def test_bubble_powers_match_radial_oracle(power):
    res = integrate(field_U() ** power)
    assert res.value == pytest.approx(radial_oracle(lambda r: U_profile(r) ** power), rel=1e-7)


def test_cube_of_bubble_is_not_integrable():
    with pytest.raises(NonIntegrableError):
        integrate(field_U() ** 3)


def test_sextic_norm_is_scale_invariant():
    assert lp_norm(field_U(), 6) == pytest.approx(SEXTIC ** (1 / 6), rel=1e-7)
    for delta, xi in ((1e-2, (0.3, 0.0, 0.0)), (1e-5, (0.0, -1.0, 2.0))):
        assert lp_norm(bubble_field(BubbleParams(delta, xi)), 6) == pytest.approx(SEXTIC ** (1 / 6), rel=1e-7)


def test_kernel_product_norm():
    f = field_U() ** 4 * z_field(0) ** 2
    assert lp_norm(f, 1) == pytest.approx(3 * math.sqrt(3) * math.pi**2 / 64, rel=1e-7)
    assert lp_norm(f, 1) == pytest.approx(0.8014, abs=1e-4)


@pytest.mark.parametrize("delta", [1e-2, 1e-4, 1e-6])
def test_ball_log_integral(delta):
    R = 0.5 / delta
    f = ScalarField(lambda y: (1 + np.sum(y * y, axis=-1)) ** -1.5, hot_spots=(HotSpot((0, 0, 0), 1.0),))
    res = integrate(f, Ball((0, 0, 0), R))
    exact = 4 * math.pi * (math.asinh(R) - R / math.sqrt(1 + R * R))
    assert res.value == pytest.approx(exact, rel=1e-7)
    # O(1) remainder against 4 pi |log delta|
    assert abs(res.value - 4 * math.pi * abs(math.log(delta))) < 4 * math.pi


# --- region algebra ----------------------------------------------------------------

def _sextic_bubble(delta, xi):
    return bubble_field(BubbleParams(delta, xi)) ** 6


@pytest.mark.parametrize("delta,xi", [(1.0, (0.0, 0.0, 0.0)), (0.2, (0.5, 0.0, 0.3)), (1e-3, (0.0, 0.9, 0.0))])
def test_kelvin_split_consistency(delta, xi):
    f = _sextic_bubble(delta, xi)
    outside = integrate(f, Complement((Ball((0, 0, 0), 1.0),)))
    inv = np.asarray(xi) / (np.dot(xi, xi) + delta**2)
    scale = delta / (np.dot(xi, xi) + delta**2)

    def pulled(y):
        n2 = np.sum(y * y, axis=-1)
        return n2**-3 * f(y / n2[..., None])

    g = ScalarField(pulled, hot_spots=(HotSpot(tuple(inv), scale),))
    inside = integrate(g, Ball((0, 0, 0), 1.0))
    assert outside.value == pytest.approx(inside.value, rel=1e-7, abs=1e-12)
    whole = integrate(f)
    assert outside.value + integrate(f, Ball((0, 0, 0), 1.0)).value == pytest.approx(whole.value, rel=1e-7)


def test_complement_of_several_balls():
    f = field_U() ** 6
    balls = (Ball((2.0, 0, 0), 0.5), Ball((-2.0, 0, 0), 0.7))
    res = integrate(f, Complement(balls))
    expect = integrate(f).value - sum(integrate(f, b).value for b in balls)
    assert res.value == pytest.approx(expect, rel=1e-9)


def test_complement_rejects_overlap():
    with pytest.raises(ValueError):
        Complement((Ball((0, 0, 0), 1.0), Ball((1.5, 0, 0), 1.0)))


@pytest.mark.parametrize("k", [2, 3, 5])
def test_separation_balls_default_to_half_the_gap(k):
    cfg = PolygonConfig(k, 1.0, 1e-2)
    region = Complement.around_polygon(cfg)
    gap = 2 * math.sin(math.pi / k) * cfg.radius
    assert [b.radius for b in region.balls] == pytest.approx([gap / 2] * k, rel=1e-14)
    assert Complement.around_polygon(cfg, 0.1).balls[0].radius == 0.1
    with pytest.raises(ValueError):
        Complement.around_polygon(cfg, 0.6 * gap)


def test_separation_balls_split_the_polygon_energy():
    cfg = PolygonConfig(3, 1.0, 1e-2)
    f = field_V(cfg) ** 6
    region = Complement.around_polygon(cfg)
    inside = sum(integrate(f, b).value for b in region.balls)
    assert integrate(f, region).value + inside == pytest.approx(integrate(f).value, rel=1e-8)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_wedges_tile_whole_space(k):
    cfg = PolygonConfig(k, 1.0, 1e-2)
    f = field_V(cfg) ** 6
    by_wedges = integrate_whole_by_wedges(f, cfg)
    direct = integrate(f)
    assert by_wedges.value == pytest.approx(direct.value, rel=1e-6)
    assert abs(by_wedges.value - direct.value) <= 3 * (by_wedges.err_est + direct.err_est) + 1e-9 * direct.value


def test_radial_wedge_shortcut():
    cfg = PolygonConfig(4, 1.0, 1e-2)
    res = integrate_whole_by_wedges(field_U() ** 6, cfg)
    assert res.value == pytest.approx(SEXTIC, rel=1e-7)


def test_wedge_ball_is_a_kth_of_the_ball():
    f = field_U() ** 6
    full = integrate(f, Ball((0, 0, 0), 2.0)).value
    assert 3 * integrate(f, WedgeBall(3, 2.0)).value == pytest.approx(full, rel=1e-9)


def test_wedge_rejects_non_invariant_integrand():
    f = ScalarField(lambda x: x[..., 0] * (1 + np.sum(x * x, axis=-1)) ** -4)
    with pytest.raises(SymmetryError):
        integrate_whole_by_wedges(f, PolygonConfig(3, 1.0, 1e-2))


def test_phase_shift_does_not_change_integrals():
    cfg = PolygonConfig(3, 1.0, 1e-2, q=2, r=2)
    f = field_V(cfg) ** 6
    g = field_V(cfg.with_(r=1)) ** 6
    assert integrate(f).value == pytest.approx(integrate(g).value, rel=1e-7)
    assert integrate(f.rotated(0.37)).value == pytest.approx(integrate(g).value, rel=1e-7)


# --- engine behavior ----------------------------------------------------------------

def test_narrow_bubble_is_found():
    f = _sextic_bubble(1e-6, (0.4, -0.3, 0.2))
    assert integrate(f).value == pytest.approx(SEXTIC, rel=1e-7)


def test_unconverged_result_is_flagged():
    spec = QuadratureSpec(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=1)
    res = integrate(_sextic_bubble(1e-3, (0.5, 0, 0)), WholeSpace(), spec)
    assert not res.converged
    assert np.isfinite(res.value) and res.err_est >= 0


def test_doubling_budget_is_stable():
    f = field_V(PolygonConfig(3, 1.0, 1e-3)) ** 6
    first = integrate(f, WholeSpace(), QuadratureSpec(max_subdivisions=4000))
    assert first.converged
    second = integrate(f, WholeSpace(), QuadratureSpec(max_subdivisions=8000))
    assert abs(second.value - first.value) <= 3 * first.err_est


def test_tightening_tolerance_stays_within_estimate():
    f = field_U() ** 4 * z_field(0) ** 2
    loose = integrate(f, WholeSpace(), QuadratureSpec(rel_tol=1e-5))
    tight = integrate(f, WholeSpace(), QuadratureSpec(rel_tol=1e-11))
    assert abs(loose.value - tight.value) <= 3 * loose.err_est


def test_results_are_deterministic_across_threads(monkeypatch):
    f = field_V(PolygonConfig(3, 1.0, 1e-3)) ** 6
    monkeypatch.setenv("BUBBLEFORGE_THREADS", "1")
    a = integrate(f)
    b = integrate(f)
    monkeypatch.setenv("BUBBLEFORGE_THREADS", "3")
    c = integrate(f)
    assert a == b
    assert a.value == c.value and a.err_est == c.err_est


def test_spec_and_region_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)
    with pytest.raises(ValueError):
        Ball((0, 0, 0), 0.0)
    with pytest.raises(ValueError):
        Wedge(0)
    with pytest.raises(ValueError):
        lp_norm(field_U(), 0.5)


def test_result_arithmetic():
    r = QuadratureResult(1.0, 0.1, 10) + QuadratureResult(2.0, 0.2, 5, converged=False)
    assert (r.value, r.n_evals, r.converged) == (3.0, 15, False)
    assert r.err_est == pytest.approx(0.3)
    s = r.scaled(-2.0)
    assert s.value == -6.0 and s.err_est == pytest.approx(0.6)
