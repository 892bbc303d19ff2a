import math

import numpy as np
import pytest

from bubbleforge import energy as E
from bubbleforge.fields import ZERO, CouplingRegime, field_U, field_V
from bubbleforge.scaling import constants, g
from bubbleforge.symmetry import PolygonConfig

S = 3**1.5 * math.pi**2 / 4


# --- energy functional ------------------------------------------------------------

def test_single_bubble_energy():
    rep = E.j_beta(field_U(), ZERO, CouplingRegime(-3.0))
    assert rep.total == pytest.approx(math.sqrt(3) * math.pi**2 / 4, rel=1e-7)
    assert rep.gradient_part == pytest.approx(S, rel=1e-7)


def test_zero_pair_energy():
    rep = E.j_beta(ZERO, ZERO, CouplingRegime(-3.0))
    assert (rep.gradient_part, rep.sextic_part, rep.coupling_part, rep.total) == (0, 0, 0, 0)


@pytest.mark.parametrize("beta", [-5.0, -0.5, 2.0])
def test_synchronized_pair_energy(beta):
    rep = E.j_beta(field_U(), field_U(), CouplingRegime(beta))
    assert rep.total == pytest.approx((2 / 3 - beta / 3) * S, rel=1e-7)


def test_report_reassembles():
    rep = E.EnergyReport.assemble(3.0, 6.0, 1.5, -2.0)
    assert rep.total == 3.0 / 2 - 6.0 / 6 + 2.0 / 3 * 1.5


def test_uncoupled_energy_splits():
    cfg = PolygonConfig(2, 1.0, 5e-2)
    reg = CouplingRegime(0.0)
    U, V = field_U(), field_V(cfg)
    both = E.j_beta(U, V, reg).total
    assert both == pytest.approx(E.j_beta(U, ZERO, reg).total + E.j_beta(ZERO, V, reg).total, rel=1e-12)


def test_ansatz_energy_matches_general_route():
    # closed-form constant plus small corrections versus direct whole-space integrals
    cfg = PolygonConfig(2, 1.0, 5e-2)
    reg = CouplingRegime(-4.0)
    fast = E.ansatz_energy(cfg, reg)
    slow = E.j_beta(field_U(), field_V(cfg), reg)
    assert fast.gradient_part == pytest.approx(slow.gradient_part, rel=1e-7)
    assert fast.sextic_part == pytest.approx(slow.sextic_part, rel=1e-7)
    assert fast.coupling_part == pytest.approx(slow.coupling_part, rel=1e-7)
    assert fast.total == pytest.approx(slow.total, rel=1e-7)


# --- expansion --------------------------------------------------------------------

def test_expansion_report_consistency():
    beta = -math.exp(4) / 8
    rep = E.f_beta_expansion_check(2, 2 / 9, beta)
    assert rep.delta == pytest.approx(math.exp(-8), rel=1e-12)
    # both sides carry the O(1) constant, so agreement is limited by its roundoff
    assert rep.theta == pytest.approx(rep.F_numeric - rep.F_predicted, abs=1e-13)
    assert rep.F_predicted == pytest.approx(S + rep.delta * g(2, 2 / 9), rel=1e-15)
    assert rep.fitted_C == pytest.approx(rep.scaled_theta, rel=1e-12)


# --- error norms ------------------------------------------------------------------

def test_single_copy_tilde_norms_equal_plain():
    rep = E.error_norm_report(PolygonConfig(2, 1.0, 1e-2), CouplingRegime(-5.0))
    assert rep.converged
    assert (rep.E1tilde, rep.E2tilde) == (rep.E1, rep.E2)


def test_single_bubble_uncoupled_error_vanishes():
    rep = E.error_norm_report(PolygonConfig(1, 1.0, 1e-2), CouplingRegime(0.0))
    assert rep.E2 == 0.0 and rep.E1 == 0.0


def test_E1_norm_is_linear_in_coupling():
    cfg = PolygonConfig(3, 1.0, 1e-2)
    a = E.error_norm_report(cfg, CouplingRegime(-2.0))
    b = E.error_norm_report(cfg, CouplingRegime(-50.0))
    assert a.E1 / 2.0 == pytest.approx(b.E1 / 50.0, rel=1e-7)


def test_norms_are_gauge_invariant():
    reg = CouplingRegime(-5.0, alpha=1.0, q=2)
    base = E.error_norm_report(PolygonConfig(2, 1.0, 1e-2, q=2, r=1), reg)
    turned = E.error_norm_report(PolygonConfig(2, 1.0, 1e-2, q=2, r=2), reg)
    for name in ("E1", "E2", "E1tilde", "E2tilde"):
        assert getattr(turned, name) == pytest.approx(getattr(base, name), rel=1e-6)
    assert base.E1tilde > base.E1


# --- integral lemma -------------------------------------------------------------------

def test_lemma_pair_list():
    assert len(E.LEMMA_A1_PAIRS) == 11
    assert all(nu + gamma <= 6 + 1e-12 for nu, gamma in E.LEMMA_A1_PAIRS)


def test_lemma_rejects_large_exponents():
    with pytest.raises(ValueError):
        E.lemma_a1_check(4.0, 2.5, 2, [1e-2])
    with pytest.raises(ValueError):
        E.lemma_a1_check(-1.0, 0.0, 2, [1e-2])


def test_lemma_bound_branches():
    d, k = 1e-4, 3
    assert E.lemma_a1_f2(d, k, 3.0, 1.0) == pytest.approx(d**2 * abs(math.log(d)), rel=1e-15)
    assert E.lemma_a1_f2(d, k, 1.5, 0.0) == pytest.approx(d**0.75 * k**-1.5, rel=1e-15)
    assert E.lemma_a1_f2(d, k, 4.5, 0.0) == pytest.approx(d**0.75, rel=1e-15)
    assert E.lemma_a1_f1(k, 2.0, 1.0) == pytest.approx(math.log(k) ** 2, rel=1e-15)


def test_lemma_ratio_rows():
    rep = E.lemma_a1_check(18 / 5, 0.0, 2, [1e-3, 1e-2])
    assert [r.delta for r in rep.rows] == [1e-2, 1e-3]
    assert all(r.ratio > 0 and np.isfinite(r.ratio) for r in rep.rows)
    assert rep.growth() <= 10
    assert rep.fitted_C == max(rep.ratios)


# --- kernel norm ---------------------------------------------------------------------

@pytest.mark.parametrize("delta", [1e-2, 1e-4])
def test_single_bubble_kernel_norm(delta):
    rep = E.zkt_norm_check(PolygonConfig(1, 1.0, delta))
    assert rep.value == pytest.approx(E.KERNEL_NORM, rel=1e-7)
    assert rep.off_diagonal == 0.0


def test_kernel_norm_cross_terms_are_order_delta():
    a = E.zkt_norm_check(PolygonConfig(2, 1.0, 1e-2))
    b = E.zkt_norm_check(PolygonConfig(2, 1.0, 1e-3))
    assert abs(b.off_diagonal) <= 10 * abs(a.off_diagonal) * 1e-1
    assert b.limit == pytest.approx(2 * 15 * math.sqrt(3) * math.pi**2 / 64, rel=1e-15)


# --- reduction integrals ---------------------------------------------------------------

def test_third_integral_vanishes_without_family_coupling():
    cfg = PolygonConfig(2, 1.0, 1e-3, q=2)
    assert E.reduction_integrals(cfg, CouplingRegime(-5.0, alpha=0.0, q=2)).I3 == 0.0
    assert E.reduction_integrals(cfg.with_(q=1, r=1), CouplingRegime(-5.0, alpha=3.0)).I3 == 0.0


def test_reduction_leading_terms():
    cfg = PolygonConfig(2, 1.0, 1e-3)
    reg = CouplingRegime(-5.0)
    red = E.reduction_integrals(cfg, reg)
    c = constants(2)
    assert red.I1_leading == pytest.approx(c.c1_tilde * 1e-3, rel=1e-15)
    assert red.I2_leading == pytest.approx(c.c2_tilde * -5.0 * 1e-3**1.5 * math.log(1e3), rel=1e-15)
    assert 0.9 < red.I1_ratio < 1.1
    assert 0.5 < red.I2_ratio < 2.0


def test_reduction_needs_a_polygon():
    with pytest.raises(ValueError):
        E.reduction_integrals(PolygonConfig(1, 1.0, 1e-3), CouplingRegime(-1.0))


# --- extrapolation helpers ---------------------------------------------------------------

def test_richardson_recovers_linear_limit():
    xs = np.array([1e-2, 1e-3, 1e-4])
    assert E.richardson(xs, 3.0 + 7.0 * xs) == pytest.approx(3.0, rel=1e-12)
    assert E.richardson(xs, 3.0 + 7.0 * xs - 2.0 * xs**2, order=2) == pytest.approx(3.0, rel=1e-12)


def test_loglog_slope():
    xs = np.array([1e-2, 1e-3, 1e-4])
    assert E.loglog_slope(xs, -4.0 * xs**1.5) == pytest.approx(1.5, rel=1e-12)
