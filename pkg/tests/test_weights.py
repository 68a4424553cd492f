import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catalog import FAMILIES, P_VALUES, draws
from heatkernels.weights import (Constant, GaussianWeight, LebesgueExponent, PowerWeight,
                                 StretchedExp, dpw_classify, dpw_norm, gaussian_measure_density,
                                 parse_weight, transfer_weight, weight_value)

INV_4TH_ROOT_2PI = 0.631618777746064701290010510108   # (2 pi)^(-1/4)


def gaussian_norm_closed_form(a, t0, p, n=1):
    """(4 pi t0)^(-n/2) || exp(-(M + a/p)|x|^2) ||_{p'} with M = 1/(4 t0)."""
    M = 1.0 / (4.0 * t0)
    k = M + a / p
    pc = p / (p - 1.0)
    return (4 * math.pi * t0) ** (-n / 2) * (math.pi / (pc * k)) ** (n / (2 * pc))


# values

def test_weight_values():
    assert weight_value(Constant(1.0), [3.0]) == 1.0
    assert weight_value(GaussianWeight(-1.0), [0.6, 0.8]) == pytest.approx(math.exp(-1.0))
    assert weight_value(PowerWeight(2.0), [1.0]) == pytest.approx(4.0)


def test_gaussian_measure_density():
    assert gaussian_measure_density([0.0]) == pytest.approx(math.pi ** -0.5)
    x = np.linspace(-12, 12, 100_001)
    assert np.trapezoid(gaussian_measure_density(x[:, None]), x) == pytest.approx(1.0, abs=1e-12)
    assert gaussian_measure_density([0.3, -0.8]) == pytest.approx(
        gaussian_measure_density([0.3]) * gaussian_measure_density([-0.8]), rel=1e-15)


def test_lebesgue_exponent():
    assert LebesgueExponent(2.0).p_conj == 2.0
    assert LebesgueExponent(1.0).p_conj == math.inf and LebesgueExponent(1.0).is_sup_regime
    assert LebesgueExponent(4.0).p_conj == pytest.approx(4.0 / 3.0)
    with pytest.raises(ValueError):
        LebesgueExponent(0.5)


def test_parse_weight():
    assert parse_weight("constant:2") == Constant(2.0)
    assert parse_weight("gaussian:-4") == GaussianWeight(-4.0)
    assert parse_weight("stretched-exp:1,3") == StretchedExp(1.0, 3.0)
    for bad in ("bogus:1", "power:", "stretched-exp:1", "gaussian:x"):
        with pytest.raises(ValueError):
            parse_weight(bad)


# norm

def test_reference_norm():
    res = dpw_norm(Constant(1.0), 0.25, LebesgueExponent(2.0), 1)
    assert res.value == pytest.approx(INV_4TH_ROOT_2PI, abs=1e-12)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_gaussian_norm_closed_form(p, n):
    for a, t0 in ((-1.0, 0.1), (0.5, 0.3), (2.0, 1.0)):
        if 1 / (4 * t0) + a / p <= 0:
            continue
        res = dpw_norm(GaussianWeight(a), t0, LebesgueExponent(p), n)
        assert res.value == pytest.approx(gaussian_norm_closed_form(a, t0, p, n), rel=1e-9)


def test_sup_norm_gaussian():
    # p = 1: sup of (4 pi t0)^(-1/2) exp(-(M + a)|x|^2) is attained at 0
    res = dpw_norm(GaussianWeight(-1.0), 0.1, LebesgueExponent(1.0), 1)
    assert res.value == pytest.approx((4 * math.pi * 0.1) ** -0.5, rel=1e-12)


def test_quartic_weight_always_divergent():
    for p in P_VALUES:
        for t0 in (1e-3, 0.25, 10.0):
            assert dpw_norm(StretchedExp(1.0, 4.0), t0, LebesgueExponent(p)).divergent


@pytest.mark.parametrize("p", P_VALUES)
def test_threshold_sharpness(p):
    for a in (-0.5, -4.0, -9.0):
        v = GaussianWeight(a)
        thr = dpw_classify(v, LebesgueExponent(p)).threshold_M
        assert thr == pytest.approx(-a / p)
        above = dpw_norm(v, 1 / (4 * thr * 1.01), LebesgueExponent(p))
        below = dpw_norm(v, 1 / (4 * thr * 0.99), LebesgueExponent(p))
        assert not above.divergent and math.isfinite(above.value)
        assert below.divergent


# classification

def test_classify_examples():
    g = dpw_classify(GaussianWeight(-4.0), LebesgueExponent(2.0))
    assert g.member and g.threshold_M == 2.0 and g.witness_t0 < 1 / 8
    s = dpw_classify(StretchedExp(1.0, 3.0), LebesgueExponent(2.0))
    assert not s.member and s.witness_t0 is None
    for p in P_VALUES:
        c = dpw_classify(Constant(3.0), LebesgueExponent(p))
        assert c.member and c.threshold_M == 0.0


@pytest.mark.parametrize("family", FAMILIES)
def test_membership_iff_finite_norm(family):
    for v in draws(family, 30, seed=FAMILIES.index(family)):
        for p in P_VALUES:
            pe = LebesgueExponent(p)
            verdict = dpw_classify(v, pe)
            t0 = verdict.witness_t0 if verdict.member else 0.25
            norm = dpw_norm(v, t0, pe)
            assert verdict.member == (not norm.divergent), (v, p)
            assert verdict.member == verdict.numeric_finite, (v, p, verdict.evidence)


def test_non_member_evidence_grows():
    for v in (StretchedExp(1.0, 3.0), StretchedExp(0.5, 4.0), StretchedExp(2.0, 2.5)):
        for p in P_VALUES:
            ev = dpw_classify(v, LebesgueExponent(p)).evidence
            radii = [r for r, _ in ev]
            logs = [lg for _, lg in ev]
            assert radii == [4.0, 8.0, 16.0]
            assert logs[0] < logs[1] < logs[2]


def test_late_growth_evidence_starts_further_out():
    # exponent just above 2: the growth only wins near r = 35
    v = StretchedExp(0.7018721534087193, 2.2960113170492145)
    verdict = dpw_classify(v, LebesgueExponent(2.0))
    radii = [r for r, _ in verdict.evidence]
    assert radii[0] >= 32.0 and radii[1] == 2 * radii[0] and radii[2] == 4 * radii[0]
    assert not verdict.member and not verdict.numeric_finite


def test_interpretation_labelled():
    assert "product" in dpw_classify(Constant(1.0), LebesgueExponent(2.0)).interpretation


# transfer

def test_transfer_examples():
    assert transfer_weight(PowerWeight(3.0), LebesgueExponent(2.0)) == PowerWeight(3.0)
    assert transfer_weight(Constant(1.0), LebesgueExponent(1.0)) == GaussianWeight(-0.5)
    assert transfer_weight(GaussianWeight(1.0), LebesgueExponent(4.0)) == GaussianWeight(2.0)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(0, 10_000), st.sampled_from(P_VALUES))
def test_transfer_keeps_membership(family, seed, p):
    v = draws(family, 1, seed)[0]
    pe = LebesgueExponent(p)
    w = transfer_weight(v, pe)
    assert dpw_classify(v, pe).member == dpw_classify(w, pe).member


@settings(max_examples=100, deadline=None)
@given(st.floats(-6, 6), st.floats(0.0, 5.0), st.sampled_from(P_VALUES))
def test_transfer_pointwise(a, r, p):
    v = PowerWeight(a)
    w = transfer_weight(v, LebesgueExponent(p))
    assert w.log_value(r) == pytest.approx(v.log_value(r) + (p / 2 - 1) * r * r, abs=1e-12)


def test_far_decay_not_reported_divergent():
    # finite for every t0, but at M = 1 the decay only starts near r = 1e15
    res = dpw_norm(StretchedExp(2.8, 1.99), 0.25, LebesgueExponent(2.0))
    assert not res.divergent and not res.converged and math.isnan(res.value)


def test_witness_raised_until_decay_visible():
    v = StretchedExp(2.8, 1.99)
    verdict = dpw_classify(v, LebesgueExponent(2.0))
    assert verdict.member and verdict.numeric_finite
    assert verdict.evidence_M > 1.0
    assert verdict.witness_t0 == pytest.approx(1.0 / (4.0 * verdict.evidence_M))
    res = dpw_norm(v, verdict.witness_t0, LebesgueExponent(2.0))
    assert res.converged and res.log_abs_value == pytest.approx(verdict.log_norm)
