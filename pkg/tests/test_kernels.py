import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatkernels.kernels import (S_MAX, DomainError, KernelKind, TimeParam, classical_kernel,
                                 hermite_kernel_s, hermite_kernel_t, hermite_shifted_kernel,
                                 kernel_profile, log_kernel, meda_forward, meda_inverse,
                                 ou_gaussian_kernel, ou_kernel)

# frozen references (30-digit evaluations)
HALF_LN3 = 0.549306144334054845697622618461
SQRT_0_9375_OVER_PI = 0.546274215296039535271692852901
SHIFTED_T05 = 0.606737998837382818467680607405

ALL_KINDS = list(KernelKind)
coord = st.floats(-10, 10, allow_nan=False)
times = st.floats(1e-3, 5.0)


def points(n):
    return st.lists(coord, min_size=n, max_size=n).map(np.array)


# Meda maps

def test_meda_forward_half():
    assert meda_forward(0.5) == pytest.approx(HALF_LN3, rel=1e-15)


def test_meda_inverse_of_forward_example():
    assert meda_inverse(0.549306144) == pytest.approx(0.5, abs=1e-9)


def test_meda_forward_tanh_one():
    assert meda_forward(math.tanh(1.0)) == pytest.approx(1.0, abs=1e-14)


def test_meda_small_limits():
    assert meda_forward(1e-300) == pytest.approx(1e-300, rel=1e-15)
    assert meda_inverse(1e-300) == pytest.approx(1e-300, rel=1e-15)


def test_meda_inverse_saturates_below_one():
    s = meda_inverse(20.0)
    assert s < 1.0
    assert s == S_MAX
    # 1 - 2^-53 is the closest double below 1
    assert 1.0 - s <= 2.0 ** -53


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
def test_meda_forward_domain(bad):
    with pytest.raises(DomainError):
        meda_forward(bad)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_meda_inverse_domain(bad):
    with pytest.raises(DomainError):
        meda_inverse(bad)


def test_meda_round_trip_bulk():
    rng = np.random.default_rng(0)
    s = rng.uniform(1e-6, 1 - 1e-6, 10_000)
    back = meda_inverse(meda_forward(s))
    assert np.max(np.abs(back / s - 1.0)) <= 1e-13


def test_time_param_both_coordinates():
    tp = TimeParam.from_t(1.0)
    assert tp.s == math.tanh(1.0)
    tp = TimeParam.from_s(0.5)
    assert tp.t == pytest.approx(HALF_LN3, rel=1e-15)
    with pytest.raises(DomainError):
        TimeParam.from_t(0.0)


# classical kernel

def test_classical_normalization_point():
    assert classical_kernel([0.3], [0.3], 1 / (4 * math.pi)) == pytest.approx(0.0, abs=1e-15)


def test_classical_n2_substitution():
    t = 0.7
    y = np.array([2.0 * math.sqrt(t), 0.0])
    expected = -math.log(4 * math.pi * t) - 1.0
    assert classical_kernel(np.zeros(2), y, t) == pytest.approx(expected, rel=1e-14)


def test_classical_mass_one():
    y = np.linspace(-30, 30, 200_001)
    vals = np.exp(classical_kernel([0.4], y[:, None], 2.0))
    assert np.trapezoid(vals, y) == pytest.approx(1.0, abs=1e-10)


# Hermite kernel, both forms

def test_hermite_s_origin():
    assert math.exp(hermite_kernel_s([0.0], [0.0], 0.25)) == pytest.approx(
        SQRT_0_9375_OVER_PI, rel=1e-14)


@pytest.mark.parametrize("t", [0.01, 0.3, 1.0, 4.0])
def test_hermite_t_origin(t):
    expected = -0.5 * math.log(2 * math.pi * math.sinh(2 * t))
    assert hermite_kernel_t([0.0], [0.0], t) == pytest.approx(expected, rel=1e-14)


def test_hermite_forms_agree_example():
    a = hermite_kernel_t([1.0], [-1.0], 0.3)
    b = hermite_kernel_s([1.0], [-1.0], math.tanh(0.3))
    assert abs(a - b) <= 1e-14


def test_hermite_small_s_matches_classical():
    x, y = np.array([0.3]), np.array([0.5])
    ratios = [math.exp(hermite_kernel_s(x, y, s) - classical_kernel(x, y, s))
              for s in (1e-2, 1e-4, 1e-6)]
    devs = [abs(r - 1.0) for r in ratios]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 1e-5


def test_hermite_remark_bound_at_kernel_level():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3):
        x = rng.uniform(-5, 5, (2000, n))
        y = rng.uniform(-5, 5, (2000, n))
        s = rng.uniform(1e-3, 0.999, 2000)
        lhs = hermite_kernel_s(x, y, s)
        rhs = 0.5 * n * np.log1p(-s * s) + classical_kernel(x, y, s)
        assert np.all(lhs <= rhs + 1e-12 * np.maximum(1, np.abs(rhs)))


def test_hermite_forms_bulk():
    rng = np.random.default_rng(2)
    for n in (1, 2, 3):
        x = rng.uniform(-10, 10, (3334, n))
        y = x + np.sqrt(2 * 5.0) * rng.standard_normal((3334, n))
        t = np.exp(rng.uniform(math.log(1e-3), math.log(5.0), 3334))
        a = hermite_kernel_t(x, y, t)
        b = hermite_kernel_s(x, y, np.tanh(t))
        assert np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))) <= 1e-11


@settings(max_examples=200, deadline=None)
@given(points(2), points(2), times)
def test_hermite_factorizes(x, y, t):
    full = hermite_kernel_t(x, y, t)
    parts = hermite_kernel_t(x[:1], y[:1], t) + hermite_kernel_t(x[1:], y[1:], t)
    assert full == pytest.approx(parts, rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(points(3), points(3), times)
def test_classical_factorizes(x, y, t):
    full = classical_kernel(x, y, t)
    parts = sum(classical_kernel(x[i:i + 1], y[i:i + 1], t) for i in range(3))
    assert full == pytest.approx(parts, rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(points(3), points(3), times)
def test_ou_factorizes(x, y, t):
    full = ou_kernel(x, y, t)
    parts = sum(ou_kernel(x[i:i + 1], y[i:i + 1], t) for i in range(3))
    assert full == pytest.approx(parts, rel=1e-12, abs=1e-11)


@settings(max_examples=200, deadline=None)
@given(points(2), points(2), times)
def test_symmetry(x, y, t):
    for fn in (classical_kernel, hermite_kernel_t):
        assert fn(x, y, t) == pytest.approx(fn(y, x, t), rel=1e-13, abs=1e-13)
    assert ou_gaussian_kernel(x, y, t) == pytest.approx(ou_gaussian_kernel(y, x, t),
                                                        rel=1e-12, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=2),
       st.lists(st.floats(-50, 50), min_size=2, max_size=2),
       st.floats(1e-8, 50.0))
def test_log_densities_finite(x, y, t):
    for kind in ALL_KINDS:
        assert np.isfinite(log_kernel(kind, np.array(x), np.array(y), t))
    assert np.isfinite(hermite_kernel_s(np.array(x), np.array(y), meda_inverse(t)))


# shifted Hermite and OU

def test_shifted_origin_value():
    assert math.exp(hermite_shifted_kernel([0.0], [0.0], 0.5)) == pytest.approx(
        SHIFTED_T05, rel=1e-14)


def test_shifted_ratio_small_t():
    for t in (1e-2, 1e-4, 1e-6):
        ratio = math.exp(hermite_shifted_kernel([0.2], [0.1], t) - hermite_kernel_t([0.2], [0.1], t))
        assert ratio == pytest.approx(math.exp(t), rel=1e-12)


def test_ou_symmetry_example():
    a = ou_gaussian_kernel([1.0], [-2.0], 0.5)
    b = ou_gaussian_kernel([-2.0], [1.0], 0.5)
    assert abs(a - b) <= 1e-14 * abs(a)


def test_ou_no_overflow_far_out():
    # e^{|x|^2/2} alone overflows at |x| = 40
    v = ou_kernel([40.0], [39.9], 0.01)
    assert np.isfinite(v)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_profile_matches_kernel(kind):
    # log kernel in y is a quadratic with the reported center and width
    x, t = np.array([0.7]), 0.4
    center, t_eff = kernel_profile(kind, x, t)
    y = np.array([[-1.0], [0.0], [1.0]]) + center
    v = log_kernel(kind, x, y, t)
    curvature = v[0] - 2 * v[1] + v[2]
    assert curvature == pytest.approx(-2.0 / (4.0 * t_eff), rel=1e-12)
    assert v[0] == pytest.approx(v[2], rel=1e-12)


def test_kind_parse():
    assert KernelKind.parse("OU") is KernelKind.ORNSTEIN_UHLENBECK
    assert KernelKind.parse("hermite_shifted") is KernelKind.HERMITE_SHIFTED
    with pytest.raises(ValueError):
        KernelKind.parse("laplace")
