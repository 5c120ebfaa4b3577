import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hulthen_fss.errors import QuadratureError
from hulthen_fss.quadrature import (
    QuadratureRule,
    bernoulli_even,
    default_rule,
    exp_moment,
    gauss_legendre_nodes,
    hulthen_moment_integrand,
    hurwitz_moment,
    hurwitz_series_x4,
    integrate_semi_infinite,
    integral_test_bound,
)

# 24 (zeta(5) - 1 - 2^-5), evaluated independently
SERIES_AT_3 = float(24 * (mpmath.zeta(5) - 1 - mpmath.mpf(2) ** -5))


def test_low_order_rules():
    x, w = gauss_legendre_nodes(1)
    assert x.tolist() == [0.0] and w.tolist() == [2.0]
    x, w = gauss_legendre_nodes(2)
    np.testing.assert_allclose(sorted(x), [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(w, [1.0, 1.0], rtol=1e-15)


def test_order5_is_exact_for_degree8():
    x, w = gauss_legendre_nodes(5)
    assert float(np.sum(w * x**8)) == pytest.approx(2 / 9, rel=1e-15)


@pytest.mark.parametrize("order", [0, -1, 2.5])
def test_bad_order(order):
    with pytest.raises(ValueError):
        gauss_legendre_nodes(order)


@given(st.integers(1, 120))
def test_weights_partition_unity(order):
    x, w = gauss_legendre_nodes(order)
    assert math.fsum(w) == pytest.approx(2.0, rel=1e-13)
    assert np.all(w > 0)
    np.testing.assert_allclose(np.sort(x), -np.sort(x)[::-1], atol=1e-15)


def test_rule_validation():
    with pytest.raises(ValueError):
        QuadratureRule(0)
    with pytest.raises(ValueError):
        QuadratureRule(4, points_per_panel=1)
    with pytest.raises(ValueError):
        QuadratureRule(4, x_max=0)
    with pytest.raises(ValueError):
        QuadratureRule(4, scheme="simpson")


def test_known_integrals():
    rule = QuadratureRule(40, 64, 60.0)
    assert integrate_semi_infinite(lambda x: np.exp(-x), rule) == pytest.approx(1.0, abs=1e-12)
    assert integrate_semi_infinite(lambda x: x**4 * np.exp(-2 * x), rule) == pytest.approx(0.75, abs=1e-12)
    val = integrate_semi_infinite(hulthen_moment_integrand(4, 3.0), rule)
    assert val == pytest.approx(SERIES_AT_3, abs=1e-10)


def test_non_finite_sample_reports_node():
    rule = QuadratureRule(2, 4, 1.0)
    with pytest.raises(QuadratureError) as info, np.errstate(divide="ignore"):
        integrate_semi_infinite(lambda x: 1.0 / (x - x[3]), rule)
    assert info.value.node is not None


@pytest.mark.parametrize("p", range(5))
@pytest.mark.parametrize("g", [0.1, 1.0, 10.0])
def test_exp_moment_matches_quadrature(p, g):
    val = integrate_semi_infinite(lambda x: x**p * np.exp(-g * x), default_rule(g))
    assert val == pytest.approx(exp_moment(p, g), rel=1e-12)


def test_exp_moment_examples_and_errors():
    assert exp_moment(0, 1.0) == 1.0
    assert exp_moment(4, 2.0) == 0.75
    assert exp_moment(1, 3.0) == pytest.approx(1 / 9)
    with pytest.raises(ValueError):
        exp_moment(1, 0.0)
    with pytest.raises(ValueError):
        exp_moment(1, -2.0)


def test_series_examples():
    assert hurwitz_series_x4(1.0, 1e-15) == pytest.approx(24 * float(mpmath.zeta(5)), rel=1e-15)
    assert hurwitz_series_x4(3.0, 1e-15) == pytest.approx(SERIES_AT_3, abs=1e-10)
    assert hurwitz_series_x4(3.0, 1e-15) == pytest.approx(0.13626612, abs=1e-8)
    big = hurwitz_series_x4(1e4, 1e-15)
    assert big == pytest.approx(24 / 1e4**5, rel=3e-4)
    with pytest.raises(ValueError):
        hurwitz_series_x4(1.0, 0.0)
    with pytest.raises(ValueError):
        hurwitz_series_x4(-1.0, 1e-12)


@given(st.floats(0.01, 3e4), st.sampled_from([1, 2, 3, 4]))
def test_moment_matches_hurwitz_zeta(shift, p):
    ref = math.factorial(p) * mpmath.zeta(p + 1, shift)
    assert hurwitz_moment(p, shift) == pytest.approx(float(ref), rel=1e-15)


def test_moment_in_extended_precision():
    from flint import arb, ctx

    saved = ctx.prec
    ctx.prec = 128
    try:
        s = arb(7) / 3
        val = hurwitz_moment(4, s, rtol=2.0**-130)
        ref = 24 * arb(5).zeta(s)
        assert abs(float((val - ref) / ref)) < 1e-35
    finally:
        ctx.prec = saved


def test_integral_test_bound_dominates_series():
    for s in (1.0, 3.0, 50.0):
        assert integral_test_bound(4, s) >= hurwitz_series_x4(s, 1e-15)


def test_bernoulli_numbers():
    from fractions import Fraction

    assert bernoulli_even(3) == (Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42))


def test_integrand_limit_at_zero():
    f = hulthen_moment_integrand(4, 2.0)
    assert f(np.array([0.0]))[0] == 0.0
    assert f(np.array([1e-8]))[0] == pytest.approx(1e-24, rel=1e-6)
    assert hulthen_moment_integrand(1, 2.0)(np.array([0.0]))[0] == 1.0
