import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hulthen_fss.errors import BracketError, UndefinedPoint
from hulthen_fss.fss import (
    Triple,
    analyze,
    collapse_spread,
    consecutive_triples,
    data_collapse,
    delta_E,
    delta_V,
    estimate_nu,
    extrapolate,
    find_crossing,
    find_curve_crossing,
    gamma_alpha,
    gamma_curve,
    gamma_from_deltas,
    scaled_axes,
    shifted_delta,
)
from hulthen_fss.sweep import EnergySurface, SurfaceRow

GEOMETRIC = Triple(2, 4, 8)


def synthetic(energy, potential, n_list, lambdas):
    rows = []
    for n in n_list:
        for lam in lambdas:
            rows.append(SurfaceRow(float(lam), n, float(energy(lam, n)), float(potential(lam, n)), 0.0))
    return EnergySurface(tuple(rows))


def test_triples():
    assert consecutive_triples([32, 34, 36, 38]) == [Triple(32, 34, 36), Triple(34, 36, 38)]
    assert consecutive_triples([32, 34]) == []
    assert Triple(32, 34, 36).label == "32"
    with pytest.raises(ValueError):
        Triple(34, 32, 36)


def test_power_law_deltas():
    s = synthetic(lambda l, n: 1 / n, lambda l, n: n**-2.0, (2, 4, 8), [0.5])
    assert delta_E(s, 0.5, GEOMETRIC) == pytest.approx(-1.0, abs=1e-12)
    assert delta_V(s, 0.5, GEOMETRIC) == pytest.approx(-2.0, abs=1e-12)


def test_constant_column_is_undefined():
    s = synthetic(lambda l, n: -0.3, lambda l, n: -1.0, (2, 4, 8), [0.5])
    with pytest.raises(UndefinedPoint):
        delta_E(s, 0.5, GEOMETRIC)
    with pytest.raises(UndefinedPoint):
        delta_V(s, 0.5, GEOMETRIC)
    with pytest.raises(UndefinedPoint):
        gamma_alpha(s, 0.5, GEOMETRIC)


def test_alternating_differences_are_undefined():
    with pytest.raises(UndefinedPoint):
        shifted_delta([1.0, 2.0, 1.5], (2, 4, 8))


def test_missing_size_is_undefined():
    s = synthetic(lambda l, n: 1 / n, lambda l, n: 1 / n, (2, 4), [0.5])
    with pytest.raises(UndefinedPoint):
        delta_E(s, 0.5, GEOMETRIC)


def test_gamma_arithmetic():
    assert gamma_from_deltas(-2.0, -1.0) == 2.0
    with pytest.raises(UndefinedPoint):
        gamma_from_deltas(-1.0, -1.0)


@pytest.mark.parametrize("triple", [Triple(2, 4, 8), Triple(3, 6, 12), Triple(5, 10, 20)])
def test_gamma_equals_alpha_for_power_laws(triple):
    # E ~ N^(-alpha/nu), V ~ N^(-(alpha-1)/nu) with alpha = 2, nu = 1
    s = synthetic(lambda l, n: n**-2.0, lambda l, n: n**-1.0, triple.sizes, [0.5])
    assert gamma_alpha(s, 0.5, triple) == pytest.approx(2.0, abs=1e-12)


@given(st.floats(1e-3, 1e3), st.floats(0.2, 4.0))
def test_deltas_invariant_under_rescaling(c, q):
    base = synthetic(lambda l, n: n**-q, lambda l, n: -(n**-q), (2, 4, 8), [0.5])
    scaled = synthetic(lambda l, n: c * n**-q, lambda l, n: -c * n**-q, (2, 4, 8), [0.5])
    assert delta_E(scaled, 0.5, GEOMETRIC) == pytest.approx(delta_E(base, 0.5, GEOMETRIC), rel=1e-12)
    assert delta_V(scaled, 0.5, GEOMETRIC) == pytest.approx(delta_V(base, 0.5, GEOMETRIC), rel=1e-12)


def test_constructed_crossing():
    lam, g = find_curve_crossing(lambda x: 2 + 10 * (x - 0.5), lambda x: 2 + 20 * (x - 0.5))
    assert lam == pytest.approx(0.5, abs=1e-10)
    assert g == pytest.approx(2.0, abs=1e-9)


def test_identical_curves_have_no_crossing():
    with pytest.raises(BracketError):
        find_curve_crossing(lambda x: 2 + x, lambda x: 2 + x)


def test_no_sign_change_reports_endpoints():
    with pytest.raises(BracketError) as info:
        find_curve_crossing(lambda x: 3.0, lambda x: 2.0)
    assert info.value.endpoint_values == (1.0, 1.0)


def test_pole_is_not_a_crossing():
    samples = np.linspace(0.49, 0.55, 200)  # avoids 0.5 exactly
    with pytest.raises(BracketError):
        find_curve_crossing(lambda x: 1 / (x - 0.5), lambda x: 0.0, samples=samples)


def test_several_crossings_warns_and_picks_nearest():
    with pytest.warns(UserWarning):
        lam, _ = find_curve_crossing(lambda x: (x - 0.5) * (x - 0.53), lambda x: 0.0)
    assert lam == pytest.approx(0.5, abs=1e-10)


def test_undefined_points_are_skipped():
    def a(x):
        if x < 0.495:
            raise UndefinedPoint("below")
        return x

    lam, _ = find_curve_crossing(a, lambda x: 0.52)
    assert lam == pytest.approx(0.52, abs=1e-10)


@pytest.mark.parametrize("q,nu", [(2.0, 1.0), (4.0, 0.5)])
def test_nu_from_power_law(q, nu):
    s = synthetic(lambda l, n: n**-q, lambda l, n: n**-1.0, (2, 4, 8), [0.5])
    assert estimate_nu(s, (0.5, 2.0), GEOMETRIC) == pytest.approx(nu, abs=1e-12)


def test_extrapolation_of_exact_line():
    pts = [(n, 0.5 + 1 / n) for n in (32, 40, 48)]
    v, s, r = extrapolate(pts)
    assert v == pytest.approx(0.5, abs=1e-12)
    assert s == pytest.approx(1.0, abs=1e-10)
    assert r < 1e-14
    with pytest.raises(ValueError):
        extrapolate([(32, 0.5)])


def corrected_surface(lambdas):
    # Gamma is exactly 2 at lambda = 0.5 for every triple; the correction term
    # separates the triples elsewhere so adjacent curves cross there
    return synthetic(
        lambda l, n: n**-2.0 * (1 + (l - 0.5) / n),
        lambda l, n: n**-1.0,
        (8, 16, 32, 64),
        lambdas,
    )


def test_analyze_recovers_constructed_critical_point():
    s = corrected_surface(np.linspace(0.45, 0.55, 101))
    # the crossing sits exactly on a grid point; it must be counted once
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lam, g = find_crossing(s, Triple(8, 16, 32), Triple(16, 32, 64), bracket=(0.45, 0.55))
    assert lam == pytest.approx(0.5, abs=1e-9)
    assert g == pytest.approx(2.0, abs=1e-8)
    est = analyze(s, bracket=(0.45, 0.55))
    assert len(est.crossings) == 1 and not est.failures
    c = est.crossings[0]
    assert c.pair == "8-16" and c.n_eff == 8
    assert c.nu_n == pytest.approx(1.0, abs=1e-7)
    # one crossing is not enough for a fit
    assert est.lambda_c is None and est.fits == {}


def test_gamma_curve_skips_undefined():
    s = synthetic(lambda l, n: n**-2.0 if l > 0.5 else -1.0, lambda l, n: n**-1.0, (2, 4, 8), [0.4, 0.6, 0.7])
    lam, g = gamma_curve(s, GEOMETRIC)
    assert lam.tolist() == [0.6, 0.7]
    np.testing.assert_allclose(g, 2.0, atol=1e-12)


def test_scaled_axes_conventions():
    x, y = scaled_axes([0.5, 0.6], [1.0, 2.0], 4, 0.5, 2.0, 1.0)
    np.testing.assert_allclose(x, [0.0, 0.1 / 4])
    np.testing.assert_allclose(y, [1 / 16, 2 / 16])
    x, y = scaled_axes([0.6], [2.0], 4, 0.5, 2.0, 1.0, "standard")
    np.testing.assert_allclose(x, [0.4])
    np.testing.assert_allclose(y, [32.0])
    with pytest.raises(ValueError):
        scaled_axes([0.6], [2.0], 4, 0.5, 2.0, 1.0, "other")


def test_critical_point_maps_to_zero():
    s = synthetic(lambda l, n: -((l - 0.4) ** 2) / n, lambda l, n: -1.0, (32, 40, 48), np.linspace(0.5, 0.56, 7))
    res = data_collapse(s, 0.5, 2.0, 1.0)
    for x, _ in res.curves.values():
        assert x[0] == 0.0


@pytest.mark.parametrize("convention,sign", [("standard", 1.0), ("paper_printed", -1.0)])
def test_perfect_collapse_has_zero_spread(convention, sign):
    lam_c, alpha, nu = 0.5, 2.0, 1.0

    def energy(l, n):
        # E = N^(-s alpha/nu) f((l - lam_c) N^(s/nu)) with a linear scaling function
        x = (l - lam_c) * n ** (sign / nu)
        return n ** (-sign * alpha / nu) * (-1 - 3 * x)

    s = synthetic(energy, lambda l, n: -1.0, (32, 36, 40, 44, 48), np.linspace(0.5, 0.56, 61))
    res = data_collapse(s, lam_c, alpha, nu, convention=convention)
    assert res.spread <= 1e-12


def test_collapse_errors():
    s = synthetic(lambda l, n: -l / n, lambda l, n: -1.0, (32, 40), np.linspace(0.5, 0.56, 7))
    with pytest.raises(ValueError):
        data_collapse(s, 0.5, 2.0, 1.0, window=(0.7, 0.8))
    with pytest.raises(ValueError):
        collapse_spread({32: (np.array([0.0, 1.0]), np.array([0.0, 1.0]))})
    with pytest.raises(ValueError):
        collapse_spread({32: (np.array([0.0, 1.0]), np.zeros(2)), 40: (np.array([2.0, 3.0]), np.zeros(2))})


def test_spread_detects_mismatch():
    x = np.linspace(0, 1, 11)
    assert collapse_spread({1: (x, x), 2: (x, x + 0.1)}) == pytest.approx(0.05 / 1.1, rel=1e-12)
