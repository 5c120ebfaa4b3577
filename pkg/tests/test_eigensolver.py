import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hulthen_fss.basis import BasisSpec, DecayRateGrid, build_decay_rates
from hulthen_fss.eigensolver import EigenPair, ExtendedSolver, ground_state, normalize, solve_generalized
from hulthen_fss.errors import ConditioningError, NoBoundState
from hulthen_fss.pencil import assemble
from hulthen_fss.sweep import potential_expectation


@pytest.fixture(scope="module")
def pencil48():
    return assemble(build_decay_rates(BasisSpec(48)), precision_bits=128)


@pytest.fixture(scope="module")
def solver48(pencil48):
    return ExtendedSolver(pencil48)


def test_diagonal_pencil():
    pairs = solve_generalized(np.diag([1.0, 2.0]), np.zeros((2, 2)), np.eye(2), 3.7)
    assert [p.value.real for p in pairs] == pytest.approx([1.0, 2.0])


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_two_by_two_matches_characteristic_polynomial(entries):
    A = np.array(entries).reshape(2, 2)
    tr, det = np.trace(A), np.linalg.det(A)
    disc = tr * tr - 4 * det
    roots = sorted(np.roots([1, -tr, det]), key=lambda z: (z.real, z.imag))
    got = [p.value for p in solve_generalized(A, np.zeros((2, 2)), np.eye(2), 0.0)]
    for r, g in zip(roots, got):
        assert abs(r - g) <= 1e-9 * max(1.0, abs(r)) + (1e-7 if abs(disc) < 1e-10 else 0)


def test_reduction_matches_quadratic_determinant():
    grid = DecayRateGrid.from_rates([0.7, 2.3])
    p = assemble(grid)
    lam = 1.3
    K, O = p.A + lam * p.B, p.O
    # det(K - mu O) = a mu^2 + b mu + c
    a = np.linalg.det(O)
    c = np.linalg.det(K)
    b = -(K[0, 0] * O[1, 1] + K[1, 1] * O[0, 0] - K[0, 1] * O[1, 0] - K[1, 0] * O[0, 1])
    ref = sorted(np.roots([a, b, c]).real)
    got = sorted(pr.value.real for pr in solve_generalized(p.A, p.B, p.O, lam))
    assert got == pytest.approx(ref, rel=1e-12)


def test_non_definite_overlap_rejected():
    with pytest.raises(ConditioningError):
        solve_generalized(np.eye(2), np.zeros((2, 2)), np.array([[1.0, 2.0], [2.0, 1.0]]), 0.0)


def test_back_transformed_vectors_solve_original_pencil():
    p = assemble(build_decay_rates(BasisSpec(16, -2, 2)))
    lam = 1.5
    K = p.A + lam * p.B
    for pair in solve_generalized(p.A, p.B, p.O, lam)[:4]:
        c = pair.vector
        r = np.linalg.norm(K @ c - pair.value * (p.O @ c)) / np.linalg.norm(c)
        assert r == pytest.approx(pair.residual)
        assert r <= 1e-9 * np.linalg.norm(K, 2)


def test_ground_state_selection():
    e = np.ones(1)
    pairs = [EigenPair(0.3, e, 0.0), EigenPair(-0.125, e, 0.0), EigenPair(7.1, e, 0.0)]
    assert ground_state(pairs, 1.0).energy == -0.125


def test_ground_state_skips_complex_values():
    e = np.ones(1)
    pairs = [EigenPair(complex(-2, 1e-3), e, 0.0), EigenPair(-1.0, e, 0.0)]
    assert ground_state(pairs, 1.0).energy == -1.0


def test_no_bound_state_signal():
    e = np.ones(1)
    with pytest.raises(NoBoundState):
        ground_state([EigenPair(0.1, e, 0.0), EigenPair(2.0, e, 0.0)], 0.3)
    with pytest.raises(NoBoundState):
        ground_state([], 0.3)


def test_lowest_level_n32_double_and_extended():
    p = assemble(build_decay_rates(BasisSpec(32)), precision_bits=128)
    ext = ExtendedSolver(p).lowest(1.0)
    assert ext.energy == pytest.approx(-0.125, rel=1e-5)
    dbl = ground_state(solve_generalized(p.A, p.B, p.O, 1.0), 1.0, p.grid)
    assert dbl.energy == pytest.approx(ext.energy, rel=1e-8)


def test_normalize_examples():
    one = DecayRateGrid.from_rates([1.0])
    c, nf = normalize([1.0], one, measure="paper_printed")
    assert nf == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    two = DecayRateGrid.from_rates([1.0, 2.0])
    _, nf = normalize([1.0, 1.0], two, measure="paper_printed")
    assert nf**2 == pytest.approx(4 * math.pi * (2 / 32 + 2 * 2 / 243 + 2 / 1024), rel=1e-14)
    _, nf = normalize([1.0], one)
    assert nf**2 == pytest.approx(4 * math.pi * 2 / 8, rel=1e-15)
    with pytest.raises(ValueError):
        normalize([0.0, 0.0], two)
    with pytest.raises(ValueError):
        normalize([1.0], two)


@given(st.floats(-1e6, 1e6).filter(lambda s: abs(s) > 1e-6))
def test_normalize_homogeneity(scale):
    grid = build_decay_rates(BasisSpec(5, -1, 1))
    c = np.array([0.3, -1.2, 2.0, 0.1, -0.4])
    c1, n1 = normalize(c, grid)
    c2, n2 = normalize(scale * c, grid)
    assert n2 == pytest.approx(abs(scale) * n1, rel=1e-12)
    np.testing.assert_allclose(c2, math.copysign(1, scale) * c1, rtol=1e-12)


def test_extended_matches_full_eigensolve(pencil48, solver48):
    for lam in (0.6, 2.0):
        fast = solver48.lowest(lam)
        full = ground_state(solver48.eigenpairs(lam), lam)
        assert fast.energy == pytest.approx(full.energy, rel=1e-20, abs=1e-25)


@pytest.mark.parametrize("lam", [0.55, 1.0, 2.0, 5.0])
def test_extended_ground_state_quality(pencil48, solver48, lam):
    st_ = solver48.lowest(lam)
    assert st_.residual <= 1e-9 * np.linalg.norm(pencil48.A + lam * pencil48.B, 2)
    exact = -((2 * lam - 1) ** 2) / 8
    assert abs(st_.energy - exact) <= 1e-8 * abs(exact)


def test_printed_measure_normalization_at_n48(pencil48):
    p = assemble(pencil48.grid, measure="paper_printed")
    st_ = ground_state(solve_generalized(p.A, p.B, p.O, 1.0), 1.0, p.grid, "paper_printed")
    b = p.grid.rates
    g = b[:, None] + b[None, :]
    val = 4 * math.pi * float(st_.coeffs @ (2 / g**5) @ st_.coeffs)
    assert val == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("lam,expected", [(1.0, -0.5), (2.0, -3.0)])
def test_potential_expectation_hellmann_feynman(pencil48, solver48, lam, expected):
    st_ = solver48.lowest(lam)
    assert potential_expectation(st_, pencil48, lam) == pytest.approx(expected, rel=1e-7)


def test_potential_sign_parity(pencil48):
    st_ = ground_state(solve_generalized(pencil48.A, pencil48.B, pencil48.O, 1.0), 1.0, pencil48.grid)
    flipped = type(st_)(st_.energy, -st_.coeffs, st_.residual, st_.norm_factor, st_.lam)
    assert potential_expectation(flipped, pencil48, 1.0) == potential_expectation(st_, pencil48, 1.0)


def test_potential_rejects_unnormalized(pencil48):
    st_ = ground_state(solve_generalized(pencil48.A, pencil48.B, pencil48.O, 1.0), 1.0, pencil48.grid)
    bad = type(st_)(st_.energy, 2 * st_.coeffs, st_.residual, st_.norm_factor, st_.lam)
    with pytest.raises(ValueError):
        potential_expectation(bad, pencil48, 1.0)


def test_below_threshold_has_no_bound_state(solver48):
    with pytest.raises(NoBoundState):
        solver48.lowest(0.3)


def test_energy_decreases_with_coupling(solver48):
    lams = np.linspace(0.55, 5, 25)
    e = [solver48.lowest(l).energy for l in lams]
    assert np.all(np.diff(e) < 0)


def test_unbound_lowest_state_on_request(pencil48, solver48):
    st_ = solver48.lowest(0.3, require_bound=False)
    assert st_.energy >= 0
    assert st_.residual <= 1e-9 * np.linalg.norm(pencil48.A + 0.3 * pencil48.B, 2)
    assert potential_expectation(st_, pencil48, 0.3) < 0
