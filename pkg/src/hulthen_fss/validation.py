"""Oracle checks behind ``hulthen-fss validate``.

Each check returns a CheckResult with the worst observed deviation and the
limit it was held to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hulthen_fss.analytic import HulthenParams, energy_level, exact_wavefunction, validate_ode_residual
from hulthen_fss.basis import BasisSpec, build_decay_rates
from hulthen_fss.eigensolver import ExtendedSolver, ground_state, solve_generalized
from hulthen_fss.errors import HulthenError
from hulthen_fss.pencil import assemble, element_A, element_B, element_O, oracle_element, overlap_condition
from hulthen_fss.quadrature import (
    default_rule,
    hulthen_moment_integrand,
    hurwitz_series_x4,
    integrate_semi_infinite,
)
from hulthen_fss.sweep import potential_expectation


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{flag}  {self.name}: max deviation {self.value:.3e} (limit {self.limit:.1e}){extra}"


def _result(name, worst, limit, detail=""):
    return CheckResult(name, bool(worst <= limit), float(worst), float(limit), detail)


def random_rate_pairs(count: int = 200, seed: int = 20240601, lo: float = 1e-4, hi: float = 1e4):
    rng = np.random.default_rng(seed)
    return 10.0 ** rng.uniform(math.log10(lo), math.log10(hi), size=(count, 2))


def element_deviations(pairs, b_convention: str = "derived", points_per_panel: int = 64) -> dict:
    """Worst relative gap between closed-form elements and quadrature, per kind."""
    worst = {"A": 0.0, "B": 0.0, "O": 0.0}
    for bm, bn in pairs:
        g = bm + bn
        rule = default_rule(g, g + 1, points_per_panel)
        closed = {"A": element_A(bm, bn), "B": element_B(bm, bn, b_convention), "O": element_O(bm, bn)}
        for kind, v in closed.items():
            q = oracle_element(kind, bm, bn, rule)
            worst[kind] = max(worst[kind], abs(v - q) / abs(q))
    return worst


def check_elements(b_convention="derived", count=200, seed=20240601, rtol=1e-10, points_per_panel=64):
    w = element_deviations(random_rate_pairs(count, seed), b_convention, points_per_panel)
    return _result(f"matrix elements vs quadrature (B={b_convention})", max(w.values()), rtol,
                   "A {A:.1e} B {B:.1e} O {O:.1e}".format(**w))


def series_deviation(gammas, points_per_panel: int = 64) -> float:
    worst = 0.0
    for gp in gammas:
        s = hurwitz_series_x4(gp, 1e-15)
        rule = default_rule(gp, gp, points_per_panel)
        q = integrate_semi_infinite(hulthen_moment_integrand(4, gp), rule)
        worst = max(worst, abs(s - q) / abs(q))
    return worst


def check_series(count=60, rtol=1e-10, points_per_panel=64):
    gammas = np.geomspace(1.0, 2e4 + 1, count)
    return _result("x^4 Hulthen moment: series vs quadrature", series_deviation(gammas, points_per_panel), rtol)


def _solver_state(pencil, solver, lam):
    if solver is not None:
        return solver.lowest(lam)
    return ground_state(solve_generalized(pencil.A, pencil.B, pencil.O, lam), lam, pencil.grid, pencil.measure)


def build_solver(n_basis, b_convention="derived", extended=True, bits=128, measure="radial", d_s=-4.0, d_e=4.0):
    pencil = assemble(build_decay_rates(BasisSpec(n_basis, d_s, d_e)), b_convention, measure,
                      bits if extended else None)
    return pencil, (ExtendedSolver(pencil) if extended else None)


def spectrum_errors(pencil, solver, lambdas):
    out = []
    for lam in lambdas:
        exact = energy_level(HulthenParams(lam))
        try:
            e = _solver_state(pencil, solver, lam).energy
        except HulthenError:
            out.append((lam, math.nan, exact, math.inf))
            continue
        out.append((lam, e, exact, abs(e - exact) / abs(exact)))
    return out


def check_spectrum(pencil, solver, lambdas=(0.55, 0.75, 1.0, 2.0, 3.5, 5.0), rtol=1e-8):
    rows = spectrum_errors(pencil, solver, lambdas)
    worst = max(r[3] for r in rows)
    detail = " ".join(f"E({lam:g})={e:.12g}" for lam, e, _, _ in rows)
    return _result(f"ground state vs exact levels (N={pencil.n_basis}, B={pencil.b_convention})", worst, rtol, detail)


def check_residuals(pencil, solver, lambdas=(0.55, 1.0, 2.0, 5.0), rtol=1e-9):
    worst = 0.0
    for lam in lambdas:
        st = _solver_state(pencil, solver, lam)
        worst = max(worst, st.residual / np.linalg.norm(pencil.A + lam * pencil.B, 2))
    return _result(f"eigen residual / ||A + lam B|| (N={pencil.n_basis})", worst, rtol)


def check_normalization(pencil, solver, lambdas=(0.6, 1.0, 3.0), tol=1e-10):
    worst = 0.0
    for lam in lambdas:
        st = _solver_state(pencil, solver, lam)
        if st.coeffs_ext is not None:
            from hulthen_fss import _arb

            with _arb.working_precision(pencil.extended.bits):
                c = st.coeffs_ext
                val = float(4 * _arb.arb.pi() * _arb.dot(c, pencil.extended.W * c))
        else:
            c = st.coeffs
            val = 4 * math.pi * float(c @ pencil.W @ c)
        worst = max(worst, abs(val - 1))
    return _result("normalization recomputation", worst, tol)


def check_ode(states=((1.0, 1), (5.0, 2), (5.0, 3), (0.6, 1)), tol=1e-8):
    xs = np.linspace(0.1, 20, 60)
    worst = 0.0
    for lam, n in states:
        p = HulthenParams(lam, n=n)
        worst = max(worst, validate_ode_residual(lambda x: exact_wavefunction(p, x), energy_level(p), lam, xs))
    return _result("exact wavefunction ODE residual", worst, tol)


def hellmann_feynman_gaps(pencil, solver, lambdas, h):
    """|lam (E(lam+h) - E(lam-h))/(2h) - V(lam)| at each lambda."""
    out = []
    for lam in lambdas:
        ep = _solver_state(pencil, solver, lam + h).energy
        em = _solver_state(pencil, solver, lam - h).energy
        st = _solver_state(pencil, solver, lam)
        v = potential_expectation(st, pencil, lam)
        out.append(abs(lam * (ep - em) / (2 * h) - v))
    return out


def check_hellmann_feynman(pencil, solver, lambdas=(0.6, 0.8, 1.0, 1.5, 2.0), h=1e-3):
    gaps = hellmann_feynman_gaps(pencil, solver, lambdas, h)
    return _result(f"Hellmann-Feynman lam dE/dlam vs V (h={h:g})", max(gaps), max(1e-6, 3 * h * h))


def check_conditioning(pencil, limit=1e12):
    return _result("equilibrated overlap condition number", overlap_condition(pencil.O), limit)
