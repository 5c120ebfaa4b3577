"""Weak-form matrices for the Hulthen problem in the exponential basis.

Test functions are exp(-beta_m x) and trial functions x exp(-beta_n x); with
gamma = beta_m + beta_n the pencil (A + lam B) c = a^2 E O c has

    A_mn = beta_n (beta_m (gamma + 1) + beta_n / 2) / (gamma^2 (gamma + 1)^2)
    B_mn = -1 / (gamma + 1)^2
    O_mn = (2 gamma + 1) / (gamma^2 (gamma + 1)^2)

A is written in a cancellation-free form; it equals
-(beta_n^2/2)(1/gamma^2 - 1/(gamma+1)^2) + beta_n (1/gamma - 1/(gamma+1)).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from hulthen_fss.basis import BasisSpec, DecayRateGrid
from hulthen_fss.errors import ConditioningError
from hulthen_fss.quadrature import (
    QuadratureRule,
    default_rule,
    hurwitz_moment,
    integrate_semi_infinite,
)

log = logging.getLogger(__name__)

B_CONVENTIONS = ("derived", "paper_printed")
MEASURES = ("radial", "paper_printed")

COND_WARN = 1e12
COND_ABORT = 1e15


def _check_rates(beta_m, beta_n):
    bm = np.asarray(beta_m, dtype=float)
    bn = np.asarray(beta_n, dtype=float)
    if np.any(~(bm > 0)) or np.any(~(bn > 0)):
        raise ValueError("decay rates must be positive")
    return bm, bn


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def element_A(beta_m, beta_n):
    bm, bn = _check_rates(beta_m, beta_n)
    g = bm + bn
    return _scalar(bn * (bm * (g + 1) + 0.5 * bn) / (g**2 * (g + 1) ** 2))


def element_B(beta_m, beta_n, convention: str = "derived"):
    """Potential element without the coupling factor.

    ``"derived"`` integrates exp(-beta_m x) (-exp(-x)) x exp(-beta_n x),
    giving -1/(gamma+1)^2. ``"paper_printed"`` returns -1/gamma^2, which is
    kept only for comparison runs; it does not reproduce the exact levels.
    """
    bm, bn = _check_rates(beta_m, beta_n)
    g = bm + bn
    if convention == "derived":
        return _scalar(-1.0 / (g + 1) ** 2)
    if convention == "paper_printed":
        return _scalar(-1.0 / g**2)
    raise ValueError(f"unknown B convention {convention!r}")


def element_O(beta_m, beta_n):
    bm, bn = _check_rates(beta_m, beta_n)
    g = bm + bn
    return _scalar((2 * g + 1) / (g**2 * (g + 1) ** 2))


def _one_minus_exp(x):
    return -np.expm1(-x)


def oracle_element(kind: str, beta_m: float, beta_n: float, rule: QuadratureRule | None = None) -> float:
    """Quadrature value of a weak-form integral, independent of the closed forms."""
    bm, bn = float(beta_m), float(beta_n)
    if not (bm > 0 and bn > 0):
        raise ValueError("decay rates must be positive")
    g = bm + bn
    if rule is None:
        rule = default_rule(g, g + 1)
    if kind == "A":
        # test * (-1/2)(1 - e^-x) d^2/dx^2 [x e^{-bn x}]
        f = lambda x: np.exp(-g * x) * (-0.5) * _one_minus_exp(x) * (bn * bn * x - 2 * bn)
    elif kind == "B":
        f = lambda x: -np.exp(-(g + 1) * x) * x
    elif kind == "O":
        f = lambda x: np.exp(-g * x) * _one_minus_exp(x) * x
    else:
        raise ValueError(f"unknown element kind {kind!r}")
    return integrate_semi_infinite(f, rule)


def norm_weight(gamma, measure: str = "radial"):
    """Gram weight of the normalization: integral of x^2 e^{-gamma x} (radial) or the printed 2/gamma^5."""
    if measure == "radial":
        return 2.0 / gamma**3
    if measure == "paper_printed":
        return 2.0 / gamma**5
    raise ValueError(f"unknown measure {measure!r}")


def potential_power(measure: str) -> int:
    return {"radial": 2, "paper_printed": 4}[measure]


@dataclass(frozen=True)
class ExtendedMatrices:
    """The same matrices carried in binary precision ``bits`` (python-flint arb_mat)."""

    bits: int
    rates: list
    A: object
    B: object
    O: object
    W: object
    I_pot: object


@dataclass(frozen=True)
class SpectralPencil:
    A: np.ndarray
    B: np.ndarray
    O: np.ndarray
    I_pot: np.ndarray
    W: np.ndarray
    grid: DecayRateGrid
    b_convention: str = "derived"
    measure: str = "radial"
    extended: ExtendedMatrices | None = field(default=None, repr=False)

    @property
    def n_basis(self) -> int:
        return len(self.grid)


def _pair_table(rates, fn):
    n = len(rates)
    out = [[None] * n for _ in range(n)]
    for m in range(n):
        for k in range(m, n):
            out[m][k] = out[k][m] = fn(rates[m] + rates[k])
    return out


def assemble(
    grid: DecayRateGrid,
    b_convention: str = "derived",
    measure: str = "radial",
    precision_bits: int | None = None,
    pot_rtol: float = 1e-17,
) -> SpectralPencil:
    """Fill A, B, O from closed forms and the potential integrals from the series.

    Symmetric matrices are evaluated once per unordered pair. With
    ``precision_bits`` the matrices are also built in that binary precision,
    from the exact decimal exponents when the grid carries its BasisSpec.
    """
    if b_convention not in B_CONVENTIONS:
        raise ValueError(f"unknown B convention {b_convention!r}")
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    beta = grid.rates
    bm, bn = np.meshgrid(beta, beta, indexing="ij")
    A = element_A(bm, bn)
    B = element_B(bm, bn, b_convention)
    O = element_O(bm, bn)
    # symmetrize exactly: elements depend on gamma only, but bm+bn vs bn+bm can round differently
    B = np.triu(B) + np.triu(B, 1).T
    O = np.triu(O) + np.triu(O, 1).T
    p = potential_power(measure)
    I_pot = np.array(_pair_table(list(beta), lambda g: hurwitz_moment(p, g + 1.0, rtol=pot_rtol)))
    W = np.array(_pair_table(list(beta), lambda g: norm_weight(g, measure)))

    ext = None
    if precision_bits:
        ext = _assemble_extended(grid, b_convention, measure, int(precision_bits))
    return SpectralPencil(A, B, O, I_pot, W, grid, b_convention, measure, ext)


def _extended_rates(grid: DecayRateGrid):
    from flint import arb

    spec = grid.spec
    if spec is None:
        return [arb(float(b)) for b in grid.rates]
    n = spec.n_basis
    ds, de = arb(float(spec.d_s)), arb(float(spec.d_e))
    return [arb(10) ** (ds + (de - ds) * k / (n - 1)) for k in range(n)]


def _assemble_extended(grid: DecayRateGrid, b_convention: str, measure: str, bits: int) -> ExtendedMatrices:
    from flint import arb_mat

    from hulthen_fss._arb import working_precision

    with working_precision(bits):
        rates = [r.mid() for r in _extended_rates(grid)]
        n = len(rates)
        p = potential_power(measure)
        rtol = 2.0 ** (-bits - 4)
        A = [[None] * n for _ in range(n)]
        for m in range(n):
            for k in range(n):
                g = rates[m] + rates[k]
                A[m][k] = (rates[k] * (rates[m] * (g + 1) + rates[k] / 2) / (g**2 * (g + 1) ** 2)).mid()
        if b_convention == "derived":
            B = _pair_table(rates, lambda g: (-1 / (g + 1) ** 2).mid())
        else:
            B = _pair_table(rates, lambda g: (-1 / g**2).mid())
        O = _pair_table(rates, lambda g: ((2 * g + 1) / (g**2 * (g + 1) ** 2)).mid())
        W = _pair_table(rates, lambda g: (2 / g**3 if measure == "radial" else 2 / g**5).mid())
        I_pot = _pair_table(rates, lambda g: hurwitz_moment(p, g + 1, rtol=rtol).mid())
        return ExtendedMatrices(bits, rates, arb_mat(A), arb_mat(B), arb_mat(O), arb_mat(W), arb_mat(I_pot))


def equilibrate(O: np.ndarray) -> np.ndarray:
    """Diagonal scaling s with s_i = 1/sqrt(O_ii), so diag(s) O diag(s) has unit diagonal."""
    d = np.diag(O)
    if np.any(~(d > 0)):
        raise ConditioningError("overlap matrix has a non-positive diagonal entry")
    return 1.0 / np.sqrt(d)


def overlap_condition(O: np.ndarray) -> float:
    """Condition number of the equilibrated overlap, from its Cholesky factor's extreme eigenvalues."""
    s = equilibrate(O)
    Os = O * np.outer(s, s)
    try:
        np.linalg.cholesky(Os)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"overlap matrix is not positive definite: {exc}") from exc
    w = np.linalg.eigvalsh(Os)
    if not w[0] > 0:
        return math.inf
    return float(w[-1] / w[0])


def check_conditioning(O: np.ndarray, warn_above: float = COND_WARN, abort_above: float = COND_ABORT,
                       override: bool = False) -> float:
    cond = overlap_condition(O)
    if cond > abort_above and not override:
        raise ConditioningError(f"equilibrated overlap condition number {cond:.3e} exceeds {abort_above:.1e}")
    if cond > warn_above:
        warnings.warn(f"equilibrated overlap condition number {cond:.3e} exceeds {warn_above:.1e}", stacklevel=2)
    return cond


def assemble_for(spec: BasisSpec, **kwargs) -> SpectralPencil:
    from hulthen_fss.basis import build_decay_rates

    return assemble(build_decay_rates(spec), **kwargs)
