"""Even-tempered exponential basis u_n(x) = x exp(-beta_n x) on [0, inf)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BasisSpec:
    n_basis: int
    d_s: float = -4.0
    d_e: float = 4.0

    def __post_init__(self):
        if int(self.n_basis) != self.n_basis or self.n_basis < 2:
            raise ValueError(f"n_basis must be an integer >= 2, got {self.n_basis!r}")
        if not self.d_s < self.d_e:
            raise ValueError(f"need d_s < d_e, got d_s={self.d_s}, d_e={self.d_e}")

    def exponents(self) -> np.ndarray:
        """Decimal exponents p_n, evenly spaced from d_s to d_e."""
        n = np.arange(self.n_basis, dtype=float)
        p = self.d_s + n * (self.d_e - self.d_s) / (self.n_basis - 1)
        # pin the endpoints exactly
        p[0], p[-1] = self.d_s, self.d_e
        return p


@dataclass(frozen=True)
class DecayRateGrid:
    """Ascending geometric grid of decay rates."""

    rates: np.ndarray
    spec: BasisSpec | None = None

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        if rates.ndim != 1 or rates.size < 1:
            raise ValueError("rates must be a non-empty 1-d array")
        if np.any(rates <= 0) or np.any(np.diff(rates) <= 0):
            raise ValueError("rates must be positive and strictly increasing")
        rates.setflags(write=False)
        object.__setattr__(self, "rates", rates)

    def __len__(self) -> int:
        return self.rates.size

    @classmethod
    def from_rates(cls, rates) -> "DecayRateGrid":
        return cls(np.asarray(rates, dtype=float))


def build_decay_rates(spec: BasisSpec) -> DecayRateGrid:
    # exponent first, then one exponentiation per rate
    return DecayRateGrid(10.0 ** spec.exponents(), spec)


def eval_basis_function(grid: DecayRateGrid, n: int, x):
    """Evaluate u_n(x) = x exp(-beta_n x); ``n`` is 1-based."""
    if not 1 <= n <= len(grid):
        raise IndexError(f"basis index {n} outside 1..{len(grid)}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("basis functions are defined for x >= 0")
    out = x * np.exp(-grid.rates[n - 1] * x)
    return float(out) if out.ndim == 0 else out


def eval_expansion(grid: DecayRateGrid, coeffs, x):
    """Evaluate sum_n c_n x exp(-beta_n x) at scalar or array ``x``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(grid),):
        raise ValueError(f"expected {len(grid)} coefficients, got shape {coeffs.shape}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("basis functions are defined for x >= 0")
    xs = np.atleast_1d(x)
    vals = xs * (np.exp(-np.outer(xs, grid.rates)) @ coeffs)
    return float(vals[0]) if x.ndim == 0 else vals.reshape(x.shape)
