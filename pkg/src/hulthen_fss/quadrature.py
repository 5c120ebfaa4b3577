"""Integration on [0, inf) and series forms of the Hulthen-weighted moments.

Two independent routes are provided for the integrals the pencil needs:
composite Gauss-Legendre quadrature on a geometrically graded panel set, and
series in 1/(shift + k)^(p+1) with bounded tails. Each checks the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from hulthen_fss.errors import QuadratureError


@lru_cache(maxsize=64)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], exact for polynomials of degree <= 2*order - 1."""
    if int(order) != order or order < 1:
        raise ValueError(f"quadrature order must be a positive integer, got {order!r}")
    return _leggauss(int(order))


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule on [0, x_max].

    With ``first_edge`` unset the panels are uniform. Otherwise the first
    panel is [0, first_edge] and the remaining ``panels - 1`` edges grow
    geometrically up to ``x_max``, which resolves integrands that vary on
    several length scales at once.
    """

    panels: int
    points_per_panel: int = 64
    x_max: float = 50.0
    first_edge: float | None = None
    scheme: str = "composite-gauss-legendre"

    def __post_init__(self):
        if self.scheme != "composite-gauss-legendre":
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.panels < 1:
            raise ValueError("panels must be >= 1")
        if self.points_per_panel < 2:
            raise ValueError("points_per_panel must be >= 2")
        if not self.x_max > 0:
            raise ValueError("x_max must be positive")
        if self.first_edge is not None and not 0 < self.first_edge < self.x_max:
            raise ValueError("first_edge must lie in (0, x_max)")

    def edges(self) -> np.ndarray:
        if self.first_edge is None or self.panels == 1:
            return np.linspace(0.0, self.x_max, self.panels + 1)
        inner = np.geomspace(self.first_edge, self.x_max, self.panels)
        return np.concatenate(([0.0], inner))

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        t, w = gauss_legendre_nodes(self.points_per_panel)
        e = self.edges()
        half = 0.5 * np.diff(e)
        mid = 0.5 * (e[1:] + e[:-1])
        x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        wx = (half[:, None] * w[None, :]).ravel()
        return x, wx


def default_rule(gamma_min: float, gamma_max: float | None = None, points_per_panel: int = 64) -> QuadratureRule:
    """Rule for integrands decaying like exp(-gamma x) with gamma in [gamma_min, gamma_max].

    The truncation point keeps the neglected tail below exp(-40). Panels
    double in width from a first edge placed well inside the fastest scale.
    """
    if gamma_min <= 0:
        raise ValueError("gamma_min must be positive")
    gamma_max = gamma_min if gamma_max is None else max(gamma_max, gamma_min)
    x_max = max(50.0, 40.0 / gamma_min)
    first = 0.05 * min(1.0, 1.0 / gamma_max)
    panels = max(2, int(math.ceil(math.log2(x_max / first))) + 1)
    return QuadratureRule(panels, points_per_panel, x_max, first)


def integrate_semi_infinite(f, rule: QuadratureRule) -> float:
    """Composite Gauss-Legendre estimate of the integral of ``f`` over [0, x_max].

    ``f`` must accept a numpy array of nodes. The caller is responsible for
    choosing ``x_max`` so the neglected tail is negligible.
    """
    x, w = rule.nodes_weights()
    fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        raise QuadratureError(f"integrand returned shape {fx.shape}, expected {x.shape}")
    bad = ~np.isfinite(fx)
    if bad.any():
        node = float(x[np.argmax(bad)])
        raise QuadratureError(f"non-finite integrand value at node x={node!r}", node=node)
    # sum panel by panel to limit rounding growth across scales
    parts = (fx * w).reshape(-1, rule.points_per_panel).sum(axis=1)
    return math.fsum(parts)


def exp_moment(p: int, gamma: float) -> float:
    """Closed form of the integral of x^p exp(-gamma x) over [0, inf): p!/gamma^(p+1)."""
    if int(p) != p or p < 0:
        raise ValueError("p must be a nonnegative integer")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    return math.factorial(int(p)) / gamma ** (p + 1)


def hulthen_moment_integrand(p: int, shift: float):
    """x^p exp(-shift x) / (1 - exp(-x)), continuous at x = 0.

    The removable singularity is evaluated through expm1 and the x = 0 limit
    (0 for p >= 2, 1 for p = 1) is returned directly.
    """
    if p < 1:
        raise ValueError("p >= 1 required for an integrable kernel")
    limit0 = 1.0 if p == 1 else 0.0

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        zero = x == 0
        xs = x[~zero]
        # x^p / (1 - e^-x) = x^(p-1) * x / (-expm1(-x))
        out[~zero] = xs ** (p - 1) * (xs / -np.expm1(-xs)) * np.exp(-shift * xs)
        out[zero] = limit0
        return out

    return f


def hurwitz_series_x4(gamma_prime, tol: float = 1e-15):
    """Integral of x^4 exp(-gamma' x)/(1 - exp(-x)) over [0, inf) as sum_k 24/(gamma'+k)^5.

    ``tol`` is relative. A plain partial sum stopped by the integral test
    (remainder <= 6/(gamma'+K)^4) would need ~1e8 terms for relative
    accuracy at gamma' ~ 1e4, so the remainder is summed in closed form
    instead; see ``hurwitz_moment``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not float(gamma_prime) > 0:
        raise ValueError("gamma' must be positive")
    return hurwitz_moment(4, gamma_prime, rtol=tol)


def integral_test_bound(p: int, s: float) -> float:
    """Upper bound p!/((p) s^p) + p!/s^(p+1) on sum_{k>=0} p!/(s+k)^(p+1)."""
    f = math.factorial(p)
    return f / (p * s**p) + f / s ** (p + 1)


@lru_cache(maxsize=None)
def bernoulli_even(count: int) -> tuple[Fraction, ...]:
    """B_2, B_4, ..., B_{2*count} as exact fractions."""
    B = [Fraction(1)]
    for m in range(1, 2 * count + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += Fraction(math.comb(m + 1, k)) * B[k]
        B.append(-acc / (m + 1))
    return tuple(B[2 * j] for j in range(1, count + 1))


def _as_number(frac: Fraction, like):
    if isinstance(like, float):
        return frac.numerator / frac.denominator
    return type(like)(frac.numerator) / frac.denominator


def _rising(q: int, m: int) -> int:
    out = 1
    for i in range(m):
        out *= q + i
    return out


def hurwitz_moment(p: int, shift, rtol: float = 1e-17, em_terms: int = 12):
    """Integral of x^p exp(-shift x)/(1 - exp(-x)) over [0, inf), i.e. p! * zeta(p+1, shift).

    Works on floats and on arbitrary-precision reals exposing +, *, / and
    integer powers (python-flint ``arb``). The first K terms are summed
    directly; the remainder uses Euler-Maclaurin with ``em_terms`` Bernoulli
    corrections, K being raised until the first omitted correction (which
    bounds the remainder for this completely monotone summand) is below
    ``rtol`` times the result.
    """
    if p < 1:
        raise ValueError("p >= 1 required")
    if not float(shift) > 0:
        raise ValueError("shift must be positive")
    q = p + 1
    bern = bernoulli_even(em_terms + 1)
    one = shift * 0 + 1

    def tail(s):
        # sum_{k>=0} (s+k)^-q
        total = s ** (1 - q) / (q - 1) + s ** (-q) / 2
        for j in range(1, em_terms + 1):
            c = bern[j - 1] / math.factorial(2 * j) * _rising(q, 2 * j - 1)
            total += _as_number(c, one) * s ** (-q - 2 * j + 1)
        c = abs(bern[em_terms]) / math.factorial(2 * em_terms + 2) * _rising(q, 2 * em_terms + 1)
        bound = float(c) * float(s) ** (-q - 2 * em_terms - 1)
        return total, bound

    K = max(0, int(math.ceil(8.0 - float(shift))))
    while True:
        s = shift + K
        t, bound = tail(s)
        partial = 0 * one
        for k in range(K - 1, -1, -1):
            partial += (shift + k) ** (-q)
        total = partial + t
        if bound <= rtol * abs(float(total)):
            return math.factorial(p) * total
        K += max(4, K // 2)
