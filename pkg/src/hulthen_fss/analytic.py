"""Exact bound states of -1/2 psi'' - lam e^-x/(1-e^-x) psi = E psi (a = 1 units).

Level n exists for 2 lam > n^2 with E_n = -(2 lam - n^2)^2 / (8 n^2 a^2) and

    psi_n(x) = N e^{-abar x} (1 - e^{-x}) 2F1(2 abar + 1 + n, 1 - n; 2 abar + 1; e^{-x}),

abar = a sqrt(-2E) = (2 lam - n^2)/(2n). The hypergeometric factor is a
polynomial of degree n - 1 in e^{-x}, so the norm has a closed form: the
square of the unnormalized profile is a finite sum of exponentials.

Everything here accepts floats or mpmath numbers, which lets the ODE check
difference at high working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from hulthen_fss.errors import NoBoundState

MEASURES = ("reduced", "volume")


@dataclass(frozen=True)
class HulthenParams:
    lam: float
    a: float = 1.0
    n: int = 1

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"coupling must be positive, got {self.lam!r}")
        if not self.a > 0:
            raise ValueError(f"scaling parameter must be positive, got {self.a!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"state order must be a positive integer, got {self.n!r}")

    @property
    def bound(self) -> bool:
        return 2 * self.lam > self.n**2


def energy_level(params: HulthenParams) -> float:
    lam, n, a = params.lam, params.n, params.a
    if 2 * lam < n * n:
        raise NoBoundState(f"no level n={n} at lambda={lam} (needs lambda > {n * n / 2})")
    return -((2 * lam - n * n) ** 2) / (8 * n * n * a * a)


def critical_coupling(n: int) -> float:
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return n * n / 2


def n_max(lam: float) -> int:
    """Largest n with n^2 < 2 lam (0 if none)."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    n = math.isqrt(int(math.floor(2 * lam)))
    while n * n >= 2 * lam:
        n -= 1
    while (n + 1) ** 2 < 2 * lam:
        n += 1
    return max(n, 0)


def decay_parameter(params: HulthenParams):
    """abar = a sqrt(-2E) = (2 lam - n^2)/(2n), the large-x decay rate of psi."""
    if not params.bound:
        raise NoBoundState(f"no level n={params.n} at lambda={params.lam}")
    return (2 * params.lam - params.n**2) / (2 * params.n)


def printed_decay_parameter(params: HulthenParams) -> float:
    """-a^2 E, kept for comparison; it does not solve the ODE (see validate_ode_residual)."""
    return -params.a**2 * energy_level(params)


def hyp2f1_terminating(a, b, c, z):
    """2F1(a, b; c; z) for b a nonpositive integer, by the ascending term recurrence."""
    if float(b) != int(float(b)) or float(b) > 0:
        raise ValueError(f"series does not terminate for b={b!r}")
    m = -int(float(b))
    term = z * 0 + 1
    total = term
    for k in range(m):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total = total + term
    return total


def _poly_coeffs(abar, n: int):
    """Coefficients p_k of 2F1(2abar+1+n, 1-n; 2abar+1; z) = sum_k p_k z^k."""
    a, b, c = 2 * abar + 1 + n, 1 - n, 2 * abar + 1
    out = [abar * 0 + 1]
    for k in range(n - 1):
        out.append(out[-1] * (a + k) * (b + k) / ((c + k) * (k + 1)))
    return out


def _profile_square_terms(abar, n: int):
    """(rate, weight) pairs with profile(x)^2 = sum weight exp(-rate x)."""
    p = _poly_coeffs(abar, n)
    # (1 - z) P(z) as a polynomial in z
    q = [p[0]] + [p[k] - p[k - 1] for k in range(1, n)] + [-p[n - 1]]
    terms = {}
    for i, qi in enumerate(q):
        for j, qj in enumerate(q):
            terms[i + j] = terms.get(i + j, 0) + qi * qj
    return [(2 * abar + k, w) for k, w in sorted(terms.items())]


def closed_form_constant(params: HulthenParams) -> float:
    """N0 = sqrt(abar (abar+n)(2 abar+n)) Gamma(2 abar+n)/(Gamma(2 abar+1) Gamma(n)), with abar = a sqrt(-2E)."""
    ab, n = decay_parameter(params), params.n
    log_g = math.lgamma(2 * ab + n) - math.lgamma(2 * ab + 1) - math.lgamma(n)
    return math.sqrt(ab * (ab + n) * (2 * ab + n)) * math.exp(log_g)


def normalization_constant(params: HulthenParams, measure: str = "reduced", dps: int = 40):
    """N with 4 pi int (N profile)^2 dx = 1 ("reduced") or 4 pi int x^2 (N profile)^2 dx = 1 ("volume").

    Returned as an mpmath mpf at ``dps`` digits.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    with mpmath.workdps(dps):
        ab = mpmath.mpf(2 * mpmath.mpf(repr(float(params.lam))) - params.n**2) / (2 * params.n)
        if not ab > 0:
            raise NoBoundState(f"no level n={params.n} at lambda={params.lam}")
        total = mpmath.mpf(0)
        for rate, w in _profile_square_terms(ab, params.n):
            total += w / rate if measure == "reduced" else 2 * w / rate**3
        return +mpmath.sqrt(1 / (4 * mpmath.pi * total))


def closed_form_ratio(params: HulthenParams, measure: str = "reduced") -> float:
    """Numerical normalization constant divided by the closed-form N0."""
    return float(normalization_constant(params, measure)) / closed_form_constant(params)


def exact_wavefunction(params: HulthenParams, x, measure: str = "reduced"):
    """Normalized psi_n at ``x`` (float, array, or mpmath number).

    Scalar mpmath input is evaluated in the current mpmath precision, which
    ``validate_ode_residual`` relies on.
    """
    n = params.n
    if isinstance(x, mpmath.mpf):
        if x < 0:
            raise ValueError("x must be nonnegative")
        ab = (2 * mpmath.mpf(repr(float(params.lam))) - n * n) / (2 * n)
        if not ab > 0:
            raise NoBoundState(f"no level n={n} at lambda={params.lam}")
        z = mpmath.exp(-x)
        nc = normalization_constant(params, measure, dps=mpmath.mp.dps + 10)
        return nc * mpmath.exp(-ab * x) * (1 - z) * hyp2f1_terminating(2 * ab + 1 + n, 1 - n, 2 * ab + 1, z)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("x must be nonnegative")
    ab = decay_parameter(params)
    z = np.exp(-xa)
    nc = float(normalization_constant(params, measure))
    out = nc * np.exp(-ab * xa) * (-np.expm1(-xa)) * hyp2f1_terminating(2 * ab + 1 + n, 1 - n, 2 * ab + 1, z)
    return float(out) if xa.ndim == 0 else out


# central-difference weights for the second derivative, orders 2..8
# (kept exact: a rounded weight times psi/h^2 would swamp the residual)
_D2 = {
    2: ((-2, 1), ((1, 1),)),
    4: ((-5, 2), ((4, 3), (-1, 12))),
    6: ((-49, 18), ((3, 2), (-3, 20), (1, 90))),
    8: ((-205, 72), ((8, 5), (-1, 5), (8, 315), (-1, 560))),
}


def validate_ode_residual(psi, E, lam, sample_xs, step: float = 1e-4, order: int = 8, dps: int = 50) -> float:
    """max |-psi''/2 - lam e^-x/(1-e^-x) psi - E psi| / max |psi| over ``sample_xs``.

    psi'' comes from a central difference of the given ``order``. ``psi`` is
    called with mpmath numbers at ``dps`` digits; a callable that only handles
    floats still works, but then roundoff (~1e-16/step^2) limits the result.
    """
    if order not in _D2:
        raise ValueError(f"order must be one of {sorted(_D2)}")
    centre, side = _D2[order]
    xs = [float(x) for x in np.atleast_1d(sample_xs)]
    if not xs:
        raise ValueError("need at least one sample point")
    reach = len(side) * step
    with mpmath.workdps(dps):
        h = mpmath.mpf(step)
        worst = mpmath.mpf(0)
        peak = mpmath.mpf(0)
        for x0 in xs:
            if not step > 0 or x0 - reach <= 0 or x0 + step == x0:
                raise ValueError(f"step {step!r} underflows or leaves the domain at x={x0!r}")
            x = mpmath.mpf(x0)

            def f(t):
                return mpmath.mpf(psi(t))

            p0 = f(x)
            d2 = mpmath.mpf(centre[0]) / centre[1] * p0
            for k, (num, den) in enumerate(side, start=1):
                d2 += mpmath.mpf(num) / den * (f(x + k * h) + f(x - k * h))
            d2 /= h * h
            pot = lam * mpmath.exp(-x) / (-mpmath.expm1(-x))
            r = abs(-d2 / 2 - pot * p0 - E * p0)
            worst = max(worst, r)
            peak = max(peak, abs(p0))
        if peak == 0:
            raise ValueError("psi vanishes on every sample; residual normalization undefined")
        return float(worst / peak)
