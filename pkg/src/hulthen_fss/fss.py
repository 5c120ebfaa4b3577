"""Finite-size scaling over the basis size N.

For a triple N < N' < N'' the shifted three-point ratio

    Delta_X(lam) = ln((X'' - X') / (X' - X)) / ln(N'/N),  X in {E, V},

behaves like -alpha/nu for E at lam_c, and Gamma = Delta_E/(Delta_E - Delta_V)
equals alpha there for every triple. Crossings of adjacent Gamma curves give
pseudo-critical (lam_N, alpha_N), which are extrapolated linearly in 1/N.

The threshold energy is 0: E_n vanishes at lam_c = n^2/2.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from hulthen_fss.errors import BracketError, UndefinedPoint
from hulthen_fss.sweep import EnergySurface

log = logging.getLogger(__name__)

DEFAULT_BRACKET = (0.49, 0.55)
COLLAPSE_CONVENTIONS = ("paper_printed", "standard")


@dataclass(frozen=True)
class Triple:
    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        if not 0 < self.n1 < self.n2 < self.n3:
            raise ValueError(f"triple must be ascending positive sizes, got {(self.n1, self.n2, self.n3)}")

    @property
    def sizes(self) -> tuple:
        return (self.n1, self.n2, self.n3)

    @property
    def label(self) -> str:
        return str(self.n1)


def consecutive_triples(n_list) -> list:
    """(N, N+step, N+2 step) for each run of three consecutive entries of ``n_list``."""
    n = list(n_list)
    return [Triple(*n[i : i + 3]) for i in range(len(n) - 2)]


class _Curves:
    """Per-N monotone cubic interpolants of E and V over the bound-state rows."""

    def __init__(self, surface: EnergySurface):
        self.exact = {}
        self.interp = {}
        for n in surface.n_list:
            for col in ("E0", "V"):
                lam, val = surface.series(n, col)
                self.exact[(n, col)] = dict(zip(lam.tolist(), val.tolist()))
                self.interp[(n, col)] = PchipInterpolator(lam, val, extrapolate=False) if lam.size >= 2 else None

    def value(self, n: int, col: str, lam: float) -> float:
        key = (n, col)
        if key not in self.exact:
            raise UndefinedPoint(f"basis size {n} is not in the surface")
        hit = self.exact[key].get(float(lam))
        if hit is not None:
            return hit
        f = self.interp[key]
        v = float(f(lam)) if f is not None else math.nan
        if not math.isfinite(v):
            raise UndefinedPoint(f"no bound-state data around lambda={lam!r} for N={n}")
        return v


def _curves(surface: EnergySurface) -> _Curves:
    cached = getattr(surface, "_fss_curves", None)
    if cached is None:
        cached = _Curves(surface)
        object.__setattr__(surface, "_fss_curves", cached)
    return cached


def shifted_delta(values, sizes) -> float:
    """ln((x3 - x2)/(x2 - x1)) / ln(N2/N1); UndefinedPoint unless the ratio is positive."""
    x1, x2, x3 = values
    n1, n2, _ = sizes
    lo, hi = x2 - x1, x3 - x2
    if lo == 0 or hi == 0 or (lo > 0) != (hi > 0):
        raise UndefinedPoint(f"N-differences {lo!r}, {hi!r} do not form a positive ratio")
    return math.log(hi / lo) / math.log(n2 / n1)


def _delta(surface, lam, triple: Triple, col: str) -> float:
    c = _curves(surface)
    return shifted_delta([c.value(n, col, lam) for n in triple.sizes], triple.sizes)


def delta_E(surface: EnergySurface, lam: float, triple: Triple) -> float:
    return _delta(surface, lam, triple, "E0")


def delta_V(surface: EnergySurface, lam: float, triple: Triple) -> float:
    return _delta(surface, lam, triple, "V")


def gamma_from_deltas(d_e: float, d_v: float) -> float:
    den = d_e - d_v
    if den == 0:
        raise UndefinedPoint("Delta_E equals Delta_V; Gamma has a pole")
    return d_e / den


def gamma_alpha(surface: EnergySurface, lam: float, triple: Triple) -> float:
    return gamma_from_deltas(delta_E(surface, lam, triple), delta_V(surface, lam, triple))


def gamma_curve(surface: EnergySurface, triple: Triple, lambdas=None):
    """(lambda, Gamma) at the grid points where Gamma is defined."""
    lams = surface.lambdas() if lambdas is None else np.asarray(lambdas, dtype=float)
    out_l, out_g = [], []
    for lam in lams:
        try:
            g = gamma_alpha(surface, float(lam), triple)
        except UndefinedPoint:
            continue
        out_l.append(float(lam))
        out_g.append(g)
    return np.array(out_l), np.array(out_g)


def _safe(f, x):
    try:
        v = f(x)
    except UndefinedPoint:
        return None
    return v if math.isfinite(v) else None


def find_curve_crossing(gamma_a, gamma_b, bracket=DEFAULT_BRACKET, samples=None, tol: float = 1e-10,
                        target: float = 0.5):
    """Crossing of two curves given as callables that may raise UndefinedPoint.

    Sign changes of gamma_a - gamma_b are located on ``samples`` (default 201
    uniform points) inside ``bracket``, skipping undefined points, and refined
    by bisection to ``tol``. A sign change through a pole (|difference| grows
    under bisection) is rejected. With several crossings the one nearest
    ``target`` is returned and a warning is issued. Returns (lambda, gamma_a).
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    xs = np.linspace(lo, hi, 201) if samples is None else np.asarray(samples, dtype=float)
    xs = xs[(xs >= lo) & (xs <= hi)]

    def diff(x):
        a = _safe(gamma_a, x)
        b = _safe(gamma_b, x)
        return None if a is None or b is None else a - b

    pts = [(float(x), d) for x in xs if (d := diff(float(x))) is not None]
    if len(pts) < 2:
        raise BracketError(f"fewer than two defined points in [{lo}, {hi}]")
    roots = []
    # exact zeros count once, and only when isolated (not a run of coincident values)
    for i, (x, d) in enumerate(pts):
        if d == 0 and all(pts[j][1] != 0 for j in (i - 1, i + 1) if 0 <= j < len(pts)):
            roots.append(x)
    for (x0, d0), (x1, d1) in zip(pts, pts[1:]):
        if d0 == 0 or d1 == 0 or (d0 > 0) == (d1 > 0):
            continue
        root = _bisect(diff, x0, d0, x1, d1, tol)
        if root is not None:
            roots.append(root)
    roots = sorted(set(roots))
    if not roots:
        raise BracketError(f"no isolated crossing in [{lo}, {hi}]", (pts[0][1], pts[-1][1]))
    if len(roots) > 1:
        warnings.warn(f"{len(roots)} crossings in [{lo}, {hi}]; using the one nearest {target}", stacklevel=2)
    best = min(roots, key=lambda r: abs(r - target))
    return best, float(gamma_a(best))


def _bisect(diff, x0, d0, x1, d1, tol):
    scale = max(abs(d0), abs(d1))
    while x1 - x0 > tol:
        xm = 0.5 * (x0 + x1)
        dm = diff(xm)
        if dm is None:
            return None
        if dm == 0:
            return xm
        if (dm > 0) == (d0 > 0):
            x0, d0 = xm, dm
        else:
            x1, d1 = xm, dm
    xm = 0.5 * (x0 + x1)
    dm = diff(xm)
    # a root leaves the difference small; a pole leaves it larger than where we started
    if dm is None or abs(dm) > scale:
        return None
    return xm


def find_crossing(surface: EnergySurface, triple_a: Triple, triple_b: Triple, bracket=DEFAULT_BRACKET,
                  tol: float = 1e-10):
    """(lambda_N, alpha_N) where the Gamma curves of two triples meet."""
    lams = surface.lambdas()
    return find_curve_crossing(
        lambda x: gamma_alpha(surface, x, triple_a),
        lambda x: gamma_alpha(surface, x, triple_b),
        bracket,
        samples=lams,
        tol=tol,
    )


def estimate_nu(surface: EnergySurface, crossing, triple: Triple) -> float:
    """nu_N = -alpha_N / Delta_E(lambda_N), from E(lam_c, N) ~ N^(-alpha/nu)."""
    lam_n, alpha_n = crossing
    d = delta_E(surface, lam_n, triple)
    if d == 0:
        raise UndefinedPoint("Delta_E vanishes at the crossing")
    return -alpha_n / d


def extrapolate(values):
    """Least-squares v = v_inf + s / N over (N_eff, v) pairs; returns (v_inf, s, rms residual)."""
    pts = [(float(n), float(v)) for n, v in values]
    if len(pts) < 2:
        raise ValueError("extrapolation needs at least two points")
    x = np.array([1.0 / n for n, _ in pts])
    y = np.array([v for _, v in pts])
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(r * r)))


@dataclass(frozen=True)
class Crossing:
    pair: str
    n_eff: int
    lambda_n: float
    alpha_n: float
    nu_n: float | None


@dataclass(frozen=True)
class CriticalEstimate:
    crossings: tuple
    lambda_c: float | None = None
    alpha: float | None = None
    nu: float | None = None
    fits: dict = field(default_factory=dict)
    failures: tuple = ()


def analyze(surface: EnergySurface, n_list=None, bracket=DEFAULT_BRACKET, tol: float = 1e-10) -> CriticalEstimate:
    """Crossings of all adjacent consecutive-triple Gamma curves and their 1/N extrapolation.

    A pair whose curves do not cross is recorded in ``failures`` rather
    than aborting the analysis.
    """
    triples = consecutive_triples(surface.n_list if n_list is None else n_list)
    crossings, failures = [], []
    for ta, tb in zip(triples, triples[1:]):
        pair = f"{ta.label}-{tb.label}"
        try:
            lam_n, alpha_n = find_crossing(surface, ta, tb, bracket, tol)
        except (BracketError, UndefinedPoint) as exc:
            log.warning("pair %s: %s", pair, exc)
            failures.append((pair, str(exc)))
            continue
        try:
            nu_n = estimate_nu(surface, (lam_n, alpha_n), ta)
        except UndefinedPoint as exc:
            log.warning("pair %s: nu undefined: %s", pair, exc)
            nu_n = None
        crossings.append(Crossing(pair, ta.n1, lam_n, alpha_n, nu_n))
    fits = {}
    est = {"lambda_c": None, "alpha": None, "nu": None}
    for key, attr in (("lambda_c", "lambda_n"), ("alpha", "alpha_n"), ("nu", "nu_n")):
        pts = [(c.n_eff, getattr(c, attr)) for c in crossings if getattr(c, attr) is not None]
        if len(pts) >= 2:
            v, s, r = extrapolate(pts)
            fits[key] = {"intercept": v, "slope": s, "residual": r, "points": len(pts)}
            est[key] = v
    return CriticalEstimate(tuple(crossings), est["lambda_c"], est["alpha"], est["nu"], fits, tuple(failures))


@dataclass(frozen=True)
class CollapseResult:
    curves: dict
    spread: float
    convention: str


def scaled_axes(lam, energy, n_basis, lambda_c, alpha, nu, convention: str = "paper_printed"):
    """(x, y) of the collapse plot for one N.

    ``paper_printed``: x = (lam - lam_c) N^(-1/nu), y = E N^(-alpha/nu).
    ``standard``:      x = (lam - lam_c) N^(1/nu),  y = E N^(alpha/nu).
    """
    if convention not in COLLAPSE_CONVENTIONS:
        raise ValueError(f"unknown collapse convention {convention!r}")
    sgn = -1.0 if convention == "paper_printed" else 1.0
    lam = np.asarray(lam, dtype=float)
    energy = np.asarray(energy, dtype=float)
    return (lam - lambda_c) * n_basis ** (sgn / nu), energy * n_basis ** (sgn * alpha / nu)


def collapse_spread(curves: dict, samples: int = 401) -> float:
    """RMS spread across N of y at matched x, over the common x-range, divided by the y-range."""
    usable = {n: (x, y) for n, (x, y) in curves.items() if len(x) >= 2}
    if len(usable) < 2:
        raise ValueError("collapse needs at least two curves with two points each")
    lo = max(float(np.min(x)) for x, _ in usable.values())
    hi = min(float(np.max(x)) for x, _ in usable.values())
    if not lo < hi:
        raise ValueError("scaled curves share no common x-range")
    grid = np.linspace(lo, hi, samples)
    ys = []
    for x, y in usable.values():
        order = np.argsort(x)
        ys.append(PchipInterpolator(x[order], y[order])(grid))
    ys = np.array(ys)
    dev = ys - ys.mean(axis=0)
    rms = math.sqrt(float(np.mean(dev * dev)))
    yall = np.concatenate([y for _, y in usable.values()])
    span = float(np.max(yall) - np.min(yall))
    if span == 0:
        return 0.0 if rms == 0 else math.inf
    return rms / span


def data_collapse(surface: EnergySurface, lambda_c: float, alpha: float, nu: float, window=(0.5, 0.56),
                  convention: str = "paper_printed") -> CollapseResult:
    lo, hi = window
    curves = {}
    for n in surface.n_list:
        lam, e = surface.series(n, "E0")
        keep = (lam >= lo) & (lam <= hi)
        if keep.any():
            curves[n] = scaled_axes(lam[keep], e[keep], n, lambda_c, alpha, nu, convention)
    if not curves:
        raise ValueError(f"no bound-state rows in the window [{lo}, {hi}]")
    return CollapseResult(curves, collapse_spread(curves), convention)
