"""Generalized eigenproblem (A + lam B) c = E O c and ground-state extraction.

The overlap O spans ~20 decades, so every reduction first equilibrates it:
with S = diag(1/sqrt(O_ii)) the matrix S O S has unit diagonal and a
condition number near 1e9 at N = 48. Cholesky S O S = L L^T then gives the
standard problem L^-1 S (A + lam B) S L^-T y = E y with c = S L^-T y.

Double precision resolves energies to ~1e-9 absolute, which is not enough
near threshold (E ~ 1e-10). ``ExtendedSolver`` repeats the reduction in
python-flint ``arb`` arithmetic and finds the lowest eigenpair by
shift-and-invert around a double-precision guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sl

from hulthen_fss.basis import DecayRateGrid
from hulthen_fss.errors import ConditioningError, ConvergenceError, NoBoundState
from hulthen_fss.pencil import SpectralPencil, equilibrate, norm_weight

IMAG_TOL = 1e-10
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray
    residual: float


@dataclass(frozen=True)
class GroundState:
    energy: float
    coeffs: np.ndarray
    residual: float
    norm_factor: float
    lam: float | None = None
    # arb column of the normalized coefficients, when solved in extended precision
    coeffs_ext: object = field(default=None, repr=False, compare=False)
    bits: int | None = None


def _reduce(O: np.ndarray):
    """Scaling vector s and Cholesky factor of the equilibrated overlap."""
    O = np.asarray(O, dtype=float)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        raise ValueError(f"overlap must be square, got shape {O.shape}")
    if not np.allclose(O, O.T, rtol=1e-14, atol=0):
        raise ConditioningError("overlap matrix is not symmetric")
    s = equilibrate(O)
    try:
        L = np.linalg.cholesky(O * np.outer(s, s))
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"overlap matrix is not positive definite: {exc}") from exc
    return s, L


def _residual(K: np.ndarray, O: np.ndarray, value, c: np.ndarray) -> float:
    r = K @ c - value * (O @ c)
    return float(np.linalg.norm(r) / np.linalg.norm(c))


def solve_generalized(A, B, O, lam: float) -> list[EigenPair]:
    """All eigenpairs of (A + lam B, O), sorted by real part.

    Vectors are back-transformed to the original coefficients and each pair
    carries its residual ||(A + lam B - E O) c|| / ||c||.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    O = np.asarray(O, dtype=float)
    n = O.shape[0]
    if A.shape != (n, n) or B.shape != (n, n):
        raise ValueError("A, B and O must share one square shape")
    s, L = _reduce(O)
    K = A + lam * B
    Ks = K * np.outer(s, s)
    M = sl.solve_triangular(L, sl.solve_triangular(L, Ks, lower=True).T, lower=True).T
    try:
        w, Y = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        # LAPACK's QR iteration gives up after 30 sweeps per eigenvalue
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}", iterations=30 * n) from exc
    C = s[:, None] * sl.solve_triangular(L.T, Y, lower=False)
    order = np.lexsort((w.imag, w.real))
    return [EigenPair(complex(w[k]), C[:, k], _residual(K, O, w[k], C[:, k])) for k in order]


def _real_vector(v: np.ndarray, tol: float):
    """Rotate ``v`` to make its largest entry real; None when it is not real to ``tol``."""
    v = np.asarray(v)
    if not np.iscomplexobj(v):
        return v.astype(float)
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return None
    v = v * (abs(v[k]) / v[k])
    if np.linalg.norm(v.imag) > tol * np.linalg.norm(v):
        return None
    return v.real.copy()


def _fix_sign(c: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(c)))
    return -c if c[k] < 0 else c


def ground_state(eigenpairs, lam: float, grid: DecayRateGrid | None = None, measure: str = "radial") -> GroundState:
    """Lowest admissible eigenpair, normalized over ``grid`` when one is given.

    An eigenvalue is admissible when its imaginary part and the imaginary
    part of its (phase-fixed) eigenvector are below 1e-10 max(1, |E|).
    Raises NoBoundState unless the lowest admissible eigenvalue is negative.
    """
    best = None
    for pair in eigenpairs:
        val = complex(pair.value)
        tol = IMAG_TOL * max(1.0, abs(val))
        if abs(val.imag) > tol:
            continue
        vec = _real_vector(pair.vector, tol)
        if vec is None:
            continue
        if best is None or val.real < best[0]:
            best = (val.real, vec, pair.residual)
    if best is None:
        raise NoBoundState(f"no admissible real eigenvalue at lambda={lam}")
    energy, vec, res = best
    if not energy < 0:
        raise NoBoundState(f"lowest eigenvalue {energy:.3e} is not negative at lambda={lam}")
    vec = _fix_sign(vec)
    if grid is None:
        return GroundState(float(energy), vec, float(res), 1.0, lam)
    # residual is homogeneous of degree 0 in c, so it survives the rescaling
    coeffs, nf = normalize(vec, grid, measure)
    return GroundState(float(energy), coeffs, float(res), nf, lam)


def gram_matrix(grid: DecayRateGrid, measure: str = "radial") -> np.ndarray:
    beta = grid.rates
    return norm_weight(beta[:, None] + beta[None, :], measure)


def normalize(coeffs, grid: DecayRateGrid, measure: str = "radial"):
    """Scale ``coeffs`` so that 4 pi sum c_m c_n W_mn = 1; returns (coeffs, N_f).

    W_mn = 2/(beta_m+beta_n)^3 is the integral of u_m u_n over [0, inf) for
    u_n = x exp(-beta_n x). ``measure="paper_printed"`` uses 2/(beta_m+beta_n)^5.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (len(grid),):
        raise ValueError(f"expected {len(grid)} coefficients, got shape {c.shape}")
    if not np.any(c):
        raise ValueError("cannot normalize the zero vector")
    W = gram_matrix(grid, measure)
    # the Gram form cancels badly for wide grids; scale first to keep it in range
    m = np.max(np.abs(c))
    cs = c / m
    nf2 = FOUR_PI * float(cs @ W @ cs)
    if not nf2 > 0:
        raise ValueError(f"norm integral is not positive ({nf2!r})")
    nf = m * math.sqrt(nf2)
    return c / nf, nf


class ExtendedSolver:
    """Extended-precision solves for one assembled pencil.

    The lambda-independent work (equilibration, Cholesky, reduced matrices)
    happens once here. ``lowest`` costs a few ms per coupling; ``eigenpairs``
    runs a full dense eigensolve and is ~100x slower.
    """

    def __init__(self, pencil: SpectralPencil):
        from flint import arb, arb_mat

        from hulthen_fss import _arb

        ext = pencil.extended
        if ext is None:
            raise ValueError("pencil was assembled without precision_bits")
        self.pencil = pencil
        self.bits = ext.bits
        self.n = pencil.n_basis
        n = self.n
        with _arb.working_precision(self.bits):
            O = ext.O
            s = [(1 / O[i, i].sqrt()).mid() for i in range(n)]
            S = arb_mat(n, n)
            for i in range(n):
                S[i, i] = s[i]
            try:
                L = _arb.cholesky(S * O * S)
            except ValueError as exc:
                raise ConditioningError(f"overlap matrix is not positive definite: {exc}") from exc
            Linv = _arb.solve(L, _arb.identity(n))
            T = S * Linv.transpose()
            self._T = T
            self._At = Linv * S * ext.A * T
            self._Bt = Linv * S * ext.B * T
            self._A, self._B, self._O = ext.A, ext.B, ext.O
            self._W, self._I = ext.W, ext.I_pot
            self._I_n = _arb.identity(n)
        self._Ad = _arb.to_numpy(self._At)
        self._Bd = _arb.to_numpy(self._Bt)
        self._arb = arb

    def _lam(self, lam):
        # the decimal repr keeps grid values such as 0.55 exact in the arb context
        return self._arb(repr(float(lam)))

    def eigenpairs(self, lam: float) -> list[EigenPair]:
        """Full spectrum from a dense extended-precision eigensolve."""
        from flint import acb_mat

        from hulthen_fss import _arb

        with _arb.working_precision(self.bits):
            L = self._lam(lam)
            M = self._At + L * self._Bt
            vals, Y = acb_mat(M).eig(right=True, algorithm="approx")
            if len(vals) != self.n:
                raise ConvergenceError("extended eigensolve did not return all eigenvalues")
            K = self._A + L * self._B
            C = acb_mat(self._T) * Y
            out = []
            for k, v in enumerate(vals):
                c = np.array([complex(C[i, k]) for i in range(self.n)])
                out.append(EigenPair(complex(v), c, self._residual_col(K, v, C, k)))
        out.sort(key=lambda p: (p.value.real, p.value.imag))
        return out

    def _residual_col(self, K, value, C, k) -> float:
        from flint import acb_mat

        col = acb_mat(self.n, 1, [C[i, k] for i in range(self.n)])
        r = acb_mat(K) * col - value * (acb_mat(self._O) * col)
        rn = math.sqrt(sum(abs(complex(r[i, 0])) ** 2 for i in range(self.n)))
        cn = math.sqrt(sum(abs(complex(col[i, 0])) ** 2 for i in range(self.n)))
        return rn / cn

    def _guess(self, lam: float) -> float:
        w = np.linalg.eigvals(self._Ad + lam * self._Bd)
        w = w[np.abs(w.imag) <= 1e-6 * np.maximum(1.0, np.abs(w))]
        return float(np.min(w.real)) if w.size else 0.0

    def lowest(self, lam: float, polish: int = 2, require_bound: bool = True) -> GroundState:
        """Lowest eigenpair by shift-and-invert, normalized, in ``self.bits`` precision.

        The shift sits below the double-precision guess so that the wanted
        eigenvalue maps to the largest eigenvalue of the inverse; a double
        eigensolve of the (extended) inverse then resolves it to about
        1e-16 times the shift distance. With ``require_bound=False`` a
        non-negative lowest eigenvalue (a discretized continuum state) is
        returned instead of raising NoBoundState.
        """
        from hulthen_fss import _arb

        n = self.n
        guess = self._guess(lam)
        delta = max(1e-6, 1e-3 * abs(guess))
        sigma = guess - delta
        with _arb.working_precision(self.bits):
            L = self._lam(lam)
            M = self._At + L * self._Bt
            for attempt in range(4):
                sig = self._arb(repr(sigma))
                shifted = M - sig * self._I_n
                inv = _arb.solve(shifted, self._I_n)
                theta, V = np.linalg.eig(_arb.to_numpy(inv))
                ok = np.abs(theta.imag) <= IMAG_TOL * np.abs(theta)
                if not ok.any():
                    raise NoBoundState(f"no real eigenvalue at lambda={lam}")
                E = sigma + 1.0 / theta[ok].real
                k = int(np.argmin(E))
                if E[k] > sigma:
                    break
                # an eigenvalue fell below the shift; move the shift under it
                sigma = float(E[k]) - delta
            else:
                raise ConvergenceError(f"shift placement failed at lambda={lam}", iterations=4)
            vec = _real_vector(V[:, np.flatnonzero(ok)[k]], 1e-6)
            if vec is None:
                raise NoBoundState(f"lowest eigenvector is not real at lambda={lam}")
            y = _arb.column(vec / np.max(np.abs(vec)))
            for _ in range(polish):
                y = _arb.solve(shifted, y)
                y = y * (1 / _arb.norm2(y)).mid()
            energy = (_arb.dot(y, M * y) / _arb.dot(y, y)).mid()
            if require_bound and not float(energy) < 0:
                raise NoBoundState(f"lowest eigenvalue {float(energy):.3e} is not negative at lambda={lam}")
            c = self._T * y
            K = self._A + L * self._B
            r = K * c - energy * (self._O * c)
            residual = float(_arb.norm2(r) / _arb.norm2(c))
            nf = (4 * self._arb.pi() * _arb.dot(c, self._W * c)).sqrt()
            c = c * (1 / nf).mid()
            coeffs = np.array([float(c[i, 0]) for i in range(n)])
            if coeffs[int(np.argmax(np.abs(coeffs)))] < 0:
                c = -c
                coeffs = -coeffs
        return GroundState(float(energy), coeffs, residual, float(nf), lam, c, self.bits)
