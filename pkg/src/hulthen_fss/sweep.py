"""The (lambda, N) sweep: one pencil per N, one ground-state solve per coupling."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from hulthen_fss import tables
from hulthen_fss.basis import BasisSpec, build_decay_rates
from hulthen_fss.eigensolver import ExtendedSolver, GroundState, ground_state, solve_generalized
from hulthen_fss.errors import ConditioningError, HulthenError, NoBoundState, SurfaceParseError
from hulthen_fss.pencil import SpectralPencil, assemble, check_conditioning

log = logging.getLogger(__name__)

STATUSES = ("ok", "no_bound_state", "failed")
SURFACE_COLUMNS = ("lambda", "n_basis", "E0", "V", "residual", "status")


@dataclass(frozen=True)
class SweepConfig:
    lambda_min: float = 0.49
    lambda_max: float = 0.56
    lambda_steps: int = 2001
    n_list: tuple = tuple(range(32, 50, 2))
    d_s: float = -4.0
    d_e: float = 4.0
    a: float = 1.0
    # explicit coupling values; when set they replace the uniform grid
    lambda_values: tuple | None = None
    precision: str = "extended"
    precision_bits: int = 128
    b_convention: str = "derived"
    measure: str = "radial"
    residual_tol: float = 1e-9
    conditioning_override: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if self.lambda_values is not None:
            vals = tuple(float(v) for v in self.lambda_values)
            if not vals or any(not v > 0 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError("lambda_values must be positive and strictly ascending")
            object.__setattr__(self, "lambda_values", vals)
        else:
            if not self.lambda_min < self.lambda_max:
                raise ValueError("need lambda_min < lambda_max")
            if int(self.lambda_steps) != self.lambda_steps or self.lambda_steps < 2:
                raise ValueError("lambda_steps must be an integer >= 2")
        if not self.n_list or any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ValueError("n_list must be non-empty and strictly ascending")
        if self.n_list[0] < 2:
            raise ValueError("basis sizes must be >= 2")
        if not self.a > 0:
            raise ValueError("a must be positive")
        if self.precision not in ("double", "extended"):
            raise ValueError(f"unknown precision {self.precision!r}")
        if self.precision_bits < 64:
            raise ValueError("precision_bits must be >= 64")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")

    def lambdas(self) -> np.ndarray:
        if self.lambda_values is not None:
            return np.array(self.lambda_values)
        return np.linspace(self.lambda_min, self.lambda_max, int(self.lambda_steps))

    def basis(self, n_basis: int) -> BasisSpec:
        return BasisSpec(n_basis, self.d_s, self.d_e)

    def describe(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SurfaceRow:
    lam: float
    n_basis: int
    E0: float | None
    V: float | None
    residual: float | None
    status: str = "ok"

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class EnergySurface:
    rows: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        index = {}
        for r in rows:
            key = (r.n_basis, r.lam)
            if key in index:
                raise ValueError(f"duplicate row for N={r.n_basis}, lambda={r.lam!r}")
            index[key] = r
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def n_list(self) -> tuple:
        return tuple(sorted({r.n_basis for r in self.rows}))

    def lambdas(self, n_basis: int | None = None) -> np.ndarray:
        vals = {r.lam for r in self.rows if n_basis is None or r.n_basis == n_basis}
        return np.array(sorted(vals))

    def row(self, lam: float, n_basis: int) -> SurfaceRow:
        try:
            return self._index[(int(n_basis), float(lam))]
        except KeyError:
            raise KeyError(f"no row for N={n_basis}, lambda={lam!r}") from None

    def series(self, n_basis: int, column: str = "E0"):
        """(lambda, value) arrays over the bound-state rows of one basis size."""
        rows = sorted((r for r in self.rows if r.n_basis == n_basis and r.ok), key=lambda r: r.lam)
        lam = np.array([r.lam for r in rows])
        val = np.array([getattr(r, column) for r in rows])
        return lam, val


def potential_expectation(state: GroundState, pencil: SpectralPencil, lam: float, tol: float = 1e-8) -> float:
    """V = -4 pi lam sum c_m c_n I_mn for a normalized state.

    Uses the extended-precision coefficients when the state carries them.
    """
    if state.coeffs_ext is not None and pencil.extended is not None:
        from hulthen_fss import _arb

        ext = pencil.extended
        with _arb.working_precision(ext.bits):
            c = state.coeffs_ext
            norm = float(4 * _arb.arb.pi() * _arb.dot(c, ext.W * c))
            if abs(norm - 1) > tol:
                raise ValueError(f"state is not normalized (4 pi c^T W c = {norm!r})")
            lam_a = _arb.arb(repr(float(lam)))
            return float(-4 * _arb.arb.pi() * lam_a * _arb.dot(c, ext.I_pot * c))
    c = np.asarray(state.coeffs, dtype=float)
    if c.shape != (pencil.n_basis,):
        raise ValueError("coefficient length does not match the pencil")
    norm = 4 * math.pi * float(c @ pencil.W @ c)
    if abs(norm - 1) > tol:
        raise ValueError(f"state is not normalized (4 pi c^T W c = {norm!r})")
    return -4 * math.pi * lam * float(c @ pencil.I_pot @ c)


def _solve_point(pencil, solver, lam, config: SweepConfig) -> SurfaceRow:
    n = pencil.n_basis
    a2 = config.a**2
    try:
        if solver is not None:
            state = solver.lowest(lam)
        else:
            pairs = solve_generalized(pencil.A, pencil.B, pencil.O, lam)
            state = ground_state(pairs, lam, pencil.grid, pencil.measure)
        V = potential_expectation(state, pencil, lam)
    except NoBoundState:
        return SurfaceRow(float(lam), n, None, None, None, "no_bound_state")
    except (HulthenError, ValueError, np.linalg.LinAlgError) as exc:
        log.warning("N=%d lambda=%r failed: %s", n, lam, exc)
        return SurfaceRow(float(lam), n, None, None, None, "failed")
    scale = np.linalg.norm(pencil.A + lam * pencil.B, 2)
    if not state.residual <= config.residual_tol * scale:
        log.warning("N=%d lambda=%r residual %.3e above tolerance", n, lam, state.residual)
        return SurfaceRow(float(lam), n, None, None, None, "failed")
    return SurfaceRow(float(lam), n, state.energy / a2, V / a2, state.residual, "ok")


def sweep_basis_size(config: SweepConfig, n_basis: int) -> list:
    """Rows for one basis size, in ascending lambda order."""
    bits = config.precision_bits if config.precision == "extended" else None
    pencil = assemble(build_decay_rates(config.basis(n_basis)), config.b_convention, config.measure, bits)
    try:
        check_conditioning(pencil.O, override=config.conditioning_override)
        solver = ExtendedSolver(pencil) if bits else None
    except ConditioningError as exc:
        log.error("N=%d: %s; every point marked failed", n_basis, exc)
        return [SurfaceRow(float(lam), n_basis, None, None, None, "failed") for lam in config.lambdas()]
    return [_solve_point(pencil, solver, float(lam), config) for lam in config.lambdas()]


def run_sweep(config: SweepConfig, threads: int = 1) -> EnergySurface:
    """Solve every (lambda, N) pair; rows ordered by N, then lambda.

    With ``threads`` > 1 (0 = one per CPU) basis sizes run in worker
    processes. The extended-precision context is process-global, so
    processes rather than threads; output order never depends on scheduling.
    """
    workers = (os.cpu_count() or 1) if threads == 0 else max(1, int(threads))
    if workers > 1 and len(config.n_list) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(config.n_list))) as pool:
            parts = list(pool.map(sweep_basis_size, [config] * len(config.n_list), config.n_list))
    else:
        parts = []
        for n in config.n_list:
            parts.append(sweep_basis_size(config, n))
            log.info("N=%d done", n)
    rows = [r for part in parts for r in part]
    return EnergySurface(tuple(rows), {"config_hash": tables.config_hash(config.describe())})


def save_surface(surface: EnergySurface, path, meta: dict | None = None):
    info = dict(surface.meta)
    info.update(meta or {})
    rows = [(r.lam, r.n_basis, r.E0, r.V, r.residual, r.status) for r in surface.rows]
    return tables.write_table(path, SURFACE_COLUMNS, rows, info)


def load_surface(path) -> EnergySurface:
    raw, meta = tables.read_table(path, SURFACE_COLUMNS)
    rows = []
    for line, rec in raw:
        status = rec["status"]
        if status not in STATUSES:
            raise SurfaceParseError(f"line {line}: unknown status {status!r}", line=line, column="status")
        ok = status == "ok"
        vals = [tables.parse_float(rec[c], line, c, allow_empty=not ok) for c in ("E0", "V", "residual")]
        if not ok and any(v is not None for v in vals):
            raise SurfaceParseError(f"line {line}: status {status} must leave E0, V, residual empty", line=line, column="E0")
        rows.append(SurfaceRow(tables.parse_float(rec["lambda"], line, "lambda"),
                               tables.parse_int(rec["n_basis"], line, "n_basis"), *vals, status))
    meta.pop("version", None)
    try:
        return EnergySurface(tuple(rows), meta)
    except ValueError as exc:
        raise SurfaceParseError(str(exc)) from exc
