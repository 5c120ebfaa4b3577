"""Run configuration from a TOML file, parsed strictly (unknown keys are errors)."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import tomli

from hulthen_fss.errors import ConfigError
from hulthen_fss.fss import COLLAPSE_CONVENTIONS
from hulthen_fss.pencil import B_CONVENTIONS, MEASURES
from hulthen_fss.sweep import SweepConfig

# published critical-point estimates, used for the collapse unless the config says otherwise
REFERENCE_LAMBDA_C = 0.500001
REFERENCE_ALPHA = 2.00094
REFERENCE_NU = 1.00000


@dataclass(frozen=True)
class GridSection:
    lambda_min: float = 0.49
    lambda_max: float = 0.56
    lambda_steps: int = 2001
    n_list: tuple = tuple(range(32, 50, 2))
    lambda_values: tuple | None = None
    d_s: float = -4.0
    d_e: float = 4.0
    a: float = 1.0


@dataclass(frozen=True)
class FSSSection:
    bracket_lo: float = 0.49
    bracket_hi: float = 0.55
    bisection_tol: float = 1e-10
    collapse_window: tuple = (0.5, 0.56)
    collapse_sign_convention: str = "paper_printed"
    collapse_lambda_c: float = REFERENCE_LAMBDA_C
    collapse_alpha: float = REFERENCE_ALPHA
    collapse_nu: float = REFERENCE_NU


@dataclass(frozen=True)
class NumericsSection:
    quadrature_points_per_panel: int = 64
    eigen_residual_tol: float = 1e-9
    extended_precision: bool = True
    precision_bits: int = 128
    b_element_convention: str = "derived"
    measure: str = "radial"
    conditioning_override: bool = False


@dataclass(frozen=True)
class RunConfig:
    sweep: GridSection = field(default_factory=GridSection)
    fss: FSSSection = field(default_factory=FSSSection)
    numerics: NumericsSection = field(default_factory=NumericsSection)
    output_dir: str = "out"
    # existing surface for fss/collapse; defaults to <output_dir>/surface.csv
    surface_file: str | None = None
    threads: int = 1

    def sweep_config(self) -> SweepConfig:
        g, num = self.sweep, self.numerics
        return SweepConfig(
            lambda_min=g.lambda_min,
            lambda_max=g.lambda_max,
            lambda_steps=g.lambda_steps,
            n_list=g.n_list,
            d_s=g.d_s,
            d_e=g.d_e,
            a=g.a,
            lambda_values=g.lambda_values,
            precision="extended" if num.extended_precision else "double",
            precision_bits=num.precision_bits,
            b_convention=num.b_element_convention,
            measure=num.measure,
            residual_tol=num.eigen_residual_tol,
            conditioning_override=num.conditioning_override,
        )

    def describe(self) -> dict:
        return asdict(self)


_SECTIONS = {"sweep": GridSection, "fss": FSSSection, "numerics": NumericsSection}
_TOP = {"output_dir": str, "surface_file": str, "threads": int}


def _coerce(cls, name, value, where):
    default = {f.name: f.default for f in fields(cls)}[name]
    kind = type(default) if default is not None else None
    if name in ("n_list", "lambda_values", "collapse_window"):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{where}.{name}: expected a list of numbers")
        return tuple(int(v) for v in value) if name == "n_list" else tuple(float(v) for v in value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}.{name}: expected true or false")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}.{name}: expected an integer")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}.{name}: expected a number")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}.{name}: expected a string")
        return value
    return value


def _section(cls, table, where):
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    known = {f.name for f in fields(cls)}
    for key in table:
        if key not in known:
            raise ConfigError(f"unknown key {where}.{key}")
    return cls(**{k: _coerce(cls, k, v, where) for k, v in table.items()})


def _check(cfg: RunConfig) -> RunConfig:
    num, f = cfg.numerics, cfg.fss
    if num.b_element_convention not in B_CONVENTIONS:
        raise ConfigError(f"numerics.b_element_convention must be one of {B_CONVENTIONS}")
    if num.measure not in MEASURES:
        raise ConfigError(f"numerics.measure must be one of {MEASURES}")
    if f.collapse_sign_convention not in COLLAPSE_CONVENTIONS:
        raise ConfigError(f"fss.collapse_sign_convention must be one of {COLLAPSE_CONVENTIONS}")
    if not f.bracket_lo < f.bracket_hi:
        raise ConfigError("fss.bracket_lo must be below fss.bracket_hi")
    if not f.bisection_tol > 0:
        raise ConfigError("fss.bisection_tol must be positive")
    if len(f.collapse_window) != 2 or not f.collapse_window[0] < f.collapse_window[1]:
        raise ConfigError("fss.collapse_window must be [lo, hi] with lo < hi")
    if cfg.threads < 0:
        raise ConfigError("threads must be >= 0")
    if num.quadrature_points_per_panel < 2:
        raise ConfigError("numerics.quadrature_points_per_panel must be >= 2")
    try:
        cfg.sweep_config()
    except ValueError as exc:
        raise ConfigError(f"[sweep]: {exc}") from exc
    return cfg


def parse_config(data: dict) -> RunConfig:
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            kwargs[key] = _section(_SECTIONS[key], value, key)
        elif key in _TOP:
            if _TOP[key] is int and (isinstance(value, bool) or not isinstance(value, int)):
                raise ConfigError(f"{key}: expected an integer")
            if _TOP[key] is str and not isinstance(value, str):
                raise ConfigError(f"{key}: expected a string")
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown key {key}")
    return _check(RunConfig(**kwargs))


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc
    return parse_config(data)


def with_overrides(cfg: RunConfig, output_dir=None, threads=None, precision=None) -> RunConfig:
    if output_dir is not None:
        cfg = replace(cfg, output_dir=str(output_dir))
    if threads is not None:
        cfg = replace(cfg, threads=int(threads))
    if precision is not None:
        cfg = replace(cfg, numerics=replace(cfg.numerics, extended_precision=precision == "extended"))
    return _check(cfg)


def surface_path(cfg: RunConfig) -> Path:
    return Path(cfg.surface_file) if cfg.surface_file else Path(cfg.output_dir) / "surface.csv"
