"""INI experiment configuration.

Four sections, all optional; missing keys take the defaults below::

    [model]   name = beeler_reuter | dahlquist, parameter_file, lambda, theta, y0,
              any other key overrides a Beeler-Reuter parameter
    [scheme]  schemes = EAB2, I-EAB3, AB2, BDF2, RK4, ...
              newton_max_iters, newton_abs_tol, newton_rel_tol
    [run]     T, h (list), h_ref, table_h, output_dir, workers,
              dt0_h_lo, dt0_h_hi, dt0_rtol, dt0_scan_ratio, dt0_implicit_h_lo
    [grid]    k, theta, x0, x1, y0, y1, dx, line_min, line_dx,
              theta_lo, theta_hi, theta_tol, positivity_trials, positivity_seed
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from .classical import NewtonConfig
from .core import SchemeSpec


class ConfigError(ValueError):
    pass


DEFAULT_SCHEMES = ("EAB2", "EAB3", "EAB4", "I-EAB2", "I-EAB3", "I-EAB4")


@dataclass(frozen=True)
class ModelConfig:
    name: str = "beeler_reuter"
    parameter_file: str | None = None
    lam: float = -82.0
    theta: float = 1.0
    y0: float = 1.0
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SchemeConfig:
    schemes: tuple[SchemeSpec, ...] = tuple(SchemeSpec.parse(s) for s in DEFAULT_SCHEMES)
    newton: NewtonConfig = NewtonConfig()


@dataclass(frozen=True)
class RunConfig:
    T: float = 500.0
    h: tuple[float, ...] = (0.005, 0.0025, 0.00125, 0.000625)
    h_ref: float | None = None
    table_h: float = 1e-3
    output_dir: str = "out"
    workers: int = 1
    dt0_h_lo: float = 0.002
    dt0_h_hi: float = 2.0
    dt0_rtol: float = 1e-3
    dt0_scan_ratio: float | None = 1.02
    # BDF runs go through the Python Newton loop; start higher and skip the scan.
    dt0_implicit_h_lo: float = 0.05


@dataclass(frozen=True)
class GridConfig:
    k: int = 2
    theta: float = 0.9
    x0: float = -40.0
    x1: float = 2.0
    y0: float = 0.0
    y1: float = 60.0
    dx: float = 0.05
    line_min: float = -30.0
    line_dx: float = 0.01
    theta_lo: float = 0.5
    theta_hi: float = 2.5
    theta_tol: float = 1e-3
    positivity_trials: int = 2000
    positivity_seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = ModelConfig()
    scheme: SchemeConfig = SchemeConfig()
    run: RunConfig = RunConfig()
    grid: GridConfig = GridConfig()


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _optional_float(text):
    text = text.strip()
    return None if text.lower() in ("", "none") else float(text)


def _typed(cls, section, skip=()):
    """Coerce a section's keys to the field types of ``cls``."""
    kinds = {f.name: f.type for f in fields(cls)}
    out = {}
    for key, raw in section.items():
        if key in skip:
            continue
        if key not in kinds:
            raise ConfigError(f"[{section.name}] unknown key {key!r}")
        kind = kinds[key]
        try:
            if kind == "int":
                out[key] = int(raw)
            elif kind == "float":
                out[key] = float(raw)
            elif kind == "float | None":
                out[key] = _optional_float(raw)
            elif kind == "tuple[float, ...]":
                out[key] = _floats(raw)
            else:
                out[key] = raw.strip()
        except ValueError as exc:
            raise ConfigError(f"[{section.name}] {key}: {exc}") from None
    return out


def _model(section) -> ModelConfig:
    known = {"name", "parameter_file", "lambda", "theta", "y0"}
    kw = {}
    try:
        if "name" in section:
            kw["name"] = section["name"].strip()
        if section.get("parameter_file", "").strip():
            kw["parameter_file"] = section["parameter_file"].strip()
        for key, attr in (("lambda", "lam"), ("theta", "theta"), ("y0", "y0")):
            if key in section:
                kw[attr] = float(section[key])
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from None
    over = {}
    for key, raw in section.items():
        if key in known:
            continue
        try:
            over[key] = float(raw)
        except ValueError:
            over[key] = raw.strip()
    kw["overrides"] = over
    cfg = ModelConfig(**kw)
    if cfg.name not in ("beeler_reuter", "dahlquist"):
        raise ConfigError(f"[model] unknown model {cfg.name!r}")
    if cfg.name == "dahlquist" and (over or cfg.parameter_file):
        raise ConfigError("[model] parameter overrides only apply to beeler_reuter")
    return cfg


def _scheme(section) -> SchemeConfig:
    kw = {}
    try:
        if "schemes" in section:
            labels = [s for s in section["schemes"].replace(",", " ").split() if s]
            if not labels:
                raise ConfigError("[scheme] schemes is empty")
            kw["schemes"] = tuple(SchemeSpec.parse(s) for s in labels)
        newton = {}
        for key in section:
            if key == "schemes":
                continue
            if not key.startswith("newton_"):
                raise ConfigError(f"[scheme] unknown key {key!r}")
            name = key[len("newton_"):]
            newton[name] = int(section[key]) if name in ("max_iters", "max_halvings") else float(section[key])
        if newton:
            kw["newton"] = NewtonConfig(**newton)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[scheme] {exc}") from None
    return SchemeConfig(**kw)


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(cp.sections()) - {"model", "scheme", "run", "grid"}
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    parts = {}
    if cp.has_section("model"):
        parts["model"] = _model(cp["model"])
    if cp.has_section("scheme"):
        parts["scheme"] = _scheme(cp["scheme"])
    try:
        if cp.has_section("run"):
            parts["run"] = RunConfig(**_typed(RunConfig, cp["run"]))
        if cp.has_section("grid"):
            parts["grid"] = GridConfig(**_typed(GridConfig, cp["grid"]))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg = ExperimentConfig(**parts)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    r, g = cfg.run, cfg.grid
    if r.T <= 0 or not r.h or min(r.h) <= 0:
        raise ConfigError("[run] T and every h must be positive")
    if r.workers < 1:
        raise ConfigError("[run] workers must be >= 1")
    if not 0 < r.dt0_h_lo < r.dt0_h_hi:
        raise ConfigError("[run] need 0 < dt0_h_lo < dt0_h_hi")
    if r.dt0_scan_ratio is not None and r.dt0_scan_ratio <= 1:
        raise ConfigError("[run] dt0_scan_ratio must exceed 1")
    if g.k not in (2, 3, 4) or g.theta <= 0 or g.dx <= 0 or g.line_dx <= 0:
        raise ConfigError("[grid] need k in 2..4 and positive theta, dx, line_dx")
    if not 0 < g.theta_lo < 1 < g.theta_hi:
        raise ConfigError("[grid] need 0 < theta_lo < 1 < theta_hi")


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)
