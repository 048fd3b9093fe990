"""JSON experiment configs, validated before any computation runs."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path

from .fields import AnalyticField, GridField, GridSpec, field_from_descriptor


class ConfigError(ValueError):
    pass


def _num(x, name: str) -> float:
    try:
        if isinstance(x, str):
            return float(Fraction(x))
        return float(x)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{name}: expected a number or 'p/q' string, got {x!r}") from None


@dataclass
class ExperimentConfig:
    fields: list
    grid: GridSpec | None
    eta: float | None = None
    alpha: float | None = None
    s: float | None = None
    p: float | None = None
    mode: str = "bmo"
    deltas: list = dc_field(default_factory=list)
    gamma_test: float = 0.5
    out_dir: Path | None = None
    workers: int = 1
    seed: int = 0
    raw: dict = dc_field(default_factory=dict)

    @property
    def n(self) -> int:
        if self.grid is not None:
            return self.grid.n
        for f in self.fields:
            if isinstance(f, GridField):
                return f.n
        return 1


def _load_field(d, base: Path):
    if not isinstance(d, dict):
        raise ConfigError("field entries must be objects")
    if "path" in d:
        path = base / d["path"]
        if not path.exists():
            raise ConfigError(f"field file not found: {path}")
        text = path.read_text()
        if path.suffix == ".csv":
            return GridField.from_csv(text)
        return GridField.from_json(json.loads(text))
    try:
        return field_from_descriptor(d)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad field descriptor {d!r}: {e}") from None


def _deltas(spec) -> list[float]:
    if isinstance(spec, dict):
        lo, hi = int(spec["from_exp"]), int(spec["to_exp"])
        return [2.0 ** -e for e in range(lo, hi + 1)]
    return [_num(x, "sweep.deltas") for x in spec]


def load_config(path: str | os.PathLike, command: str) -> ExperimentConfig:
    """Read and validate a config for ``command`` (seminorm, bgw or sharpness)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    base = path.parent
    params = raw.get("params", {})
    cfg = ExperimentConfig(fields=[], grid=None, raw=raw)
    for key in ("eta", "alpha", "s", "p"):
        if key in params:
            setattr(cfg, key, _num(params[key], f"params.{key}"))
    if "grid" in raw:
        g = raw["grid"]
        try:
            cfg.grid = GridSpec(int(g["n"]), _num(g["L"], "grid.L"), _num(g["h"], "grid.h"))
        except (KeyError, ValueError) as e:
            raise ConfigError(f"bad grid: {e}") from None
    descs = raw.get("fields") or ([raw["field"]] if "field" in raw else [])
    cfg.fields = [_load_field(d, base) for d in descs]
    cfg.mode = raw.get("mode", "bmo")
    cfg.workers = int(raw.get("workers", 1))
    cfg.seed = int(raw.get("seed", 0))
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    out = raw.get("output", {})
    if "dir" in out:
        cfg.out_dir = (base / out["dir"]) if not os.path.isabs(out["dir"]) else Path(out["dir"])
    sweep = raw.get("sweep", {})
    if "deltas" in sweep:
        cfg.deltas = _deltas(sweep["deltas"])
    if "gamma_test" in sweep:
        cfg.gamma_test = _num(sweep["gamma_test"], "sweep.gamma_test")
    _validate(cfg, command)
    return cfg


def _validate(cfg: ExperimentConfig, command: str) -> None:
    n = cfg.n
    if command in ("seminorm", "bgw") and not cfg.fields:
        raise ConfigError("config needs a 'field' (or 'fields') entry")
    if any(isinstance(f, AnalyticField) for f in cfg.fields) and cfg.grid is None:
        raise ConfigError("analytic fields need a 'grid' entry")
    if cfg.eta is not None and not 0 < cfg.eta < 1:
        raise ConfigError("params.eta must lie in (0, 1)")
    if cfg.alpha is not None and not 0 < cfg.alpha < n:
        raise ConfigError(f"params.alpha must lie in (0, n) = (0, {n})")
    if cfg.p is not None and cfg.p < 1:
        raise ConfigError("params.p must be >= 1")
    if cfg.s is not None and cfg.s <= 0:
        raise ConfigError("params.s must be positive")
    if command == "bgw":
        if cfg.mode not in ("bmo", "sobolev"):
            raise ConfigError("mode must be 'bmo' or 'sobolev'")
        need = ["eta", "alpha"] + (["s", "p"] if cfg.mode == "sobolev" else [])
        missing = [k for k in need if getattr(cfg, k) is None]
        if missing:
            raise ConfigError(f"params missing: {', '.join(missing)}")
        if cfg.mode == "sobolev" and abs(cfg.s * cfg.p - n) > 1e-9:
            raise ConfigError(f"precondition sp = n violated: s*p = {cfg.s * cfg.p}, n = {n}")
    if command == "sharpness":
        for k in ("eta", "alpha", "s", "p"):
            if getattr(cfg, k) is None:
                raise ConfigError(f"params.{k} is required for sharpness")
        if abs(cfg.s * cfg.p - n) > 1e-9:
            raise ConfigError(f"precondition sp = n violated: s*p = {cfg.s * cfg.p}, n = {n}")
        if len(cfg.deltas) < 2 or any(b >= a for a, b in zip(cfg.deltas, cfg.deltas[1:])):
            raise ConfigError("sweep.deltas must be strictly decreasing (at least two)")
        if not 0 < cfg.gamma_test < 1:
            raise ConfigError("sweep.gamma_test must lie in (0, 1)")
        if cfg.grid is not None and min(cfg.deltas) < 4 * cfg.grid.h:
            raise ConfigError("smallest delta is below grid resolution (needs >= 4h)")
