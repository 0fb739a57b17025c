"""Run configuration: one JSON document, strictly validated."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .catalog import (
    DEFAULT_IDLE_FRACTION,
    NETWORK_TABLE,
    PROCESSING_TABLE,
    CatalogError,
    DeviceCatalog,
    DeviceKind,
    Layout,
    Tier,
    build_catalog,
)
from .topology import Architecture


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LoadRange:
    min: float = 6.0
    max: float = 20.0
    step: float = 1.0

    def __post_init__(self):
        for name in ("min", "max", "step"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ConfigError(f"load_range.{name} must be a finite number")
        if not self.min > 0:
            raise ConfigError("load_range.min must be positive")
        if not self.step > 0:
            raise ConfigError("load_range.step must be positive")
        if self.max < self.min:
            raise ConfigError("load_range.max must be at least load_range.min")

    def points(self) -> list[float]:
        n = int(math.floor((self.max - self.min) / self.step + 1e-9)) + 1
        return [float(round(self.min + i * self.step, 12)) for i in range(n)]


@dataclass(frozen=True)
class SolverLimits:
    time_seconds: float | None = 60.0
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.time_seconds is not None and not (isinstance(self.time_seconds, (int, float)) and self.time_seconds > 0):
            raise ConfigError("solver.time_seconds must be positive or null")
        if not (isinstance(self.tolerance, (int, float)) and 0 <= self.tolerance < 1):
            raise ConfigError("solver.tolerance must lie in [0, 1)")


_SCALARS = ("idle_fraction_processing", "capacity_margin", "drr", "wavelength_capacity", "per_user_ap_rate")
_PROC_FIELDS = ("capacity", "p_max")
_NET_FIELDS = ("p_max", "p_idle", "capacity")


@dataclass(frozen=True)
class CatalogOverrides:
    idle_fraction_processing: float = DEFAULT_IDLE_FRACTION
    capacity_margin: float = 0.0
    drr: float = 0.05
    wavelength_capacity: float = 10.0
    per_user_ap_rate: float = 2.5
    n_core: int = 1
    allow_self_processing: bool = False
    processing: dict = field(default_factory=dict)  # tier name -> {capacity, p_max}
    network: dict = field(default_factory=dict)  # kind name -> {p_max, p_idle, capacity}

    def build(self) -> DeviceCatalog:
        params = {k: getattr(self, k) for k in _SCALARS}
        proc = {}
        for name, vals in self.processing.items():
            tier = Tier(name)
            base = dict(zip(_PROC_FIELDS, PROCESSING_TABLE[tier]))
            base.update(vals)
            proc[tier] = tuple(base[f] for f in _PROC_FIELDS)
        net = {}
        for name, vals in self.network.items():
            kind = DeviceKind(name)
            base = dict(zip(_NET_FIELDS, NETWORK_TABLE[kind]))
            base.update(vals)
            net[kind] = tuple(base[f] for f in _NET_FIELDS)
        try:
            return build_catalog(processing=proc, network=net, **params)
        except CatalogError as exc:
            raise ConfigError(f"catalog: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    architecture: Architecture = Architecture.PON
    layout: Layout = field(default_factory=Layout)
    load_range: LoadRange = field(default_factory=LoadRange)
    catalog: CatalogOverrides = field(default_factory=CatalogOverrides)
    solver: SolverLimits = field(default_factory=SolverLimits)
    output_dir: str = "results"
    workers: int = 1
    # per-architecture load grids for compare; normally empty
    architecture_load_ranges: dict = field(default_factory=dict)

    def device_catalog(self) -> DeviceCatalog:
        return self.catalog.build()

    def load_range_for(self, arch: Architecture) -> LoadRange:
        return self.architecture_load_ranges.get(arch, self.load_range)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        cat = {k: getattr(self.catalog, k) for k in _SCALARS}
        cat.update(
            n_core=self.catalog.n_core,
            allow_self_processing=self.catalog.allow_self_processing,
            processing={k: dict(v) for k, v in sorted(self.catalog.processing.items())},
            network={k: dict(v) for k, v in sorted(self.catalog.network.items())},
        )
        out = {
            "architecture": self.architecture.value,
            "layout": {
                "rooms": self.layout.rooms,
                "users_per_room": self.layout.users_per_room,
                "demanding_per_room": self.layout.demanding_per_room,
            },
            "load_range": _range_dict(self.load_range),
            "catalog": cat,
            "solver": {"time_seconds": self.solver.time_seconds, "tolerance": self.solver.tolerance},
            "output_dir": self.output_dir,
            "workers": self.workers,
        }
        if self.architecture_load_ranges:
            out["architecture_load_ranges"] = {
                a.value: _range_dict(r) for a, r in sorted(self.architecture_load_ranges.items(), key=lambda t: t[0].value)
            }
        return out


def _range_dict(r: LoadRange) -> dict:
    return {"min": r.min, "max": r.max, "step": r.step}


def _section(data: Any, name: str, allowed) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{name} must be an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {', '.join(unknown)}")
    return data


def _number(v, where, *, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number")
    if integer and (not float(v).is_integer()):
        raise ConfigError(f"{where} must be an integer")
    if not math.isfinite(v):
        raise ConfigError(f"{where} must be finite")
    return int(v) if integer else float(v)


def _parse_range(data, where) -> LoadRange:
    d = _section(data, where, ("min", "max", "step"))
    base = LoadRange()
    return LoadRange(**{k: _number(d.get(k, getattr(base, k)), f"{where}.{k}") for k in ("min", "max", "step")})


def _parse_arch(v, where) -> Architecture:
    try:
        return Architecture.parse(v)
    except (ValueError, TypeError):
        raise ConfigError(f"{where}: unknown architecture {v!r}") from None


def from_dict(data: dict) -> RunConfig:
    top = _section(data, "config", [f.name for f in fields(RunConfig)])
    kw = {}
    if "architecture" in top:
        kw["architecture"] = _parse_arch(top["architecture"], "architecture")
    if "layout" in top:
        d = _section(top["layout"], "layout", ("rooms", "users_per_room", "demanding_per_room"))
        base = Layout()
        vals = {k: _number(d.get(k, getattr(base, k)), f"layout.{k}", integer=True) for k in ("rooms", "users_per_room", "demanding_per_room")}
        try:
            kw["layout"] = Layout(**vals)
        except CatalogError as exc:
            raise ConfigError(str(exc)) from None
    if "load_range" in top:
        kw["load_range"] = _parse_range(top["load_range"], "load_range")
    if "catalog" in top:
        kw["catalog"] = _parse_catalog(top["catalog"])
    if "solver" in top:
        d = _section(top["solver"], "solver", ("time_seconds", "tolerance"))
        t = d.get("time_seconds", SolverLimits.time_seconds)
        kw["solver"] = SolverLimits(
            None if t is None else _number(t, "solver.time_seconds"),
            _number(d.get("tolerance", SolverLimits.tolerance), "solver.tolerance"),
        )
    if "output_dir" in top:
        if not isinstance(top["output_dir"], str) or not top["output_dir"]:
            raise ConfigError("output_dir must be a non-empty string")
        kw["output_dir"] = top["output_dir"]
    if "workers" in top:
        kw["workers"] = _number(top["workers"], "workers", integer=True)
        if kw["workers"] < 1:
            raise ConfigError("workers must be at least 1")
    if "architecture_load_ranges" in top:
        d = top["architecture_load_ranges"]
        if not isinstance(d, dict):
            raise ConfigError("architecture_load_ranges must be an object")
        kw["architecture_load_ranges"] = {
            _parse_arch(k, "architecture_load_ranges"): _parse_range(v, f"architecture_load_ranges.{k}")
            for k, v in d.items()
        }
    cfg = RunConfig(**kw)
    cfg.device_catalog()  # range checks against catalog invariants
    return cfg


def _parse_catalog(data) -> CatalogOverrides:
    allowed = [*_SCALARS, "n_core", "allow_self_processing", "processing", "network"]
    d = _section(data, "catalog", allowed)
    kw = {k: _number(d[k], f"catalog.{k}") for k in _SCALARS if k in d}
    if "n_core" in d:
        kw["n_core"] = _number(d["n_core"], "catalog.n_core", integer=True)
        if kw["n_core"] < 1:
            raise ConfigError("catalog.n_core must be at least 1")
    if "allow_self_processing" in d:
        if not isinstance(d["allow_self_processing"], bool):
            raise ConfigError("catalog.allow_self_processing must be true or false")
        kw["allow_self_processing"] = d["allow_self_processing"]
    if "processing" in d:
        names = [t.value for t in Tier]
        proc = _section(d["processing"], "catalog.processing", names)
        kw["processing"] = {
            k: {f: _number(x, f"catalog.processing.{k}.{f}") for f, x in _section(v, f"catalog.processing.{k}", _PROC_FIELDS).items()}
            for k, v in proc.items()
        }
    if "network" in d:
        names = [k.value for k in DeviceKind if k is not DeviceKind.PASSIVE]
        net = _section(d["network"], "catalog.network", names)
        kw["network"] = {
            k: {f: _number(x, f"catalog.network.{k}.{f}") for f, x in _section(v, f"catalog.network.{k}", _NET_FIELDS).items()}
            for k, v in net.items()
        }
    return CatalogOverrides(**kw)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return from_dict(data)
