"""Key-value configuration for sets, weights, measures and quadrature.

Configs are INI files (``configparser``) with the sections ``[scenario]``,
``[set]``, ``[weight]``, ``[measure]``, ``[quad]`` and ``[output]``.  Every
section maps onto a dataclass; unknown keys are rejected so that typos do not
silently fall back to defaults.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ._quad import QuadConfig
from .circle_sets import (AnglePoint, CantorSpec, CircleSet, build_cantor, build_point_sequence,
                          build_theta_sequence, finite_set, single_point)
from .measures import BoundaryMeasure, atoms_only, dist_power, from_weight, lebesgue
from .weights import Weight, constant_weight, log_power_weight, power_weight

SET_KINDS = ("cantor", "symmetric", "one_sided", "theta", "point", "finite")
WEIGHT_KINDS = ("power", "log_power", "constant")
MEASURE_KINDS = ("lebesgue", "dist_power", "weight", "atoms")


class ConfigError(ValueError):
    """A configuration file or flag combination that cannot be turned into objects."""


@dataclass
class SetConfig:
    kind: str = "cantor"
    ratio: float = 1.0 / 3.0
    depth: int = 14
    gamma: float = 1.0
    count: int = 4096
    alpha: float = 0.25
    beta: float = 3.0
    points: str = "0"

    def build(self) -> CircleSet:
        if self.kind == "cantor":
            return build_cantor(CantorSpec(self.ratio, self.depth))
        if self.kind in ("symmetric", "one_sided"):
            return build_point_sequence(self.kind, self.gamma, self.count)
        if self.kind == "theta":
            return build_theta_sequence(self.alpha, self.beta, self.count)
        if self.kind == "point":
            return single_point(float(self.points.split(",")[0]))
        if self.kind == "finite":
            return finite_set([float(p) for p in self.points.split(",")])
        raise ConfigError(f"unknown set kind {self.kind!r}; expected one of {', '.join(SET_KINDS)}")


@dataclass
class WeightConfig:
    kind: str = "power"
    alpha: float = 0.3
    sigma: float = 1.0
    value: float = 1.0

    def build(self) -> Weight:
        if self.kind == "power":
            return power_weight(self.alpha)
        if self.kind == "log_power":
            return log_power_weight(self.sigma)
        if self.kind == "constant":
            return constant_weight(self.value)
        raise ConfigError(f"unknown weight kind {self.kind!r}; expected one of {', '.join(WEIGHT_KINDS)}")


@dataclass
class MeasureConfig:
    kind: str = "lebesgue"
    power: float = 0.0
    atoms: str = ""          # "theta:mass, theta:mass"

    def parsed_atoms(self):
        out = []
        for item in filter(None, (s.strip() for s in self.atoms.split(","))):
            try:
                th, m = item.split(":")
                out.append((AnglePoint(float(th)), float(m)))
            except ValueError as exc:
                raise ConfigError(f"bad atom {item!r}: expected theta:mass") from exc
        return out

    def build(self, E: CircleSet, w: Weight) -> BoundaryMeasure:
        atoms = self.parsed_atoms()
        if self.kind == "lebesgue":
            mu = lebesgue()
        elif self.kind == "dist_power":
            mu = dist_power(E, self.power)
        elif self.kind == "weight":
            mu = from_weight(w, E)
        elif self.kind == "atoms":
            if not atoms:
                raise ConfigError("measure kind 'atoms' needs at least one atom")
            return atoms_only(atoms)
        else:
            raise ConfigError(f"unknown measure kind {self.kind!r}; expected one of "
                              f"{', '.join(MEASURE_KINDS)}")
        return mu.with_atoms(atoms) if atoms else mu


@dataclass
class QuadOverrides:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 80
    trust_factor: float = 100.0

    def build(self) -> QuadConfig:
        return QuadConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                          max_subdivisions=self.max_subdivisions, trust_factor=self.trust_factor)


@dataclass
class OutputConfig:
    dir: str = "results"
    prefix: str = ""


@dataclass
class ScenarioConfig:
    name: str = "custom"
    description: str = ""
    pipeline: list = field(default_factory=lambda: ["set_stats"])
    set: SetConfig = field(default_factory=SetConfig)
    weight: WeightConfig = field(default_factory=WeightConfig)
    measure: MeasureConfig = field(default_factory=MeasureConfig)
    quad: QuadOverrides = field(default_factory=QuadOverrides)
    output: OutputConfig = field(default_factory=OutputConfig)
    options: dict = field(default_factory=dict)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["scenario"] = {"name": self.name, "description": self.description,
                          "pipeline": ", ".join(self.pipeline),
                          **{k: str(v) for k, v in self.options.items()}}
        for sec in ("set", "weight", "measure", "quad", "output"):
            cp[sec] = {k: repr(v) if isinstance(v, float) else str(v)
                       for k, v in asdict(getattr(self, sec)).items()}
        lines = []
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines += [f"{k} = {v}" for k, v in cp[sec].items()]
            lines.append("")
        return "\n".join(lines)


_SECTIONS = {"set": SetConfig, "weight": WeightConfig, "measure": MeasureConfig,
             "quad": QuadOverrides, "output": OutputConfig}


def _coerce(cls, key: str, raw: str):
    types = {f.name: f.type for f in fields(cls)}
    if key not in types:
        raise ConfigError(f"unknown key {key!r} in [{cls.__name__}]")
    t = types[key]
    try:
        if t in ("float", float):
            return _parse_float(raw)
        if t in ("int", int):
            return int(float(raw))
    except ValueError as exc:
        raise ConfigError(f"{key} = {raw!r} is not a number") from exc
    return raw.strip()


def _parse_float(raw: str) -> float:
    s = raw.strip()
    if "/" in s:
        num, den = s.split("/")
        return float(num) / float(den)
    return float(s)


def parse_section(cls, items: dict):
    return cls(**{k: _coerce(cls, k, v) for k, v in items.items()})


def parse_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config {source}: {exc}") from exc
    unknown = set(cp.sections()) - set(_SECTIONS) - {"scenario"}
    if unknown:
        raise ConfigError(f"unknown sections in {source}: {', '.join(sorted(unknown))}")
    parts = {sec: parse_section(cls, dict(cp[sec])) if cp.has_section(sec) else cls()
             for sec, cls in _SECTIONS.items()}
    head = dict(cp["scenario"]) if cp.has_section("scenario") else {}
    name = head.pop("name", "custom")
    desc = head.pop("description", "")
    pipeline = [s.strip() for s in head.pop("pipeline", "set_stats").split(",") if s.strip()]
    return ScenarioConfig(name, desc, pipeline, options=head, **parts)


def load_scenario(path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_scenario(text, str(p))


def with_overrides(cfg, **values):
    """Replace the fields that are not None."""
    return replace(cfg, **{k: v for k, v in values.items() if v is not None})


def option(cfg: ScenarioConfig, key: str, default, kind=float):
    raw = cfg.options.get(key)
    if raw is None:
        return default
    if kind is list:
        return [_parse_float(x) for x in str(raw).split(",") if x.strip()]
    try:
        return kind(_parse_float(raw)) if kind in (float, int) else kind(raw)
    except ValueError as exc:
        raise ConfigError(f"option {key} = {raw!r} is not valid") from exc

