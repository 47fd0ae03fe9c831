"""Experiment configuration: TOML with nested tables, parsed into dataclasses.

Every numeric knob is explicit in the file and echoed into reports together
with a hash of the parsed configuration, so a report is reproducible from its
own metadata.  Presets are referenced by name; unknown names fail fast.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import algebra, connection as conn_mod, curves as curves_mod, geometry
from .errors import ConfigError

__all__ = [
    "ChartConfig",
    "ConnectionConfig",
    "RotationCurveConfig",
    "CurveFamilyConfig",
    "ResolutionConfig",
    "ExperimentConfig",
    "load_config",
    "config_hash",
    "build_chart",
    "build_connection",
    "build_rotation_curve",
    "build_curves",
]


@dataclass
class ChartConfig:
    preset: str = "flat"
    orientation: int = 1
    phi_family: str = "zero"
    phi_params: dict = field(default_factory=dict)
    circle_radius: float = 1.0


@dataclass
class ConnectionConfig:
    preset: str = "instanton"
    rho: float = 1.0
    center: tuple = (0.0, 0.0, 0.0, 0.0)
    duality: str = "anti_self_dual"
    bump: dict = field(default_factory=dict)
    gauge: dict = field(default_factory=dict)


@dataclass
class RotationCurveConfig:
    kind: str = "constant"
    side: str | None = None
    plus: tuple = (1.0, 0.0, 0.0)
    minus: tuple = (0.0, 0.0, 0.0)
    terms: list = field(default_factory=list)
    label: str = ""


@dataclass
class CurveFamilyConfig:
    family: str = "fourier_loops"
    count: int = 20
    seed: int = 12345
    modes: int = 3
    scale: float = 0.5
    radius: float = 0.5
    plane: tuple = (0, 1)
    nodes: list = field(default_factory=list)


@dataclass
class ResolutionConfig:
    ode_steps: int = 1024
    quad_radial: int = 120
    quad_angular: tuple = (12, 12, 24)
    fd_epsilon: float = 1e-3


@dataclass
class ExperimentConfig:
    chart: ChartConfig
    connection: ConnectionConfig
    rotation_curves: list
    curves: CurveFamilyConfig
    resolution: ResolutionConfig
    command_opts: dict
    raw: dict

    @property
    def seed(self) -> int:
        return int(self.curves.seed)


def _take(table: dict, cls, **renames):
    keys = {f for f in cls.__dataclass_fields__}
    unknown = set(table) - keys
    if unknown:
        raise ConfigError(f"unknown keys in [{cls.__name__}]: {sorted(unknown)}")
    kwargs = {k: table[k] for k in table}
    return cls(**kwargs)


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    known_sections = {
        "chart",
        "connection",
        "rotation_curves",
        "curves",
        "resolution",
        "verify_instanton",
        "charge",
        "levy",
        "holonomy",
        "lemma2",
        "selftest",
    }
    unknown = set(raw) - known_sections
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    chart = _take(raw.get("chart", {}), ChartConfig)
    connection = _take(raw.get("connection", {}), ConnectionConfig)
    rots = [_take(t, RotationCurveConfig) for t in raw.get("rotation_curves", [])]
    curves = _take(raw.get("curves", {}), CurveFamilyConfig)
    if seed_override is not None:
        curves.seed = int(seed_override)
        raw = dict(raw)
        raw.setdefault("curves", {})
        raw["curves"] = {**raw.get("curves", {}), "seed": int(seed_override)}
    resolution = _take(raw.get("resolution", {}), ResolutionConfig)
    command_opts = {
        k: raw.get(k, {})
        for k in ("verify_instanton", "charge", "levy", "holonomy", "lemma2", "selftest")
    }
    return ExperimentConfig(chart, connection, rots, curves, resolution, command_opts, raw)


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(cfg.raw, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_chart(c: ChartConfig) -> geometry.MetricChart:
    if c.preset == "flat":
        chart = geometry.flat_chart()
    elif c.preset == "conformally_flat":
        phi = geometry.scalar_field(c.phi_family, **c.phi_params)
        chart = geometry.conformally_flat_chart(phi)
    elif c.preset == "round_s4":
        chart = geometry.round_s4_chart()
    elif c.preset == "s1xs3":
        chart = geometry.s1xs3_chart(c.circle_radius)
    else:
        raise ConfigError(f"unknown chart preset '{c.preset}'")
    if c.orientation == -1:
        chart = chart.flipped()
    elif c.orientation != 1:
        raise ConfigError("orientation must be +1 or -1")
    return chart


def build_connection(c: ConnectionConfig) -> conn_mod.Connection:
    if c.preset == "zero":
        return conn_mod.ZeroConnection()
    base = conn_mod.quaternion_instanton(c.rho, c.center, c.duality)
    if c.preset == "instanton":
        return base
    if c.preset == "perturbed":
        b = dict(c.bump)
        bump = conn_mod.bump_perturbation(
            center=b.get("center", (0.2, 0.0, 0.0, 0.0)),
            radius=b.get("radius", 0.8),
            amplitude=b.get("amplitude", 0.1),
            directions=np.asarray(b["directions"], float) if "directions" in b else None,
        )
        return conn_mod.PerturbedConnection(base, bump)
    if c.preset == "gauge_transformed":
        g = dict(c.gauge)
        family = g.pop("family", "gaussian")
        direction = g.pop("direction", (0.3, -0.5, 0.8))
        psi = conn_mod.gauge_field(family, direction, **g)
        return conn_mod.gauge_transform(base, psi)
    raise ConfigError(f"unknown connection preset '{c.preset}'")


def build_rotation_curve(c: RotationCurveConfig) -> algebra.RotationCurve:
    if c.kind == "constant":
        W = algebra.constant_rotation_curve(tuple(c.plus), tuple(c.minus), label=c.label or None)
    elif c.kind == "trig":
        terms = [
            (tuple(t["plus"]), tuple(t.get("minus", (0, 0, 0))), t.get("freq", 1.0), t.get("a", 1.0), t.get("b", 0.0))
            for t in c.terms
        ]
        W = algebra.trig_rotation_curve(terms, label=c.label or None)
    elif c.kind == "nodes":
        mats = [
            algebra.from_coefficients(np.asarray(t["plus"], float), np.asarray(t.get("minus", (0, 0, 0)), float))
            for t in c.terms
        ]
        ts = np.linspace(0.0, 1.0, len(mats))
        W = algebra.rotation_curve_from_nodes(ts, np.asarray(mats), side=c.side or "general", label=c.label or "W_nodes")
    else:
        raise ConfigError(f"unknown rotation curve kind '{c.kind}'")
    if c.side and W.side != c.side:
        raise ConfigError(f"rotation curve '{W.label}' declared side={c.side} but generator has side={W.side}")
    return W


def build_curves(c: CurveFamilyConfig):
    if c.family == "fourier_loops":
        return curves_mod.random_fourier_loops(c.seed, c.count, c.modes, c.scale)
    if c.family == "fourier_arcs":
        return curves_mod.random_fourier_arcs(c.seed, c.count, c.modes, c.scale)
    if c.family == "circle":
        return [curves_mod.CircleLoop(np.zeros(4), c.radius, tuple(c.plane))]
    if c.family == "figure_eight":
        return [curves_mod.FigureEight(np.zeros(4), c.scale)]
    if c.family == "nodes":
        if not c.nodes:
            raise ConfigError("curve family 'nodes' needs an inline node list")
        nodes = np.asarray(c.nodes, dtype=float)
        ts = np.linspace(0.0, 1.0, nodes.shape[0])
        return [curves_mod.HermiteCurve(ts, nodes)]
    raise ConfigError(f"unknown curve family '{c.family}'")
