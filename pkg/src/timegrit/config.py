"""Run configuration: a single JSON document with complete defaults.

Every field is optional; the effective (fully defaulted) config is echoed to
the output directory so a run can be reproduced from its artifacts alone.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from . import materials as mat
from .eddy import DiscreteSystem, NewtonOptions, make_propagators
from .hierarchy import build_hierarchy
from .mesh import generate_coax_mesh
from .mgrit import MgritOptions
from .propagators import DahlquistProblem
from .sources import PwmSource, SineSource, ZeroSource

PROBLEMS = ("dahlquist", "eddy-linear", "eddy-nonlinear")


class ConfigError(ValueError):
    pass


@dataclass
class DahlquistParams:
    lam: float = -1.0
    u0: float = 1.0


@dataclass
class MeshParams:
    r0: float = 1.0e-3
    r1: float = 2.0e-3
    r2: float = 3.0e-3
    radial_layers: list = field(default_factory=lambda: [4, 4, 4])
    angular_divisions: int = 24


@dataclass
class MaterialParams:
    sigma: float = 1.0e7
    shield_mu_r: float = 1000.0    # linear variant only
    bh_table_path: str | None = None  # nonlinear variant; None = built-in curve


@dataclass
class SourceParams:
    kind: str = "pwm"  # pwm | sine | none
    period: float = 0.02
    teeth: int = 1100
    amplitude: float = 1.0


@dataclass
class RunConfig:
    problem: str = "dahlquist"
    t_start: float = 0.0
    t_end: float = 2.0
    num_intervals: int = 1024
    factors: list = field(default_factory=lambda: [4])
    relaxation: str | None = None
    halt_tol: float = 1.0e-8
    max_iters: int = 50
    num_workers: int = 1
    seed: int | None = None  # reserved for randomized testing; solves are deterministic
    out_dir: str = "runs"
    lz: float = 1.0
    dahlquist: DahlquistParams = field(default_factory=DahlquistParams)
    mesh: MeshParams = field(default_factory=MeshParams)
    material: MaterialParams = field(default_factory=MaterialParams)
    source: SourceParams = field(default_factory=SourceParams)
    level_unit_costs: list | None = None
    speedup_workers: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64, 128, 256])

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if self.num_intervals < 1:
            raise ConfigError(f"num_intervals must be >= 1, got {self.num_intervals}")
        if not self.t_end > self.t_start:
            raise ConfigError(f"need t_end > t_start, got [{self.t_start}, {self.t_end}]")
        if self.halt_tol <= 0.0:
            raise ConfigError(f"halt_tol must be positive, got {self.halt_tol}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.num_workers < 1:
            raise ConfigError(f"num_workers must be >= 1, got {self.num_workers}")
        if self.relaxation not in (None, "F", "FCF"):
            raise ConfigError(f"relaxation must be 'F' or 'FCF', got {self.relaxation!r}")
        if self.source.kind not in ("pwm", "sine", "none"):
            raise ConfigError(f"source.kind must be pwm|sine|none, got {self.source.kind!r}")
        n = self.num_intervals
        for lvl, m in enumerate(self.factors):
            if int(m) < 2:
                raise ConfigError(f"factors[{lvl}] must be >= 2, got {m}")
            if n % int(m) != 0:
                raise ConfigError(f"factors[{lvl}] = {m} does not divide {n} intervals")
            n //= int(m)


_NESTED = {"dahlquist": DahlquistParams, "mesh": MeshParams,
           "material": MaterialParams, "source": SourceParams}


def _merge_dataclass(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{path}: unknown fields {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED:
            kwargs[key] = _merge_dataclass(_NESTED[key], value, f"{path}.{key}")
        else:
            kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> RunConfig:
    cfg = _merge_dataclass(RunConfig, data, "config")
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as fh:
        data = json.load(fh)
    return config_from_dict(data)


@dataclass
class ProblemSetup:
    """Everything a solve needs, built from one validated config."""

    hierarchy: object
    propagators: list
    u0: object
    options: MgritOptions
    system: DiscreteSystem | None = None


def _make_signal(params: SourceParams):
    if params.kind == "pwm":
        return PwmSource(period=params.period, teeth=params.teeth, amplitude=params.amplitude)
    if params.kind == "sine":
        return SineSource(period=params.period, amplitude=params.amplitude)
    return ZeroSource()


def build_problem(cfg: RunConfig) -> ProblemSetup:
    cfg.validate()
    hierarchy = build_hierarchy(cfg.t_start, cfg.t_end, cfg.num_intervals, cfg.factors)
    options = MgritOptions(
        relaxation=cfg.relaxation, halt_tol=cfg.halt_tol, max_iters=cfg.max_iters,
        num_workers=cfg.num_workers,
        level_unit_costs=tuple(cfg.level_unit_costs) if cfg.level_unit_costs else None)

    if cfg.problem == "dahlquist":
        prop = DahlquistProblem(cfg.dahlquist.lam, cfg.dahlquist.u0)
        props = [prop] * hierarchy.num_levels
        return ProblemSetup(hierarchy=hierarchy, propagators=props,
                            u0=prop.initial_state(), options=options)

    mesh = generate_coax_mesh(cfg.mesh.r0, cfg.mesh.r1, cfg.mesh.r2,
                              radial_layers=tuple(cfg.mesh.radial_layers),
                              angular_divisions=cfg.mesh.angular_divisions)
    if cfg.problem == "eddy-linear":
        mats = mat.linear_materials(shield_mu_r=cfg.material.shield_mu_r,
                                    sigma=cfg.material.sigma)
    else:
        bh = mat.load_bh_table(cfg.material.bh_table_path) \
            if cfg.material.bh_table_path else None
        mats = mat.nonlinear_materials(sigma=cfg.material.sigma, bh_table=bh)
    system = DiscreteSystem(mesh, mats, _make_signal(cfg.source), lz=cfg.lz,
                            wire_radius=cfg.mesh.r0)
    props = make_propagators(system, hierarchy, NewtonOptions())
    u0 = np.zeros(system.n_dof)
    return ProblemSetup(hierarchy=hierarchy, propagators=props, u0=u0,
                        options=options, system=system)
