"""Plain-text run configuration (INI syntax) with lossless float round-trip.

Example::

    [run]
    subcommand = sweep
    jobs = 1
    seed = 0

    [domain]
    kind = unit-disc

    [equilibrium]
    kind = pair
    gamma = 1.0, 1.0
    separation = 1.0

    [grid]
    r = 0.05, 0.075, 0.1

    [tolerances]
    integrator = 1e-13
    newton = 1e-12
    cluster = 1e-05
    degeneracy = 0.0001
    fit_window = 0.05, 0.2

Floats are written with ``repr`` so that reading them back gives the same
IEEE-754 value.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .domains import DomainModel, UnitDisc, domain_from_params, domain_to_params
from .equilibria import (RelativeEquilibrium, make_equilateral_triangle, make_rhombus, make_vortex_pair,
                         relative_equilibrium)
from .errors import ConfigError

EQUILIBRIUM_KINDS = ("pair", "triangle", "rhombus", "custom")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def _fmt(values) -> str:
    return ", ".join(repr(float(v)) for v in values)


@dataclass(frozen=True)
class EquilibriumSpec:
    kind: str = "pair"
    gamma: tuple[float, ...] = (1.0, 1.0)
    separation: float = 1.0
    y: float = 1.1
    positions: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in EQUILIBRIUM_KINDS:
            raise ConfigError(f"unknown equilibrium kind {self.kind!r}")
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        object.__setattr__(self, "positions", tuple(float(p) for p in self.positions))

    def build(self) -> RelativeEquilibrium:
        if self.kind == "pair":
            if len(self.gamma) != 2:
                raise ConfigError("pair needs two strengths")
            return make_vortex_pair(*self.gamma, self.separation)
        if self.kind == "triangle":
            if len(self.gamma) != 3:
                raise ConfigError("triangle needs three strengths")
            return make_equilateral_triangle(*self.gamma)
        if self.kind == "rhombus":
            return make_rhombus(self.y)
        if len(self.positions) != 2 * len(self.gamma):
            raise ConfigError("custom equilibrium needs 2N positions for N strengths")
        return relative_equilibrium(self.gamma, self.positions)

    def to_params(self) -> dict[str, str]:
        out = {"kind": self.kind}
        if self.kind == "rhombus":
            out["y"] = repr(float(self.y))
            return out
        out["gamma"] = _fmt(self.gamma)
        if self.kind == "pair":
            out["separation"] = repr(float(self.separation))
        if self.kind == "custom":
            out["positions"] = _fmt(self.positions)
        return out

    @classmethod
    def from_params(cls, p) -> "EquilibriumSpec":
        kind = p.get("kind", "pair").strip()
        try:
            return cls(kind=kind,
                       gamma=_floats(p.get("gamma", "1.0, 1.0")),
                       separation=float(p.get("separation", "1.0")),
                       y=float(p.get("y", "1.1")),
                       positions=_floats(p.get("positions", "")))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class Tolerances:
    integrator: float = 1e-13
    newton: float = 1e-12
    cluster: float = 1e-5
    degeneracy: float = 1e-4
    fit_window: tuple[float, float] = (0.05, 0.2)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str = "sweep"
    domain: DomainModel = field(default_factory=UnitDisc)
    equilibrium: EquilibriumSpec = field(default_factory=EquilibriumSpec)
    r_grid: tuple[float, ...] = tuple(round(0.05 + 0.025 * k, 12) for k in range(7))
    tolerances: Tolerances = field(default_factory=Tolerances)
    jobs: int = 1
    seed: int = 0
    output_dir: str = ""
    t_final: float = 2.0 * np.pi
    samples: int = 101
    r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r_grid", tuple(float(v) for v in self.r_grid))
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp["run"] = {"subcommand": self.subcommand, "jobs": str(self.jobs), "seed": str(self.seed),
                     "output_dir": self.output_dir}
        cp["domain"] = domain_to_params(self.domain)
        cp["equilibrium"] = self.equilibrium.to_params()
        cp["grid"] = {"r": _fmt(self.r_grid)}
        t = self.tolerances
        cp["tolerances"] = {"integrator": repr(float(t.integrator)), "newton": repr(float(t.newton)),
                            "cluster": repr(float(t.cluster)), "degeneracy": repr(float(t.degeneracy)),
                            "fit_window": _fmt(t.fit_window)}
        cp["simulate"] = {"t_final": repr(float(self.t_final)), "samples": str(self.samples),
                          "r": repr(float(self.r))}
        lines = []
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines += [f"{k} = {v}" for k, v in cp[sec].items()]
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        base = cls()
        run = cp["run"] if cp.has_section("run") else {}
        try:
            dom = domain_from_params(dict(cp["domain"])) if cp.has_section("domain") else base.domain
            eq = EquilibriumSpec.from_params(cp["equilibrium"]) if cp.has_section("equilibrium") else base.equilibrium
            grid = _floats(cp["grid"]["r"]) if cp.has_section("grid") and "r" in cp["grid"] else base.r_grid
            tol = base.tolerances
            if cp.has_section("tolerances"):
                s = cp["tolerances"]
                win = _floats(s.get("fit_window", _fmt(tol.fit_window)))
                if len(win) != 2:
                    raise ConfigError("fit_window needs two values")
                tol = Tolerances(float(s.get("integrator", tol.integrator)), float(s.get("newton", tol.newton)),
                                 float(s.get("cluster", tol.cluster)),
                                 float(s.get("degeneracy", tol.degeneracy)), (win[0], win[1]))
            sim = cp["simulate"] if cp.has_section("simulate") else {}
            return cls(subcommand=run.get("subcommand", base.subcommand), domain=dom, equilibrium=eq,
                       r_grid=grid, tolerances=tol, jobs=int(run.get("jobs", base.jobs)),
                       seed=int(run.get("seed", base.seed)), output_dir=run.get("output_dir", ""),
                       t_final=float(sim.get("t_final", base.t_final)),
                       samples=int(sim.get("samples", base.samples)), r=float(sim.get("r", base.r)))
        except (ValueError, KeyError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad config value: {exc}") from exc

    @classmethod
    def read(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())
