"""Experiment configuration: INI files in, validated objects out.

Sections and keys (see configs/two_layer.ini for a worked example):

    [scenario]   id, t_end, eps (comma list, strictly decreasing),
                 x0 (comma list, increasing), n_outputs, dt_factor
    [potential]  kind = pn | cosine | custom-table
                 pn:           a = <float>
                 cosine:       coeffs = c1, c2, ...
                 custom-table: values = w0, w1, ... (one period of W)
    [stress]     kind = zero | constant | affine | table
                 constant: value;  affine: offset, slope
                 table: x = ..., values = ...
    [grid]       x_min, x_max, n          (evolution grid)
    [layer_grid] x_min, x_max, n          (profile solve grid)
    [output]     directory

Reports embed a SHA-256 hash of the parsed configuration so artifacts
are traceable to exact inputs.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .operators import Grid1D
from .potentials import (PotentialSpec, StressField, affine_stress,
                         constant_stress, make_cosine_potential,
                         make_pn_potential, table_stress, tabulated_potential,
                         zero_stress)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scenario_id: str
    t_end: float
    eps_list: tuple
    x0: tuple
    potential: PotentialSpec
    stress: StressField
    grid: Grid1D
    layer_grid: Grid1D
    out_dir: str
    n_outputs: int = 6
    dt_factor: float = 0.02
    potential_kind: str = "pn"
    seeds: tuple = ()          # reserved for future stochastic stress
    raw: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        eps = np.asarray(self.eps_list, dtype=float)
        if eps.size == 0 or np.any(eps <= 0):
            raise ConfigError("eps list must be positive")
        if eps.size > 1 and np.any(np.diff(eps) >= 0):
            raise ConfigError("eps list must be strictly decreasing")
        if self.grid.h > eps.min() / 8:
            raise ConfigError(
                f"grid does not resolve the smallest eps: h = {self.grid.h:.4g} "
                f"> eps/8 = {eps.min() / 8:.4g}")
        if len(self.x0) == 0 or np.any(np.diff(np.asarray(self.x0)) <= 0):
            raise ConfigError("x0 must be nonempty and strictly increasing")
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)


def _floats(s: str) -> tuple:
    return tuple(float(tok) for tok in s.replace(",", " ").split())


def potential_from_config(section) -> PotentialSpec:
    kind = section.get("kind", "pn").strip()
    if kind == "pn":
        return make_pn_potential(float(section.get("a", "1.0")))
    if kind == "cosine":
        return make_cosine_potential(_floats(section["coeffs"]))
    if kind == "custom-table":
        return tabulated_potential(_floats(section["values"]))
    raise ConfigError(f"unknown potential kind {kind!r}")


def stress_from_config(section) -> StressField:
    kind = section.get("kind", "zero").strip()
    if kind == "zero":
        return zero_stress()
    if kind == "constant":
        return constant_stress(float(section["value"]))
    if kind == "affine":
        return affine_stress(float(section.get("offset", "0.0")),
                             float(section.get("slope", "0.0")))
    if kind == "table":
        return table_stress(_floats(section["x"]), _floats(section["values"]))
    raise ConfigError(f"unknown stress kind {kind!r}")


def grid_from_config(section) -> Grid1D:
    return Grid1D(float(section["x_min"]), float(section["x_max"]),
                  int(section["n"]))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    try:
        scen = parser["scenario"]
        raw = {name: dict(parser[name]) for name in parser.sections()}
        return ExperimentConfig(
            scenario_id=scen.get("id", path.stem),
            t_end=float(scen["t_end"]),
            eps_list=_floats(scen["eps"]),
            x0=_floats(scen["x0"]),
            potential=potential_from_config(parser["potential"])
            if parser.has_section("potential") else make_pn_potential(1.0),
            stress=stress_from_config(parser["stress"])
            if parser.has_section("stress") else zero_stress(),
            grid=grid_from_config(parser["grid"]),
            layer_grid=grid_from_config(parser["layer_grid"])
            if parser.has_section("layer_grid") else Grid1D(-60.0, 60.0, 3072),
            out_dir=parser["output"]["directory"]
            if parser.has_section("output") else "out",
            n_outputs=int(scen.get("n_outputs", "6")),
            dt_factor=float(scen.get("dt_factor", "0.02")),
            potential_kind=parser["potential"].get("kind", "pn").strip()
            if parser.has_section("potential") else "pn",
            raw=raw,
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from exc


def config_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
