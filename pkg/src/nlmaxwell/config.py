"""Scenario configuration: JSON parsing, validation, defaults and serialization.

Every block is normalized into a plain dict with defaults filled in, so
``parse_config(serialize(cfg)) == cfg`` holds for any parsed config.  The
schema is documented in the README.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Any, Callable

from .conductivity import Material, graph_errors, graph_from_dict
from .errors import ConfigurationError, NlMaxwellError
from .grid import StaggeredGrid
from .presets import (
    ELECTRIC_MODES,
    FORCING_PRESETS,
    INITIAL_PRESETS,
    PROFILE_SHAPES,
    REGION_KINDS,
    initial_state,
    make_forcing,
    region_index,
)

REQUIRED = object()
Check = Callable[[Any], "str | None"]


# -- small validators ---------------------------------------------------------------

def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def number(lo: float | None = None, *, strict: bool = False, hi: float | None = None) -> Check:
    def check(v):
        if not _is_num(v):
            return "must be a finite number"
        if lo is not None and (v <= lo if strict else v < lo):
            return f"must be {'>' if strict else '>='} {lo}"
        if hi is not None and v > hi:
            return f"must be <= {hi}"
        return None
    return check


def optional(check: Check) -> Check:
    return lambda v: None if v is None else check(v)


def integer(lo: int) -> Check:
    def check(v):
        if not isinstance(v, int) or isinstance(v, bool) or v < lo:
            return f"must be an integer >= {lo}"
        return None
    return check


def boolean(v):
    return None if isinstance(v, bool) else "must be true or false"


def one_of(options) -> Check:
    return lambda v: None if v in options else f"must be one of {list(options)}"


def vector(length: int | None, item: Check | None = None, min_len: int = 1) -> Check:
    item = item or number()

    def check(v):
        if not isinstance(v, list):
            return "must be a list"
        if length is not None and len(v) != length:
            return f"must have {length} entries"
        if len(v) < min_len:
            return f"must have at least {min_len} entries"
        for x in v:
            msg = item(x)
            if msg:
                return f"entries {msg}"
        return None
    return check


def _block(d: Any, where: str, spec: dict, errs: list[str]) -> dict:
    """Check ``d`` against ``spec`` (key -> (default, check)) and fill defaults."""
    if not isinstance(d, dict):
        errs.append(f"{where}: must be an object")
        return {}
    out = {}
    for key in sorted(d.keys() - spec.keys()):
        errs.append(f"{where}.{key}: unknown key")
    for key, (default, check) in spec.items():
        if key not in d:
            if default is REQUIRED:
                errs.append(f"{where}.{key}: missing")
            else:
                out[key] = default
            continue
        msg = check(d[key]) if check else None
        if msg:
            errs.append(f"{where}.{key}: {msg}")
        out[key] = d[key]
    return out


# -- block specs ------------------------------------------------------------------

def _grid_block(d, errs) -> dict:
    if not isinstance(d, dict):
        errs.append("grid: must be an object")
        return {}
    cells = d.get("cells")
    dim = d.get("dim", len(cells) if isinstance(cells, list) else 2)
    spec = {
        "dim": (dim, one_of((2, 3))),
        "cells": (REQUIRED, vector(dim if dim in (2, 3) else None, integer(2))),
        "extents": ([[0.0, 1.0]] * (dim if dim in (2, 3) else 2), vector(dim, vector(2))),
    }
    out = _block(d, "grid", spec, errs)
    ext = out.get("extents")
    if isinstance(ext, list) and all(isinstance(e, list) and len(e) == 2 for e in ext):
        for a, (lo, hi) in enumerate(ext):
            if _is_num(lo) and _is_num(hi) and not hi > lo:
                errs.append(f"grid.extents[{a}]: upper bound must exceed lower bound")
    return out


def _graph_block(d, where, errs) -> dict:
    problems = graph_errors(d, where)
    if not problems:
        try:
            graph_from_dict(d)
        except NlMaxwellError as exc:
            problems = [f"{where}: {exc}"]
    errs += problems
    return d if isinstance(d, dict) else {}


def _shape_params(preset: str, d, where, dim, errs) -> dict:
    if preset == "zero":
        return _block(d, where, {}, errs)
    if preset in ("solenoidal_mode", "sine_mode"):
        spec = {"wavenumbers": (REQUIRED, vector(dim)), "amplitude": (1.0, number())}
    else:
        spec = {
            "center": (REQUIRED, vector(dim)),
            "width": (REQUIRED, number(0, strict=True)),
            "amplitude": (1.0, number()),
        }
    return _block(d, where, spec, errs)


def _initial_block(d, dim, errs) -> dict:
    spec = {
        "preset": ("zero", one_of(INITIAL_PRESETS)),
        "params": ({}, None),
        "electric": ("zero", one_of(ELECTRIC_MODES)),
        "magnetic": (True, boolean),
    }
    out = _block(d, "initial", spec, errs)
    if out.get("preset") in INITIAL_PRESETS:
        out["params"] = _shape_params(out["preset"], out["params"], "initial.params", dim, errs)
    return out


def _forcing_block(d, dim, errs) -> dict:
    out = _block(d, "forcing", {"preset": ("zero", one_of(FORCING_PRESETS)), "params": ({}, None)}, errs)
    if out.get("preset") == "zero":
        out["params"] = _block(out["params"], "forcing.params", {}, errs)
    elif out.get("preset") == "ramped_profile":
        p = _block(
            out["params"], "forcing.params",
            {"profile": (REQUIRED, None), "ramp_time": (0.0, number(0))}, errs,
        )
        prof = p.get("profile")
        if isinstance(prof, dict):
            shape = prof.get("shape")
            if shape not in PROFILE_SHAPES:
                errs.append(f"forcing.params.profile.shape: must be one of {list(PROFILE_SHAPES)}")
            else:
                rest = {k: v for k, v in prof.items() if k != "shape"}
                p["profile"] = {"shape": shape, **_shape_params(shape, rest, "forcing.params.profile", dim, errs)}
        elif "profile" in p:
            errs.append("forcing.params.profile: must be an object")
        out["params"] = p
    return out


def _material_block(d, dim, errs) -> dict | None:
    if d is None:
        return None
    out = _block(d, "material", {"graph": (REQUIRED, None), "region": (REQUIRED, None)}, errs)
    if "graph" in out:
        _graph_block(out["graph"], "material.graph", errs)
    reg = out.get("region")
    if isinstance(reg, dict):
        kind = reg.get("kind")
        if kind == "disk":
            spec = {"kind": (REQUIRED, None), "center": (REQUIRED, vector(dim)),
                    "radius": (REQUIRED, number(0, strict=True))}
        elif kind == "half_space":
            spec = {"kind": (REQUIRED, None), "axis": (REQUIRED, one_of(tuple(range(dim)))),
                    "at": (REQUIRED, number())}
        else:
            errs.append(f"material.region.kind: must be one of {list(REGION_KINDS)}")
            spec = None
        if spec:
            out["region"] = _block(reg, "material.region", spec, errs)
    elif "region" in out:
        errs.append("material.region: must be an object")
    return out


FULL_SPEC = {
    "eps": (REQUIRED, number(0, strict=True)),
    "T": (REQUIRED, number(0, strict=True)),
    "cfl": (0.9, number(0, strict=True, hi=1.0)),
    "dt": (None, optional(number(0, strict=True))),
}
QS_SPEC = {
    "T": (REQUIRED, number(0, strict=True)),
    "dt": (None, optional(number(0, strict=True))),
    "delta": (1e-8, number(0, strict=True)),
    "tau_gamma": (0.05, number(0, strict=True)),
    "c_d": (0.5, number(0, strict=True, hi=1.0)),
}


def _solver_block(d, errs) -> dict:
    if not isinstance(d, dict):
        errs.append("solver: must be an object")
        return {}
    kinds = [k for k in ("full", "qs") if k in d]
    for key in sorted(d.keys() - {"full", "qs"}):
        errs.append(f"solver.{key}: unknown key (expected exactly one of 'full', 'qs')")
    if len(kinds) != 1:
        errs.append("solver: needs exactly one solver block, 'full' or 'qs'")
        return {}
    kind = kinds[0]
    spec = FULL_SPEC if kind == "full" else QS_SPEC
    return {kind: _block(d[kind], f"solver.{kind}", spec, errs)}


SWEEP_SPEC = {
    "eps_list": (REQUIRED, vector(None, number(0, strict=True))),
    "cfl": (0.9, number(0, strict=True, hi=1.0)),
}
GROWTH_SPEC = {
    "p": (REQUIRED, number(0)),
    "a0": (REQUIRED, number(0, strict=True)),
    "a1": (0.0, number(0)),
    "b0": (REQUIRED, number(0)),
    "M0": (0.0, number(0)),
    "s_max": (10.0, number(0, strict=True)),
    "n_samples": (50, integer(2)),
}
MMS_SPEC = {
    "full_cells": ([16, 32, 64], vector(None, integer(2), min_len=2)),
    "sigma": (1.0, number(0, strict=True)),
    "eps": (1.0, number(0, strict=True)),
    "full_T": (0.25, number(0, strict=True)),
    "qs_cells": (32, integer(2)),
    "qs_T": (0.1, number(0, strict=True)),
    "qs_refinements": (3, integer(2)),
    "amplitude": (1.0, number()),
}
OUTPUT_SPEC = {
    "n_snapshots": (10, integer(1)),
    "snapshots": (False, boolean),
    "interface": (True, boolean),
}


@dataclass
class ScenarioConfig:
    grid: dict
    graph: dict
    solver: dict
    initial: dict
    forcing: dict
    output: dict
    material: dict | None = None
    sweep: dict | None = None
    growth: dict | None = None
    mms: dict | None = None

    @property
    def solver_kind(self) -> str:
        return next(iter(self.solver))

    @property
    def solver_params(self) -> dict:
        return self.solver[self.solver_kind]

    def to_dict(self) -> dict:
        return asdict(self)

    # -- builders --------------------------------------------------------------

    def build_grid(self) -> StaggeredGrid:
        return StaggeredGrid(tuple(self.grid["cells"]), tuple(tuple(e) for e in self.grid["extents"]))

    def build_material(self, grid: StaggeredGrid) -> Material:
        base = graph_from_dict(self.graph)
        if self.material is None:
            return Material([base])
        other = graph_from_dict(self.material["graph"])
        return Material([base, other], region_index(grid, self.material["region"]))

    def build_forcing(self, grid: StaggeredGrid):
        return make_forcing(grid, self.forcing["preset"], self.forcing["params"])

    def build_initial(self, grid, material, forcing, delta: float | None = None):
        if delta is None:
            delta = self.solver_params.get("delta", QS_SPEC["delta"][0])
        ini = self.initial
        return initial_state(
            grid, ini["preset"], ini["params"], ini["electric"], material, forcing,
            magnetic=ini["magnetic"], delta=delta,
        )

    def build_scenario(self, name: str = "config"):
        from .harness import Scenario

        grid = self.build_grid()
        material = self.build_material(grid)
        forcing = self.build_forcing(grid)
        p = self.solver_params
        delta = p.get("delta", QS_SPEC["delta"][0])
        init = self.build_initial(grid, material, forcing, delta)
        return Scenario(
            name, grid, material, init, forcing, p["T"],
            n_snapshots=self.output["n_snapshots"],
            delta=delta,
            c_d=p.get("c_d", QS_SPEC["c_d"][0]),
            tau_gamma=p.get("tau_gamma", QS_SPEC["tau_gamma"][0]),
            qs_dt=p.get("dt") if self.solver_kind == "qs" else None,
            cfl=(self.sweep or {}).get("cfl", p.get("cfl", 0.9)),
            description={"initial": self.initial, "forcing": self.forcing, "material": self.material},
        )


TOP_LEVEL = {"grid", "graph", "solver", "initial", "forcing", "output", "material", "sweep", "growth", "mms"}


def validate(doc: Any) -> tuple[ScenarioConfig | None, list[str]]:
    """Normalize a decoded JSON document; returns ``(config, errors)``."""
    errs: list[str] = []
    if not isinstance(doc, dict):
        return None, ["config: top level must be an object"]
    for key in sorted(doc.keys() - TOP_LEVEL):
        errs.append(f"{key}: unknown key")
    for key in ("grid", "graph", "solver"):
        if key not in doc:
            errs.append(f"{key}: missing")
    grid = _grid_block(doc.get("grid", {}), errs) if "grid" in doc else {}
    dim = grid.get("dim", 2) if grid.get("dim") in (2, 3) else 2
    graph = _graph_block(doc["graph"], "graph", errs) if "graph" in doc else {}
    solver = _solver_block(doc["solver"], errs) if "solver" in doc else {}
    cfg = ScenarioConfig(
        grid=grid,
        graph=graph,
        solver=solver,
        initial=_initial_block(doc.get("initial", {}), dim, errs),
        forcing=_forcing_block(doc.get("forcing", {}), dim, errs),
        output=_block(doc.get("output", {}), "output", OUTPUT_SPEC, errs),
        material=_material_block(doc.get("material"), dim, errs),
        sweep=None if doc.get("sweep") is None else _block(doc["sweep"], "sweep", SWEEP_SPEC, errs),
        growth=None if doc.get("growth") is None else _block(doc["growth"], "growth", GROWTH_SPEC, errs),
        mms=None if doc.get("mms") is None else _block(doc["mms"], "mms", MMS_SPEC, errs),
    )
    if cfg.sweep and isinstance(cfg.sweep.get("eps_list"), list):
        eps = cfg.sweep["eps_list"]
        if all(_is_num(e) for e in eps) and any(b >= a for a, b in zip(eps, eps[1:])):
            errs.append("sweep.eps_list: must be strictly decreasing")
    return (None if errs else cfg), errs


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON config; raises ConfigurationError listing all problems."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        msg = f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        raise ConfigurationError(msg) from None
    cfg, errs = validate(doc)
    if errs:
        raise ConfigurationError(
            f"{len(errs)} configuration error(s):\n  " + "\n  ".join(errs), errs
        )
    return cfg


def serialize(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
