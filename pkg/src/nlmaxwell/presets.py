"""Initial data, forcing and material-region presets.

Initial H is always the discrete curl of an E-located potential, so it is
divergence-free to roundoff whatever the potential is.  Forcing presets are a
fixed spatial profile times a smooth ramp in time.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .conductivity import Graph, Material
from .errors import ConfigurationError
from .grid import FieldState, StaggeredGrid, curl_E

INITIAL_PRESETS = ("solenoidal_mode", "gaussian_bump", "zero")
ELECTRIC_MODES = ("zero", "quasi_static", "profile")
FORCING_PRESETS = ("zero", "ramped_profile")
PROFILE_SHAPES = ("sine_mode", "gaussian")
REGION_KINDS = ("disk", "half_space")


def sine_mode(grid: StaggeredGrid, wavenumbers, amplitude: float = 1.0) -> np.ndarray:
    """Product of ``sin(k_a pi (x_a - lo_a) / L_a)`` on every E component, PEC pinned."""
    k = [float(v) for v in wavenumbers]
    if len(k) != grid.dim:
        raise ConfigurationError(f"need {grid.dim} wavenumbers, got {len(k)}")

    def f(comp, *xyz):
        out = np.full(xyz[0].shape, float(amplitude))
        for ka, xa, (lo, hi) in zip(k, xyz, grid.extents):
            out = out * np.sin(ka * math.pi * (xa - lo) / (hi - lo))
        return out

    return grid.apply_pec(grid.sample("E", f))


def gaussian(grid: StaggeredGrid, center, width: float, amplitude: float = 1.0) -> np.ndarray:
    c = [float(v) for v in center]
    if len(c) != grid.dim:
        raise ConfigurationError(f"need a {grid.dim}-component center, got {len(c)}")
    if not width > 0:
        raise ConfigurationError("gaussian width must be positive")

    def f(comp, *xyz):
        r2 = sum((xa - ca) ** 2 for xa, ca in zip(xyz, c))
        return amplitude * np.exp(-r2 / (2 * width**2))

    return grid.apply_pec(grid.sample("E", f))


def profile(grid: StaggeredGrid, spec: dict) -> np.ndarray:
    shape = spec.get("shape")
    if shape == "sine_mode":
        return sine_mode(grid, spec["wavenumbers"], spec.get("amplitude", 1.0))
    if shape == "gaussian":
        return gaussian(grid, spec["center"], spec["width"], spec.get("amplitude", 1.0))
    raise ConfigurationError(f"unknown profile shape {shape!r}")


def potential(grid: StaggeredGrid, preset: str, params: dict) -> np.ndarray:
    if preset == "zero":
        return grid.zeros("E")
    if preset == "solenoidal_mode":
        return sine_mode(grid, params["wavenumbers"], params.get("amplitude", 1.0))
    if preset == "gaussian_bump":
        return gaussian(grid, params["center"], params["width"], params.get("amplitude", 1.0))
    raise ConfigurationError(f"unknown initial preset {preset!r}")


def smooth_ramp(t: float, ramp_time: float) -> float:
    """0 at t<=0, 1 after ``ramp_time``, ``sin^2`` in between (C^1 in time)."""
    if ramp_time <= 0 or t >= ramp_time:
        return 1.0 if t >= 0 else 0.0
    if t <= 0:
        return 0.0
    return math.sin(0.5 * math.pi * t / ramp_time) ** 2


def make_forcing(grid: StaggeredGrid, preset: str, params: dict | None = None):
    """Return a callable ``t -> F(t)`` or None for the zero preset."""
    params = params or {}
    if preset == "zero":
        return None
    if preset == "ramped_profile":
        shape = profile(grid, params["profile"])
        ramp_time = float(params.get("ramp_time", 0.0))

        def forcing(t: float) -> np.ndarray:
            return smooth_ramp(t, ramp_time) * shape

        return forcing
    raise ConfigurationError(f"unknown forcing preset {preset!r}")


def region_index(grid: StaggeredGrid, region: dict) -> np.ndarray:
    """0/1 index per E sample; 1 marks the region that uses the second graph."""
    kind = region.get("kind")
    if kind == "disk":
        c = [float(v) for v in region["center"]]
        rad = float(region["radius"])
        f = lambda comp, *xyz: (sum((x - ci) ** 2 for x, ci in zip(xyz, c)) <= rad**2).astype(float)
    elif kind == "half_space":
        axis, at = int(region["axis"]), float(region["at"])
        f = lambda comp, *xyz: (xyz[axis] >= at).astype(float)
    else:
        raise ConfigurationError(f"unknown region kind {kind!r}")
    return grid.sample("E", f).astype(np.int8)


def initial_state(
    grid: StaggeredGrid,
    preset: str,
    params: dict,
    electric: str,
    material: Graph | Material,
    forcing: Callable[[float], np.ndarray] | None = None,
    magnetic: bool = True,
    delta: float = 1e-8,
) -> FieldState:
    """Initial fields at t=0.

    H is ``curl_E`` of the preset potential (or zero when ``magnetic`` is
    false).  E is zero, the potential itself (``profile``), or the
    quasi-static field that H and F(0) imply, so that a full-system run
    starts well prepared for comparison with the eps=0 limit.
    """
    phi = potential(grid, preset, params)
    H = curl_E(grid, phi) if magnetic else grid.zeros("H")
    if electric == "zero":
        E = grid.zeros("E")
    elif electric == "profile":
        E = phi.copy()
    elif electric == "quasi_static":
        from .solver_qs import qs_electric_field

        F0 = None if forcing is None else forcing(0.0)
        E, _ = qs_electric_field(grid, H, F0, material, delta)
        E = grid.apply_pec(E)
    else:
        raise ConfigurationError(f"unknown electric initialization {electric!r}")
    return FieldState(grid, E, H)
