"""Quasi-static (eps = 0) solver.

E is eliminated pointwise through the inverse of s -> sigma(s) s:
G = curl_H H + F, |E| = g(|G|), E parallel to G.  H then follows the explicit
step H <- H - dt curl_E E, which is a nonlinear diffusion for H.  The step size
adapts to the smallest effective conductivity seen at interior E samples.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .conductivity import DEFAULT_RESISTIVITY_FLOOR, Graph, Material
from .errors import ConfigurationError, StiffnessError, StructuralError
from .grid import FieldState, StaggeredGrid, curl_E, curl_H, inner_product, lq_norm
from .records import EnergyRecord, Trajectory, snapshot_times
from .solver_full import Forcing, _forcing_at, check_solenoidal

DEFAULT_MAX_STEPS = 5_000_000
DT_UNDERFLOW = 1e-12  # relative to T


@dataclass(frozen=True)
class QsSolverConfig:
    """Parameters of one quasi-static run.

    With ``dt`` unset the step is chosen each time from the diffusion limit
    ``c_d h_min^2 min(sigma_eff) / (2 d)``.  A given ``dt`` is used as is but
    still shrunk whenever it would break that limit.
    """

    T: float
    dt: float | None = None
    delta: float = DEFAULT_RESISTIVITY_FLOOR
    tau_gamma: float = 0.05
    c_d: float = 0.5
    n_snapshots: int = 10
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self) -> None:
        errs = []
        if not (self.T > 0 and math.isfinite(self.T)):
            errs.append(f"final time T must be positive and finite, got {self.T}")
        if self.dt is not None and not (self.dt > 0 and math.isfinite(self.dt)):
            errs.append(f"dt must be positive and finite, got {self.dt}")
        if not self.delta > 0:
            errs.append(f"resistivity floor delta must be positive, got {self.delta}")
        if not self.tau_gamma > 0:
            errs.append(f"interface tolerance tau_gamma must be positive, got {self.tau_gamma}")
        if not 0 < self.c_d <= 1:
            errs.append(f"diffusion safety factor must lie in (0, 1], got {self.c_d}")
        if self.n_snapshots < 1:
            errs.append("need at least one snapshot interval")
        if errs:
            raise ConfigurationError("; ".join(errs))


def qs_electric_field(
    grid: StaggeredGrid,
    H: np.ndarray,
    F: np.ndarray | None,
    graph: Graph | Material,
    delta: float = DEFAULT_RESISTIVITY_FLOOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(E, sigma_eff)`` solving ``sigma(|E|) E = curl_H H + F`` pointwise.

    The magnitude passed to the inverse is floored at ``delta`` so that
    sigma_eff stays finite and positive where G vanishes; E itself is still
    ``G / sigma_eff`` and so vanishes there.  No boundary condition is
    imposed here; the time stepper pins the PEC samples.
    """
    material = Material.of(graph)
    G = curl_H(grid, H)
    if F is not None:
        G = G + F
    r = np.maximum(grid.e_magnitude(G), delta)
    _, sig = material.resolve(0.0, r)
    return G / sig, sig


def stable_dt(grid: StaggeredGrid, sigma_eff: np.ndarray, c_d: float) -> float:
    sig_min = float(np.min(sigma_eff[grid.interior_e]))
    return c_d * grid.h_min**2 * sig_min / (2 * grid.dim)


def _electric(grid, H, F, material, delta):
    E, sig = qs_electric_field(grid, H, F, material, delta)
    E[grid.pec_mask] = 0.0
    return E, sig


def step_qs(
    state: FieldState,
    cfg: QsSolverConfig,
    graph: Graph | Material,
    forcing: Forcing = None,
    dt: float | None = None,
) -> FieldState:
    """One explicit step of size ``min(dt or cfg.dt, diffusion limit)``.

    The input state's E and sigma_eff are recomputed from its H when missing.
    The returned state carries E and sigma_eff consistent with the new H.
    """
    grid = state.grid
    material = Material.of(graph)
    if state.sigma_eff is None:
        E, sig = _electric(grid, state.H, _forcing_at(forcing, grid, state.t), material, cfg.delta)
    else:
        E, sig = state.E, state.sigma_eff
    limit = stable_dt(grid, sig, cfg.c_d)
    want = dt if dt is not None else cfg.dt
    step = limit if want is None else min(want, limit)
    if step < DT_UNDERFLOW * cfg.T:
        raise StiffnessError(
            f"time step {step:.3e} fell below {DT_UNDERFLOW:g}*T at t={state.t:.6g}; "
            "min sigma_eff is too small (raise the resistivity floor delta)"
        )
    H_new = state.H - step * curl_E(grid, E)
    t_new = state.t + step
    E_new, sig_new = _electric(grid, H_new, _forcing_at(forcing, grid, t_new), material, cfg.delta)
    return FieldState(grid, E_new, H_new, t_new, False, sig_new)


def _qs_record(state: FieldState, material: Material, F: np.ndarray | None) -> EnergyRecord:
    grid = state.grid
    J = state.sigma_eff * state.E
    q = (material.growth_exponent + 2.0) / (material.growth_exponent + 1.0)
    return EnergyRecord(
        t=state.t,
        e_electric=0.0,
        e_magnetic=0.5 * inner_product(grid, state.H, state.H, "H"),
        dissipation=inner_product(grid, J, state.E, "E"),
        work=0.0 if F is None else inner_product(grid, state.E, F, "E"),
        current_norm=lq_norm(grid, J, q, "E"),
    )


def run_qs(
    init: FieldState,
    cfg: QsSolverConfig,
    graph: Graph | Material,
    forcing: Forcing = None,
    label: str = "qs",
    on_step: Callable[[int, FieldState], None] | None = None,
) -> tuple[Trajectory, list[EnergyRecord]]:
    """Integrate H from ``init.H`` to ``cfg.T`` (``init.E`` is ignored).

    Steps are clipped so every snapshot time is hit exactly.  The trajectory's
    ``dt`` is the largest step taken.
    """
    grid = init.grid
    material = Material.of(graph)
    material.check_invertible()
    check_solenoidal(grid, init.H)
    targets = init.t + snapshot_times(cfg.T, cfg.n_snapshots)

    E, sig = _electric(grid, init.H, _forcing_at(forcing, grid, init.t), material, cfg.delta)
    state = FieldState(grid, E, init.H, init.t, False, sig)
    traj = Trajectory(grid, 0.0, label=label)
    records = [_qs_record(state, material, _forcing_at(forcing, grid, state.t))]
    traj.append(state.t, state.E, state.H, state.sigma_eff)
    dt_max = 0.0
    n = 0
    for target in targets[1:]:
        while state.t < target:
            remaining = target - state.t
            limit = stable_dt(grid, state.sigma_eff, cfg.c_d)
            step = min(limit, cfg.dt if cfg.dt is not None else math.inf)
            last = step >= remaining * (1 - 1e-12)
            if last:
                step = remaining
            elif remaining < 2 * step:
                # split what is left evenly rather than leave a sliver step
                step = 0.5 * remaining
            n += 1
            if n > cfg.max_steps:
                raise ConfigurationError(f"run exceeded the step cap of {cfg.max_steps}")
            state = step_qs(state, cfg, material, forcing, dt=step)
            if last:
                state.t = float(target)
            dt_max = max(dt_max, step)
            records.append(_qs_record(state, material, _forcing_at(forcing, grid, state.t)))
            if on_step is not None:
                on_step(n, state)
        traj.append(state.t, state.E, state.H, state.sigma_eff)
    traj.dt = dt_max
    return traj, records


def interface_cells(grid: StaggeredGrid, E: np.ndarray, s_star: float, tau: float) -> np.ndarray:
    """Flat E indices where ``| |E| - s_star | <= tau``, sorted."""
    if not tau > 0:
        raise ConfigurationError(f"interface tolerance must be positive, got {tau}")
    mag = grid.e_magnitude(E)
    return np.flatnonzero(np.abs(mag - s_star) <= tau)


def write_interface_csv(
    trajectory: Trajectory, path: str | Path, s_star: float, tau: float
) -> list[np.ndarray]:
    """Write one row per snapshot: ``t, cells, count`` with cells space separated."""
    if len(trajectory) == 0:
        raise StructuralError("empty trajectory")
    sets = [interface_cells(trajectory.grid, E, s_star, tau) for E in trajectory.E]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "cells", "count"])
        for t, cells in zip(trajectory.times, sets):
            w.writerow([repr(t), " ".join(map(str, cells)), len(cells)])
    return sets
