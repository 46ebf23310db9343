"""Leapfrog integration of the hyperbolic-parabolic system with eps > 0.

H lives on half steps and E on whole steps.  The wave part is explicit, and
the conductive term is handled pointwise by the backward-Euler resolvent

    eps (E^{n+1} - E^n)/dt + sigma(|E^{n+1}|) E^{n+1} = curl_H H^{n+1/2} + F^{n+1/2}.

Because sigma depends on |E| only, E^{n+1} is parallel to the right-hand side
R = (eps/dt) E^n + curl_H H^{n+1/2} + F^{n+1/2}, so each sample needs one scalar
solve of (eps/dt + sigma(s)) s = |R|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .conductivity import Graph, Material
from .errors import ConfigurationError, StructuralError
from .grid import FieldState, StaggeredGrid, curl_E, curl_H, div_H, inner_product, lq_norm
from .records import EnergyRecord, Trajectory

Forcing = Optional[Callable[[float], np.ndarray]]

DEFAULT_MAX_STEPS = 5_000_000
DEFAULT_SNAPSHOT_BUDGET = 2 * 1024**3  # bytes held by one trajectory


@dataclass(frozen=True)
class FullSolverConfig:
    """Parameters of one full-system run.

    ``dt`` is an upper bound.  The step actually used is the largest value not
    above ``dt`` (or the CFL limit when ``dt`` is None) that divides every
    snapshot interval into a whole number of steps.
    """

    eps: float
    T: float
    dt: float | None = None
    cfl: float = 0.9
    n_snapshots: int = 10
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self) -> None:
        errs = []
        if not self.eps > 0:
            errs.append(f"eps must satisfy eps > 0, got {self.eps}")
        if not (self.T > 0 and math.isfinite(self.T)):
            errs.append(f"final time T must be positive and finite, got {self.T}")
        if self.dt is not None and not (self.dt > 0 and math.isfinite(self.dt)):
            errs.append(f"dt must be positive and finite, got {self.dt}")
        if not 0 < self.cfl <= 1:
            errs.append(f"CFL safety factor must lie in (0, 1], got {self.cfl}")
        if self.n_snapshots < 1:
            errs.append("need at least one snapshot interval")
        if errs:
            raise ConfigurationError("; ".join(errs))

    def cfl_limit(self, grid: StaggeredGrid) -> float:
        return self.cfl * math.sqrt(self.eps) * grid.h_min / math.sqrt(grid.dim)

    def check_cfl(self, grid: StaggeredGrid, dt: float) -> None:
        limit = self.cfl_limit(grid)
        if dt > limit * (1 + 1e-12):
            raise ConfigurationError(
                f"dt={dt:.6g} exceeds the wave CFL limit {limit:.6g} "
                f"(cfl={self.cfl}, eps={self.eps}, h_min={grid.h_min:.6g})"
            )

    def plan(self, grid: StaggeredGrid) -> tuple[float, int, int]:
        """Return ``(dt, n_steps, steps_per_snapshot)``."""
        target = self.cfl_limit(grid) if self.dt is None else self.dt
        self.check_cfl(grid, target)
        per_snap = max(1, math.ceil(self.T / (self.n_snapshots * target) - 1e-9))
        n_steps = per_snap * self.n_snapshots
        if n_steps > self.max_steps:
            raise ConfigurationError(
                f"run needs {n_steps} steps, above the cap of {self.max_steps}"
            )
        return self.T / n_steps, n_steps, per_snap

    def with_dt(self, dt: float) -> "FullSolverConfig":
        return replace(self, dt=dt)


def _forcing_at(forcing: Forcing, grid: StaggeredGrid, t: float) -> np.ndarray | None:
    if forcing is None:
        return None
    F = np.asarray(forcing(t), dtype=float)
    if F.shape != (grid.size("E"),):
        raise StructuralError(f"forcing returned shape {F.shape}, expected ({grid.size('E')},)")
    return F


def stagger(state: FieldState, dt: float) -> FieldState:
    """Shift H from time t back to t - dt/2 with a half leapfrog step."""
    if state.h_staggered:
        return state
    H_back = state.H + 0.5 * dt * curl_E(state.grid, state.E)
    return FieldState(state.grid, state.E, H_back, state.t, True, state.sigma_eff)


def _update_E(grid, E, H_half, eps, dt, material, F_half):
    lam = eps / dt
    R = lam * E + curl_H(grid, H_half)
    if F_half is not None:
        R += F_half
    R[grid.pec_mask] = 0.0
    mag = grid.e_magnitude(R)
    s, sig = material.resolve(lam, mag)
    scale = np.divide(s, mag, out=np.zeros_like(s), where=mag > 0)
    return scale * R, sig


def step_full(
    state: FieldState,
    cfg: FullSolverConfig,
    graph: Graph | Material,
    F_half: np.ndarray | None = None,
    dt: float | None = None,
) -> FieldState:
    """Advance one leapfrog step.

    ``F_half`` is the forcing at ``t + dt/2``.  If ``state.H`` is not yet
    staggered it is first moved to ``t - dt/2``.
    """
    grid = state.grid
    dt = cfg.dt if dt is None else dt
    if dt is None:
        dt = cfg.plan(grid)[0]
    cfg.check_cfl(grid, dt)
    state = stagger(state, dt)
    H_half = state.H - dt * curl_E(grid, state.E)
    E_new, sig = _update_E(grid, state.E, H_half, cfg.eps, dt, Material.of(graph), F_half)
    return FieldState(grid, E_new, H_half, state.t + dt, True, sig)


def energy_record(
    state: FieldState,
    graph: Graph | Material,
    F: np.ndarray | None = None,
    eps: float = 1.0,
    dt: float | None = None,
    H_next: np.ndarray | None = None,
) -> EnergyRecord:
    """Energy bookkeeping at the state's time.

    For a staggered state the magnetic energy is the leapfrog-conserved form
    ``0.5 <H^{n-1/2}, H^{n+1/2}>``; ``H_next`` may be passed to avoid
    recomputing the forward half step, otherwise ``dt`` is required.  For an
    unstaggered state it is simply ``0.5 ||H||^2``.
    """
    grid = state.grid
    material = Material.of(graph)
    if state.h_staggered:
        if H_next is None:
            if dt is None:
                raise StructuralError("staggered energy needs dt or the next half-step H")
            H_next = state.H - dt * curl_E(grid, state.E)
        e_mag = 0.5 * inner_product(grid, state.H, H_next, "H")
    else:
        e_mag = 0.5 * inner_product(grid, state.H, state.H, "H")
    sig = state.sigma_eff
    if sig is None:
        sig = material.sigma(grid.e_magnitude(state.E))
    J = sig * state.E
    q = (material.growth_exponent + 2.0) / (material.growth_exponent + 1.0)
    return EnergyRecord(
        t=state.t,
        e_electric=0.5 * eps * inner_product(grid, state.E, state.E, "E"),
        e_magnetic=e_mag,
        dissipation=inner_product(grid, J, state.E, "E"),
        work=0.0 if F is None else inner_product(grid, state.E, F, "E"),
        current_norm=lq_norm(grid, J, q, "E"),
    )


def check_solenoidal(grid: StaggeredGrid, H: np.ndarray, what: str = "initial H") -> float:
    """Raise unless ``div_H(H)`` vanishes to 1e-12 (relative to max |H| when that exceeds 1)."""
    d = float(np.max(np.abs(div_H(grid, H)))) if H.size else 0.0
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 0.0)
    if d > 1e-12 * scale:
        raise ConfigurationError(f"{what} is not divergence-free (max |div H| = {d:.3e})")
    return d


def run_full(
    init: FieldState,
    cfg: FullSolverConfig,
    graph: Graph | Material,
    forcing: Forcing = None,
    label: str = "full",
    on_step: Callable[[int, FieldState], None] | None = None,
) -> tuple[Trajectory, list[EnergyRecord]]:
    """Integrate from ``init`` (E and H both at t=0) to ``cfg.T``.

    Returns the snapshot trajectory and one energy record per step, including
    the initial one, so the ledger has ``n_steps + 1`` rows.  ``on_step`` is
    called with ``(n, state)`` after each step for diagnostics.
    """
    grid = init.grid
    if init.h_staggered:
        raise StructuralError("run_full expects E and H at the same initial time")
    material = Material.of(graph)
    check_solenoidal(grid, init.H)
    dt, n_steps, per_snap = cfg.plan(grid)
    snap_bytes = (cfg.n_snapshots + 1) * 8 * (2 * grid.size("E") + grid.size("H"))
    if snap_bytes > DEFAULT_SNAPSHOT_BUDGET:
        raise ConfigurationError(f"snapshots would hold {snap_bytes} bytes, above the budget")

    E = grid.apply_pec(init.E)
    sig = material.sigma(grid.e_magnitude(E))
    state = stagger(FieldState(grid, E, init.H, init.t, False, sig), dt)

    traj = Trajectory(grid, dt, label=label)
    records: list[EnergyRecord] = []
    for n in range(n_steps + 1):
        t = init.t + n * dt
        H_next = state.H - dt * curl_E(grid, state.E)
        records.append(
            energy_record(state, material, _forcing_at(forcing, grid, t), cfg.eps, H_next=H_next)
        )
        if n % per_snap == 0:
            traj.append(t, state.E, 0.5 * (state.H + H_next), state.sigma_eff)
        if n == n_steps:
            break
        F_half = _forcing_at(forcing, grid, t + 0.5 * dt)
        E_new, sig = _update_E(grid, state.E, H_next, cfg.eps, dt, material, F_half)
        state = FieldState(grid, E_new, H_next, init.t + (n + 1) * dt, True, sig)
        if on_step is not None:
            on_step(n + 1, state)
    return traj, records


def solution_gap(run_a: Trajectory, run_b: Trajectory, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-snapshot ``eps ||E_a - E_b||^2 + ||H_a - H_b||^2``; returns ``(times, gaps)``."""
    run_a.check_compatible(run_b, same_dt=True)
    grid = run_a.grid
    gaps = []
    for Ea, Eb, Ha, Hb in zip(run_a.E, run_b.E, run_a.H, run_b.H):
        dE, dH = Ea - Eb, Ha - Hb
        gaps.append(eps * inner_product(grid, dE, dE, "E") + inner_product(grid, dH, dH, "H"))
    return np.asarray(run_a.times), np.asarray(gaps)
