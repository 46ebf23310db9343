"""Experiments: the eps -> 0 sweep, manufactured-solution studies and
space-time norms between trajectories."""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .conductivity import Constant, Graph, Material, PowerLaw, describe, graph_to_dict
from .errors import NlMaxwellError, ParameterError, StructuralError
from .grid import FieldState, StaggeredGrid, curl_E, curl_H, lq_norm, weighted_lq
from .presets import initial_state
from .records import Trajectory
from .solver_full import FullSolverConfig, run_full
from .solver_qs import QsSolverConfig, run_qs

# sweep acceptance: monotone within this slack, and a floor-relative reduction
MONOTONE_SLACK = 0.05
REDUCTION_FACTOR = 0.2


def _trapezoid(times: np.ndarray, values: np.ndarray) -> float:
    dt = np.diff(times)
    return float(np.sum(0.5 * dt * (values[1:] + values[:-1])))


def spacetime_norm(
    traj_a: Trajectory,
    traj_b: Trajectory | None,
    selector: str,
    q_space: float = 2.0,
    q_time: float = 2.0,
) -> float:
    """``|| a - b ||`` in L^{q_time}(0,T; L^{q_space}(Omega)).

    The space norm is taken per snapshot; the time integral uses the
    trapezoid rule on the snapshot times (q_time = inf takes the maximum).
    ``traj_b=None`` measures ``traj_a`` itself.
    """
    if not q_time >= 1:
        raise ParameterError(f"time exponent must be >= 1, got {q_time}")
    if traj_b is not None:
        traj_a.check_compatible(traj_b, same_dt=False)
    fa = traj_a.series(selector)
    fb = traj_b.series(selector) if traj_b is not None else [None] * len(fa)
    vals = np.array(
        [lq_norm(traj_a.grid, a if b is None else a - b, q_space) for a, b in zip(fa, fb)]
    )
    if len(vals) == 0:
        raise StructuralError("no snapshots to integrate")
    if math.isinf(q_time):
        return float(vals.max())
    if len(vals) == 1:
        raise StructuralError("a time integral needs at least two snapshots")
    return _trapezoid(np.asarray(traj_a.times), vals**q_time) ** (1.0 / q_time)


# -- scenarios --------------------------------------------------------------------

@dataclass
class Scenario:
    """Everything both solvers need besides eps."""

    name: str
    grid: StaggeredGrid
    material: Material
    init: FieldState
    forcing: Callable[[float], np.ndarray] | None
    T: float
    n_snapshots: int = 20
    delta: float = 1e-8
    c_d: float = 0.5
    tau_gamma: float = 0.05
    qs_dt: float | None = None
    cfl: float = 0.9
    description: dict = field(default_factory=dict)

    def qs_config(self) -> QsSolverConfig:
        return QsSolverConfig(
            T=self.T, dt=self.qs_dt, delta=self.delta, tau_gamma=self.tau_gamma,
            c_d=self.c_d, n_snapshots=self.n_snapshots,
        )

    def full_config(self, eps: float) -> FullSolverConfig:
        return FullSolverConfig(eps=eps, T=self.T, cfl=self.cfl, n_snapshots=self.n_snapshots)

    def fingerprint(self) -> dict:
        return {
            "name": self.name,
            "grid": {"cells": list(self.grid.cells), "extents": [list(e) for e in self.grid.extents]},
            "graphs": [graph_to_dict(g) for g in self.material.graphs],
            "T": self.T,
            "n_snapshots": self.n_snapshots,
            "dt_policy": {
                "full": f"cfl={self.cfl} * sqrt(eps) * h_min / sqrt(d), aligned to snapshots",
                "qs": "adaptive diffusion limit" if self.qs_dt is None else f"fixed {self.qs_dt}",
                "c_d": self.c_d,
                "delta": self.delta,
            },
            "seeds": None,
            **self.description,
        }


def mode_scenario(
    name: str, graph: Graph | Material, n: int = 32, T: float = 0.5, amplitude: float = 1.0,
    delta: float = 1e-8, n_snapshots: int = 20,
) -> Scenario:
    """Lowest PEC mode on [0, pi]^2 with well-prepared (quasi-static) E0, no forcing."""
    grid = StaggeredGrid.square(n, math.pi)
    material = Material.of(graph)
    params = {"wavenumbers": [1, 1], "amplitude": amplitude}
    init = initial_state(grid, "solenoidal_mode", params, "quasi_static", material, None, delta=delta)
    return Scenario(
        name, grid, material, init, None, T, n_snapshots=n_snapshots, delta=delta,
        description={"initial": {"preset": "solenoidal_mode", "params": params, "electric": "quasi_static"}},
    )


def preset_scenario(name: str) -> Scenario:
    """Shipped sweep scenarios: ``constant`` and ``power_law_2``."""
    if name == "constant":
        return mode_scenario(name, Constant(1.0))
    if name == "power_law_2":
        # the floor bounds the fast-diffusion stiffness as the field decays
        return mode_scenario(name, PowerLaw(2.0), delta=1e-3)
    raise ParameterError(f"unknown preset scenario {name!r}")


# -- sweep ----------------------------------------------------------------------

@dataclass
class SweepRow:
    eps: float
    e_gap: float  # L2(Q_T)
    h_gap: float  # Linf(0,T; L2)
    dissipation_gap: float  # current in L^{(p+2)/(p+1)}(Q_T)
    wall_time: float = 0.0


@dataclass
class SweepReport:
    rows: list[SweepRow]
    slope: float | None
    slope_residual: float | None
    confirming: bool
    complete: bool
    fingerprint: dict
    errors: list[str] = field(default_factory=list)
    qs_wall_time: float = 0.0

    @property
    def slope_defined(self) -> bool:
        return self.slope is not None

    def to_dict(self, with_timings: bool = False) -> dict:
        rows = []
        for r in self.rows:
            d = asdict(r)
            if not with_timings:
                d.pop("wall_time")
            rows.append(d)
        out = {
            "rows": rows,
            "slope": self.slope,
            "slope_residual": self.slope_residual,
            "slope_defined": self.slope_defined,
            "confirming": self.confirming,
            "complete": self.complete,
            "errors": self.errors,
            "fingerprint": self.fingerprint,
        }
        if with_timings:
            out["qs_wall_time"] = self.qs_wall_time
        return out

    def timings(self) -> dict:
        return {"qs": self.qs_wall_time, "full": {repr(r.eps): r.wall_time for r in self.rows}}

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps", "e_gap", "h_gap", "dissipation_gap"])
            for r in self.rows:
                w.writerow([repr(r.eps), repr(r.e_gap), repr(r.h_gap), repr(r.dissipation_gap)])


def is_confirming(gaps: list[float], slack: float = MONOTONE_SLACK, factor: float = REDUCTION_FACTOR) -> bool:
    """Gaps ordered by decreasing eps: non-increasing within ``slack`` and the last
    at most ``factor`` times the first.  A single gap is trivially monotone but
    shows no reduction, so it does not confirm."""
    if len(gaps) < 2:
        return False
    monotone = all(b <= a * (1 + slack) for a, b in zip(gaps, gaps[1:]))
    return monotone and gaps[-1] <= factor * gaps[0]


def fit_slope(eps: list[float], gaps: list[float]) -> tuple[float | None, float | None]:
    """Least-squares slope of log gap against log eps and its RMS residual."""
    pts = [(math.log(e), math.log(g)) for e, g in zip(eps, gaps) if g > 0]
    if len(pts) < 2:
        return None, None
    x, y = np.array(pts).T
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def run_sweep(
    scenario: Scenario,
    eps_list: list[float],
    graph: Graph | Material | None = None,
    workers: int = 1,
) -> SweepReport:
    """Run the quasi-static solver once and the full solver once per eps."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(not e > 0 for e in eps_list):
        raise ParameterError("eps_list must be non-empty with every eps > 0")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ParameterError("eps_list must be strictly decreasing")
    material = scenario.material if graph is None else Material.of(graph)
    q_cur = (material.growth_exponent + 2.0) / (material.growth_exponent + 1.0)
    fingerprint = {**scenario.fingerprint(), "eps_list": eps_list,
                   "graphs": [graph_to_dict(g) for g in material.graphs]}
    errors: list[str] = []

    t0 = time.perf_counter()
    try:
        qs, _ = run_qs(scenario.init, scenario.qs_config(), material, scenario.forcing)
    except NlMaxwellError as exc:
        errors.append(f"qs: {type(exc).__name__}: {exc}")
        return SweepReport([], None, None, False, False, fingerprint, errors)
    qs_wall = time.perf_counter() - t0

    def member(eps: float):
        t1 = time.perf_counter()
        full, _ = run_full(scenario.init, scenario.full_config(eps), material, scenario.forcing)
        row = SweepRow(
            eps=eps,
            e_gap=spacetime_norm(full, qs, "E", 2.0, 2.0),
            h_gap=spacetime_norm(full, qs, "H", 2.0, math.inf),
            dissipation_gap=spacetime_norm(full, qs, "J", q_cur, q_cur),
        )
        row.wall_time = time.perf_counter() - t1
        return row

    rows: list[SweepRow] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [(eps, pool.submit(member, eps)) for eps in eps_list]
        for eps, fut in futures:
            try:
                rows.append(fut.result())
            except NlMaxwellError as exc:
                errors.append(f"full eps={eps!r}: {type(exc).__name__}: {exc}")
    complete = not errors
    gaps = [r.h_gap for r in rows]
    slope, resid = fit_slope([r.eps for r in rows], gaps)
    confirming = complete and is_confirming(gaps)
    return SweepReport(rows, slope, resid, confirming, complete, fingerprint, errors, qs_wall)


# -- manufactured solutions ------------------------------------------------------

@dataclass
class ConvergenceStudy:
    parameter: str  # "h" or "dt"
    values: list[float]
    errors: list[float]

    @property
    def orders(self) -> list[float]:
        out = []
        for (p0, e0), (p1, e1) in zip(zip(self.values, self.errors), zip(self.values[1:], self.errors[1:])):
            if e0 > 0 and e1 > 0:
                out.append(math.log(e0 / e1) / math.log(p0 / p1))
            else:
                out.append(math.nan)
        return out

    @property
    def observed_order(self) -> float:
        """Order measured on the two finest levels."""
        return self.orders[-1] if self.orders else math.nan

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "values": self.values,
            "errors": self.errors,
            "orders": [None if math.isnan(o) else o for o in self.orders],
            "observed_order": None if math.isnan(self.observed_order) else self.observed_order,
        }


def _standing_mode(grid: StaggeredGrid):
    def phi(comp, x, y):
        return np.sin(math.pi * x) * np.sin(math.pi * y)

    def grad_phi_rot(comp, x, y):
        # (d_y phi, -d_x phi) component by component
        if comp == 0:
            return math.pi * np.sin(math.pi * x) * np.cos(math.pi * y)
        return -math.pi * np.cos(math.pi * x) * np.sin(math.pi * y)

    return grid.sample("E", phi), grid.sample("H", grad_phi_rot)


def mms_full(
    cells=(16, 32, 64), sigma: float = 1.0, eps: float = 1.0, T: float = 0.25,
    amplitude: float = 1.0, dt_factor: float = 0.5,
) -> ConvergenceStudy:
    """Spatial refinement of the full solver with a manufactured standing mode.

    On [0,1]^2 with phi = sin(pi x) sin(pi y) and omega = pi sqrt(2/eps),
    E* = A cos(omega t) phi and H* = -(A sin(omega t)/omega)(d_y phi, -d_x phi)
    solve the linear system with forcing F = A sigma cos(omega t) phi.  The
    step is ``dt_factor * h^2`` so the first-order implicit conduction term
    does not mask the spatial order.  The error is the L2 norm of E and H
    together at T.
    """
    omega = math.pi * math.sqrt(2.0 / eps)
    errs, hs = [], []
    for n in cells:
        grid = StaggeredGrid.square(n, 1.0)
        phi, rot = _standing_mode(grid)
        E0 = amplitude * phi
        forcing = lambda t, p=phi: amplitude * sigma * math.cos(omega * t) * p
        h = 1.0 / n
        cfg = FullSolverConfig(eps=eps, T=T, dt=dt_factor * h * h, n_snapshots=1)
        traj, _ = run_full(FieldState(grid, E0, grid.zeros("H")), cfg, Constant(sigma), forcing)
        Te = traj.times[-1]
        E_exact = amplitude * math.cos(omega * Te) * phi
        H_exact = -amplitude * math.sin(omega * Te) / omega * rot
        err = math.hypot(lq_norm(grid, traj.E[-1] - E_exact), lq_norm(grid, traj.H[-1] - H_exact))
        errs.append(err)
        hs.append(h)
    return ConvergenceStudy("h", hs, errs)


def mms_qs(
    n: int = 32, sigma: float = 1.0, T: float = 0.1, refinements: int = 3, amplitude: float = 1.0,
) -> ConvergenceStudy:
    """Time-step refinement of the quasi-static solver at fixed h.

    The manufactured solution is exact for the space-discrete system:
    H*(t) = A e^{-t} curl_E(phi), E*(t) = A e^{-t} phi, driven by
    F = sigma E* - curl_H H*.  Only the time discretization then contributes
    error.  The coarsest step is the diffusion limit, halved at each level.
    """
    grid = StaggeredGrid.square(n, 1.0)
    phi, _ = _standing_mode(grid)
    phi = grid.apply_pec(phi)
    cphi = curl_E(grid, phi)
    base_F = sigma * phi - curl_H(grid, cphi)

    def forcing(t):
        return amplitude * math.exp(-t) * base_F

    dt0 = 0.5 * grid.h_min**2 * sigma / (2 * grid.dim)
    dts, errs = [], []
    H0 = amplitude * cphi
    for k in range(refinements):
        dt = dt0 / 2**k
        # snap dt to an exact divisor of T so every level ends at T
        steps = math.ceil(T / dt - 1e-9)
        dt = T / steps
        cfg = QsSolverConfig(T=T, dt=dt, n_snapshots=1)
        traj, _ = run_qs(FieldState(grid, grid.zeros("E"), H0), cfg, Constant(sigma), forcing)
        H_exact = amplitude * math.exp(-T) * cphi
        dts.append(dt)
        errs.append(lq_norm(grid, traj.H[-1] - H_exact))
    return ConvergenceStudy("dt", dts, errs)


def mms_study(full_kwargs: dict | None = None, qs_kwargs: dict | None = None) -> dict:
    full = mms_full(**(full_kwargs or {}))
    qs = mms_qs(**(qs_kwargs or {}))
    return {"full_spatial": full.to_dict(), "qs_temporal": qs.to_dict()}
