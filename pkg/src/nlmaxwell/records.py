"""Trajectories, energy ledgers and their CSV forms."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .grid import StaggeredGrid, write_field_csv

LEDGER_COLUMNS = ("t", "e_electric", "e_magnetic", "dissipation", "work")


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    e_electric: float
    e_magnetic: float
    dissipation: float
    work: float
    current_norm: float = 0.0

    @property
    def total(self) -> float:
        return self.e_electric + self.e_magnetic


@dataclass
class Trajectory:
    """Snapshots of (E, H, sigma_eff) on a fixed list of times.

    H is always reported at the snapshot time itself; the full solver averages
    its two neighbouring half-step values.
    """

    grid: StaggeredGrid
    dt: float
    times: list[float] = field(default_factory=list)
    E: list[np.ndarray] = field(default_factory=list)
    H: list[np.ndarray] = field(default_factory=list)
    sigma_eff: list[np.ndarray] = field(default_factory=list)
    label: str = ""

    def append(self, t: float, E: np.ndarray, H: np.ndarray, sigma_eff: np.ndarray) -> None:
        self.times.append(float(t))
        self.E.append(np.array(E, dtype=float))
        self.H.append(np.array(H, dtype=float))
        self.sigma_eff.append(np.array(sigma_eff, dtype=float))

    def __len__(self) -> int:
        return len(self.times)

    def series(self, name: str) -> list[np.ndarray]:
        """Snapshot list for ``"E"``, ``"H"`` or the current ``"J" = sigma_eff * E``."""
        if name == "E":
            return self.E
        if name == "H":
            return self.H
        if name == "J":
            return [s * e for s, e in zip(self.sigma_eff, self.E)]
        raise StructuralError(f"unknown field selector {name!r}")

    def check_compatible(self, other: "Trajectory", same_dt: bool = True) -> None:
        if self.grid != other.grid:
            raise StructuralError("trajectories live on different grids")
        if len(self.times) != len(other.times) or not np.allclose(
            self.times, other.times, rtol=0, atol=1e-12 * max(1.0, abs(self.times[-1]))
        ):
            raise StructuralError("trajectories have different snapshot times")
        if same_dt and not np.isclose(self.dt, other.dt, rtol=1e-12, atol=0):
            raise StructuralError(f"trajectories use different time steps ({self.dt} vs {other.dt})")

    def write_snapshots(self, directory: str | Path, stem: str = "snapshot") -> list[Path]:
        directory = Path(directory)
        paths = []
        for k, (t, e, h) in enumerate(zip(self.times, self.E, self.H)):
            path = directory / f"{stem}_{k:04d}.csv"
            write_field_csv(self.grid, path, {"E": e, "H": h})
            paths.append(path)
        return paths


def write_ledger_csv(records: list[EnergyRecord], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LEDGER_COLUMNS)
        for rec in records:
            w.writerow([repr(float(getattr(rec, c))) for c in LEDGER_COLUMNS])


def read_ledger_csv(path: str | Path) -> list[EnergyRecord]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [EnergyRecord(**{c: float(r[c]) for c in LEDGER_COLUMNS}) for r in rows]


def snapshot_times(T: float, n_snapshots: int) -> np.ndarray:
    if n_snapshots < 1:
        raise StructuralError("need at least one snapshot interval")
    return np.linspace(0.0, T, n_snapshots + 1)

