"""Staggered tensor-product grids, mimetic curl/div operators and discrete norms.

Layout
------
Every field lives at one of three location types:

``"E"``  electric samples. 3D: component ``a`` sits on edges parallel to
         axis ``a`` (half-integer along ``a``, integer along the others).
         2D (transverse magnetic): only ``E_z`` exists, at the integer nodes.
``"H"``  magnetic samples. 3D: component ``a`` sits on faces normal to axis
         ``a`` (integer along ``a``, half-integer along the others).
         2D: ``H_x`` at ``(i, j+1/2)`` and ``H_y`` at ``(i+1/2, j)``.
``"C"``  cell centres (scalar).

A field is a flat float array: the components in axis order, each component
block raveled in C (row-major) order over its own index shape.  For a grid with
``cells = (nx, ny)`` the E block has shape ``(nx+1, ny+1)``, the H blocks have
shapes ``(nx+1, ny)`` and ``(nx, ny+1)``.  ``StaggeredGrid.split`` and
``StaggeredGrid.join`` convert between the flat form and component arrays.

Quadrature weights are the cell volume times 1/2 for every axis along which a
sample sits on the first or last integer plane (trapezoid in integer
directions, midpoint in half-integer directions), so a constant field
integrates exactly to its value times the domain volume.

The electric boundary condition is the perfect conductor condition N x E = 0:
E samples lying on the boundary (tangential edges, or boundary nodes in 2D) are
pinned to zero by the solvers.  ``curl_H`` still returns values there, taken
from the adjacent interior stencil so that affine fields are differentiated
exactly; those values never enter an inner product against a PEC field.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParameterError, StructuralError

LOCATIONS = ("E", "H", "C")


@dataclass(frozen=True)
class StaggeredGrid:
    """Uniform rectangular grid in 2 or 3 dimensions.

    ``cells`` gives the number of cells per axis and ``extents`` the
    ``(lower, upper)`` bounds of the box per axis.
    """

    cells: tuple[int, ...]
    extents: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        cells = tuple(int(n) for n in self.cells)
        extents = tuple((float(lo), float(hi)) for lo, hi in self.extents)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "extents", extents)
        if len(cells) not in (2, 3):
            raise StructuralError(f"dimensionality must be 2 or 3, got {len(cells)}")
        if len(extents) != len(cells):
            raise StructuralError("extents and cells must have the same length")
        if any(n < 2 for n in cells):
            raise StructuralError(f"every axis needs at least 2 cells, got {cells}")
        if any(not hi > lo for lo, hi in extents):
            raise StructuralError(f"extents must have upper > lower, got {extents}")

    @classmethod
    def square(cls, n: int, length: float = 1.0, dim: int = 2) -> "StaggeredGrid":
        return cls((n,) * dim, ((0.0, length),) * dim)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.extents, self.cells))

    @property
    def h_min(self) -> float:
        return min(self.spacing)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.extents]))

    # -- layout ---------------------------------------------------------------

    def staggers(self, loc: str) -> list[tuple[float, ...]]:
        """Per-component offsets (0 or 0.5 cells) along each axis."""
        d = self.dim
        if loc == "C":
            return [(0.5,) * d]
        if loc == "E":
            if d == 2:
                return [(0.0, 0.0)]
            return [tuple(0.5 if ax == a else 0.0 for ax in range(3)) for a in range(3)]
        if loc == "H":
            if d == 2:
                return [(0.0, 0.5), (0.5, 0.0)]
            return [tuple(0.0 if ax == a else 0.5 for ax in range(3)) for a in range(3)]
        raise StructuralError(f"unknown location type {loc!r}")

    def components(self, loc: str) -> list[str]:
        if loc == "C":
            return ["c"]
        if loc == "E":
            return ["z"] if self.dim == 2 else ["x", "y", "z"]
        if loc == "H":
            return ["x", "y"] if self.dim == 2 else ["x", "y", "z"]
        raise StructuralError(f"unknown location type {loc!r}")

    def shapes(self, loc: str) -> list[tuple[int, ...]]:
        return [
            tuple(n if st else n + 1 for n, st in zip(self.cells, stag))
            for stag in self.staggers(loc)
        ]

    def size(self, loc: str) -> int:
        return int(sum(np.prod(s) for s in self.shapes(loc)))

    def location_of(self, a: np.ndarray) -> str:
        """Infer the location type from the array length."""
        n = np.asarray(a).size
        for loc in LOCATIONS:
            if self.size(loc) == n:
                return loc
        raise StructuralError(f"array of length {n} matches no location of {self}")

    def split(self, a: np.ndarray, loc: str) -> list[np.ndarray]:
        a = np.asarray(a, dtype=float)
        if a.ndim != 1 or a.size != self.size(loc):
            raise StructuralError(
                f"{loc}-field must be flat with {self.size(loc)} entries, got shape {a.shape}"
            )
        out, start = [], 0
        for shape in self.shapes(loc):
            n = int(np.prod(shape))
            out.append(a[start:start + n].reshape(shape))
            start += n
        return out

    def join(self, parts: Sequence[np.ndarray], loc: str) -> np.ndarray:
        shapes = self.shapes(loc)
        if len(parts) != len(shapes) or any(p.shape != s for p, s in zip(parts, shapes)):
            raise StructuralError(f"component shapes {[p.shape for p in parts]} != {shapes}")
        return np.concatenate([np.ravel(p) for p in parts]).astype(float, copy=False)

    def zeros(self, loc: str) -> np.ndarray:
        return np.zeros(self.size(loc))

    def coords(self, loc: str) -> list[tuple[np.ndarray, ...]]:
        """Physical coordinates of every sample, one ``ij``-meshgrid per component."""
        out = []
        for stag, shape in zip(self.staggers(loc), self.shapes(loc)):
            axes = [
                lo + (np.arange(n) + st) * h
                for (lo, _), st, n, h in zip(self.extents, stag, shape, self.spacing)
            ]
            out.append(tuple(np.meshgrid(*axes, indexing="ij")))
        return out

    def sample(self, loc: str, func) -> np.ndarray:
        """Sample ``func(component_index, *coords)`` on every component of ``loc``."""
        parts = [
            np.broadcast_to(np.asarray(func(c, *xyz), dtype=float), xyz[0].shape)
            for c, xyz in enumerate(self.coords(loc))
        ]
        return self.join(parts, loc)

    @cached_property
    def _weights(self) -> dict[str, np.ndarray]:
        out = {}
        for loc in LOCATIONS:
            parts = []
            for stag, shape in zip(self.staggers(loc), self.shapes(loc)):
                w = np.full(shape, self.cell_volume)
                for ax, st in enumerate(stag):
                    if st == 0.0:
                        idx = [slice(None)] * self.dim
                        idx[ax] = 0
                        w[tuple(idx)] *= 0.5
                        idx[ax] = -1
                        w[tuple(idx)] *= 0.5
                parts.append(w)
            w = self.join(parts, loc)
            w.flags.writeable = False
            out[loc] = w
        return out

    def weights(self, loc: str) -> np.ndarray:
        """Quadrature weight of every sample at ``loc`` (read-only)."""
        if loc not in LOCATIONS:
            raise StructuralError(f"unknown location type {loc!r}")
        return self._weights[loc]

    @cached_property
    def pec_mask(self) -> np.ndarray:
        """True at E samples that are tangential to the boundary (pinned to 0)."""
        parts = []
        for stag, shape in zip(self.staggers("E"), self.shapes("E")):
            m = np.zeros(shape, dtype=bool)
            for ax, st in enumerate(stag):
                if st == 0.0:
                    idx = [slice(None)] * self.dim
                    idx[ax] = 0
                    m[tuple(idx)] = True
                    idx[ax] = -1
                    m[tuple(idx)] = True
            parts.append(m)
        mask = np.concatenate([p.ravel() for p in parts])
        mask.flags.writeable = False
        return mask

    @property
    def interior_e(self) -> np.ndarray:
        return ~self.pec_mask

    def apply_pec(self, E: np.ndarray) -> np.ndarray:
        """Copy of ``E`` with the tangential boundary samples set to zero."""
        out = np.array(E, dtype=float)
        out[self.pec_mask] = 0.0
        return out

    # -- interpolation of E components onto each other's edges ---------------

    def e_magnitude(self, E: np.ndarray) -> np.ndarray:
        """Pointwise |E| at every E sample.

        In 2D this is |E_z|.  In 3D the two transverse components are averaged
        onto each edge from their four nearest neighbours.
        """
        parts = self.split(E, "E")
        if self.dim == 2:
            return np.abs(E).astype(float)
        stag = self.staggers("E")
        mags = []
        for a in range(3):
            sq = parts[a] ** 2
            for c in range(3):
                if c != a:
                    sq = sq + _restagger(parts[c], stag[c], stag[a]) ** 2
            mags.append(np.sqrt(sq))
        return self.join(mags, "E")


def _restagger(a: np.ndarray, src: tuple[float, ...], dst: tuple[float, ...]) -> np.ndarray:
    """Average a component array from one stagger pattern onto another."""
    out = a
    for ax, (s, d) in enumerate(zip(src, dst)):
        if s == d:
            continue
        out = np.moveaxis(out, ax, 0)
        if s == 0.0:
            out = 0.5 * (out[:-1] + out[1:])
        else:
            mid = 0.5 * (out[:-1] + out[1:])
            out = np.concatenate([out[:1], mid, out[-1:]], axis=0)
        out = np.moveaxis(out, 0, ax)
    return out


# -- difference primitives ----------------------------------------------------

def _d_primal(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Integer -> half-integer difference along ``axis`` (n+1 -> n)."""
    return np.diff(a, axis=axis) / h


def _d_dual(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Half-integer -> integer difference along ``axis`` (n -> n+1).

    The two end values repeat the neighbouring interior difference.
    """
    d = np.diff(a, axis=axis) / h
    first = np.take(d, [0], axis=axis)
    last = np.take(d, [-1], axis=axis)
    return np.concatenate([first, d, last], axis=axis)


def _check(grid: StaggeredGrid, a: np.ndarray, loc: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size != grid.size(loc):
        raise StructuralError(
            f"expected a flat {loc}-field of length {grid.size(loc)}, got shape {a.shape}"
        )
    return a


# -- operators ----------------------------------------------------------------

def curl_E(grid: StaggeredGrid, E: np.ndarray) -> np.ndarray:
    """Discrete curl of an E-located field, returned at H locations."""
    E = _check(grid, E, "E")
    h = grid.spacing
    if grid.dim == 2:
        (ez,) = grid.split(E, "E")
        hx = _d_primal(ez, 1, h[1])
        hy = -_d_primal(ez, 0, h[0])
        return grid.join([hx, hy], "H")
    ex, ey, ez = grid.split(E, "E")
    hx = _d_primal(ez, 1, h[1]) - _d_primal(ey, 2, h[2])
    hy = _d_primal(ex, 2, h[2]) - _d_primal(ez, 0, h[0])
    hz = _d_primal(ey, 0, h[0]) - _d_primal(ex, 1, h[1])
    return grid.join([hx, hy, hz], "H")


def curl_H(grid: StaggeredGrid, H: np.ndarray) -> np.ndarray:
    """Discrete curl of an H-located field, returned at E locations."""
    H = _check(grid, H, "H")
    h = grid.spacing
    if grid.dim == 2:
        hx, hy = grid.split(H, "H")
        ez = _d_dual(hy, 0, h[0]) - _d_dual(hx, 1, h[1])
        return grid.join([ez], "E")
    hx, hy, hz = grid.split(H, "H")
    ex = _d_dual(hz, 1, h[1]) - _d_dual(hy, 2, h[2])
    ey = _d_dual(hx, 2, h[2]) - _d_dual(hz, 0, h[0])
    ez = _d_dual(hy, 0, h[0]) - _d_dual(hx, 1, h[1])
    return grid.join([ex, ey, ez], "E")


def div_H(grid: StaggeredGrid, H: np.ndarray) -> np.ndarray:
    """Discrete divergence of an H-located field at the cell centres."""
    H = _check(grid, H, "H")
    parts = grid.split(H, "H")
    div = sum(_d_primal(p, ax, h) for ax, (p, h) in enumerate(zip(parts, grid.spacing)))
    return np.ravel(div)


def inner_product(grid: StaggeredGrid, A: np.ndarray, B: np.ndarray, loc: str | None = None) -> float:
    """Weighted discrete L2 pairing of two fields at the same location type."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise StructuralError(f"location mismatch: shapes {A.shape} and {B.shape}")
    loc = loc or grid.location_of(A)
    _check(grid, A, loc)
    return float(np.dot(grid.weights(loc) * A, B))


def weighted_lq(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """(sum w |v|^q)^(1/q), or max |v| for q = inf."""
    if not q >= 1:
        raise ParameterError(f"norm exponent must be >= 1, got {q}")
    v = np.abs(np.asarray(values, dtype=float))
    if np.isinf(q):
        return float(v.max(initial=0.0))
    if q == 2:
        return float(np.sqrt(np.dot(weights, v * v)))
    return float(np.dot(weights, v ** q) ** (1.0 / q))


def lq_norm(grid: StaggeredGrid, samples: np.ndarray, q: float = 2.0, loc: str | None = None) -> float:
    """Discrete L^q(Omega) norm of a located field (q = inf gives the max norm)."""
    samples = np.asarray(samples, dtype=float)
    loc = loc or grid.location_of(samples)
    _check(grid, samples, loc)
    return weighted_lq(samples, grid.weights(loc), q)


# -- state ----------------------------------------------------------------------

@dataclass
class FieldState:
    """Electric and magnetic samples at one instant.

    ``E`` is taken at time ``t``.  When ``h_staggered`` is set, ``H`` is the
    leapfrog value at ``t - dt/2``; otherwise it is at ``t`` as well.
    ``sigma_eff`` holds the conductivity selected by the last resolvent solve
    at each E sample, when known.
    """

    grid: StaggeredGrid
    E: np.ndarray
    H: np.ndarray
    t: float = 0.0
    h_staggered: bool = False
    sigma_eff: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.E = _check(self.grid, self.E, "E")
        self.H = _check(self.grid, self.H, "H")
        if self.sigma_eff is not None:
            self.sigma_eff = _check(self.grid, self.sigma_eff, "E")
        self.check_finite()

    @classmethod
    def zeros(cls, grid: StaggeredGrid) -> "FieldState":
        return cls(grid, grid.zeros("E"), grid.zeros("H"))

    def check_finite(self) -> None:
        for name in ("E", "H", "sigma_eff"):
            a = getattr(self, name)
            if a is not None and not np.all(np.isfinite(a)):
                raise StructuralError(f"non-finite values in {name} at t={self.t}")


# -- serialization ----------------------------------------------------------------

def write_field_csv(grid: StaggeredGrid, path: str | Path, fields: dict[str, np.ndarray]) -> None:
    """Write fields as CSV rows ``field, component, i, j[, k], value``."""
    path = Path(path)
    axes = ["i", "j", "k"][: grid.dim]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["field", "component", *axes, "value"])
        for name, data in fields.items():
            loc = grid.location_of(data)
            for comp, block in zip(grid.components(loc), grid.split(data, loc)):
                for idx in np.ndindex(block.shape):
                    w.writerow([name, comp, *idx, repr(float(block[idx]))])
