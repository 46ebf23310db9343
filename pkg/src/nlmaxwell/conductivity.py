"""Monotone conductivity laws s -> sigma(s) and their resolvents.

A graph is a non-decreasing, possibly multi-valued map on s >= 0.  At a jump
point the graph takes the whole closed interval between the one-sided limits.
The product ``m(s) = sigma(s) * s`` is what links |E| to the driving field:
for a rate ``lam >= 0`` the resolvent returns the unique ``s`` with
``(lam + sigma) * s = r``.  With ``lam = 0`` this inverts ``m`` (the
quasi-stationary elimination of E); with ``lam = eps/dt`` it is the
backward-Euler update of the full system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Union

import numpy as np

from .errors import ConvergenceError, DegeneracyError, ParameterError, UnsupportedShapeError

MAX_BISECTION_ITERATIONS = 200
DEFAULT_RESISTIVITY_FLOOR = 1e-8


class _GraphBase:
    """Shared behaviour; concrete graphs supply ``bounds`` and ``_resolve``."""

    jumps: tuple[float, ...] = ()

    def bounds(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sigma(self, s) -> np.ndarray:
        """Single-valued selection: the lower value of the graph."""
        return self.bounds(np.asarray(s, dtype=float))[0]

    @property
    def growth_exponent(self) -> float:
        return 0.0

    @property
    def invertible(self) -> bool:
        """True when m(s) = sigma(s) s is strictly increasing off its jumps."""
        raise NotImplementedError

    def _resolve(self, lam: float, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _bisect(self, lam, r)

    def _breakpoints(self) -> tuple[float, ...]:
        return self.jumps


@dataclass(frozen=True)
class PowerLaw(_GraphBase):
    """sigma(s) = s**p."""

    p: float

    def __post_init__(self) -> None:
        if not (self.p >= 0 and math.isfinite(self.p)):
            raise ParameterError(f"power-law exponent must be >= 0, got {self.p}")

    def bounds(self, s):
        v = np.ones_like(s) if self.p == 0 else np.power(s, self.p)
        return v, v

    @property
    def growth_exponent(self) -> float:
        return float(self.p)

    @property
    def invertible(self) -> bool:
        return True

    def _resolve(self, lam, r):
        p = self.p
        if lam == 0:
            s = np.power(r, 1.0 / (p + 1.0))
        elif p == 0:
            s = r / (lam + 1.0)
        elif p == 1:
            # s**2 + lam*s - r = 0, cancellation-free root
            s = 2.0 * r / (lam + np.sqrt(lam * lam + 4.0 * r))
        else:
            s, _ = _bisect(self, lam, r)
        return s, self.bounds(s)[0]


@dataclass(frozen=True)
class Step(_GraphBase):
    """sigma = a for s <= threshold and b above; the jump is filled with [a, b].

    ``a = 0`` is accepted: it describes an insulating subcritical phase that
    only the full system (lam > 0) can handle.
    """

    a: float
    b: float
    threshold: float = 1.0

    def __post_init__(self) -> None:
        if not self.a >= 0:
            raise ParameterError(f"step conductivity needs a >= 0, got a={self.a}")
        if not self.a < self.b:
            raise ParameterError(f"step conductivity needs a < b, got a={self.a}, b={self.b}")
        if not self.threshold > 0:
            raise ParameterError(f"step threshold must be > 0, got {self.threshold}")

    @property
    def jumps(self) -> tuple[float, ...]:
        return (self.threshold,)

    def bounds(self, s):
        s = np.asarray(s, dtype=float)
        lo = np.where(s <= self.threshold, self.a, self.b)
        hi = np.where(s < self.threshold, self.a, self.b)
        return lo.astype(float), hi.astype(float)

    @property
    def invertible(self) -> bool:
        return self.a > 0

    def _resolve(self, lam, r):
        ts = self.threshold
        below = r <= (lam + self.a) * ts
        above = r >= (lam + self.b) * ts
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(below, r / (lam + self.a), np.where(above, r / (lam + self.b), ts))
            sig = np.where(below, self.a, np.where(above, self.b, r / ts - lam))
        # r == 0 with a == 0 and lam == 0 is excluded by the invertibility check
        return s, np.clip(sig, self.a, self.b)


@dataclass(frozen=True)
class PiecewiseLinear(_GraphBase):
    """Linear interpolation through knots (s_i, sigma_i); constant outside."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        knots = tuple((float(s), float(v)) for s, v in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 1:
            raise ParameterError("piecewise-linear graph needs at least one knot")
        s = np.array([k[0] for k in knots])
        v = np.array([k[1] for k in knots])
        if np.any(s < 0) or np.any(v < 0) or not np.all(np.isfinite(s)) or not np.all(np.isfinite(v)):
            raise ParameterError("knots must be finite with s >= 0 and sigma >= 0")
        if np.any(np.diff(s) <= 0):
            raise ParameterError("knot positions must be strictly increasing")

    @property
    def _s(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots])

    @property
    def _v(self) -> np.ndarray:
        return np.array([k[1] for k in self.knots])

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self._v) >= 0))

    def bounds(self, s):
        v = np.interp(np.asarray(s, dtype=float), self._s, self._v)
        return v, v

    @property
    def invertible(self) -> bool:
        s, v = self._s, self._v
        if v[0] == 0 and s[0] > 0:
            return False
        return not np.any((v == 0) & (s > 0))

    def _breakpoints(self):
        return tuple(self._s)

    def _resolve(self, lam, r):
        if not self.monotone:
            raise UnsupportedShapeError("resolvent requires non-decreasing knot values")
        s_k, v_k = self._s, self._v
        m_k = (lam + v_k) * s_k
        seg = np.searchsorted(m_k, r, side="right") - 1
        s = np.empty_like(r)
        # below the first knot and beyond the last one sigma is constant
        lo = seg < 0
        hi = seg >= len(s_k) - 1
        mid = ~(lo | hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            s[lo] = r[lo] / (lam + v_k[0])
            s[hi] = r[hi] / (lam + v_k[-1])
        if np.any(mid):
            i = seg[mid]
            rr = r[mid]
            slope = (v_k[i + 1] - v_k[i]) / (s_k[i + 1] - s_k[i])
            # (lam + v_i + slope*(s - s_i)) * s = rr
            B = lam + v_k[i] - slope * s_k[i]
            D = np.sqrt(np.maximum(B * B + 4.0 * slope * rr, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                pos = 2.0 * rr / (B + D)
                neg = (D - B) / (2.0 * slope)
                lin = rr / B
            root = np.where(slope == 0, lin, np.where(B >= 0, pos, neg))
            s[mid] = np.clip(root, s_k[i], s_k[i + 1])
        s = np.where(r == 0, 0.0, s)
        return s, self.bounds(s)[0]


@dataclass(frozen=True)
class Constant(_GraphBase):
    sigma0: float

    def __post_init__(self) -> None:
        if not (self.sigma0 >= 0 and math.isfinite(self.sigma0)):
            raise ParameterError(f"constant conductivity must be >= 0, got {self.sigma0}")

    def bounds(self, s):
        v = np.full_like(np.asarray(s, dtype=float), self.sigma0)
        return v, v

    @property
    def invertible(self) -> bool:
        return self.sigma0 > 0

    def _resolve(self, lam, r):
        return r / (lam + self.sigma0), np.full_like(r, self.sigma0)


@dataclass(frozen=True)
class Smoothed(_GraphBase):
    """Base graph with its jump replaced by a linear ramp over |s - s*| < 1/m."""

    base: "Graph"
    m: float
    _shape: Any = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.m >= 1:
            raise ParameterError(f"mollification index must be >= 1, got {self.m}")
        jumps = self.base.jumps
        if len(jumps) > 1:
            raise UnsupportedShapeError(
                f"smoothing supports at most one jump, base has {len(jumps)}"
            )
        if not jumps:
            shape = self.base
        else:
            (sj,) = jumps
            left, right = sj - 1.0 / self.m, sj + 1.0 / self.m
            v_left = float(self.base.bounds(np.array(max(left, 0.0)))[0])
            v_right = float(self.base.bounds(np.array(right))[1])
            if left < 0:
                v_left = v_left + (v_right - v_left) * (-left) / (right - left)
                left = 0.0
            # only step graphs carry a jump, so the smoothed shape is piecewise linear
            shape = PiecewiseLinear(((left, v_left), (right, v_right)))
        object.__setattr__(self, "_shape", shape)

    def bounds(self, s):
        return self._shape.bounds(np.asarray(s, dtype=float))

    @property
    def growth_exponent(self) -> float:
        return self.base.growth_exponent

    @property
    def invertible(self) -> bool:
        return self._shape.invertible

    def _breakpoints(self):
        return self._shape._breakpoints()

    def _resolve(self, lam, r):
        return self._shape._resolve(lam, r)


Graph = Union[PowerLaw, Step, PiecewiseLinear, Constant, Smoothed]


# -- scalar root finding -------------------------------------------------------

def _bisect(graph, lam: float, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised bisection for s = inf{s : (lam + sigma_hi(s)) s >= r}.

    The upper bracket is grown geometrically until it covers r; the lower
    bracket r / (lam + sigma(hi)) follows from monotonicity.  Midpoints are
    geometric while the bracket spans more than a factor of two.
    """
    r = np.asarray(r, dtype=float)

    def f(s):
        return (lam + graph.bounds(s)[1]) * s

    p_eff = graph.growth_exponent
    if lam > 0:
        hi = np.maximum(r / lam, np.finfo(float).tiny)
    else:
        hi = np.maximum(1.0, 2.0 * np.power(r, 1.0 / (p_eff + 1.0)))
    for _ in range(MAX_BISECTION_ITERATIONS):
        short = f(hi) < r
        if not np.any(short):
            break
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise ConvergenceError("could not bracket the resolvent root")
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(r > 0, r / (lam + graph.bounds(hi)[1]), 0.0)
    lo = np.minimum(lo, hi)
    # lo may itself be the root; step just below it so f(lo) < r holds strictly
    lo = np.where(f(lo) >= r, np.nextafter(lo, 0.0) * (1 - 1e-15), lo)
    lo = np.maximum(lo, 0.0)
    for _ in range(MAX_BISECTION_ITERATIONS):
        geometric = (lo > 0) & (hi > 2.0 * lo)
        mid = np.where(geometric, np.sqrt(lo * hi), 0.5 * (lo + hi))
        active = (r > 0) & (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        up = f(mid) >= r
        hi = np.where(active & up, mid, hi)
        lo = np.where(active & ~up, mid, lo)
    else:
        raise ConvergenceError(
            f"bisection did not converge in {MAX_BISECTION_ITERATIONS} iterations"
        )
    s = np.where(r == 0, 0.0, hi)
    lo_v, hi_v = graph.bounds(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        sig = np.where(s > 0, r / s - lam, lo_v)
    return s, np.clip(sig, lo_v, hi_v)


# -- public operations ----------------------------------------------------------

def sigma_eval(graph: Graph, s: float) -> tuple[float, float]:
    """Interval [sigma_lo, sigma_hi] of the graph at s (degenerate off jumps)."""
    if not s >= 0:
        raise ParameterError(f"field magnitude must be >= 0, got {s}")
    lo, hi = graph.bounds(np.array(float(s)))
    return float(lo), float(hi)


def check_invertible(graph: Graph) -> None:
    """Raise unless m(s) = sigma(s) s can be inverted (needed when lam = 0)."""
    if not graph.invertible:
        raise DegeneracyError(
            f"{describe(graph)}: sigma vanishes on an interval of s > 0, so sigma(s)s "
            "cannot be inverted; the quasi-stationary problem loses uniqueness here "
            "and only the full system with eps > 0 is meaningful"
        )


def resolve_array(graph: Graph, lam: float, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised resolvent: arrays (s, sigma_eff) with (lam + sigma_eff) s = r."""
    if not lam >= 0:
        raise ParameterError(f"resolvent rate must be >= 0, got {lam}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ParameterError("resolvent right-hand side must be finite and >= 0")
    if lam == 0:
        check_invertible(graph)
    s, sig = graph._resolve(float(lam), r.astype(float, copy=True))
    zero = r == 0
    if np.any(zero):
        s = np.where(zero, 0.0, s)
        sig = np.where(zero, graph.bounds(np.zeros_like(r))[0], sig)
    return s, sig


def resolve(graph: Graph, lam: float, r: float) -> tuple[float, float]:
    """Scalar resolvent: the unique s >= 0 with (lam + sigma_eff) s = r."""
    s, sig = resolve_array(graph, lam, np.array([r], dtype=float))
    return float(s[0]), float(sig[0])


def resistivity(graph: Graph, r, delta: float = DEFAULT_RESISTIVITY_FLOOR):
    """rho = 1/sigma(g(max(r, delta))) where g inverts sigma(s) s."""
    if not delta > 0:
        raise ParameterError(f"resistivity floor must be > 0, got {delta}")
    arr = np.maximum(np.asarray(r, dtype=float), delta)
    _, sig = resolve_array(graph, 0.0, np.atleast_1d(arr))
    rho = 1.0 / sig
    return float(rho[0]) if np.ndim(r) == 0 else rho.reshape(np.shape(r))


def smooth(graph: Graph, m: float) -> Smoothed:
    """Continuous monotone approximation equal to the graph off [s*-1/m, s*+1/m]."""
    return Smoothed(graph, m)


# -- growth hypothesis check ----------------------------------------------------

@dataclass
class GrowthReport:
    s_max: float
    n_samples: int
    a0: float
    a1: float
    b0: float
    p: float
    M0: float
    lower_ok: bool
    upper_ok: bool
    monotone_ok: bool
    worst_lower_margin: float
    worst_upper_margin: float

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok and self.monotone_ok

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def _adaptive_trapezoid(f, a: float, b: float, rtol: float, max_depth: int = 60) -> float:
    """Adaptive trapezoid rule, refined breadth-first on all open panels at once.

    A panel is accepted once halving it changes its trapezoid value by less
    than its share of ``rtol`` times the running integral; accepted panels
    contribute the Richardson-corrected value.
    """
    if b <= a:
        return 0.0
    x0, x1 = np.array([a]), np.array([b])
    f0, f1 = f(x0), f(x1)
    coarse = 0.5 * (x1 - x0) * (f0 + f1)
    total = 0.0
    for depth in range(max_depth + 1):
        xm = 0.5 * (x0 + x1)
        fm = f(xm)
        left = 0.25 * (x1 - x0) * (f0 + fm)
        right = 0.25 * (x1 - x0) * (fm + f1)
        fine = left + right
        err = np.abs(fine - coarse) / 3.0
        scale = abs(total + fine.sum())
        done = (err <= rtol * scale * (x1 - x0) / (b - a)) & (depth >= 4)
        if depth == max_depth:
            done[:] = True
        total += float(np.sum(fine[done] + (fine[done] - coarse[done]) / 3.0))
        keep = ~done
        if not np.any(keep):
            break
        x0, xm, x1 = x0[keep], xm[keep], x1[keep]
        f0, fm, f1 = f0[keep], fm[keep], f1[keep]
        x0, x1 = np.concatenate([x0, xm]), np.concatenate([xm, x1])
        f0, f1 = np.concatenate([f0, fm]), np.concatenate([fm, f1])
        coarse = np.concatenate([left[keep], right[keep]])
    return total


def energy_integral(graph: Graph, s: float, rtol: float = 1e-8) -> float:
    """int_0^{s^2} sigma(sqrt(u)) du, split at the graph's breakpoints."""
    upper = s * s
    cuts = sorted({0.0, upper, *(b * b for b in graph._breakpoints() if 0 < b * b < upper)})

    def f(u):
        return graph.bounds(np.sqrt(u))[0]

    return sum(_adaptive_trapezoid(f, lo, hi, rtol) for lo, hi in zip(cuts[:-1], cuts[1:]))


def validate_growth(
    graph: Graph,
    p: float,
    a0: float,
    a1: float,
    b0: float,
    M0: float,
    s_max: float,
    n_samples: int = 50,
    rtol: float = 1e-8,
) -> GrowthReport:
    """Check the lower energy bound and the polynomial upper bound on samples.

    The lower bound holds at s when the integral is at least
    a0 s^(p+2) - a1, up to the quadrature tolerance ``rtol`` (relative).
    """
    if not (s_max > M0 >= 0):
        raise ParameterError(f"need s_max > M0 >= 0, got s_max={s_max}, M0={M0}")
    if n_samples < 10:
        raise ParameterError(f"need at least 10 samples, got {n_samples}")
    if not (a0 > 0 and a1 >= 0 and b0 >= 0 and p >= 0):
        raise ParameterError("need a0 > 0, a1 >= 0, b0 >= 0 and p >= 0")
    s = np.linspace(0.0, s_max, n_samples)
    lo, hi = graph.bounds(s)
    monotone_ok = bool(np.all(np.diff(lo) >= 0) and np.all(np.diff(hi) >= 0) and np.all(lo >= 0))
    upper_margin = b0 * (1.0 + np.power(s, p)) - hi
    worst_lower = math.inf
    for si in s[s >= M0]:
        integral = energy_integral(graph, float(si), rtol)
        bound = a0 * si ** (p + 2) - a1
        slack = rtol * max(abs(integral), 1.0)
        worst_lower = min(worst_lower, integral - bound + slack)
    return GrowthReport(
        s_max=float(s_max),
        n_samples=int(n_samples),
        a0=a0,
        a1=a1,
        b0=b0,
        p=p,
        M0=M0,
        lower_ok=bool(worst_lower >= 0),
        upper_ok=bool(np.all(upper_margin >= 0)),
        monotone_ok=monotone_ok,
        worst_lower_margin=float(worst_lower),
        worst_upper_margin=float(upper_margin.min()),
    )


# -- spatially varying material -----------------------------------------------

class Material:
    """One or two graphs selected per E sample by a 0/1 material index."""

    def __init__(self, graphs: Iterable[Graph], index: np.ndarray | None = None):
        self.graphs = tuple(graphs)
        if not 1 <= len(self.graphs) <= 2:
            raise ParameterError("a material holds one or two graphs")
        if index is None:
            if len(self.graphs) != 1:
                raise ParameterError("two graphs need a material index field")
            self.index = None
        else:
            index = np.asarray(index)
            if not np.all((index == 0) | (index == 1)):
                raise ParameterError("material index must be 0 or 1")
            if len(self.graphs) == 1 and np.any(index == 1):
                raise ParameterError("material index refers to a missing second graph")
            self.index = index.astype(np.int8)

    @classmethod
    def of(cls, graph: "Graph | Material") -> "Material":
        return graph if isinstance(graph, Material) else cls([graph])

    @property
    def growth_exponent(self) -> float:
        return max(g.growth_exponent for g in self.graphs)

    def check_invertible(self) -> None:
        for g in self.graphs:
            check_invertible(g)

    def _groups(self, n: int):
        if self.index is None:
            yield self.graphs[0], slice(None)
            return
        if self.index.size != n:
            raise ParameterError(f"material index has {self.index.size} entries, field has {n}")
        for k, g in enumerate(self.graphs):
            sel = self.index == k
            if np.any(sel):
                yield g, sel

    def resolve(self, lam: float, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        r = np.asarray(r, dtype=float)
        if self.index is None:
            return resolve_array(self.graphs[0], lam, r)
        s = np.empty_like(r)
        sig = np.empty_like(r)
        for g, sel in self._groups(r.size):
            s[sel], sig[sel] = resolve_array(g, lam, r[sel])
        return s, sig

    def sigma(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.index is None:
            return self.graphs[0].sigma(s)
        out = np.empty_like(s)
        for g, sel in self._groups(s.size):
            out[sel] = g.sigma(s[sel])
        return out


# -- JSON description -------------------------------------------------------------

def graph_from_dict(d: dict) -> Graph:
    """Build a graph from its JSON description (see README for the schema)."""
    errors = graph_errors(d)
    if errors:
        raise ParameterError("; ".join(errors))
    kind = d["type"]
    if kind == "power_law":
        return PowerLaw(float(d["p"]))
    if kind == "step":
        return Step(float(d["a"]), float(d["b"]), float(d.get("threshold", 1.0)))
    if kind == "piecewise_linear":
        return PiecewiseLinear(tuple(tuple(k) for k in d["knots"]))
    if kind == "constant":
        return Constant(float(d["sigma"]))
    return Smoothed(graph_from_dict(d["base"]), float(d["m"]))


_GRAPH_KEYS = {
    "power_law": ({"p"}, set()),
    "step": ({"a", "b"}, {"threshold"}),
    "piecewise_linear": ({"knots"}, set()),
    "constant": ({"sigma"}, set()),
    "smoothed": ({"m", "base"}, set()),
}


def _num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def graph_errors(d: Any, where: str = "graph") -> list[str]:
    """All validation problems of a graph description (empty list if valid)."""
    if not isinstance(d, dict):
        return [f"{where}: must be an object"]
    kind = d.get("type")
    if kind not in _GRAPH_KEYS:
        return [f"{where}.type: unknown graph type {kind!r}, expected one of {sorted(_GRAPH_KEYS)}"]
    required, optional = _GRAPH_KEYS[kind]
    errs = [f"{where}.{k}: missing" for k in sorted(required - d.keys())]
    errs += [f"{where}.{k}: unknown key" for k in sorted(d.keys() - required - optional - {"type"})]
    for k in sorted((required | optional) & d.keys()):
        if k not in ("knots", "base") and not _num(d[k]):
            errs.append(f"{where}.{k}: must be a finite number")
    if errs:
        return errs
    if kind == "power_law" and d["p"] < 0:
        errs.append(f"{where}.p: exponent must be >= 0")
    elif kind == "step":
        if d["a"] < 0:
            errs.append(f"{where}.a: must be >= 0")
        if not d["a"] < d["b"]:
            errs.append(f"{where}: step conductivity requires a < b (got a={d['a']}, b={d['b']})")
        if d.get("threshold", 1.0) <= 0:
            errs.append(f"{where}.threshold: must be > 0")
    elif kind == "constant" and d["sigma"] < 0:
        errs.append(f"{where}.sigma: must be >= 0")
    elif kind == "piecewise_linear":
        knots = d["knots"]
        if not (isinstance(knots, list) and knots and all(
            isinstance(k, list) and len(k) == 2 and all(_num(x) for x in k) for k in knots
        )):
            errs.append(f"{where}.knots: must be a non-empty list of [s, sigma] pairs")
        else:
            s = [k[0] for k in knots]
            v = [k[1] for k in knots]
            if any(x < 0 for x in s + v):
                errs.append(f"{where}.knots: s and sigma must be >= 0")
            if any(b <= a for a, b in zip(s, s[1:])):
                errs.append(f"{where}.knots: s must be strictly increasing")
            if any(b < a for a, b in zip(v, v[1:])):
                errs.append(f"{where}.knots: sigma must be non-decreasing")
    elif kind == "smoothed":
        if d["m"] < 1:
            errs.append(f"{where}.m: mollification index must be >= 1")
        errs += graph_errors(d["base"], f"{where}.base")
    return errs


def graph_to_dict(graph: Graph) -> dict:
    if isinstance(graph, PowerLaw):
        return {"type": "power_law", "p": graph.p}
    if isinstance(graph, Step):
        return {"type": "step", "a": graph.a, "b": graph.b, "threshold": graph.threshold}
    if isinstance(graph, PiecewiseLinear):
        return {"type": "piecewise_linear", "knots": [list(k) for k in graph.knots]}
    if isinstance(graph, Constant):
        return {"type": "constant", "sigma": graph.sigma0}
    if isinstance(graph, Smoothed):
        return {"type": "smoothed", "m": graph.m, "base": graph_to_dict(graph.base)}
    raise UnsupportedShapeError(f"cannot serialise {graph!r}")


def describe(graph) -> str:
    d = graph_to_dict(graph)
    return d["type"] + "(" + ", ".join(f"{k}={v}" for k, v in d.items() if k != "type") + ")"
