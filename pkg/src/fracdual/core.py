"""Shared domain types: parameters, grids, analytic descriptors and fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np

__all__ = [
    "FracParams",
    "Tail",
    "FunctionDescriptor",
    "Scaled",
    "Reflected",
    "Separable",
    "SpaceGrid",
    "HistoryField",
    "AntisymmetricField",
    "Hypothesis",
    "Conclusion",
    "ExperimentReport",
    "reflect_point",
    "antisymmetric_difference",
    "growth_check",
    "laplacian_constant",
    "smoothstep",
]

INF = math.inf


def laplacian_constant(n: int, s: float) -> float:
    """Normalization making the Fourier symbol of ``(-Delta)^s`` equal ``|xi|^(2s)``."""
    return 4.0**s * math.gamma(n / 2.0 + s) / (math.pi ** (n / 2.0) * abs(math.gamma(-s)))


@dataclass(frozen=True)
class FracParams:
    """Orders of the time derivative (``alpha``) and the space operator (``s``)."""

    alpha: float
    s: float
    dim: int = 1

    def __post_init__(self) -> None:
        for name in ("alpha", "s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v!r}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim!r}")

    @property
    def c_alpha(self) -> float:
        return self.alpha / math.gamma(1.0 - self.alpha)

    @property
    def c_ns(self) -> float:
        return laplacian_constant(self.dim, self.s)


# ---------------------------------------------------------------------------
# analytic descriptors


@dataclass(frozen=True)
class Tail:
    """Declared far-field behaviour of a descriptor.

    ``eventually_constant``: ``f == value`` for ``arg <= cutoff`` and
    ``f == right_value`` for ``arg >= right_cutoff`` (a side is absent when
    its cutoff is infinite in the wrong direction).
    ``bounded``: ``|f| <= value`` for ``arg <= cutoff`` (and on the right when
    ``right_cutoff`` is finite or ``-inf``).
    ``power_growth``: ``|f| <= C (1 + |arg|^value)``.
    """

    kind: str
    value: float = 0.0
    cutoff: float = -INF
    right_value: float = 0.0
    right_cutoff: float = INF

    KINDS = ("eventually_constant", "bounded", "power_growth")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown tail kind {self.kind!r}")

    @property
    def left_constant(self) -> bool:
        return self.kind == "eventually_constant" and self.cutoff > -INF

    @property
    def right_constant(self) -> bool:
        return self.kind == "eventually_constant" and self.right_cutoff < INF

    @property
    def left_bounded(self) -> bool:
        return self.kind in ("eventually_constant", "bounded") and (
            self.kind == "bounded" or self.left_constant
        )

    @property
    def right_bounded(self) -> bool:
        if self.kind == "eventually_constant":
            return self.right_constant
        return self.kind == "bounded" and self.right_cutoff == -INF

    def scaled(self, k: float) -> Tail:
        if self.kind == "power_growth":
            return self
        if self.kind == "bounded":
            return Tail("bounded", abs(k) * self.value, self.cutoff, 0.0, self.right_cutoff)
        return Tail(self.kind, k * self.value, self.cutoff, k * self.right_value, self.right_cutoff)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "value": self.value,
            "cutoff": _enc(self.cutoff),
            "right_value": self.right_value,
            "right_cutoff": _enc(self.right_cutoff),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Tail:
        return cls(
            d["kind"],
            float(d.get("value", 0.0)),
            _dec(d.get("cutoff", "-inf")),
            float(d.get("right_value", 0.0)),
            _dec(d.get("right_cutoff", "inf")),
        )


def _enc(x: float) -> float | str:
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _dec(x: float | str) -> float:
    return float(x)


def smoothstep(y):
    """C-infinity step: 0 for ``y <= 0``, 1 for ``y >= 1``, strictly increasing between."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(y > 0.0, np.exp(-1.0 / np.where(y > 0.0, y, 1.0)), 0.0)
        b = np.where(y < 1.0, np.exp(-1.0 / np.where(y < 1.0, 1.0 - y, 1.0)), 0.0)
        return a / (a + b)


_NPARAMS = {
    "constant": 1,
    "linear": 2,
    "sine": 3,
    "exponential": 2,
    "gaussian_bump": 3,
    "ball_barrier_phi": 3,
    "slab_barrier_h": 4,
    "cutoff_eta": 2,
    "counterexample_u": 1,
}


@dataclass(frozen=True)
class FunctionDescriptor:
    """Analytic scalar function of one coordinate, defined on the whole line.

    ``params`` per family:

    * constant ``(c,)``; linear ``(a, b)`` meaning ``a + b x``
    * sine ``(amp, freq, phase)``; exponential ``(amp, rate)``
    * gaussian_bump ``(amp, center, width)``
    * ball_barrier_phi ``(x0, r, s)``; slab_barrier_h ``(lam, l, beta, s)``
    * cutoff_eta ``(center, scale)``; counterexample_u ``(R,)``
    * tabulated ``(x0, y0, x1, y1, ...)``: piecewise linear, constant beyond the ends

    Two-dimensional points (arrays with trailing axis 2) are accepted by the
    radial families (gaussian_bump, ball_barrier_phi), by slab_barrier_h and by
    sine/constant/linear, which act on the first coordinate.
    """

    family: str
    params: tuple[float, ...]
    tail: Tail = None  # type: ignore[assignment]
    planar: bool = False

    FAMILIES = (
        "constant",
        "linear",
        "sine",
        "exponential",
        "gaussian_bump",
        "ball_barrier_phi",
        "slab_barrier_h",
        "cutoff_eta",
        "counterexample_u",
        "tabulated",
    )

    def __post_init__(self) -> None:
        if self.family not in self.FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        want = _NPARAMS.get(self.family)
        if want is not None and len(params) != want:
            raise ValueError(f"{self.family} takes {want} params, got {len(params)}")
        if self.family == "tabulated":
            if len(params) < 4 or len(params) % 2:
                raise ValueError("tabulated needs at least two (x, y) pairs")
            xs = params[0::2]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("tabulated abscissae must be strictly increasing")
        if self.family in ("ball_barrier_phi",) and params[1] <= 0:
            raise ValueError("ball radius must be positive")
        if self.family == "slab_barrier_h" and params[1] <= 0:
            raise ValueError("slab half-width must be positive")
        if self.family == "cutoff_eta" and params[1] <= 0:
            raise ValueError("cutoff scale must be positive")
        if self.family == "counterexample_u" and params[0] <= 0:
            raise ValueError("R must be positive")
        if self.family == "gaussian_bump" and params[2] <= 0:
            raise ValueError("gaussian width must be positive")
        if any(not math.isfinite(p) for p in params):
            raise ValueError("params must be finite")
        if self.tail is None:
            object.__setattr__(self, "tail", self._default_tail())

    # -- construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, c: float) -> FunctionDescriptor:
        return cls("constant", (c,))

    @classmethod
    def indicator(cls, a: float, b: float, height: float = 1.0, ramp: float = 1e-9) -> FunctionDescriptor:
        """``height`` on ``[a, b]``, zero outside, with linear ramps of width ``ramp`` outside."""
        return cls("tabulated", (a - ramp, 0.0, a, height, b, height, b + ramp, 0.0))

    def _default_tail(self) -> Tail:
        f, p = self.family, self.params
        if f == "constant":
            return Tail("eventually_constant", p[0], INF, p[0], -INF)
        if f == "linear":
            if p[1] == 0.0:
                return Tail("eventually_constant", p[0], INF, p[0], -INF)
            return Tail("power_growth", 1.0)
        if f == "sine":
            return Tail("bounded", abs(p[0]), INF, 0.0, -INF)
        if f == "exponential":
            if p[1] > 0:
                return Tail("bounded", abs(p[0]), 0.0)
            if p[1] == 0:
                return Tail("eventually_constant", p[0], INF, p[0], -INF)
            return Tail("power_growth", INF)
        if f == "gaussian_bump":
            return Tail("bounded", abs(p[0]), INF, 0.0, -INF)
        if f == "ball_barrier_phi":
            return Tail("eventually_constant", 0.0, p[0] - p[1], 0.0, p[0] + p[1])
        if f == "slab_barrier_h":
            return Tail("eventually_constant", 1.0, p[0] - 2 * p[1], 1.0, p[0])
        if f == "cutoff_eta":
            return Tail("eventually_constant", 0.0, p[0] - 2 * p[1], 0.0, p[0] + 2 * p[1])
        if f == "counterexample_u":
            return Tail("eventually_constant", -p[0], -p[0], 0.0, INF)
        xs, ys = p[0::2], p[1::2]
        return Tail("eventually_constant", ys[0], xs[0], ys[-1], xs[-1])

    # -- evaluation -----------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._eval(x)
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, x: np.ndarray):
        f, p = self.family, self.params
        two_d = self.planar and x.ndim >= 1 and x.shape[-1] == 2
        x1 = x[..., 0] if two_d else x
        if f == "constant":
            return np.full(x1.shape, p[0]) if x1.ndim else p[0]
        if f == "linear":
            return p[0] + p[1] * x1
        if f == "sine":
            return p[0] * np.sin(p[1] * x1 + p[2])
        if f == "exponential":
            return p[0] * np.exp(p[1] * x1)
        if f == "gaussian_bump":
            r2 = _sq_dist(x, p[1], two_d)
            return p[0] * np.exp(-r2 / (2.0 * p[2] ** 2))
        if f == "ball_barrier_phi":
            r2 = _sq_dist(x, p[0], two_d)
            return np.maximum(1.0 - r2 / p[1] ** 2, 0.0) ** p[2]
        if f == "slab_barrier_h":
            lam, l, beta, s = p
            # factored so that both slab edges give exactly zero
            bump = np.maximum(-(x1 - lam) * (x1 - lam + 2.0 * l) / l**2, 0.0) ** s + 1.0
            if two_d:
                bump = bump * (1.0 + x[..., 1] ** 2) ** (beta / 2.0)
            return bump
        if f == "cutoff_eta":
            y = np.abs(x1 - p[0]) / p[1]
            return smoothstep(2.0 - y)
        if f == "counterexample_u":
            R = p[0]
            return np.where(x1 > 0.0, np.sin(x1), np.maximum(x1, -R))
        xs, ys = np.asarray(p[0::2]), np.asarray(p[1::2])
        return np.interp(x1, xs, ys)

    def breakpoints(self) -> tuple[float, ...]:
        """Arguments where the function is not smooth (or changes formula)."""
        f, p = self.family, self.params
        if f == "ball_barrier_phi":
            return (p[0] - p[1], p[0] + p[1])
        if f == "slab_barrier_h":
            return (p[0] - 2 * p[1], p[0])
        if f == "cutoff_eta":
            c, a = p
            return (c - 2 * a, c - a, c + a, c + 2 * a)
        if f == "counterexample_u":
            return (-p[0], 0.0)
        if f == "tabulated":
            return tuple(p[0::2])
        return ()

    def in_two_dims(self) -> FunctionDescriptor:
        """Copy that interprets trailing-axis-2 arrays as planar points."""
        return FunctionDescriptor(self.family, self.params, self.tail, planar=True)

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "params": list(self.params), "tail": self.tail.to_dict()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> FunctionDescriptor:
        tail = d.get("tail")
        return cls(d["family"], tuple(d.get("params", ())), Tail.from_dict(tail) if tail else None)


def _sq_dist(x: np.ndarray, center: float, two_d: bool):
    if two_d:
        return (x[..., 0] - center) ** 2 + x[..., 1] ** 2
    return (x - center) ** 2


@dataclass(frozen=True)
class Scaled:
    """``factor * base(arg)``; keeps the tail declaration consistent."""

    base: Any
    factor: float

    def __call__(self, x):
        return self.factor * np.asarray(self.base(x))

    @property
    def tail(self) -> Tail:
        return self.base.tail.scaled(self.factor)

    def breakpoints(self) -> tuple[float, ...]:
        return self.base.breakpoints()


@dataclass(frozen=True)
class Reflected:
    """Odd extension about ``x = lam``: ``factor * base(x)`` left of the plane.

    Right of the plane the value is ``-factor * base(2 lam - x)``; on the plane
    it is zero.
    """

    base: Any
    lam: float
    factor: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        left = self.factor * np.asarray(self.base(np.minimum(x, self.lam)), dtype=float)
        right = -self.factor * np.asarray(self.base(np.minimum(2.0 * self.lam - x, self.lam)), dtype=float)
        out = np.where(x < self.lam, left, np.where(x > self.lam, right, 0.0))
        return float(out) if out.ndim == 0 else out

    @property
    def tail(self) -> Tail:
        t = getattr(self.base, "tail", None)
        k = self.factor
        if t is not None and t.left_constant:
            return Tail("eventually_constant", k * t.value, t.cutoff, -k * t.value, 2.0 * self.lam - t.cutoff)
        if t is None or t.left_bounded:
            return Tail("bounded", INF if t is None else abs(k) * t.value, INF, 0.0, -INF)
        return t

    def breakpoints(self) -> tuple[float, ...]:
        bp = tuple(b for b in getattr(self.base, "breakpoints", lambda: ())() if b <= self.lam)
        return tuple(sorted(set(bp) | {2.0 * self.lam - b for b in bp} | {self.lam}))


@dataclass(frozen=True)
class Separable:
    """Space-time function ``space(x) * time(t)``."""

    space: FunctionDescriptor
    time: FunctionDescriptor = field(default_factory=lambda: FunctionDescriptor.constant(1.0))

    def __call__(self, x, t):
        return np.asarray(self.space(x)) * np.asarray(self.time(t))

    def at_point(self, x: float) -> Scaled:
        """The time trace at a fixed location."""
        return Scaled(self.time, float(self.space(x)))

    def at_time(self, t: float) -> Scaled:
        """The spatial profile at a fixed time."""
        return Scaled(self.space, float(self.time(t)))

    @classmethod
    def constant(cls, c: float) -> Separable:
        return cls(FunctionDescriptor.constant(c))

    def to_dict(self) -> dict[str, Any]:
        return {"space": self.space.to_dict(), "time": self.time.to_dict()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Separable:
        if "family" in d:
            return cls(FunctionDescriptor.from_dict(d))
        return cls(FunctionDescriptor.from_dict(d["space"]), FunctionDescriptor.from_dict(d["time"]))


# ---------------------------------------------------------------------------
# geometry


DOMAIN_KINDS = ("interval", "ball", "slab", "half_space_truncation")


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform grid with an interior/exterior classification.

    ``domain`` holds the geometric parameters of ``domain_kind``:

    * interval ``(a, b)`` and slab ``(a, b)``: open interval ``a < x < b``
    * ball ``(center, r)``: ``|x - center| < r``
    * half_space_truncation ``()``: ``0 < x``; beyond ``x_max`` the field is
      continued by freezing the last node value.

    Two-dimensional grids use the same ``x_min``/``x_max``/``n`` on both axes.
    """

    x_min: float
    x_max: float
    n: int
    domain_kind: str = "interval"
    domain: tuple[float, ...] = ()
    dim: int = 1

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if int(self.n) != self.n or self.n < 3:
            raise ValueError("a grid needs at least 3 points per axis")
        if not (self.x_max > self.x_min):
            raise ValueError("x_max must exceed x_min")
        if self.domain_kind not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain_kind {self.domain_kind!r}")
        object.__setattr__(self, "domain", tuple(float(d) for d in self.domain))
        need = {"interval": 2, "slab": 2, "ball": 2, "half_space_truncation": 0}[self.domain_kind]
        if self.domain_kind in ("interval", "slab") and not self.domain:
            object.__setattr__(self, "domain", (self.x_min, self.x_max))
        if len(self.domain) != need:
            raise ValueError(f"{self.domain_kind} takes {need} domain parameters")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + np.arange(self.n) * self.h

    @property
    def points(self) -> np.ndarray:
        """All grid points: shape ``(n,)`` in 1-D, ``(n, n, 2)`` in 2-D."""
        x = self.nodes
        if self.dim == 1:
            return x
        X, Y = np.meshgrid(x, x, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def contains(self, x, margin: float = 0.0) -> np.ndarray:
        """Points at least ``margin`` inside the open domain."""
        x = np.asarray(x, dtype=float)
        k, d = self.domain_kind, self.domain
        x1 = x[..., 0] if self.dim == 2 else x
        if k in ("interval", "slab"):
            return (x1 > d[0] + margin) & (x1 < d[1] - margin)
        if k == "ball":
            r2 = (x1 - d[0]) ** 2 + (x[..., 1] ** 2 if self.dim == 2 else 0.0)
            return np.sqrt(r2) < d[1] - margin
        return x1 > margin

    @property
    def interior_mask(self) -> np.ndarray:
        # nodes that round onto the boundary count as boundary nodes
        return self.contains(self.points, 1e-9 * self.h)

    @property
    def freeze_right(self) -> bool:
        return self.domain_kind == "half_space_truncation"

    def index_of(self, x: float) -> int:
        """Index of the node at ``x``; raises when ``x`` is off-lattice."""
        j = (x - self.x_min) / self.h
        i = int(round(j))
        if abs(j - i) > 1e-9 or not 0 <= i < self.n:
            raise ValueError(f"{x} is not a grid node")
        return i

    def to_dict(self) -> dict[str, Any]:
        return {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "n": self.n,
            "domain_kind": self.domain_kind,
            "domain": list(self.domain),
            "dim": self.dim,
        }


def reflect_point(x, lam: float):
    """Mirror image across the plane ``{x_1 = lam}``."""
    if np.ndim(x) == 0:
        return 2.0 * lam - float(x)
    y = np.array(x, dtype=float, copy=True)
    y[..., 0] = 2.0 * lam - y[..., 0]
    return y if isinstance(x, np.ndarray) else tuple(float(v) for v in y)


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class HistoryField:
    """Uniformly sampled space-time field plus its past and exterior data.

    ``levels[j]`` holds ``u(., t_start + j dt)``.  ``prehistory(x, t)`` gives
    the field for ``t <= t_start`` everywhere and ``exterior(x, t)`` outside the
    interior for ``t > t_start``.
    """

    grid: SpaceGrid
    t_start: float
    dt: float
    levels: np.ndarray
    prehistory: Any
    exterior: Any

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        lv = np.array(self.levels, dtype=float)
        if lv.ndim == 1:
            lv = lv[None, :]
        if lv.shape[1] != self.grid.n:
            raise ValueError(f"level arrays need {self.grid.n} entries, got {lv.shape[1]}")
        lv.setflags(write=False)
        object.__setattr__(self, "levels", lv)

    @property
    def n_levels(self) -> int:
        return self.levels.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.n_levels) * self.dt

    def level_index(self, t: float) -> int:
        j = (t - self.t_start) / self.dt
        i = int(round(j))
        if abs(j - i) > 1e-8 * max(1.0, abs(j)) or not 0 <= i < self.n_levels:
            raise ValueError(f"t={t} is not a stored level")
        return i

    def trace(self, i: int):
        """Time trace at node ``i`` (samples plus prehistory descriptor)."""
        from .frac_time import TimeTrace

        x = float(self.grid.nodes[i])
        pre = self.prehistory
        desc = pre.at_point(x) if hasattr(pre, "at_point") else _CallableTrace(pre, x)
        return TimeTrace(self.t_start, self.dt, self.levels[:, i], desc)

    def spatial(self, j: int):
        """Spatial profile at level ``j`` with the matching exterior."""
        from .frac_space import SpatialField

        t = self.t_start + j * self.dt
        ext = self.exterior
        prof = ext.at_time(t) if hasattr(ext, "at_time") else _CallableProfile(ext, t)
        return SpatialField(self.grid, self.levels[j], prof)

    def with_levels(self, levels: np.ndarray) -> HistoryField:
        return HistoryField(self.grid, self.t_start, self.dt, levels, self.prehistory, self.exterior)

    def value(self, x: float, t: float) -> float:
        """Field value at any point: stored levels, prehistory, or exterior."""
        if t <= self.t_start:
            return float(self.prehistory(x, t))
        if not bool(self.grid.contains(x)):
            if not (self.grid.freeze_right and x > self.grid.x_max):
                return float(self.exterior(x, t))
        j = self.level_index(t)
        xc = min(x, self.grid.x_max)
        return float(np.interp(xc, self.grid.nodes, self.levels[j]))


@dataclass(frozen=True)
class _CallableTrace:
    fn: Callable
    x: float
    tail: Tail = Tail("bounded", INF)

    def __call__(self, t):
        return self.fn(self.x, t)

    def breakpoints(self):
        return ()


@dataclass(frozen=True)
class _CallableProfile:
    fn: Callable
    t: float
    tail: Tail = Tail("bounded", INF)

    def __call__(self, x):
        return self.fn(x, self.t)

    def breakpoints(self):
        return ()


@dataclass(frozen=True)
class AntisymmetricField:
    """``w(x, t) = u(x^lam, t) - u(x, t)`` sampled on the half-grid ``x <= lam``.

    ``levels[j][k]`` is ``w`` at ``nodes[k]``; the mirror values follow from
    ``w(x^lam) = -w(x)``.
    """

    lam: float
    nodes: np.ndarray
    t_start: float
    dt: float
    levels: np.ndarray

    def mirrored(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and values on both sides of the plane (level axis first)."""
        xs = 2.0 * self.lam - self.nodes[::-1]
        keep = xs > self.lam + 1e-12
        nodes = np.concatenate([self.nodes, xs[keep]])
        vals = np.concatenate([self.levels, -self.levels[:, ::-1][:, keep]], axis=1)
        return nodes, vals

    def antisymmetry_residual(self) -> float:
        """``max |w(x) + w(x^lam)|`` over the stored nodes, mirror side interpolated."""
        nodes, vals = self.mirrored()
        k = len(self.nodes)
        xr = np.clip(2.0 * self.lam - nodes[:k], nodes[0], nodes[-1])
        hi = np.clip(np.searchsorted(nodes, xr), 1, nodes.size - 1)
        lo = hi - 1
        t = (xr - nodes[lo]) / (nodes[hi] - nodes[lo])
        mirror = vals[:, lo] * (1.0 - t) + vals[:, hi] * t
        return float(np.max(np.abs(vals[:, :k] + mirror), initial=0.0))


def antisymmetric_difference(u: HistoryField, lam: float) -> AntisymmetricField:
    """``u(x^lam, t) - u(x, t)`` on the grid nodes with ``x_1 <= lam``.

    Reflected values come from the stored levels by linear interpolation, and
    from the exterior descriptor when the mirror point leaves the grid.
    """
    g = u.grid
    if g.dim != 1:
        raise NotImplementedError("antisymmetric_difference supports 1-D grids")
    if not (g.x_min <= lam <= g.x_max):
        raise ValueError(f"lambda={lam} lies outside the grid range [{g.x_min}, {g.x_max}]")
    x = g.nodes
    sel = x <= lam + 1e-12 * max(1.0, abs(lam))
    xs = x[sel]
    xr = 2.0 * lam - xs
    inside = xr <= g.x_max + 1e-12
    w = np.empty((u.n_levels, xs.size))
    times = u.times
    for j in range(u.n_levels):
        ur = np.interp(np.minimum(xr, g.x_max), x, u.levels[j])
        if not inside.all():
            if g.freeze_right:
                ur[~inside] = u.levels[j][-1]
            else:
                ur[~inside] = np.asarray(u.exterior(xr[~inside], times[j]), dtype=float)
        w[j] = ur - u.levels[j][sel]
    # exact zero on the plane itself
    on_plane = np.isclose(xs, lam, rtol=0.0, atol=1e-12 * max(1.0, abs(lam)))
    w[:, on_plane] = 0.0
    return AntisymmetricField(float(lam), xs, u.t_start, u.dt, w)


def growth_check(
    samples: Iterable[tuple[Any, float]], gamma: float, budget: float | None = None
) -> tuple[float, bool]:
    """Smallest ``C`` with ``value >= -C (1 + |x|^gamma)`` over the samples.

    ``satisfied`` is false only when ``budget`` is given and exceeded.
    """
    pts = list(samples)
    if not pts:
        raise ValueError("growth_check needs at least one sample")
    c_fit = 0.0
    for x, v in pts:
        r = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
        c_fit = max(c_fit, -float(v) / (1.0 + r**gamma))
    ok = True if budget is None else c_fit <= budget
    return c_fit, ok


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class Hypothesis:
    description: str
    residual: float
    satisfied: bool


@dataclass(frozen=True)
class Conclusion:
    description: str
    extremal_value: float
    verdict: str

    def __post_init__(self) -> None:
        if self.verdict not in ("holds", "violated", "inconclusive"):
            raise ValueError(f"bad verdict {self.verdict!r}")


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    hypotheses: tuple[Hypothesis, ...]
    conclusion: Conclusion
    artifacts: tuple[str, ...] = ()
    tolerance: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return self.conclusion.verdict

    @property
    def hypotheses_ok(self) -> bool:
        return all(h.satisfied for h in self.hypotheses)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "hypotheses": [
                {"description": h.description, "residual": _num(h.residual), "satisfied": h.satisfied}
                for h in self.hypotheses
            ],
            "conclusion": {
                "description": self.conclusion.description,
                "extremal_value": _num(self.conclusion.extremal_value),
                "verdict": self.conclusion.verdict,
            },
            "artifacts": list(self.artifacts),
            "tolerance": self.tolerance,
            "data": _jsonable(self.data),
        }


def _num(x: float) -> float | str:
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else ("-inf" if x < 0 else "nan"))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return _num(obj)
    return obj
