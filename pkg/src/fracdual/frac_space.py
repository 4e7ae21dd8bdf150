"""Fractional Laplacian on grid fields with analytic exterior data.

Pointwise values use the symmetrized integral

    (-Delta)^s u(x) = C_{1,s} int_0^inf (2u(x) - u(x+z) - u(x-z)) z^(-1-2s) dz,

which needs no principal value.  Near ``z = 0`` the integrand is replaced by
its Taylor term; beyond, the samples are interpolated piecewise linearly and
integrated exactly against the kernel (see :mod:`fracdual.quadrature`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np
from scipy import integrate

from .core import FracParams, FunctionDescriptor, SpaceGrid, laplacian_constant
from .kernels import gather_apply
from .quadrature import hat_weights, space_coefficients, space_tail

__all__ = [
    "SpaceQuadratureConfig",
    "SpatialField",
    "frac_laplacian",
    "frac_laplacian_field",
    "frac_laplacian_quad",
    "frac_laplacian_2d",
    "ball_constant",
    "barrier_phi",
    "barrier_h",
    "verify_ball_constancy",
    "BallConstancy",
    "slab_barrier_ratio",
]


@dataclass(frozen=True)
class SpaceQuadratureConfig:
    """Quadrature controls.

    ``z_max=None`` means 100 times the grid extent.  ``corrected`` toggles the
    second-order correction of the first weight.
    """

    inner_radius_factor: int = 1
    z_max: float | None = None
    boundary_refine: int = 16
    tail_mode: str = "constant_exact"
    corrected: bool = True

    def __post_init__(self) -> None:
        if int(self.inner_radius_factor) != self.inner_radius_factor or self.inner_radius_factor < 1:
            raise ValueError("inner_radius_factor must be an integer >= 1")
        if self.z_max is not None and not self.z_max > 0:
            raise ValueError("z_max must be positive")
        if int(self.boundary_refine) != self.boundary_refine or self.boundary_refine < 1:
            raise ValueError("boundary_refine must be an integer >= 1")
        if self.tail_mode not in ("constant_exact", "power_series"):
            raise ValueError(f"unknown tail_mode {self.tail_mode!r}")

    def far_cut(self, grid: SpaceGrid) -> float:
        extent = grid.x_max - grid.x_min
        z = 100.0 * extent if self.z_max is None else float(self.z_max)
        if not z > extent:
            raise ValueError(f"z_max={z} must exceed the grid extent {extent}")
        return z


@dataclass(frozen=True)
class SpatialField:
    """Grid values plus the exterior profile used off the grid.

    ``analytic`` (optional) is a descriptor for the whole field; when given,
    intervals near its breakpoints are re-integrated on a finer sub-grid.
    """

    grid: SpaceGrid
    values: np.ndarray
    exterior: Any
    analytic: Any = None

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size != self.grid.n:
            raise ValueError(f"expected {self.grid.n} values, got {v.size}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_descriptor(cls, grid: SpaceGrid, desc: Any, refine: bool = True) -> SpatialField:
        return cls(grid, np.asarray(desc(grid.nodes), dtype=float), desc, desc if refine else None)

    def value_at(self, x):
        """Field value anywhere on the line."""
        g = self.grid
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.exterior(x), dtype=float) * np.ones_like(x)
        inside = (x >= g.x_min) & (x <= g.x_max)
        out = np.where(inside, np.interp(x, g.nodes, self.values), out)
        if g.freeze_right:
            out = np.where(x > g.x_max, self.values[-1], out)
        return out


def _ext_tail(desc: Any):
    return getattr(desc, "tail", None)


def _side_constants(u: SpatialField) -> tuple[float | None, float | None, float, float]:
    """Constant far values on each side and where they start (``None`` if not constant)."""
    g = u.grid
    tail = _ext_tail(u.exterior)
    left = right = None
    lcut, rcut = g.x_min, g.x_max
    if tail is not None and tail.left_constant:
        left = float(tail.value)
        lcut = min(g.x_min, tail.cutoff)
    if g.freeze_right:
        right = float(u.values[-1])
    elif tail is not None and tail.right_constant:
        right = float(tail.right_value)
        rcut = max(g.x_max, tail.right_cutoff)
    return left, right, lcut, rcut


def _check_growth(u: SpatialField, s: float) -> None:
    tail = _ext_tail(u.exterior)
    if tail is not None and tail.kind == "power_growth" and tail.value >= 2.0 * s:
        raise ValueError(f"exterior grows like |x|^{tail.value}; the integral diverges for s={s}")


def _round_up(k: int, block: int = 256) -> int:
    return int(math.ceil(k / block) * block)


def _far_integral(fn, x: float, zc: float, p: float, sign: float) -> float:
    """``int_{zc}^inf fn(x + sign z) z^(-1-p) dz`` on a logarithmic grid."""
    total = 0.0
    a = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        while True:
            b = a + 1.0
            val, _ = integrate.quad(
                lambda y: float(fn(x + sign * zc * math.exp(y))) * (zc * math.exp(y)) ** (-p),
                a,
                b,
                limit=200,
            )
            total += val
            if zc ** (-p) * math.exp(-p * b) < 1e-13 or b > 400:
                break
            a = b
    return total


def frac_laplacian_field(
    u: SpatialField,
    params: FracParams,
    cfg: SpaceQuadratureConfig | None = None,
    nodes: np.ndarray | None = None,
) -> np.ndarray:
    """``(-Delta)^s u`` at the given node indices (default: all interior nodes)."""
    cfg = cfg or SpaceQuadratureConfig()
    g = u.grid
    if g.dim != 1:
        raise NotImplementedError("grid fields are one-dimensional; see frac_laplacian_2d")
    s = params.s
    _check_growth(u, s)
    idx = np.flatnonzero(g.interior_mask) if nodes is None else np.atleast_1d(np.asarray(nodes, dtype=int))
    if idx.size == 0:
        return np.zeros(0)
    if np.any((idx <= 0) | (idx >= g.n - 1)) and not g.freeze_right:
        raise ValueError("evaluation nodes need neighbours on both sides inside the grid")
    h = g.h
    z_max = cfg.far_cut(g)
    left, right, lcut, rcut = _side_constants(u)
    x = g.nodes[idx]
    K_far = int(math.ceil(z_max / h))
    exact = left is not None and right is not None
    if exact:
        # beyond this offset every sample is a known constant
        reach = max(np.max(x) - lcut, rcut - np.min(x))
        K = int(math.ceil(reach / h)) + 1
    else:
        K = K_far
    Kc = _round_up(K)
    c, total = space_coefficients(Kc, h, s, cfg.inner_radius_factor, cfg.corrected)
    R_K = float(space_tail(K, h, s, cfg.inner_radius_factor, total))

    # lattice values from x_min - K h to x_max + K h
    j = np.arange(-K, g.n + K)
    xe = g.x_min + j * h
    ext = np.empty(j.size)
    ext[K : K + g.n] = u.values
    lo, hi = j < 0, j >= g.n
    ext[lo] = np.asarray(u.exterior(xe[lo]), dtype=float) * np.ones(int(lo.sum()))
    if g.freeze_right:
        ext[hi] = u.values[-1]
    else:
        ext[hi] = np.asarray(u.exterior(xe[hi]), dtype=float) * np.ones(int(hi.sum()))
    pos = idx + K
    acc = gather_apply(ext, pos, c, K)

    ui = u.values[idx]
    p = 2.0 * s
    zc = K * h
    for side, const, sign in (("left", left, -1.0), ("right", right, 1.0)):
        if const is not None:
            acc += R_K * (ui - const)
        elif cfg.tail_mode == "power_series":
            fn = u.value_at
            for m, xi in enumerate(x):
                acc[m] += R_K * ui[m] - _far_integral(fn, xi, zc, p, sign)
        else:
            # bounded exteriors: far samples are treated as mean zero
            acc += R_K * ui

    if u.analytic is not None and cfg.boundary_refine > 1:
        acc += _refinement(u, idx, h, s, cfg, K)
    return laplacian_constant(1, s) * acc


def _refinement(u: SpatialField, idx: np.ndarray, h: float, s: float, cfg: SpaceQuadratureConfig, K: int) -> np.ndarray:
    """Swap coarse hat integrals near breakpoints for sub-grid ones."""
    fn = u.analytic
    bps = np.asarray(tuple(fn.breakpoints()), dtype=float)
    out = np.zeros(idx.size)
    if bps.size == 0:
        return out
    p = 2.0 * s
    m = int(cfg.boundary_refine)
    kappa = int(cfg.inner_radius_factor)
    scale = h ** (-p)
    sub = np.arange(m + 1) / m
    for n_, i in enumerate(idx):
        xi = u.grid.nodes[i]
        ui = u.values[i]
        for sign in (-1.0, 1.0):
            # offsets k such that [x + sign k h, x + sign (k+1) h] comes within h of a breakpoint
            d = sign * (bps - xi) / h
            ks = set()
            for dk in d:
                for k in range(int(math.floor(dk)) - 1, int(math.floor(dk)) + 2):
                    if kappa <= k < K:
                        ks.add(k)
            for k in sorted(ks):
                wa, wb = hat_weights(float(k), k + 1.0, p)
                coarse = wa * (ui - fn(xi + sign * k * h)) + wb * (ui - fn(xi + sign * (k + 1) * h))
                zs = k + sub
                a, b = hat_weights(zs[:-1], zs[1:], p)
                vals = ui - np.asarray(fn(xi + sign * zs * h), dtype=float)
                fine = float(np.sum(a * vals[:-1] + b * vals[1:]))
                out[n_] += scale * (fine - coarse)
    return out


def frac_laplacian(
    u: SpatialField, x: float, params: FracParams, cfg: SpaceQuadratureConfig | None = None
) -> float:
    """``(-Delta)^s u`` at the interior grid point with coordinate ``x``."""
    g = u.grid
    i = g.index_of(float(x))
    if i <= 0 or i >= g.n - 1:
        raise ValueError("x must be an interior grid node with neighbours on both sides")
    return float(frac_laplacian_field(u, params, cfg, nodes=np.array([i]))[0])


def frac_laplacian_quad(fn: Any, x: float, s: float, tol: float = 1e-11, z_cut: float | None = None) -> float:
    """Brute-force adaptive quadrature of the symmetrized integral of an analytic function.

    Independent of the lattice weights.  When ``fn`` has an eventually constant
    tail on both sides the far integral is closed exactly; otherwise it stops
    at ``z_cut`` and keeps only the ``2 u(x)`` part beyond.
    """
    p = 2.0 * s
    ux = float(fn(x))
    tail = getattr(fn, "tail", None)
    bps = [abs(b - x) for b in getattr(fn, "breakpoints", lambda: ())()]
    if tail is not None and tail.left_constant and tail.right_constant:
        zc = max(x - tail.cutoff, tail.right_cutoff - x, 1.0)
        far = (2.0 * ux - tail.value - tail.right_value) * zc ** (-p) / p
    else:
        zc = 200.0 if z_cut is None else z_cut
        far = 2.0 * ux * zc ** (-p) / p

    def g(z):
        return 2.0 * ux - float(fn(x + z)) - float(fn(x - z))

    cuts = sorted({b for b in bps if 0.0 < b < zc} | {zc})
    delta = min(0.5, cuts[0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        # below z_floor the second difference is cancellation noise; it is
        # frozen there (error of order z_floor^(4 - 2s))
        z_floor = 1e-4 * delta
        near, _ = integrate.quad(
            lambda z: g(max(z, z_floor)) / max(z, z_floor) ** 2, 0.0, delta, weight="alg", wvar=(1.0 - p, 0.0),
            epsabs=tol, epsrel=tol, limit=400,
        )
        total = near
        edges = [delta] + [c for c in cuts if c > delta]
        for a, b in zip(edges, edges[1:]):
            n = max(1, int(math.ceil((b - a) / 4.0)))
            for lo, hi in zip(np.linspace(a, b, n + 1), np.linspace(a, b, n + 1)[1:]):
                val, _ = integrate.quad(lambda z: g(z) * z ** (-1.0 - p), lo, hi, epsabs=tol, epsrel=tol, limit=400)
                total += val
    return laplacian_constant(1, s) * (total + far)


def frac_laplacian_2d(
    fn: Any,
    point,
    params: FracParams,
    h: float = 0.02,
    z_max: float = 50.0,
    n_theta: int = 32,
    cfg: SpaceQuadratureConfig | None = None,
) -> float:
    """``(-Delta)^s`` of a planar analytic function at ``point``.

    Directions ``theta`` in ``[0, pi)`` use the periodic trapezoid rule; each
    ray integral reuses the one-dimensional lattice weights with spacing ``h``.
    Only bounded functions are supported (gaussian and sine oracles).
    """
    cfg = cfg or SpaceQuadratureConfig()
    s = params.s
    fn2 = fn.in_two_dims() if hasattr(fn, "in_two_dims") else fn
    K = int(math.ceil(z_max / h))
    c, total = space_coefficients(_round_up(K), h, s, cfg.inner_radius_factor, cfg.corrected)
    R_K = float(space_tail(K, h, s, cfg.inner_radius_factor, total))
    x = np.asarray(point, dtype=float)
    ux = float(fn2(x))
    k = np.arange(1, K + 1)
    acc = 0.0
    for th in np.arange(n_theta) * math.pi / n_theta:
        e = np.array([math.cos(th), math.sin(th)])
        plus = np.asarray(fn2(x + (k * h)[:, None] * e), dtype=float)
        minus = np.asarray(fn2(x - (k * h)[:, None] * e), dtype=float)
        acc += float(np.dot(c[1 : K + 1], 2.0 * ux - plus - minus)) + 2.0 * ux * R_K
    acc *= math.pi / n_theta
    return laplacian_constant(2, s) * acc


# ---------------------------------------------------------------------------
# barriers


def ball_constant(s: float, n: int = 1) -> float:
    """``(-Delta)^s (1 - |x|^2)_+^s`` inside the unit ball (closed form)."""
    return 4.0**s * math.gamma(1.0 + s) * math.gamma(n / 2.0 + s) / math.gamma(n / 2.0)


def barrier_phi(x, x0, r: float, s: float):
    """``(1 - |x - x0|^2 / r^2)_+^s``."""
    if not r > 0:
        raise ValueError("r must be positive")
    d = np.asarray(x, dtype=float) - np.asarray(x0, dtype=float)
    r2 = np.sum(d * d, axis=-1) if d.ndim and np.ndim(x0) else d * d
    out = np.maximum(1.0 - r2 / r**2, 0.0) ** s
    return float(out) if np.ndim(out) == 0 else out


def barrier_h(x, lam: float, l: float, beta: float, s: float):
    """Slab barrier ``[(1 - (x_1 - (lam - l))^2 / l^2)_+^s + 1] (1 + |x'|^2)^(beta/2)``."""
    if not l > 0:
        raise ValueError("l must be positive")
    if not 0.0 < beta < 2.0 * s:
        raise ValueError("beta must lie in (0, 2s)")
    x = np.asarray(x, dtype=float)
    if x.ndim and x.shape[-1] >= 2:
        x1, rest = x[..., 0], np.sum(x[..., 1:] ** 2, axis=-1)
    else:
        x1, rest = x, 0.0
    bump = np.maximum(1.0 - (x1 - (lam - l)) ** 2 / l**2, 0.0) ** s + 1.0
    out = bump * (1.0 + rest) ** (beta / 2.0)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BallConstancy:
    mean: float
    rel_spread: float
    probes: tuple[float, ...]
    values: tuple[float, ...]
    scaled_means: dict = field(default_factory=dict)

    def __iter__(self) -> Iterator[float]:
        return iter((self.mean, self.rel_spread))


def _ball_values(r: float, params: FracParams, cfg: SpaceQuadratureConfig, h: float, x0: float = 0.0):
    s = params.s
    m = int(round(2 * r / h))
    grid = SpaceGrid(x0 - 2 * r, x0 + 2 * r, 2 * m + 1, "ball", (x0, r))
    desc = FunctionDescriptor("ball_barrier_phi", (x0, r, s))
    field_ = SpatialField.from_descriptor(grid, desc)
    probes = x0 + r * np.round(np.linspace(-0.8, 0.8, 9), 12)
    idx = np.array([grid.index_of(p) for p in probes])
    vals = frac_laplacian_field(field_, params, cfg, nodes=idx)
    return probes, vals


def verify_ball_constancy(
    r: float,
    params: FracParams,
    cfg: SpaceQuadratureConfig | None = None,
    h: float = 0.005,
    radii: tuple[float, ...] = (0.5, 1.0, 2.0),
) -> BallConstancy:
    """Spread of ``(-Delta)^s phi`` over ``|x - x0| <= 0.8 r`` and the radius scaling.

    ``scaled_means`` maps each radius in ``radii`` to ``mean(radius) * radius^(2s)``,
    which should not depend on the radius.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    cfg = cfg or SpaceQuadratureConfig()
    probes, vals = _ball_values(r, params, cfg, h)
    mean = float(np.mean(vals))
    spread = float((np.max(vals) - np.min(vals)) / mean)
    scaled = {}
    for rr in radii:
        _, v = _ball_values(rr, params, cfg, h)
        scaled[float(rr)] = float(np.mean(v)) * rr ** (2 * params.s)
    return BallConstancy(mean, spread, tuple(probes.tolist()), tuple(vals.tolist()), scaled)


def slab_barrier_ratio(
    lam: float, l: float, params: FracParams, cfg: SpaceQuadratureConfig | None = None, n_per_l: int = 100
) -> float:
    """Empirical ``inf (-Delta)^s h / (h l^(-2s))`` over the slab ``lam - 2l < x < lam`` (1-D)."""
    cfg = cfg or SpaceQuadratureConfig()
    s = params.s
    h = l / n_per_l
    a, b = lam - 4 * l, lam + 2 * l
    n = int(round((b - a) / h)) + 1
    grid = SpaceGrid(a, b, n, "slab", (lam - 2 * l, lam))
    desc = FunctionDescriptor("slab_barrier_h", (lam, l, s, s))
    field_ = SpatialField.from_descriptor(grid, desc)
    vals = frac_laplacian_field(field_, params, cfg)
    hv = field_.values[grid.interior_mask]
    return float(np.min(vals / (hv * l ** (-2 * s))))
