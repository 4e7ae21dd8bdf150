"""Time stepping for ``d_t^alpha u + (-Delta)^s u = f(u)`` on a truncated domain.

Each step solves

    (C_alpha a0 I + A) u^N = C_alpha (H + J) + f(u^{N-1}) + g(., t_N) - load(t_N)

where ``a0`` is the constant diagonal L1 weight, ``H`` the weighted sum of the
stored levels, ``J`` the kernel-weighted prehistory integral, ``A`` the dense
operator on interior nodes and ``load`` the exterior contribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import linalg

from .core import AntisymmetricField, FracParams, HistoryField, Reflected, Separable, SpaceGrid
from .frac_space import SpaceQuadratureConfig, frac_laplacian_field
from .frac_time import TimeQuadratureConfig, marchaud_levels, past_integral
from .kernels import history_sum, lattice_matrix
from .quadrature import hat_weights, marchaud_diagonal, space_coefficients, space_tail

__all__ = [
    "ReactionSpec",
    "SolveConfig",
    "OperatorMatrix",
    "FoldedOperator",
    "assemble_folded_operator",
    "half_lattice",
    "run_antisymmetric",
    "apply_operator",
    "odd_extension",
    "Problem",
    "IVPResult",
    "assemble_operator_matrix",
    "step",
    "run_ivp",
    "residual",
    "l1_tables",
    "initial_level",
]


@dataclass(frozen=True)
class ReactionSpec:
    """Reaction term ``f(u)``.

    * zero: ``0``;  affine ``(a, b)``: ``a + b u``
    * logistic_like ``(a,)``: ``a - u``;  cubic ``(a,)``: ``a u - u^3``
    """

    family: str = "zero"
    params: tuple[float, ...] = ()

    _NPAR = {"zero": 0, "affine": 2, "logistic_like": 1, "cubic": 1}

    def __post_init__(self) -> None:
        if self.family not in self._NPAR:
            raise ValueError(f"unknown reaction family {self.family!r}")
        p = tuple(float(v) for v in self.params)
        if len(p) != self._NPAR[self.family]:
            raise ValueError(f"{self.family} takes {self._NPAR[self.family]} params")
        object.__setattr__(self, "params", p)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        f, p = self.family, self.params
        if f == "zero":
            return np.zeros_like(u)
        if f == "affine":
            return p[0] + p[1] * u
        if f == "logistic_like":
            return p[0] - u
        return p[0] * u - u**3

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        f, p = self.family, self.params
        if f == "zero":
            return np.zeros_like(u)
        if f == "affine":
            return np.full_like(u, p[1])
        if f == "logistic_like":
            return np.full_like(u, -1.0)
        return p[0] - 3.0 * u**2

    def linear_part(self) -> tuple[float, float] | None:
        """``(a, b)`` when ``f(u) = a + b u``, else ``None``."""
        f, p = self.family, self.params
        if f == "zero":
            return 0.0, 0.0
        if f == "affine":
            return p[0], p[1]
        if f == "logistic_like":
            return p[0], -1.0
        return None

    @property
    def f0_nonneg(self) -> bool:
        return float(self(0.0)) >= 0.0

    @property
    def fprime0_nonpos(self) -> bool:
        return float(self.derivative(0.0)) <= 0.0

    @property
    def sup_fprime(self) -> float:
        f, p = self.family, self.params
        if f == "zero":
            return 0.0
        if f == "affine":
            return p[1]
        if f == "logistic_like":
            return -1.0
        return p[0]

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, "params": list(self.params)}


@dataclass(frozen=True)
class SolveConfig:
    """Stepping controls.

    ``implicit_linear`` moves the linear part of an affine reaction into the
    system matrix; the default keeps the whole reaction explicit.
    """

    dt: float
    n_steps: int
    time_quadrature: TimeQuadratureConfig = field(default_factory=TimeQuadratureConfig)
    space_quadrature: SpaceQuadratureConfig = field(default_factory=SpaceQuadratureConfig)
    linear_solver_tol: float = 1e-10
    implicit_linear: bool = False
    diagnostics_every: int = 10

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError("n_steps must be an integer >= 1")
        if not self.linear_solver_tol > 0:
            raise ValueError("linear_solver_tol must be positive")


# ---------------------------------------------------------------------------
# operator assembly


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense discrete operator restricted to the interior nodes.

    ``A @ u[interior] + load(...)`` reproduces the pointwise evaluator at the
    interior nodes.  ``c``/``total`` are the lattice weights (already scaled
    by ``h^-2s``, without the normalization constant ``scale``).
    """

    grid: SpaceGrid
    s: float
    A: np.ndarray
    interior: np.ndarray
    exterior: np.ndarray
    coupling: np.ndarray  # full-grid operator columns of the exterior nodes
    c: np.ndarray
    total: float
    scale: float
    z_max: float
    kappa: int = 1
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def tail_mass(self, k) -> np.ndarray:
        """``sum_{j > k} c[j]`` (without the normalization constant)."""
        return space_tail(k, self.grid.h, self.s, self.kappa, self.total)

    def load(self, profile: Any, values: np.ndarray) -> np.ndarray:
        """Exterior contribution at the interior nodes.

        ``values`` is the full grid array (exterior entries are used);
        ``profile`` gives the exterior beyond the grid ends.
        """
        out = self.coupling @ values[self.exterior] if self.exterior.size else np.zeros(self.interior.size)
        out = out + self._beyond(profile, side=-1)
        if not self.grid.freeze_right:
            out = out + self._beyond(profile, side=+1)
        return out

    def _beyond(self, profile: Any, side: int) -> np.ndarray:
        g = self.grid
        h = g.h
        tail = getattr(profile, "tail", None)
        dist = self.interior if side < 0 else (g.n - 1 - self.interior)
        if side < 0:
            const = tail is not None and tail.left_constant
            edge = g.x_min
            stop = tail.cutoff if const else None
            far_value = float(tail.value) if const else 0.0
        else:
            const = tail is not None and tail.right_constant
            edge = g.x_max
            stop = tail.right_cutoff if const else None
            far_value = float(tail.right_value) if const else 0.0
        if const:
            P = max(0, int(math.ceil(abs(edge - stop) / h)) + 1) if side * (stop - edge) > 0 else 0
        else:
            P = int(math.ceil(self.z_max / h))
        out = -far_value * self.tail_mass(dist + P)
        if P:
            q = np.arange(1, P + 1)
            v = np.asarray(profile(edge + side * q * h), dtype=float) * np.ones(P)
            key = (side, P)
            B = self._cache.get(key)
            if B is None:
                offs = dist[:, None] + q[None, :]
                B = self._weight(offs)
                self._cache[key] = B
            out = out - B @ v
        return self.scale * out

    def _weight(self, k: np.ndarray) -> np.ndarray:
        K = self.c.size - 1
        if np.max(k) <= K:
            return self.c[k]
        c_big, _ = space_coefficients(int(np.max(k)), self.grid.h, self.s, self.kappa)
        return c_big[k]


def assemble_operator_matrix(
    grid: SpaceGrid, params: FracParams, cfg: SpaceQuadratureConfig | None = None
) -> OperatorMatrix:
    """Dense interior matrix plus the exterior-load map for the lattice quadrature."""
    cfg = cfg or SpaceQuadratureConfig()
    if grid.dim != 1:
        raise NotImplementedError("the solver is one-dimensional")
    interior = np.flatnonzero(grid.interior_mask)
    if interior.size < 3:
        raise ValueError("the grid needs at least 3 interior nodes")
    exterior = np.flatnonzero(~grid.interior_mask)
    n = grid.n
    s = params.s
    c, total = space_coefficients(max(n, 2), grid.h, s, cfg.inner_radius_factor, cfg.corrected)
    c = np.array(c)
    C = params.c_ns if params.dim == 1 else FracParams(params.alpha, s).c_ns
    M = lattice_matrix(c, n)
    np.fill_diagonal(M, 2.0 * total)
    M *= C
    A = M[np.ix_(interior, interior)].copy()
    coupling = M[np.ix_(interior, exterior)].copy()
    if grid.freeze_right:
        # the far field past x_max repeats the last (interior) node
        if interior[-1] != n - 1:
            raise ValueError("half-space grids must end on an interior node")
        R = space_tail(n - 1 - interior, grid.h, s, cfg.inner_radius_factor, total)
        A[:, -1] -= C * R
    return OperatorMatrix(
        grid, s, A, interior, exterior, coupling, c, float(total), C, cfg.far_cut(grid), int(cfg.inner_radius_factor)
    )


@dataclass(frozen=True)
class FoldedOperator:
    """Discrete operator on fields odd about the plane ``x = lam``.

    ``grid`` is the half-lattice ending on the plane.  Mirror nodes carry the
    negated value, so the matrix entries are ``-c[|i-j|] + c[2m-i-j]`` and the
    diagonal gains ``c[2m-2i]``; the plane node itself is identically zero.
    """

    grid: SpaceGrid
    lam: float
    s: float
    A: np.ndarray
    interior: np.ndarray
    exterior: np.ndarray
    coupling: np.ndarray
    c: np.ndarray
    total: float
    scale: float
    z_max: float
    kappa: int = 1
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def m(self) -> int:
        return self.grid.n - 1

    def tail_mass(self, k) -> np.ndarray:
        return space_tail(k, self.grid.h, self.s, self.kappa, self.total)

    def load(self, profile: Any, values: np.ndarray) -> np.ndarray:
        out = self.coupling @ values[self.exterior] if self.exterior.size else np.zeros(self.interior.size)
        g = self.grid
        h = g.h
        tail = getattr(profile, "tail", None)
        i = self.interior
        mi = 2 * self.m - i
        const = tail is not None and tail.left_constant
        if const:
            P = max(0, int(math.ceil((g.x_min - tail.cutoff) / h)) + 1) if tail.cutoff < g.x_min else 0
            far_value = float(tail.value)
        else:
            P = int(math.ceil(self.z_max / h))
            far_value = 0.0
        beyond = -far_value * (self.tail_mass(i + P) - self.tail_mass(mi + P))
        if P:
            q = np.arange(1, P + 1)
            v = np.asarray(profile(g.x_min - q * h), dtype=float) * np.ones(P)
            B = self._cache.get(P)
            if B is None:
                B = self._weight(i[:, None] + q[None, :]) - self._weight(mi[:, None] + q[None, :])
                self._cache[P] = B
            beyond = beyond - B @ v
        return out + self.scale * beyond

    def _weight(self, k: np.ndarray) -> np.ndarray:
        if np.max(k) < self.c.size:
            return self.c[k]
        c_big, _ = space_coefficients(int(np.max(k)), self.grid.h, self.s, self.kappa)
        return c_big[k]


def half_lattice(lam: float, h: float, m: int, domain_kind: str = "interval", domain: tuple = ()) -> SpaceGrid:
    """``m + 1`` nodes with spacing ``h`` ending on the plane ``x = lam``."""
    if int(m) != m or m < 2:
        raise ValueError("m must be an integer >= 2")
    return SpaceGrid(lam - m * h, lam, int(m) + 1, domain_kind, domain)


def assemble_folded_operator(
    grid: SpaceGrid, params: FracParams, cfg: SpaceQuadratureConfig | None = None
) -> FoldedOperator:
    """Antisymmetric operator on a half-lattice whose last node is the plane."""
    cfg = cfg or SpaceQuadratureConfig()
    if grid.dim != 1 or grid.freeze_right:
        raise ValueError("the folded operator needs a plain 1-D half-lattice")
    n = grid.n
    m = n - 1
    lam = float(grid.x_max)
    mask = grid.interior_mask.copy()
    if bool(grid.contains(lam + 0.5 * grid.h)):
        raise ValueError("the domain must lie left of the plane")
    # the last node may round to just below lam
    mask[m] = False
    interior = np.flatnonzero(mask)
    if interior.size < 1:
        raise ValueError("the domain contains no half-lattice nodes")
    exterior = np.array([j for j in range(m) if not mask[j]], dtype=int)
    s = params.s
    c, total = space_coefficients(max(2 * m + 2, 2), grid.h, s, cfg.inner_radius_factor, cfg.corrected)
    c = np.array(c)
    C = params.c_ns
    idx = np.arange(n)
    M = lattice_matrix(c, n) + c[2 * m - idx[:, None] - idx[None, :]]
    M[idx, idx] = 2.0 * total + c[2 * m - 2 * idx]
    M *= C
    A = M[np.ix_(interior, interior)].copy()
    coupling = M[np.ix_(interior, exterior)].copy()
    return FoldedOperator(
        grid, lam, s, A, interior, exterior, coupling, c, float(total), C, cfg.far_cut(grid), int(cfg.inner_radius_factor)
    )


# ---------------------------------------------------------------------------
# stepping


def l1_tables(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """``beta[m]`` (m < n) and ``w_last[N]`` (N <= n) in units of ``dt^-alpha``."""
    beta = np.zeros(n + 1)
    wlast = np.zeros(n + 1)
    if n >= 1:
        k = np.arange(1, n + 1, dtype=float)
        wa, wb = hat_weights(k, k + 1.0, alpha)
        wbk = np.concatenate(([1.0 / (1.0 - alpha)], wb))
        beta[1:] = wa + wbk[:-1]
        wlast[1:] = wbk[:-1]
    return beta, wlast


def _profile(ext: Any, t: float):
    if hasattr(ext, "at_time"):
        return ext.at_time(t)
    from .core import _CallableProfile

    return _CallableProfile(ext, t)


def _past_term(prehistory: Any, x: np.ndarray, t_s: float, t: float, alpha: float, cfg: TimeQuadratureConfig) -> np.ndarray:
    if isinstance(prehistory, Separable):
        weights = np.asarray(prehistory.space(x), dtype=float) * np.ones(x.size)
        if not np.any(weights):
            return np.zeros(x.size)
        return weights * past_integral(prehistory.time, t_s, t, alpha, cfg)
    from .core import _CallableTrace

    return np.array([past_integral(_CallableTrace(prehistory, xi), t_s, t, alpha, cfg) for xi in x])


@dataclass
class _Stepper:
    """Factorized implicit system on a fixed set of unknown nodes.

    ``A`` is the discrete operator on the unknowns and ``x`` their
    coordinates; loads are supplied per step by the caller.
    """

    A: np.ndarray
    x: np.ndarray
    params: FracParams
    cfg: SolveConfig
    reaction: ReactionSpec
    source: Callable | None = None

    def __post_init__(self) -> None:
        alpha = self.params.alpha
        self.a0 = self.params.c_alpha * marchaud_diagonal(alpha) * self.cfg.dt ** (-alpha)
        lin = self.reaction.linear_part()
        self.implicit_b = lin[1] if (self.cfg.implicit_linear and lin is not None) else 0.0
        self.system = self.A + (self.a0 - self.implicit_b) * np.eye(self.A.shape[0])
        self.lu = linalg.lu_factor(self.system, check_finite=True)

    def advance(
        self, ubuf: np.ndarray, N: int, beta: np.ndarray, w_last: float, t_s: float, prehistory: Any, load: np.ndarray
    ) -> np.ndarray:
        """Unknown values at level ``N`` given levels ``0..N-1`` in ``ubuf``."""
        dt = self.cfg.dt
        alpha = self.params.alpha
        t_N = t_s + N * dt
        H = history_sum(ubuf[:N], N, beta, w_last) * dt ** (-alpha)
        J = _past_term(prehistory, self.x, t_s, t_N, alpha, self.cfg.time_quadrature)
        prev = ubuf[N - 1]
        fval = np.asarray(self.reaction(prev), dtype=float) - self.implicit_b * prev
        if not np.all(np.isfinite(fval)):
            raise FloatingPointError("reaction produced non-finite values")
        rhs = self.params.c_alpha * (H + J) + fval - load
        if self.source is not None:
            rhs = rhs + np.asarray(self.source(self.x, t_N), dtype=float)
        sol = linalg.lu_solve(self.lu, rhs)
        resid = float(np.max(np.abs(self.system @ sol - rhs), initial=0.0))
        if not np.all(np.isfinite(sol)) or resid > self.cfg.linear_solver_tol * max(1.0, float(np.max(np.abs(rhs)))):
            cond = float(np.linalg.cond(self.system))
            raise FloatingPointError(f"linear solve failed (residual {resid:.3e}, condition {cond:.3e})")
        return sol


def _grid_load(op: OperatorMatrix, exterior: Any, t: float, full: np.ndarray) -> np.ndarray:
    """Write exterior node values at time ``t`` into ``full`` and return the load."""
    g = op.grid
    if op.exterior.size:
        full[op.exterior] = np.asarray(exterior(g.nodes[op.exterior], t), dtype=float) * np.ones(op.exterior.size)
    return op.load(_profile(exterior, t), full)


def step(
    state: HistoryField,
    reaction: ReactionSpec,
    params: FracParams,
    cfg: SolveConfig,
    source: Callable | None = None,
    operator: OperatorMatrix | None = None,
) -> HistoryField:
    """Append one level to ``state``."""
    op = operator or assemble_operator_matrix(state.grid, params, cfg.space_quadrature)
    if abs(state.dt - cfg.dt) > 1e-14 * cfg.dt:
        raise ValueError("state.dt and cfg.dt differ")
    N = state.n_levels
    I = op.interior
    beta, wlast = l1_tables(N, params.alpha)
    st = _Stepper(op.A, state.grid.nodes[I], params, cfg, reaction, source)
    new = np.array(state.levels[-1])
    load = _grid_load(op, state.exterior, state.t_start + N * cfg.dt, new)
    new[I] = st.advance(state.levels[:, I], N, beta, wlast[N], state.t_start, state.prehistory, load)
    return state.with_levels(np.vstack([state.levels, new]))


@dataclass(frozen=True)
class Problem:
    """Everything needed for one trajectory."""

    params: FracParams
    grid: SpaceGrid
    solve: SolveConfig
    reaction: ReactionSpec = field(default_factory=ReactionSpec)
    prehistory: Any = field(default_factory=lambda: Separable.constant(0.0))
    exterior: Any = field(default_factory=lambda: Separable.constant(0.0))
    t_start: float = 0.0
    source: Callable | None = None


@dataclass(frozen=True)
class IVPResult:
    history: HistoryField
    diagnostics: dict


def initial_level(problem: Problem) -> np.ndarray:
    g = problem.grid
    u0 = np.asarray(problem.prehistory(g.nodes, problem.t_start), dtype=float) * np.ones(g.n)
    ext = ~g.interior_mask
    if ext.any():
        u0[ext] = np.asarray(problem.exterior(g.nodes[ext], problem.t_start), dtype=float) * np.ones(int(ext.sum()))
    return u0


def _diagnostics(ubuf: np.ndarray) -> dict:
    incs = np.max(np.abs(np.diff(ubuf, axis=0)), axis=1) if ubuf.shape[0] > 1 else np.zeros(0)
    return {
        "min": ubuf.min(axis=1).tolist(),
        "max": ubuf.max(axis=1).tolist(),
        "increment": incs.tolist(),
        "final_increment": float(incs[-1]) if incs.size else 0.0,
        "min_interior": float(ubuf[1:].min()) if ubuf.shape[0] > 1 else float(ubuf.min()),
    }


def run_ivp(problem: Problem, operator: OperatorMatrix | None = None) -> IVPResult:
    """March ``n_steps`` levels from the prehistory; returns the trajectory and diagnostics."""
    cfg = problem.solve
    g = problem.grid
    op = operator or assemble_operator_matrix(g, problem.params, cfg.space_quadrature)
    n = cfg.n_steps
    I = op.interior
    beta, wlast = l1_tables(n, problem.params.alpha)
    buf = np.zeros((n + 1, g.n))
    buf[0] = initial_level(problem)
    ubuf = np.zeros((n + 1, I.size))
    ubuf[0] = buf[0, I]
    st = _Stepper(op.A, g.nodes[I], problem.params, cfg, problem.reaction, problem.source)
    for N in range(1, n + 1):
        buf[N] = buf[N - 1]
        load = _grid_load(op, problem.exterior, problem.t_start + N * cfg.dt, buf[N])
        ubuf[N] = st.advance(ubuf, N, beta, wlast[N], problem.t_start, problem.prehistory, load)
        buf[N, I] = ubuf[N]
    hist = HistoryField(g, problem.t_start, cfg.dt, buf, problem.prehistory, problem.exterior)
    return IVPResult(hist, _diagnostics(ubuf))


def run_antisymmetric(problem: Problem, operator: FoldedOperator | None = None) -> tuple[AntisymmetricField, dict]:
    """March an odd-about-the-plane problem posed on a half-lattice.

    ``problem.grid`` must end on the plane; its domain marks the unknown
    nodes and ``exterior`` gives the data on the remaining half-line.
    """
    op = operator or assemble_folded_operator(problem.grid, problem.params, problem.solve.space_quadrature)
    res = run_ivp(problem, operator=op)
    levels = np.array(res.history.levels)
    levels[:, -1] = 0.0
    h = res.history
    return AntisymmetricField(op.lam, h.grid.nodes, h.t_start, h.dt, levels), res.diagnostics


def apply_operator(
    traj: HistoryField,
    params: FracParams,
    time_cfg: TimeQuadratureConfig | None = None,
    space_cfg: SpaceQuadratureConfig | None = None,
    nodes: np.ndarray | None = None,
    levels: np.ndarray | None = None,
) -> np.ndarray:
    """``d_t^alpha u + (-Delta)^s u`` from the standalone evaluators.

    Defaults: interior nodes, levels ``1..``.  Shape ``(len(levels), len(nodes))``.
    """
    if traj.n_levels < 2:
        raise ValueError("the operator needs at least two levels")
    g = traj.grid
    idx = np.flatnonzero(g.interior_mask) if nodes is None else np.asarray(nodes, dtype=int)
    lv = np.arange(1, traj.n_levels) if levels is None else np.asarray(levels, dtype=int)
    if lv.size and (lv.min() < 1 or lv.max() >= traj.n_levels):
        raise ValueError("levels must lie in 1..n_levels-1")
    out = np.empty((lv.size, idx.size))
    if lv.size == 0:
        return out
    first = int(lv.min())
    for k, i in enumerate(idx):
        vals = marchaud_levels(traj.trace(int(i)), params, time_cfg, start=first)
        out[:, k] = vals[lv - first]
    for r, j in enumerate(lv):
        out[r] += frac_laplacian_field(traj.spatial(int(j)), params, space_cfg, nodes=idx)
    return out


def odd_extension(half: HistoryField) -> HistoryField:
    """Field ``u`` on the full symmetric lattice whose antisymmetric difference is ``half``.

    ``half`` lives on a half-lattice ending on the plane ``lam = x_max`` (as
    produced by :func:`run_antisymmetric`).  With ``u = -w/2`` left of the plane
    and ``u(x^lam) = w(x)/2``, ``u(x^lam) - u(x) = w(x)``.
    """
    g = half.grid
    lam = g.x_max
    m = g.n - 1
    full = SpaceGrid(g.x_min, 2.0 * lam - g.x_min, 2 * m + 1, "interval", (g.x_min, 2.0 * lam - g.x_min))
    W = np.array(half.levels)
    W[:, -1] = 0.0
    levels = np.concatenate([-0.5 * W, 0.5 * W[:, m - 1 :: -1]], axis=1)
    return HistoryField(full, half.t_start, half.dt, levels, _odd(half.prehistory, lam), _odd(half.exterior, lam))


def _odd(desc: Any, lam: float) -> Any:
    if isinstance(desc, Separable):
        return Separable(Reflected(desc.space, lam, -0.5), desc.time)

    def fn(x, t):
        x = np.asarray(x, dtype=float)
        left = -0.5 * np.asarray(desc(np.minimum(x, lam), t), dtype=float)
        right = 0.5 * np.asarray(desc(np.minimum(2.0 * lam - x, lam), t), dtype=float)
        return np.where(x < lam, left, np.where(x > lam, right, 0.0))

    return fn


def residual(
    traj: HistoryField,
    reaction: ReactionSpec,
    params: FracParams,
    time_cfg: TimeQuadratureConfig | None = None,
    space_cfg: SpaceQuadratureConfig | None = None,
    source: Callable | None = None,
    levels: np.ndarray | None = None,
) -> np.ndarray:
    """PDE residual at interior nodes and levels ``1..`` via the standalone evaluators.

    Returns an array of shape ``(n_levels - 1, n_interior)`` (or for the
    requested ``levels``).
    """
    if traj.n_levels < 2:
        raise ValueError("residual needs at least two levels")
    g = traj.grid
    I = np.flatnonzero(g.interior_mask)
    lv = np.arange(1, traj.n_levels) if levels is None else np.asarray(levels, dtype=int)
    out = apply_operator(traj, params, time_cfg, space_cfg, I, lv)
    for r, j in enumerate(lv):
        out[r] -= np.asarray(reaction(traj.levels[j, I]), dtype=float)
        if source is not None:
            out[r] -= np.asarray(source(g.nodes[I], traj.t_start + j * traj.dt), dtype=float)
    return out

