"""Numerical checkers and experiments for the sign-propagation theorems.

Every checker first tests the hypotheses of the statement it mirrors and only
then the conclusion.  A failed hypothesis makes the verdict ``inconclusive``:
the checkers test theorems, they do not classify arbitrary fields.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate

from .core import (
    ExperimentReport,
    FracParams,
    FunctionDescriptor,
    Hypothesis,
    Conclusion,
    HistoryField,
    Separable,
    SpaceGrid,
    antisymmetric_difference,
    growth_check,
    laplacian_constant,
)
from .frac_space import SpaceQuadratureConfig, ball_constant, barrier_phi, slab_barrier_ratio
from .frac_time import TimeQuadratureConfig, TimeTrace, check_cutoff_bound, counterexample_trace, marchaud_levels
from .solver import (
    Problem,
    ReactionSpec,
    SolveConfig,
    _grid_load,
    apply_operator,
    assemble_folded_operator,
    half_lattice,
    odd_extension,
    run_antisymmetric,
    run_ivp,
)

__all__ = [
    "PrincipleTolerance",
    "check_max_principle",
    "check_antisym_max_principle",
    "narrow_region_experiment",
    "averaging_effect_experiment",
    "antisym_averaging_experiment",
    "moving_plane_scan",
    "counterexample_field",
    "counterexample_experiment",
    "kernel_integral",
    "antisymmetric_kernel_integral",
    "antisymmetric_barrier",
    "random_max_principle_problem",
    "random_antisymmetric_problem",
    "moving_plane_problem",
    "static_history",
    "planted_dip_profile",
    "appendix_tables",
]


@dataclass(frozen=True)
class PrincipleTolerance:
    """Slack for hypothesis inequalities and the allowed undershoot below zero."""

    hypothesis_tol: float = 1e-6
    conclusion_tol: float = 1e-8

    def __post_init__(self) -> None:
        if not (self.hypothesis_tol > 0 and self.conclusion_tol > 0):
            raise ValueError("tolerances must be positive")


# ---------------------------------------------------------------------------
# shared helpers

_PAST_OFFSETS = np.concatenate(([0.0], np.geomspace(1e-3, 1e4, 96)))


def _verdict(hyps: Sequence[Hypothesis], extremal: float, tol: float) -> str:
    if not all(h.satisfied for h in hyps):
        return "inconclusive"
    return "holds" if extremal >= -tol else "violated"


def _window_levels(traj: HistoryField, window: tuple[float, float]) -> np.ndarray:
    t1, t2 = map(float, window)
    times = traj.times
    eps = 1e-9 * traj.dt
    if not t1 < t2:
        raise ValueError("window must satisfy t1 < t2")
    if t1 < traj.t_start - eps or t2 > times[-1] + eps:
        raise ValueError(f"window ({t1}, {t2}] is not covered by the trajectory [{traj.t_start}, {times[-1]}]")
    sel = np.flatnonzero((times > t1 + eps) & (times <= t2 + eps))
    if sel.size == 0:
        raise ValueError("no stored level falls in the window")
    return sel


def _past_min(pre: Any, x: np.ndarray, t_end: float) -> float:
    """Smallest sampled prehistory value at ``x`` for times ``<= t_end``."""
    if x.size == 0:
        return math.inf
    ts = t_end - _PAST_OFFSETS
    if isinstance(pre, Separable):
        bps = [b for b in getattr(pre.time, "breakpoints", lambda: ())() if b <= t_end]
        ts = np.concatenate([ts, bps])
    vals = np.asarray(pre(x[:, None], ts[None, :]), dtype=float)
    out = float(np.min(vals))
    if isinstance(pre, Separable):
        tail = getattr(pre.time, "tail", None)
        if tail is not None and tail.left_constant:
            out = min(out, float(np.min(np.asarray(pre.space(x), dtype=float) * tail.value)))
    return out


def _beyond_points(grid: SpaceGrid, cfg: SpaceQuadratureConfig) -> tuple[np.ndarray, np.ndarray]:
    d = np.geomspace(grid.h, cfg.far_cut(grid), 48)
    right = np.zeros(0) if grid.freeze_right else grid.x_max + d
    return grid.x_min - d, right


def _subsample(levels: np.ndarray, k: int = 32) -> np.ndarray:
    if levels.size <= k:
        return levels
    return levels[np.unique(np.linspace(0, levels.size - 1, k).round().astype(int))]


# ---------------------------------------------------------------------------
# bounded-domain maximum principles


def check_max_principle(
    traj: HistoryField,
    window: tuple[float, float],
    tol: PrincipleTolerance | None = None,
    *,
    params: FracParams,
    time_cfg: TimeQuadratureConfig | None = None,
    space_cfg: SpaceQuadratureConfig | None = None,
) -> ExperimentReport:
    """Sign check for ``d_t^alpha u + (-Delta)^s u >= 0`` on a bounded domain.

    Hypotheses: the operator inequality on ``Omega x (t1, t2]``, ``u >= 0``
    outside ``Omega`` during the window and ``u >= 0`` on ``Omega`` up to
    ``t1``.  Conclusion: ``u >= 0`` on ``Omega x (t1, t2]``.
    """
    tol = tol or PrincipleTolerance()
    space_cfg = space_cfg or SpaceQuadratureConfig()
    g = traj.grid
    lv = _window_levels(traj, window)
    interior = np.flatnonzero(g.interior_mask)
    outside = np.flatnonzero(~g.interior_mask)
    times = traj.times

    op = apply_operator(traj, params, time_cfg, space_cfg, interior, lv)
    op_min = float(op.min()) if op.size else 0.0

    ext_min = math.inf
    if outside.size:
        ext_min = float(traj.levels[np.ix_(lv, outside)].min())
    left, right = _beyond_points(g, space_cfg)
    pts = np.concatenate([left, right])
    for j in _subsample(lv):
        ext_min = min(ext_min, float(np.min(np.asarray(traj.exterior(pts, times[j]), dtype=float))))

    t1 = float(window[0])
    x_in = g.nodes[interior]
    pre_min = _past_min(traj.prehistory, x_in, min(t1, traj.t_start))
    early = np.flatnonzero(times <= t1 + 1e-9 * traj.dt)
    if early.size:
        pre_min = min(pre_min, float(traj.levels[np.ix_(early, interior)].min()))

    hyps = (
        Hypothesis("operator inequality d_t^a u + (-Delta)^s u >= 0 in Omega x window", op_min, op_min >= -tol.hypothesis_tol),
        Hypothesis("u >= 0 outside Omega during the window", ext_min, ext_min >= -tol.hypothesis_tol),
        Hypothesis("u >= 0 in Omega for t <= t1", pre_min, pre_min >= -tol.hypothesis_tol),
    )
    block = traj.levels[np.ix_(lv, interior)]
    k = np.unravel_index(int(np.argmin(block)), block.shape)
    u_min = float(block[k])
    verdict = _verdict(hyps, u_min, tol.conclusion_tol)
    data = {
        "min_u": u_min,
        "argmin_x": float(x_in[k[1]]),
        "argmin_t": float(times[lv[k[0]]]),
        "argmin_level": int(lv[k[0]]),
        "min_operator": op_min,
        "window": [float(window[0]), float(window[1])],
    }
    return ExperimentReport(
        "max_principle",
        hyps,
        Conclusion("u >= 0 in Omega x (t1, t2]", u_min, verdict),
        tolerance=tol.conclusion_tol,
        data=data,
    )


def _reflection_index(grid: SpaceGrid, lam: float) -> int:
    k = 2.0 * (lam - grid.x_min) / grid.h
    kr = int(round(k))
    if abs(k - kr) > 1e-8 * max(1.0, abs(k)):
        raise ValueError(f"lambda={lam} is not reflection-compatible with the grid (2 lambda must sit on the lattice)")
    return kr


def check_antisym_max_principle(
    traj: HistoryField,
    lam: float,
    window: tuple[float, float],
    tol: PrincipleTolerance | None = None,
    *,
    params: FracParams,
    time_cfg: TimeQuadratureConfig | None = None,
    space_cfg: SpaceQuadratureConfig | None = None,
    region: Callable | None = None,
    reaction: ReactionSpec | None = None,
    c0: float | None = None,
    gamma: float | None = None,
) -> ExperimentReport:
    """Sign check for ``w = u(x^lam, t) - u(x, t)`` on ``Omega`` inside ``x < lam``.

    Without ``reaction`` the operator hypothesis is ``L w >= 0``.  With a
    reaction the equation ``L w = c w`` is checked instead, where ``c`` is the
    difference quotient ``(f(u_lam) - f(u)) / w`` (taken where ``|w| > tol``);
    ``c0`` then adds the coefficient bound ``c <= c0`` and ``gamma`` records the
    growth constant of ``w``.  ``region(x)`` selects ``Omega`` (default: the
    grid interior left of the plane).
    """
    tol = tol or PrincipleTolerance()
    space_cfg = space_cfg or SpaceQuadratureConfig()
    g = traj.grid
    k = _reflection_index(g, lam)
    x = g.nodes
    left = x < lam - 1e-12 * max(1.0, abs(lam))
    mask = (np.asarray(region(x), dtype=bool) if region is not None else g.interior_mask) & left
    omega = np.flatnonzero(mask)
    if omega.size == 0:
        raise ValueError("Omega has no nodes left of the plane")
    mirror = k - omega
    if mirror.max() > g.n - 1 or mirror.min() < 0:
        raise ValueError("the reflection of Omega leaves the grid")
    lv = _window_levels(traj, window)
    times = traj.times
    w = antisymmetric_difference(traj, lam)
    wl = w.levels  # columns follow the grid nodes with x <= lam

    Lu = apply_operator(traj, params, time_cfg, space_cfg, np.concatenate([omega, mirror]), lv)
    Lw = Lu[:, omega.size :] - Lu[:, : omega.size]
    w_win = wl[np.ix_(lv, omega)]
    hyps = []
    coef_max = None
    if reaction is None:
        op_val = float(Lw.min())
        hyps.append(Hypothesis("operator inequality L w >= 0 in Omega x window", op_val, op_val >= -tol.hypothesis_tol))
    else:
        u = traj.levels[np.ix_(lv, omega)]
        ur = traj.levels[np.ix_(lv, mirror)]
        df = np.asarray(reaction(ur), dtype=float) - np.asarray(reaction(u), dtype=float)
        op_val = float(np.max(np.abs(Lw - df)))
        hyps.append(Hypothesis("equation L w = c w in Omega x window", op_val, op_val <= tol.hypothesis_tol))
        big = np.abs(w_win) > tol.hypothesis_tol
        coef_max = float(np.max(df[big] / w_win[big])) if big.any() else -math.inf
        if c0 is not None:
            hyps.append(Hypothesis(f"coefficient bound c <= c0 = {c0}", coef_max, coef_max <= c0))

    # exterior part of the half-space: lattice nodes plus points beyond the grid
    rest = np.flatnonzero(left & ~mask)
    ext_min = float(wl[np.ix_(lv, rest)].min()) if rest.size else math.inf
    d = np.geomspace(g.h, space_cfg.far_cut(g), 48)
    xs = g.x_min - d
    for j in _subsample(lv):
        prof = traj.spatial(int(j))
        vals = prof.value_at(2.0 * lam - xs) - prof.value_at(xs)
        ext_min = min(ext_min, float(vals.min()))
    hyps.append(Hypothesis("w >= 0 on the half-space outside Omega", ext_min, ext_min >= -tol.hypothesis_tol))

    t1 = float(window[0])
    tp = min(t1, traj.t_start)
    xo = x[omega]
    ts = tp - _PAST_OFFSETS
    pre = traj.prehistory
    pre_vals = np.asarray(pre((2.0 * lam - xo)[:, None], ts[None, :]), dtype=float) - np.asarray(
        pre(xo[:, None], ts[None, :]), dtype=float
    )
    pre_min = float(pre_vals.min())
    early = np.flatnonzero(times <= t1 + 1e-9 * traj.dt)
    if early.size:
        pre_min = min(pre_min, float(wl[np.ix_(early, omega)].min()))
    hyps.append(Hypothesis("w >= 0 in Omega for t <= t1", pre_min, pre_min >= -tol.hypothesis_tol))

    anti = dataclasses.replace(w, levels=wl[lv])
    anti_res = anti.antisymmetry_residual()
    hyps.append(Hypothesis("w(x^lam) = -w(x)", anti_res, anti_res <= 1e-12))

    growth = None
    if gamma is not None:
        samples = [(float(xi), float(v)) for xi, v in zip(xo, w_win.min(axis=0))]
        growth, _ = growth_check(samples, gamma)

    kk = np.unravel_index(int(np.argmin(w_win)), w_win.shape)
    w_min = float(w_win[kk])
    verdict = _verdict(hyps, w_min, tol.conclusion_tol)
    data = {
        "lambda": float(lam),
        "min_w": w_min,
        "argmin_x": float(xo[kk[1]]),
        "argmin_t": float(times[lv[kk[0]]]),
        "operator_check": op_val,
        "coefficient_max": coef_max,
        "c0": c0,
        "growth_constant": growth,
    }
    return ExperimentReport(
        "antisym_max_principle",
        tuple(hyps),
        Conclusion("w >= 0 in Omega x (t1, t2]", w_min, verdict),
        tolerance=tol.conclusion_tol,
        data=data,
    )


# ---------------------------------------------------------------------------
# counterexample without a prehistory condition


def counterexample_field(R: float = 100.0, n_grid: int = 200, nodes: int = 21) -> HistoryField:
    """Space-independent field ``sin t`` on ``(0, 2 pi]`` with past ``max(t, -R)``."""
    grid = SpaceGrid(-1.0, 1.0, nodes, "interval", (-1.0, 1.0))
    dt = 2.0 * math.pi / n_grid
    t = np.arange(n_grid + 1) * dt
    levels = np.repeat(np.sin(t)[:, None], nodes, axis=1)
    data = Separable(FunctionDescriptor.constant(1.0), counterexample_trace(R))
    return HistoryField(grid, 0.0, dt, levels, data, data)


def counterexample_experiment(
    params: FracParams,
    R: float = 100.0,
    n_grid: int = 200,
    tol: PrincipleTolerance | None = None,
    R_sweep: Sequence[float] = (10.0, 100.0, 1000.0),
    time_cfg: TimeQuadratureConfig | None = None,
) -> ExperimentReport:
    """A nonnegative time derivative with a sign change, because the past is negative.

    The time derivative is evaluated with the L1 evaluator on ``n_grid``
    points of ``(0, 2 pi]``; the maximum-principle check then reports which
    hypothesis fails.
    """
    tol = tol or PrincipleTolerance()
    field_ = counterexample_field(R, n_grid)
    report = check_max_principle(field_, (0.0, 2.0 * math.pi), tol, params=params, time_cfg=time_cfg)
    trace = TimeTrace(0.0, field_.dt, field_.levels[:, 0], counterexample_trace(R))
    d = marchaud_levels(trace, params, time_cfg, start=1)
    sweep = {}
    for RR in R_sweep:
        tr = TimeTrace(0.0, field_.dt, field_.levels[:, 0], counterexample_trace(RR))
        sweep[float(RR)] = float(marchaud_levels(tr, params, time_cfg, start=1).min())
    times = field_.times[1:]
    u = field_.levels[1:, 0]
    j = int(np.argmin(u))
    data = dict(report.data)
    data.update(
        {
            "R": float(R),
            "min_dalpha": float(d.min()),
            "argmin_dalpha_t": float(times[int(np.argmin(d))]),
            "dalpha_nonneg": bool(d.min() >= -tol.hypothesis_tol),
            "min_u_time": float(times[j]),
            "min_u_level": int(j + 1),
            "min_dalpha_by_R": sweep,
            "series_t": times.tolist(),
            "series_dalpha": d.tolist(),
            "series_u": u.tolist(),
        }
    )
    return dataclasses.replace(report, name="counterexample", data=data)


# ---------------------------------------------------------------------------
# narrow region


class _Oscillation:
    """Time factor ``1 + amp sin(t - t0)``."""

    def __init__(self, t0: float, amp: float) -> None:
        self.t0, self.amp = float(t0), float(amp)

    def __call__(self, t):
        return 1.0 + self.amp * np.sin(np.asarray(t, dtype=float) - self.t0)


def _narrow_instance(
    l: float,
    lam: float,
    c_field: Any,
    params: FracParams,
    n_per_l: int,
    dt: float,
    n_steps: int,
    amp: float,
) -> dict:
    h = l / n_per_l
    m = 3 * n_per_l
    grid = half_lattice(lam, h, m, "slab", (lam - 2.0 * l, lam))
    fold = assemble_folded_operator(grid, params)
    xu = grid.nodes[fold.interior]
    c = np.asarray(c_field(xu), dtype=float) * np.ones(xu.size)
    if not np.all(np.isfinite(c)):
        raise ValueError("c_field must be finite on the slab")
    A = fold.A - np.diag(c)
    op = dataclasses.replace(fold, A=A, _cache={})
    # discrete narrowness: the shifted operator is an M-matrix
    eig = float(np.linalg.eigvalsh(0.5 * (fold.A + fold.A.T)).min())
    exterior = Separable(FunctionDescriptor.constant(1.0), _Oscillation(0.0, amp))
    full = np.zeros(grid.n)
    load = _grid_load(op, exterior, 0.0, full)
    w_star = np.linalg.solve(A, -load)
    pre_space = FunctionDescriptor("tabulated", tuple(v for pair in zip(xu, w_star) for v in pair))
    prehistory = Separable(pre_space)
    problem = Problem(params, grid, SolveConfig(dt, n_steps), ReactionSpec(), prehistory, exterior, 0.0)
    wfield, diag = run_antisymmetric(problem, operator=op)
    wu = wfield.levels[:, fold.interior]
    return {
        "l": float(l),
        "min_w": float(min(wu.min(), w_star.min())),
        "min_w_steady": float(w_star.min()),
        "sup_c": float(c.max()),
        "lowest_eigenvalue": eig,
        "narrow": bool(eig > c.max()),
        "nodes": int(xu.size),
    }


def narrow_region_experiment(
    l: float,
    lam: float,
    c_field: Any,
    tol: PrincipleTolerance | None = None,
    *,
    params: FracParams | None = None,
    l_sweep: Sequence[float] = (),
    n_per_l: int = 20,
    dt: float = 0.05,
    n_steps: int = 60,
    amplitude: float = 0.5,
    gamma: float | None = None,
) -> ExperimentReport:
    """Antisymmetric solutions of ``L w = c w`` on the slab ``lam - 2l < x < lam``.

    The data outside the slab is ``1 + amplitude sin t`` (nonnegative).  The
    past is the steady solution for the initial data, so ``w`` is an entire
    solution.  The narrowness hypothesis is made concrete as: the lowest
    eigenvalue of the discrete slab operator exceeds ``sup c``.
    """
    tol = tol or PrincipleTolerance()
    params = params or FracParams(0.5, 0.5)
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError("amplitude must lie in [0, 1] to keep the data nonnegative")
    if not l > 0:
        raise ValueError("l must be positive")
    ls = sorted({float(l), *map(float, l_sweep)}, reverse=True)
    rows = [_narrow_instance(v, lam, c_field, params, n_per_l, dt, n_steps, amplitude) for v in ls]
    for r in rows:
        r["holds"] = bool(r["min_w"] >= -tol.conclusion_tol)
    l_star = None
    for r in sorted(rows, key=lambda r: r["l"]):
        if not r["holds"]:
            break
        l_star = r["l"]
    main = next(r for r in rows if r["l"] == float(l))
    ratio = slab_barrier_ratio(lam, float(l), params, n_per_l=50)
    sup_c = main["sup_c"]
    hyps = [
        Hypothesis("c bounded above on the slab", sup_c, math.isfinite(sup_c)),
        Hypothesis("narrow: lowest slab eigenvalue > sup c", main["lowest_eigenvalue"] - sup_c, main["narrow"]),
        Hypothesis("exterior data >= 0", 1.0 - amplitude, amplitude <= 1.0),
    ]
    if gamma is not None:
        c_fit, _ = growth_check([(lam - float(l), main["min_w"])], gamma)
        hyps.append(Hypothesis(f"growth w >= -C (1 + |x|^{gamma})", c_fit, True))
    verdict = _verdict(hyps, main["min_w"], tol.conclusion_tol)
    data = {
        "l": float(l),
        "lambda": float(lam),
        "rows": rows,
        "l_star": l_star,
        "barrier_ratio": ratio,
        "predicted_l": (ratio / sup_c) ** (1.0 / (2.0 * params.s)) if sup_c > 0 else math.inf,
    }
    return ExperimentReport(
        "narrow_region",
        tuple(hyps),
        Conclusion("w >= 0 on the slab for all times", main["min_w"], verdict),
        tolerance=tol.conclusion_tol,
        data=data,
    )


# ---------------------------------------------------------------------------
# averaging effects


def kernel_integral(x: float, D: tuple[float, float], s: float, C0: float = 1.0, n: int = 1) -> float:
    """``C_{1,s} C0 int_D |x - y|^(-1-2s) dy`` by adaptive quadrature (1-D, ``x`` outside ``D``)."""
    a, b = D
    if a <= x <= b:
        raise ValueError("x must lie outside D")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda y: abs(x - y) ** (-1.0 - 2.0 * s), a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
    return laplacian_constant(n, s) * C0 * val


def antisymmetric_kernel_integral(x: float, D: tuple[float, float], lam: float, s: float, C0: float = 1.0) -> float:
    """``C_{1,s} C0 int_D (|x - y|^(-1-2s) - |x - y^lam|^(-1-2s)) dy``."""
    a, b = D
    p = 1.0 + 2.0 * s

    def f(y):
        return abs(x - y) ** (-p) - abs(x - (2.0 * lam - y)) ** (-p)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
    return laplacian_constant(1, s) * C0 * val


def antisymmetric_barrier(x, x0: float, r: float, s: float, lam: float):
    """``phi(x) - phi(x^lam)``: odd about the plane ``x = lam``."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(barrier_phi(x, x0, r, s)) - np.asarray(barrier_phi(2.0 * lam - x, x0, r, s))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _cutoff_sup(alpha: float) -> float:
    return check_cutoff_bound(FracParams(alpha, 0.5)).sup_abs


def _subsolution_constant(params: FracParams) -> float:
    """``C`` with ``L(phi eta_r) <= C / r^(2s)`` on the ball cylinder (unit-radius constants)."""
    return ball_constant(params.s) + 2.0**params.alpha * _cutoff_sup(params.alpha)


def _ball_inf(fn: Callable[[float], float], x0: float, r: float) -> float:
    xs = np.linspace(x0 - r, x0 + r, 101)
    return float(min(fn(float(v)) for v in xs))


def _averaging_geometry(D, x0: float, r: float) -> tuple[float, float]:
    a, b = map(float, D)
    if not a < b:
        raise ValueError("D must be a nonempty interval (a, b)")
    if not r > 0:
        raise ValueError("r must be positive")
    gap = max(a - x0, x0 - b)
    if not gap > r:
        raise ValueError("the ball B_r(x0) must not meet the closure of D")
    return a, b


def _averaging_run(
    grid: SpaceGrid,
    params: FracParams,
    D: tuple[float, float],
    C0: float,
    eps: float,
    t0: float,
    r: float,
    n_steps: int,
    antisym: bool,
):
    span = r ** (2.0 * params.s / params.alpha)
    t_s = t0 - span
    dt = span / n_steps
    exterior = Separable(FunctionDescriptor.indicator(D[0], D[1], C0) if C0 > 0 else FunctionDescriptor.constant(0.0))

    def source(x, t):
        return np.full(np.shape(x), -eps)

    problem = Problem(params, grid, SolveConfig(dt, n_steps), ReactionSpec(), Separable.constant(0.0), exterior, t_s, source)
    if antisym:
        w, diag = run_antisymmetric(problem)
        hist = HistoryField(grid, t_s, dt, w.levels, problem.prehistory, exterior)
        lw = -2.0 * apply_operator(odd_extension(hist), params, nodes=np.flatnonzero(grid.interior_mask))
        return hist, lw, span
    res = run_ivp(problem)
    hist = res.history
    lu = apply_operator(hist, params)
    return hist, lu, span


def _averaging_report(
    name: str,
    hist: HistoryField,
    op_vals: np.ndarray,
    barrier: np.ndarray,
    x0: float,
    t0: float,
    span: float,
    delta: float,
    eps: float,
    C2: float,
    C: float,
    C0: float,
    extra_hyps: list[Hypothesis],
    tol: PrincipleTolerance,
    data: dict,
) -> ExperimentReport:
    g = hist.grid
    interior = np.flatnonzero(g.interior_mask)
    eta0 = FunctionDescriptor("cutoff_eta", (t0, span / 2.0))
    times = hist.times
    sub = delta * barrier[interior][None, :] * np.asarray(eta0(times[1:]), dtype=float)[:, None]
    gap = hist.levels[1:, interior] - sub
    gap_min = float(gap.min())
    i0 = g.index_of(x0)
    u_center = float(hist.levels[-1, i0])
    op_min = float(op_vals.min())
    hyps = [
        Hypothesis("operator >= -eps in the ball cylinder", op_min + eps, op_min >= -eps - tol.hypothesis_tol),
        Hypothesis("eps <= C2 / 2", C2 / 2.0 - eps, eps <= C2 / 2.0 + 1e-15),
        Hypothesis("data >= C0 on D and >= 0 elsewhere", C0, C0 >= 0.0),
        *extra_hyps,
    ]
    extremal = min(gap_min, u_center - delta)
    verdict = _verdict(hyps, extremal, tol.conclusion_tol)
    data = dict(data)
    data.update(
        {
            "C1": delta,
            "delta": delta,
            "C2": C2,
            "C": C,
            "eps": eps,
            "u_center": u_center,
            "subsolution_gap": gap_min,
            "t0": t0,
            "t_start": float(hist.t_start),
            "series_x": g.nodes.tolist(),
            "series_u_final": hist.levels[-1].tolist(),
        }
    )
    return ExperimentReport(
        name,
        tuple(hyps),
        Conclusion("u >= delta phi eta on the ball cylinder and u(x0, t0) >= delta", extremal, verdict),
        tolerance=tol.conclusion_tol,
        data=data,
    )


def averaging_effect_experiment(
    D: tuple[float, float],
    x0: float,
    r: float,
    C0: float,
    eps: float | None = None,
    params: FracParams | None = None,
    tol: PrincipleTolerance | None = None,
    *,
    t0: float = 0.0,
    nodes_per_r: int = 50,
    n_steps: int = 200,
    distances: Sequence[float] = (),
) -> ExperimentReport:
    """Positivity on ``D`` forces ``u(x0, t0) >= delta`` at a disjoint ball.

    ``u`` solves ``L u = -eps`` in ``B_r(x0)`` with data ``C0`` on ``D`` and
    zero elsewhere, zero past, on ``(t0 - r^(2s/alpha), t0]``.  ``C2`` is the
    infimum over the closed ball of the measured kernel integral,
    ``delta = C2 r^(2s) / (2 C)``; ``eps`` defaults to ``C2 / 2``.
    ``distances`` adds a sweep moving ``D`` (same width, same side) to the
    given distances from ``x0``.
    """
    tol = tol or PrincipleTolerance()
    params = params or FracParams(0.5, 0.5)
    if C0 < 0:
        raise ValueError("C0 must be nonnegative")
    a, b = _averaging_geometry(D, x0, r)
    s = params.s
    C2 = _ball_inf(lambda x: kernel_integral(x, (a, b), s, C0), x0, r) if C0 > 0 else 0.0
    C = _subsolution_constant(params)
    delta = C2 * r ** (2.0 * s) / (2.0 * C)
    eps_v = C2 / 2.0 if eps is None else float(eps)
    h = r / nodes_per_r
    m = 2 * nodes_per_r
    grid = SpaceGrid(x0 - m * h, x0 + m * h, 2 * m + 1, "ball", (x0, r))
    hist, lu, span = _averaging_run(grid, params, (a, b), C0, eps_v, t0, r, n_steps, antisym=False)
    phi = np.asarray(barrier_phi(grid.nodes, x0, r, s), dtype=float)
    data = {"D": [a, b], "x0": x0, "r": r, "C0": C0, "distance": max(a - x0, x0 - b)}
    if distances:
        width = b - a
        side = 1.0 if a > x0 else -1.0
        sweep = []
        for dist in distances:
            Dd = (x0 + dist, x0 + dist + width) if side > 0 else (x0 - dist - width, x0 - dist)
            rep = averaging_effect_experiment(Dd, x0, r, C0, None, params, tol, t0=t0, nodes_per_r=nodes_per_r, n_steps=n_steps)
            sweep.append(
                {"distance": float(dist), "C1": rep.data["C1"], "C2": rep.data["C2"], "u_center": rep.data["u_center"], "verdict": rep.verdict}
            )
        data["sweep"] = sweep
        c1 = [row["C1"] for row in sweep]
        data["sweep_monotone"] = bool(all(y <= x for x, y in zip(c1, c1[1:]))) if list(distances) == sorted(distances) else None
    return _averaging_report(
        "averaging_effect", hist, lu, phi, x0, t0, span, delta, eps_v, C2, C, C0, [], tol, data
    )


def antisym_averaging_experiment(
    D: tuple[float, float],
    x0: float,
    r: float,
    C0: float,
    eps: float | None,
    lam: float,
    params: FracParams | None = None,
    tol: PrincipleTolerance | None = None,
    *,
    t0: float = 0.0,
    nodes_per_r: int = 50,
    n_steps: int = 200,
) -> ExperimentReport:
    """Odd-about-``lam`` version: data ``C0`` on ``D`` in ``x < lam`` and ``-C0`` on its mirror.

    ``C2`` uses the kernel difference ``|x - y|^(-1-2s) - |x - y^lam|^(-1-2s)``.
    The constant ``C`` also bounds the contribution of the mirrored ball
    ``B_r(x0^lam)`` to ``(-Delta)^s`` of the odd barrier.
    """
    tol = tol or PrincipleTolerance()
    params = params or FracParams(0.5, 0.5)
    if C0 < 0:
        raise ValueError("C0 must be nonnegative")
    a, b = _averaging_geometry(D, x0, r)
    if not b <= lam:
        raise ValueError("D must lie in the half-space x < lambda")
    if not x0 + r <= lam:
        raise ValueError("the ball must lie in the half-space x < lambda")
    if not r <= (lam - x0) / 2.0:
        raise ValueError("r must not exceed half the distance from x0 to the plane")
    s = params.s
    p = 2.0 * s
    C2 = _ball_inf(lambda x: antisymmetric_kernel_integral(x, (a, b), lam, s, C0), x0, r) if C0 > 0 else 0.0
    xm = 2.0 * lam - x0
    # sup over the ball of C_{1,s} int_{B_r(x0^lam)} |x - y|^(-1-2s) dy, attained at x0 + r
    near = xm - r - (x0 + r)
    mirror_mass = laplacian_constant(1, s) * (near ** (-p) - (near + 2.0 * r) ** (-p)) / p
    C = _subsolution_constant(params) + r**p * mirror_mass
    delta = C2 * r**p / (2.0 * C)
    eps_v = C2 / 2.0 if eps is None else float(eps)
    h0 = r / nodes_per_r
    k = int(math.ceil((lam - x0) / h0 - 1e-9))
    h = (lam - x0) / k
    m = k + int(math.ceil(2.0 * r / h))
    grid = half_lattice(lam, h, m, "ball", (x0, r))
    hist, lw, span = _averaging_run(grid, params, (a, b), C0, eps_v, t0, r, n_steps, antisym=True)
    Phi = np.asarray(antisymmetric_barrier(grid.nodes, x0, r, s, lam), dtype=float)
    ys = np.linspace(a, b, 41)
    xs = np.linspace(x0 - r, x0 + r, 41)
    integrand = np.abs(xs[:, None] - ys[None, :]) ** (-1 - p) - np.abs(xs[:, None] - (2 * lam - ys)[None, :]) ** (-1 - p)
    pos = float(integrand.min())
    extra = [Hypothesis("kernel difference >= 0 on B x D", pos, pos >= 0.0)]
    data = {
        "D": [a, b],
        "x0": x0,
        "r": r,
        "C0": C0,
        "lambda": lam,
        "distance": max(a - x0, x0 - b),
        "barrier_on_plane": float(antisymmetric_barrier(lam, x0, r, s, lam)),
        "mirror_mass": mirror_mass,
    }
    return _averaging_report(
        "antisym_averaging_effect", hist, lw, Phi, x0, t0, span, delta, eps_v, C2, C, C0, extra, tol, data
    )


# ---------------------------------------------------------------------------
# moving planes


def moving_plane_problem(
    L: float = 20.0,
    nx: int = 200,
    params: FracParams | None = None,
    dt: float = 2.0,
    n_steps: int = 4000,
    reaction: ReactionSpec | None = None,
) -> Problem:
    """``L u = f(u)`` on ``[0, L]`` with zero data for ``x <= 0`` and a frozen far field.

    The linear part of the reaction is taken implicitly so that large steps
    stay stable on the way to the steady state.
    """
    params = params or FracParams(0.5, 0.5)
    grid = SpaceGrid(0.0, L, nx, "half_space_truncation")
    return Problem(
        params,
        grid,
        SolveConfig(dt, n_steps, implicit_linear=True),
        reaction or ReactionSpec("logistic_like", (1.0,)),
    )


def planted_dip_profile(x: np.ndarray, center: float = 5.0, depth: float = 0.5, width: float = 0.3) -> np.ndarray:
    """Increasing ``arctan`` profile with a Gaussian dip; zero for ``x <= 0``."""
    u = np.arctan(x) - depth * np.exp(-((x - center) ** 2) / (2.0 * width**2))
    return np.where(x > 0.0, u, 0.0)


def static_history(grid: SpaceGrid, values: np.ndarray, exterior: Any = None) -> HistoryField:
    """One-level field for synthetic profiles."""
    ext = exterior if exterior is not None else Separable.constant(0.0)
    return HistoryField(grid, 0.0, 1.0, np.asarray(values, dtype=float)[None, :], ext, ext)


def _scan_min(traj: HistoryField, lam: float, late: np.ndarray) -> tuple[float, float, float]:
    g = traj.grid
    w = antisymmetric_difference(traj, lam)
    x = w.nodes
    omega = np.flatnonzero(g.interior_mask[: x.size] & (x < lam - 1e-12 * max(1.0, abs(lam))))
    if omega.size == 0:
        return math.inf, math.nan, math.nan
    block = w.levels[np.ix_(late, omega)]
    k = np.unravel_index(int(np.argmin(block)), block.shape)
    return float(block[k]), float(x[omega[k[1]]]), float(traj.times[late[k[0]]])


def moving_plane_scan(
    traj: HistoryField,
    lambda_grid: Sequence[float],
    tol: PrincipleTolerance | None = None,
    *,
    window_fraction: float = 0.1,
    steady_tol: float = 1e-6,
    fd_tol: float = 1e-8,
    refine_tol: float = 1e-3,
) -> ExperimentReport:
    """Scan planes ``x = lam`` and record ``min w_lam`` over the late-time window.

    ``lambda0`` is the first ``lam`` (increasing order) whose minimum drops
    below ``-conclusion_tol``, refined by bisection to ``refine_tol``;
    ``inf`` when no plane fails.  The monotone verdict also needs forward
    differences above ``fd_tol`` on the final level for ``x < (x_min + x_max) / 2``.
    """
    tol = tol or PrincipleTolerance()
    g = traj.grid
    lams = sorted(float(v) for v in lambda_grid)
    if not lams:
        raise ValueError("lambda_grid is empty")
    for lam in lams:
        _reflection_index(g, lam)
        if not g.x_min < lam <= g.x_max:
            raise ValueError(f"lambda={lam} lies outside the grid")
    n_late = max(1, int(math.ceil(window_fraction * traj.n_levels)))
    late = np.arange(traj.n_levels - n_late, traj.n_levels)
    inc = float(np.max(np.abs(traj.levels[-1] - traj.levels[-2]))) if traj.n_levels > 1 else 0.0
    # only the late window enters the scan
    t_late = float(traj.times[late[0]])
    traj = HistoryField(g, t_late, traj.dt, traj.levels[late], traj.prehistory, traj.exterior)
    late = np.arange(traj.n_levels)

    rows = []
    lam0 = math.inf
    dip = None
    prev = g.x_min
    anti_res = 0.0
    for lam in lams:
        mn, ax, at = _scan_min(traj, lam, late)
        rows.append({"lambda": lam, "min_w": mn, "argmin_x": ax, "argmin_t": at})
        if math.isinf(lam0) and mn < -tol.conclusion_tol:
            lo, hi = prev, lam
            while hi - lo > refine_tol:
                mid = 0.5 * (lo + hi)
                if _scan_min(traj, mid, late)[0] < -tol.conclusion_tol:
                    hi = mid
                else:
                    lo = mid
            lam0 = hi
            # w < 0 means u at the mirror point sits below u at argmin_x
            dip = 2.0 * lam - ax
        prev = lam
    for lam in lams[:: max(1, len(lams) // 8)]:
        w = antisymmetric_difference(traj, lam)
        anti_res = max(anti_res, dataclasses.replace(w, levels=w.levels[late[-1:]]).antisymmetry_residual())

    interior = g.interior_mask
    x = g.nodes
    pair = interior[:-1] & interior[1:] & (x[:-1] < 0.5 * (g.x_min + g.x_max))
    fd = np.diff(traj.levels[-1])[pair]
    fd_min = float(fd.min()) if fd.size else math.inf
    monotone = bool(math.isinf(lam0) and fd_min > fd_tol)
    hyps = (
        Hypothesis("trajectory steady at the end (sup increment)", inc, inc < steady_tol),
        Hypothesis("antisymmetry residual of w_lambda", anti_res, anti_res <= 1e-12),
    )
    extremal = min(r["min_w"] for r in rows)
    if not all(h.satisfied for h in hyps):
        verdict = "inconclusive"
    else:
        verdict = "holds" if monotone else "violated"
    data = {
        "rows": rows,
        "lambda0": lam0,
        "monotone": monotone,
        "min_forward_difference": fd_min,
        "dip_location": dip,
        "final_increment": inc,
        "late_window": [t_late, float(traj.times[-1])],
    }
    return ExperimentReport(
        "moving_plane_scan",
        hyps,
        Conclusion("u strictly increasing in x_1 (no critical plane)", extremal, verdict),
        tolerance=tol.conclusion_tol,
        data=data,
    )


# ---------------------------------------------------------------------------
# randomized instances


def _random_profile(rng: np.random.Generator, lo: float, hi: float, k: int = 6) -> FunctionDescriptor:
    xs = np.sort(rng.uniform(lo, hi, k))
    xs = xs + np.arange(k) * 1e-6  # strictly increasing
    ys = rng.uniform(0.0, 2.0, k) * (rng.random(k) > 0.25)
    return FunctionDescriptor("tabulated", tuple(v for pair in zip(xs, ys) for v in pair))


def random_max_principle_problem(rng: np.random.Generator, max_nodes: int = 200) -> Problem:
    """Random ``f = 0`` problem with nonnegative past and exterior data."""
    params = FracParams(float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.1, 0.9)))
    n = int(rng.integers(12, max_nodes + 1))
    a = float(rng.uniform(-2.0, 0.0))
    b = a + float(rng.uniform(0.5, 4.0))
    h = (b - a) / (n - 1)
    lo = a + h * int(rng.integers(1, max(2, n // 4)))
    hi = b - h * int(rng.integers(1, max(2, n // 4)))
    grid = SpaceGrid(a, b, n, "interval", (lo - 0.5 * h, hi + 0.5 * h))
    dt = float(10 ** rng.uniform(-2.5, 0.0))
    n_steps = int(rng.integers(5, 40))
    t_end = dt * n_steps
    pre = Separable(_random_profile(rng, a - 1, b + 1), _random_profile(rng, -5.0, 0.0))
    ext = Separable(_random_profile(rng, a - 2, b + 2), _random_profile(rng, 0.0, t_end))
    return Problem(params, grid, SolveConfig(dt, n_steps), ReactionSpec(), pre, ext, 0.0)


def random_antisymmetric_problem(rng: np.random.Generator, max_nodes: int = 200) -> Problem:
    """Random odd-about-the-plane problem on a half-lattice (use with :func:`run_antisymmetric`)."""
    params = FracParams(float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.1, 0.9)))
    m = int(rng.integers(12, max_nodes // 2 + 1))
    lam = float(rng.uniform(-1.0, 3.0))
    h = float(rng.uniform(0.02, 0.1))
    x_min = lam - m * h
    lo = x_min + h * (int(rng.integers(1, max(2, m // 2))) - 0.5)
    grid = half_lattice(lam, h, m, "slab", (lo, lam))
    dt = float(10 ** rng.uniform(-2.5, 0.0))
    n_steps = int(rng.integers(5, 40))
    pre = Separable(_random_profile(rng, x_min - 1, lam), _random_profile(rng, -5.0, 0.0))
    ext = Separable(_random_profile(rng, x_min - 2, lam), _random_profile(rng, 0.0, dt * n_steps))
    return Problem(params, grid, SolveConfig(dt, n_steps), ReactionSpec(), pre, ext, 0.0)


# ---------------------------------------------------------------------------
# appendix tables


def appendix_tables(
    alphas: Sequence[float] = (0.25, 0.5, 0.75),
    r: float = 0.5,
    s: float = 0.5,
    cfg: TimeQuadratureConfig | None = None,
) -> dict:
    """Cutoff-derivative bounds and scaling-identity errors per ``alpha``."""
    from .frac_time import check_scaling_identity

    bounds, scaling = [], []
    for a in alphas:
        p = FracParams(a, s)
        cb = check_cutoff_bound(p, cfg)
        bounds.append({"alpha": a, "sup_abs": cb.sup_abs, "bound": cb.bound, "strict": bool(cb.sup_abs < cb.bound)})
        for lam in (0.5, 2.0, r ** (2.0 * s / a)):
            scaling.append({"alpha": a, "lambda": lam, "error": check_scaling_identity(p, lam, cfg)})
    return {"cutoff_bounds": bounds, "scaling_errors": scaling}
