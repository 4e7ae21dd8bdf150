"""Marchaud fractional time derivative on sampled histories.

The derivative is evaluated as

    C_alpha * int_{-inf}^{t} (u(t) - u(tau)) (t - tau)^(-1-alpha) dtau

split into the sampled window (exact kernel moments against the piecewise
linear interpolant) and the analytic prehistory (adaptive quadrature plus a
closed-form constant tail).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable

import numpy as np
from scipy import integrate

from .core import FracParams, FunctionDescriptor, Tail
from .quadrature import hat_weights, marchaud_weights

__all__ = [
    "TimeQuadratureConfig",
    "TimeTrace",
    "marchaud",
    "marchaud_levels",
    "marchaud_quad",
    "past_integral",
    "cutoff_eta",
    "check_cutoff_bound",
    "check_scaling_identity",
    "counterexample_trace",
    "CutoffBound",
]


@dataclass(frozen=True)
class TimeQuadratureConfig:
    scheme: str = "l1_piecewise_linear"
    tail_mode: str = "adaptive_then_constant"
    tail_cut: float = 20.0
    adaptive_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.scheme != "l1_piecewise_linear":
            raise ValueError(f"unknown time scheme {self.scheme!r}")
        if self.tail_mode not in ("analytic_constant", "adaptive_then_constant"):
            raise ValueError(f"unknown tail_mode {self.tail_mode!r}")
        if not self.tail_cut > 0:
            raise ValueError("tail_cut must be positive")
        if not self.adaptive_tol > 0:
            raise ValueError("adaptive_tol must be positive")


@dataclass(frozen=True)
class TimeTrace:
    """Samples ``u(t_start + j dt)`` plus a descriptor for ``t <= t_start``."""

    t_start: float
    dt: float
    samples: np.ndarray
    prehistory: Any

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        arr = np.array(self.samples, dtype=float).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.samples.size) * self.dt

    @classmethod
    def from_function(
        cls, fn: Callable, t_start: float, t_end: float, dt: float, prehistory: Any = None
    ) -> TimeTrace:
        """Sample ``fn`` on ``[t_start, t_end]``; the prehistory defaults to ``fn`` itself."""
        n = int(round((t_end - t_start) / dt))
        t = t_start + np.arange(n + 1) * dt
        return cls(t_start, dt, np.asarray(fn(t), dtype=float), fn if prehistory is None else prehistory)


def _check_tail(tail: Tail | None, alpha: float) -> None:
    if tail is not None and tail.kind == "power_growth" and tail.value >= alpha:
        raise ValueError(
            f"prehistory grows like |t|^{tail.value}, which is not integrable against "
            f"the order-{alpha} kernel"
        )


def _tail_of(desc: Any) -> Tail | None:
    return getattr(desc, "tail", None)


def _breaks(desc: Any) -> tuple[float, ...]:
    bp = getattr(desc, "breakpoints", None)
    return tuple(bp()) if callable(bp) else ()


def _split_points(a: float, b: float, pts) -> list[float]:
    inner = sorted(p for p in pts if a < p < b)
    return [a, *inner, b]


def _quad(fn: Callable[[float], float], a: float, b: float, pts, tol: float) -> float:
    """Adaptive quadrature over ``[a, b]`` split at the given breakpoints."""
    total = 0.0
    edges = _split_points(a, b, pts)
    for lo, hi in zip(edges, edges[1:]):
        # long smooth pieces are chopped so quad resolves oscillations
        m = max(1, int(math.ceil((hi - lo) / 8.0)))
        cuts = np.linspace(lo, hi, m + 1)
        for c0, c1 in zip(cuts, cuts[1:]):
            val, _ = integrate.quad(fn, c0, c1, epsabs=tol, epsrel=tol, limit=200)
            total += val
    return total


def _cut_and_value(desc: Any, t_s: float, cfg: TimeQuadratureConfig) -> tuple[float, float]:
    """Where the sampled prehistory ends (``t_cut``) and the constant used before it."""
    tail = _tail_of(desc)
    if tail is not None and tail.left_constant:
        cut = min(tail.cutoff, t_s)
        return cut, float(tail.value)
    if cfg.tail_mode == "analytic_constant":
        raise ValueError("tail_mode analytic_constant needs an eventually-constant prehistory")
    cut = t_s - cfg.tail_cut
    return cut, float(desc(cut))


@lru_cache(maxsize=4096)
def _weighted_past_cached(desc, t_s: float, t: float, alpha: float, cfg: TimeQuadratureConfig) -> float:
    return _weighted_past(desc, t_s, t, alpha, cfg)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _graded_panels(lo: float, hi: float, t: float, max_width: float = 4.0) -> np.ndarray:
    """Panel edges on ``[lo, hi]`` whose widths stay below half the distance to ``t``."""
    edges = [hi]
    q = hi
    while q > lo:
        q = max(lo, q - min(max_width, 0.5 * (t - q)))
        edges.append(q)
    return np.array(edges[::-1])


def _panel_integral(desc: Any, lo: float, hi: float, t: float, alpha: float, pts) -> float:
    """Composite Gauss-Legendre for ``int_lo^hi desc(tau) (t - tau)^(-1-alpha) dtau``, ``t > hi``."""
    # short pieces between breakpoints get proportionally finer panels
    edges = np.concatenate(
        [_graded_panels(a, b, t, min(4.0, (b - a) / 8.0)) for a, b in zip(*_pairs(_split_points(lo, hi, pts)))]
    )
    edges = np.unique(edges)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    tau = (0.5 * (a + b))[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(desc(tau.ravel()), dtype=float).reshape(tau.shape) * (t - tau) ** (-1.0 - alpha)
    return float(np.sum(half * (vals @ _GL_WEIGHTS)))


def _pairs(edges: list[float]) -> tuple[list[float], list[float]]:
    return edges[:-1], edges[1:]


def _weighted_past(desc, t_s: float, t: float, alpha: float, cfg: TimeQuadratureConfig) -> float:
    """``int_{-inf}^{t_s} desc(tau) (t - tau)^(-1-alpha) dtau`` for ``t > t_s``.

    Descriptors (smooth between their breakpoints) use graded Gauss-Legendre
    panels; other callables fall back to adaptive quadrature.
    """
    cut, v = _cut_and_value(desc, t_s, cfg)
    out = v * (t - cut) ** (-alpha) / alpha
    if cut < t_s:
        if isinstance(desc, FunctionDescriptor):
            out += _panel_integral(desc, cut, t_s, t, alpha, _breaks(desc))
        else:
            out += _quad(
                lambda tau: float(desc(tau)) * (t - tau) ** (-1.0 - alpha),
                cut,
                t_s,
                _breaks(desc),
                cfg.adaptive_tol,
            )
    return out


def past_integral(desc: Any, t_s: float, t: float, alpha: float, cfg: TimeQuadratureConfig | None = None) -> float:
    """Kernel-weighted integral of the prehistory, ``int_{-inf}^{t_s} p(tau) (t-tau)^(-1-alpha) dtau``.

    Requires ``t > t_s``.  Results for hashable descriptors are cached.
    """
    cfg = cfg or TimeQuadratureConfig()
    if not t > t_s:
        raise ValueError("past_integral needs t > t_s")
    _check_tail(_tail_of(desc), alpha)
    factor = getattr(desc, "factor", None)
    base = getattr(desc, "base", None)
    if factor is not None and base is not None:
        if factor == 0.0:
            return 0.0
        return factor * past_integral(base, t_s, t, alpha, cfg)
    try:
        hash(desc)
    except TypeError:
        return _weighted_past(desc, t_s, t, alpha, cfg)
    return _weighted_past_cached(desc, float(t_s), float(t), float(alpha), cfg)


def _singular_past(desc: Any, t: float, alpha: float, cfg: TimeQuadratureConfig) -> float:
    """Marchaud integral (without ``C_alpha``) of an analytic function at ``t``."""
    return _marchaud_integral(desc, t, alpha, cfg.adaptive_tol, cfg)


def _marchaud_integral(fn, t: float, alpha: float, tol: float, cfg: TimeQuadratureConfig | None) -> float:
    ut = float(fn(t))
    tail = _tail_of(fn)
    if tail is not None and tail.left_constant and tail.cutoff >= t:
        # the function is constant on the whole past
        return 0.0
    if tail is not None and tail.left_constant:
        cut, v = tail.cutoff, float(tail.value)
    else:
        depth = cfg.tail_cut if cfg is not None else 200.0
        cut = t - depth
        v = float(fn(cut))
    sig_end = t - cut
    pts = sorted({t - b for b in _breaks(fn) if cut < b < t})
    delta = min(1.0, sig_end, *(p for p in pts if p > 0)) if pts else min(1.0, sig_end)

    def quotient(sig: float) -> float:
        sig = max(sig, 1e-12)
        return (ut - float(fn(t - sig))) / sig

    with warnings.catch_warnings():
        # roundoff notices near the requested tolerance are expected here
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        near, _ = integrate.quad(
            quotient, 0.0, delta, weight="alg", wvar=(-alpha, 0.0), epsabs=tol, epsrel=tol, limit=200
        )
        far = 0.0
        if sig_end > delta:
            far = _quad(lambda sig: (ut - float(fn(t - sig))) * sig ** (-1.0 - alpha), delta, sig_end, pts, tol)
    return near + far + (ut - v) * sig_end ** (-alpha) / alpha


def marchaud_quad(fn: Any, t: float, alpha: float, tol: float = 1e-12, depth: float = 200.0) -> float:
    """Direct adaptive quadrature of the Marchaud derivative of an analytic function.

    ``fn`` may carry a ``tail`` and ``breakpoints()`` like a descriptor.  The
    singular end is integrated with an algebraic weight; without an
    eventually-constant tail the integral is truncated at ``t - depth``.
    Independent of the lattice weights used by :func:`marchaud`.
    """
    cfg = TimeQuadratureConfig(tail_cut=depth, adaptive_tol=tol)
    return alpha / math.gamma(1.0 - alpha) * _marchaud_integral(fn, t, alpha, tol, cfg)


def marchaud(
    trace: TimeTrace, t_eval: float, params: FracParams, cfg: TimeQuadratureConfig | None = None
) -> float:
    """Marchaud derivative of a sampled trace at a stored level (or in the prehistory)."""
    cfg = cfg or TimeQuadratureConfig()
    alpha = params.alpha
    u = trace.samples
    if not np.all(np.isfinite(u)):
        raise ValueError("trace contains non-finite samples")
    _check_tail(_tail_of(trace.prehistory), alpha)
    j = (t_eval - trace.t_start) / trace.dt
    N = int(round(j))
    if t_eval < trace.t_start and N != 0:
        return params.c_alpha * _singular_past(trace.prehistory, t_eval, alpha, cfg)
    if abs(j - N) > 1e-8 * max(1.0, abs(j)) or not 0 <= N < u.size:
        raise ValueError(f"t_eval={t_eval} is not a stored level of the trace")
    if N == 0:
        return params.c_alpha * _singular_past(trace.prehistory, trace.t_start, alpha, cfg)
    uN = u[N]
    beta, w_last = marchaud_weights(N, alpha)
    sampled = float(np.dot(beta[1:N], uN - u[N - 1 : 0 : -1])) if N > 1 else 0.0
    sampled += w_last * (uN - u[0])
    sampled *= trace.dt ** (-alpha)
    t_N = trace.t_start + N * trace.dt
    past = uN * (t_N - trace.t_start) ** (-alpha) / alpha
    past -= past_integral(trace.prehistory, trace.t_start, t_N, alpha, cfg)
    return params.c_alpha * (sampled + past)


def marchaud_levels(
    trace: TimeTrace, params: FracParams, cfg: TimeQuadratureConfig | None = None, start: int = 1
) -> np.ndarray:
    """Marchaud derivative at every stored level from ``start`` on (vectorized history sums)."""
    cfg = cfg or TimeQuadratureConfig()
    alpha = params.alpha
    u = trace.samples
    n = u.size - 1
    if n < start:
        return np.zeros(0)
    beta, _ = marchaud_weights(n + 1, alpha)
    # wb for segment k is the last-sample weight at level k+1
    wb_tab = _wb_table(n, alpha)
    levels = np.arange(start, n + 1)
    conv = np.convolve(beta, u)[: n + 1]  # conv[N] = sum_m beta[m] u[N-m]
    csum = np.cumsum(beta)
    out = np.empty(levels.size)
    for k, N in enumerate(levels):
        hist = conv[N] - beta[N] * u[0]
        s = u[N] * (csum[N - 1] + wb_tab[N - 1]) - hist - wb_tab[N - 1] * u[0]
        t_N = trace.t_start + N * trace.dt
        past = u[N] * (t_N - trace.t_start) ** (-alpha) / alpha
        past -= past_integral(trace.prehistory, trace.t_start, t_N, alpha, cfg)
        out[k] = s * trace.dt ** (-alpha) + past
    if start == 0:
        out[0] = _singular_past(trace.prehistory, trace.t_start, alpha, cfg)
    return params.c_alpha * out


@lru_cache(maxsize=16)
def _wb_table(n: int, alpha: float) -> np.ndarray:
    tab = np.empty(n + 1)
    tab[0] = 1.0 / (1.0 - alpha)
    if n >= 1:
        k = np.arange(1, n + 1, dtype=float)
        _, wb = hat_weights(k, k + 1.0, alpha)
        tab[1:] = wb
    return tab


# ---------------------------------------------------------------------------
# cutoff function and appendix checks


def cutoff_eta(t):
    """Smooth bump: 1 on ``[-1, 1]``, 0 outside ``(-2, 2)``, monotone shoulders."""
    return FunctionDescriptor("cutoff_eta", (0.0, 1.0))(t)


@dataclass(frozen=True)
class CutoffBound:
    sup_abs: float
    bound: float
    satisfied: bool
    lipschitz: float
    argmax: float


def _lipschitz_eta(spacing: float = 1e-4) -> float:
    t = np.arange(-2.0, 2.0 + spacing / 2, spacing)
    d = (cutoff_eta(t + spacing) - cutoff_eta(t - spacing)) / (2.0 * spacing)
    return float(np.max(np.abs(d)))


def check_cutoff_bound(
    params: FracParams, cfg: TimeQuadratureConfig | None = None, dt: float = 1e-3
) -> CutoffBound:
    """Sup of ``|d^alpha eta|`` on ``(-2, 2)`` against the analytic bound.

    The sup is taken over the lattice ``-2 + k dt`` using the L1 evaluator on a
    trace whose prehistory is eta itself (zero on the whole past of ``-2``).
    """
    cfg = cfg or TimeQuadratureConfig()
    eta = FunctionDescriptor("cutoff_eta", (0.0, 1.0))
    trace = TimeTrace.from_function(eta, -2.0, 2.0, dt, prehistory=eta)
    vals = marchaud_levels(trace, params, cfg, start=1)
    vals = vals[:-1]  # open interval
    k = int(np.argmax(np.abs(vals)))
    sup_abs = float(abs(vals[k]))
    a = params.alpha
    L = _lipschitz_eta()
    bound = params.c_alpha / a + L * params.c_alpha * 5.0 ** (1.0 - a) / (1.0 - a)
    return CutoffBound(sup_abs, bound, sup_abs < bound, L, float(trace.times[k + 1]))


def check_scaling_identity(
    params: FracParams,
    lambda_scale: float,
    cfg: TimeQuadratureConfig | None = None,
    t0: float = 0.0,
    n_probe: int = 41,
    tol: float = 1e-10,
) -> float:
    """Max error of ``D[eta((.-t0)/lam)](t0 + lam tau) = lam^-alpha (D eta)(tau)`` over a tau grid.

    Both sides use :func:`marchaud_quad`.  The error is relative to the sup of
    the right-hand side over the grid, which avoids dividing by the zeros of
    the derivative.
    """
    if not lambda_scale > 0:
        raise ValueError("lambda_scale must be positive")
    a = params.alpha
    base = FunctionDescriptor("cutoff_eta", (0.0, 1.0))
    stretched = FunctionDescriptor("cutoff_eta", (t0, lambda_scale))
    taus = np.linspace(-1.95, 1.95, n_probe)
    rhs = np.array([lambda_scale ** (-a) * marchaud_quad(base, tau, a, tol) for tau in taus])
    lhs = np.array([marchaud_quad(stretched, t0 + lambda_scale * tau, a, tol) for tau in taus])
    scale = float(np.max(np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs)) / scale)


def counterexample_trace(R: float) -> FunctionDescriptor:
    """``sin t`` for ``t > 0``, ``t`` on ``(-R, 0]`` and ``-R`` below."""
    if not R > 0:
        raise ValueError("R must be positive")
    return FunctionDescriptor("counterexample_u", (R,))

