"""Product-integration weights for the singular kernels ``z**(-1-p)``.

Both fractional operators reduce to one-sided integrals of the form

    int_0^inf g(z) z**(-1-p) dz,     0 < p < 2,

with ``p = alpha`` for the Marchaud derivative and ``p = 2 s`` for the
fractional Laplacian.  Here ``g`` is interpolated piecewise linearly on a
lattice and the kernel is integrated exactly against each hat function.
All weights below are in lattice units; callers scale by ``h**(-p)``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_SERIES_CUT = 1e-2


def _hat_weights(a, b, p):
    """Exact hat-function moments on ``[a, b]`` (``0 < a < b``).

    Returns ``(wa, wb)`` with ``wa = int (b-z)/(b-a) z^(-1-p) dz`` and
    ``wb = int (z-a)/(b-a) z^(-1-p) dz``.  ``wb`` is evaluated through a
    series in ``log(b/a)`` when the interval is short relative to ``a``; the
    closed form loses digits to cancellation there.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    L = np.log1p(d / a)
    q = 1.0 - p
    m0 = -np.power(a, -p) * np.expm1(-p * L) / p
    # S = E1/(1-p) - E0/p, E1 = expm1((1-p)L), E0 = -expm1(-pL)
    if abs(q) < 1e-12:
        e1 = L
    else:
        e1 = np.expm1(q * L) / q
    direct = e1 + np.expm1(-p * L) / p
    series = np.zeros_like(L)
    Ln = L * L
    fact = 2.0
    for n in range(2, 10):
        coef = q ** (n - 1) - (-1.0) ** (n + 1) * p ** (n - 1)
        series = series + coef * Ln / fact
        Ln = Ln * L
        fact *= n + 1
    S = np.where(L < _SERIES_CUT, series, direct)
    wb = np.power(a, q) * S / d
    wa = m0 - wb
    return wa, wb


def _curvature_moment(k, p):
    """``int_k^{k+1} (z-k)(k+1-z) z^(-1-p) dz`` for integer ``k >= 1``.

    This is the kernel-weighted linear-interpolation error of ``z**2``.
    """
    k = np.asarray(k, dtype=float)
    # exact via moments of z^(1-p), z^(-p), z^(-1-p)
    a, b = k, k + 1.0

    def mom(e):
        # int_a^b z^e dz
        if abs(e + 1.0) < 1e-12:
            return np.log(b / a)
        return (np.power(b, e + 1.0) - np.power(a, e + 1.0)) / (e + 1.0)

    # (z-a)(b-z) = -z^2 + (a+b) z - ab
    return -mom(1.0 - p) + (a + b) * mom(-p) - a * b * mom(-1.0 - p)


@lru_cache(maxsize=64)
def _curvature_total(p: float, start: int) -> float:
    """Sum of ``_curvature_moment(k, p)`` for ``k >= start``."""
    K = 4000
    k = np.arange(start, K, dtype=float)
    # use the short-interval series for large k: (1/6) k^(-1-p) (1 + O(1/k))
    head = float(np.sum(_curvature_moment(k[k < 200], p)))
    big = k[k >= 200]
    mid = big + 0.5
    body = float(np.sum(mid ** (-1.0 - p) / 6.0 * (1.0 + (1.0 + p) * (2.0 + p) / (40.0 * mid**2))))
    # tail beyond K by the integral of the leading term
    tail = (K - 0.5) ** (-p) / (6.0 * p)
    return head + body + tail


def marchaud_weights(n: int, alpha: float):
    """L1 weights for a uniform history, in units of ``dt**(-alpha)``.

    With ``m`` counting steps back from the evaluation level, the sampled
    part of the Marchaud integral equals

        dt^-alpha * ( sum_{m=1}^{n-1} beta[m] (u_n - u_{n-m}) + w_last (u_n - u_0) )

    Returns ``beta`` (length ``n``, ``beta[0] = 0``) and ``w_last``.  When
    ``n == 0`` there is no sampled segment and both are zero.
    """
    beta = np.zeros(max(n, 1))
    if n == 0:
        return beta, 0.0
    k = np.arange(1, n, dtype=float)
    wa, wb = _hat_weights(k, k + 1.0, alpha)
    wb0 = 1.0 / (1.0 - alpha)
    wbk = np.concatenate(([wb0], wb))  # wb for segments 0..n-1
    if n > 1:
        beta[1:] = wa + wbk[:-1]
    return beta, float(wbk[n - 1])


def marchaud_diagonal(alpha: float) -> float:
    """Coefficient of ``u_n`` in the L1 formula including the whole past, units of ``dt**(-alpha)``."""
    return 1.0 / (alpha * (1.0 - alpha))


@lru_cache(maxsize=32)
def _space_coefficients_unit(K: int, s: float, kappa: int, corrected: bool):
    p = 2.0 * s
    c = np.zeros(K + 2)
    k = np.arange(kappa, K + 1, dtype=float)
    wa, wb = _hat_weights(k, k + 1.0, p)
    idx = np.arange(kappa, K + 1)
    np.add.at(c, idx, wa)
    np.add.at(c, idx + 1, wb)
    c = c[: K + 1]
    # inner zone: -u''(x) z^2 with u'' from the central second difference
    c[1] += kappa ** (2.0 - p) / (2.0 - p)
    # hats over [kappa, inf) sum to the exact kernel mass
    total = kappa ** (2.0 - p) / (2.0 - p) + kappa ** (-p) / p
    if corrected:
        # linear interpolation overestimates z^2 by the curvature moment
        before = c[1]
        c1 = before - _curvature_total(p, kappa)
        # keep c_1 >= c_2 so that the weights stay monotone in the offset
        c[1] = max(c1, c[2])
        total += c[1] - before
    c.setflags(write=False)
    return c, total


def space_coefficients(K: int, h: float, s: float, kappa: int = 1, corrected: bool = True):
    """Per-offset weights for the symmetrized fractional-Laplacian quadrature.

    The (unnormalized) integral ``int_0^inf (2u(x) - u(x+z) - u(x-z)) z^(-1-2s) dz``
    is approximated by ``sum_{k>=1} c[k] * (2u_0 - u_k - u_{-k})`` where ``u_k``
    are lattice samples at spacing ``h``.  Offsets inside the inner Taylor zone
    ``(0, kappa h]`` enter through the central second difference.

    Returns ``(c, total)``: ``c`` has length ``K + 1`` (``c[0] = 0``) and
    ``total = sum_{k>=1} c[k]`` over all offsets to infinity.  Both carry the
    ``h**(-2s)`` scaling.
    """
    if int(kappa) != kappa or kappa < 1:
        raise ValueError("inner_radius_factor must be an integer >= 1")
    K = max(int(K), 2)
    c, total = _space_coefficients_unit(K, float(s), int(kappa), bool(corrected))
    scale = h ** (-2.0 * s)
    return c * scale, total * scale


def space_remainders(c: np.ndarray, total: float) -> np.ndarray:
    """``R[k] = sum_{j > k} c[j]`` (tail mass beyond offset ``k``) by subtraction."""
    return total - np.cumsum(c)


def space_tail(k, h: float, s: float, kappa: int = 1, total: float | None = None) -> np.ndarray:
    """``sum_{j > k} c[j]`` in closed form (no cancellation for large ``k``).

    For ``k >= kappa`` the weights past ``k`` are the hat moments of the
    kernel on ``[k h, inf)`` minus the left-hat share of ``[k, k+1]``.
    Offsets below ``kappa`` need ``total`` (the sum of all weights).
    """
    p = 2.0 * s
    k = np.asarray(k, dtype=float)
    kk = np.maximum(k, kappa)
    wa, _ = _hat_weights(kk, kk + 1.0, p)
    out = (kk ** (-p) / p - wa) * h ** (-p)
    if np.any(k < kappa):
        if total is None:
            raise ValueError("offsets below the inner radius need the total weight")
        c1 = total - (kappa ** (-p) / p) * h ** (-p)
        out = np.where(k == 0, total, np.where(k < kappa, total - c1, out))
    return out


def hat_weights(a, b, p):
    """Public wrapper of the exact hat moments, see :func:`_hat_weights`."""
    return _hat_weights(a, b, p)


def kernel_tail(z0: float, p: float) -> float:
    """``int_{z0}^inf z^(-1-p) dz``."""
    return z0 ** (-p) / p


def c_alpha(alpha: float) -> float:
    return alpha / math.gamma(1.0 - alpha)
