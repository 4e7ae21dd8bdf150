from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fracdual.core import FracParams, FunctionDescriptor, Tail
from fracdual.frac_time import (
    TimeQuadratureConfig,
    TimeTrace,
    check_cutoff_bound,
    check_scaling_identity,
    counterexample_trace,
    cutoff_eta,
    marchaud,
    marchaud_levels,
    marchaud_quad,
    past_integral,
)

HALF = FracParams(0.5, 0.5)


def oracle(fn, t, alpha, cut, v):
    """Defining integral with ``sigma = y^2`` (no algebraic weights), constant ``v`` before ``cut``."""
    ut = fn(t)
    y_end = math.sqrt(t - cut)
    body = integrate.quad(
        lambda y: 2.0 * (ut - fn(t - y * y)) * y ** (-1.0 - 2.0 * alpha) if y > 0 else 0.0,
        0.0,
        y_end,
        limit=500,
        epsabs=1e-12,
        epsrel=1e-12,
        points=[math.sqrt(max(t - b, 0.0)) for b in (0.0, -100.0) if cut < b < t],
    )[0]
    return alpha / math.gamma(1 - alpha) * (body + (ut - v) * (t - cut) ** (-alpha) / alpha)


@given(c=st.floats(-1e3, 1e3), n=st.integers(1, 60), a=st.floats(0.05, 0.95))
def test_constants_are_annihilated(c, n, a):
    const = FunctionDescriptor.constant(c)
    trace = TimeTrace(0.0, 0.1, np.full(n + 1, c), const)
    assert abs(marchaud(trace, n * 0.1, FracParams(a, 0.5))) <= 1e-12 * max(1.0, abs(c))


def test_exponential_at_zero():
    e = FunctionDescriptor("exponential", (1.0, 1.0))
    trace = TimeTrace.from_function(e, -20.0, 0.0, 1e-3)
    assert marchaud(trace, 0.0, HALF) == pytest.approx(1.0, rel=1e-3)


def test_exponential_first_order_convergence():
    e = FunctionDescriptor("exponential", (1.0, 1.0))
    errs = []
    for dt in (1e-2, 5e-3):
        trace = TimeTrace.from_function(e, -20.0, 0.5, dt)
        errs.append(abs(marchaud(trace, 0.5, HALF) - math.exp(0.5)))
    assert errs[0] / errs[1] >= 1.9


def test_counterexample_value_is_nonnegative_and_matches_oracle():
    u = counterexample_trace(100.0)
    t = 1.5 * math.pi
    dt = 2 * math.pi / 2000
    samples = np.sin(np.arange(1501) * dt)
    value = marchaud(TimeTrace(0.0, dt, samples, u), t, HALF)
    assert value >= 0.0
    assert value == pytest.approx(oracle(u, t, 0.5, -100.0, -100.0), rel=1e-3)


def test_marchaud_quad_matches_independent_oracle():
    u = counterexample_trace(10.0)
    for t in (0.5, 2.0, 4.0):
        assert marchaud_quad(u, t, 0.3) == pytest.approx(oracle(u, t, 0.3, -10.0, -10.0), rel=1e-7)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_nondecreasing_trace_gives_nonnegative_derivative(alpha):
    t = np.linspace(-5.0, 5.0, 1001)
    trace = TimeTrace(-5.0, 0.01, np.arctan(t), FunctionDescriptor.constant(float(np.arctan(-5.0))))
    vals = marchaud_levels(trace, FracParams(alpha, 0.5))
    assert vals.min() >= -1e-12


@given(
    a=st.floats(-3, 3),
    b=st.floats(-3, 3),
    seed=st.integers(0, 2**16),
)
def test_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=25), rng.normal(size=25)
    pu, pv = FunctionDescriptor.constant(u[0]), FunctionDescriptor.constant(v[0])
    pw = FunctionDescriptor.constant(a * u[0] + b * v[0])
    t = 24 * 0.05
    mu = marchaud(TimeTrace(0.0, 0.05, u, pu), t, HALF)
    mv = marchaud(TimeTrace(0.0, 0.05, v, pv), t, HALF)
    mw = marchaud(TimeTrace(0.0, 0.05, a * u + b * v, pw), t, HALF)
    assert mw == pytest.approx(a * mu + b * mv, abs=1e-9)


@pytest.mark.parametrize("shift", [-7.5, 3.0, 100.0])
def test_time_translation(shift):
    def traced(offset):
        eta = FunctionDescriptor("cutoff_eta", (offset, 1.0))
        return TimeTrace.from_function(eta, offset - 2.5, offset + 1.0, 0.01)

    base = marchaud(traced(0.0), 0.5, HALF)
    moved = marchaud(traced(shift), shift + 0.5, HALF)
    assert moved == pytest.approx(base, rel=1e-9, abs=1e-12)


def test_levels_agree_with_pointwise():
    e = FunctionDescriptor("exponential", (1.0, 0.7))
    trace = TimeTrace.from_function(e, -3.0, 0.0, 0.05)
    vals = marchaud_levels(trace, HALF, start=1)
    point = [marchaud(trace, float(t), HALF) for t in trace.times[1:]]
    np.testing.assert_allclose(vals, point, rtol=1e-10)


def test_evaluation_inside_the_prehistory():
    eta = FunctionDescriptor("cutoff_eta", (0.0, 1.0))
    trace = TimeTrace.from_function(eta, -2.0, 2.0, 0.01)
    assert marchaud(trace, -3.0, HALF) == 0.0
    assert marchaud_quad(eta, -3.0, 0.5) == 0.0


@pytest.mark.parametrize("c", [1.0, -2.5])
def test_past_integral_of_constant(c):
    a, t_s, t = 0.4, 0.0, 1.3
    got = past_integral(FunctionDescriptor.constant(c), t_s, t, a)
    assert got == pytest.approx(c * (t - t_s) ** (-a) / a, rel=1e-12)


def test_past_integral_of_exponential_against_quad():
    e = FunctionDescriptor("exponential", (1.0, 1.0))
    exact = integrate.quad(lambda tau: math.exp(tau) * (2.0 - tau) ** -1.5, -np.inf, 0.0, epsrel=1e-12)[0]
    assert past_integral(e, 0.0, 2.0, 0.5) == pytest.approx(exact, rel=1e-8)


def test_marchaud_errors():
    with pytest.raises(ValueError):
        marchaud(TimeTrace(0.0, 0.1, np.array([0.0, np.nan]), FunctionDescriptor.constant(0.0)), 0.1, HALF)
    growing = FunctionDescriptor("linear", (0.0, 1.0))
    with pytest.raises(ValueError):
        marchaud(TimeTrace(0.0, 0.1, np.zeros(3), growing), 0.2, HALF)
    with pytest.raises(ValueError):
        marchaud(TimeTrace(0.0, 0.1, np.zeros(3), FunctionDescriptor.constant(0.0)), 0.15, HALF)
    with pytest.raises(ValueError):
        past_integral(FunctionDescriptor.constant(1.0), 1.0, 1.0, 0.5)


def test_slow_growth_prehistory_is_accepted():
    slow = FunctionDescriptor("linear", (0.0, 1.0), Tail("power_growth", 0.2))
    trace = TimeTrace(0.0, 0.1, np.zeros(3), FunctionDescriptor.constant(0.0))
    marchaud(trace, 0.2, HALF)
    with pytest.raises(ValueError):
        marchaud(TimeTrace(0.0, 0.1, np.zeros(3), slow), 0.2, FracParams(0.1, 0.5))


@pytest.mark.parametrize(
    "kwargs", [{"tail_cut": 0.0}, {"adaptive_tol": -1.0}, {"scheme": "l2"}, {"tail_mode": "none"}]
)
def test_time_config_invariants(kwargs):
    with pytest.raises(ValueError):
        TimeQuadratureConfig(**kwargs)


# -- cutoff ----------------------------------------------------------------------


def test_cutoff_eta_values():
    assert cutoff_eta(0.0) == 1.0
    assert cutoff_eta(2.5) == 0.0 and cutoff_eta(-2.5) == 0.0
    assert 0.0 < cutoff_eta(1.5) < 1.0
    np.testing.assert_allclose(cutoff_eta(np.linspace(-1, 1, 11)), 1.0)


def test_cutoff_eta_strictly_decreasing_on_shoulder():
    # the very edges underflow to flat values
    t = np.linspace(1.1, 1.9, 801)
    assert np.all(np.diff(cutoff_eta(t)) < 0)
    np.testing.assert_allclose(cutoff_eta(-t), cutoff_eta(t))


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_cutoff_bound_holds(alpha):
    cb = check_cutoff_bound(FracParams(alpha, 0.5))
    assert cb.satisfied and cb.sup_abs < cb.bound
    assert cb.lipschitz == pytest.approx(max(np.abs(np.gradient(cutoff_eta(np.linspace(-2, 2, 40001)), 1e-4))), rel=1e-3)


def test_scaling_identity_trivial_and_stretched():
    assert check_scaling_identity(HALF, 1.0, n_probe=11) < 1e-9
    assert check_scaling_identity(HALF, 2.0, n_probe=11) < 1e-4


def test_scaling_prefactor_for_the_ball_radius():
    r, s, a = 0.5, 0.5, 0.5
    lam = r ** (2 * s / a)
    base = FunctionDescriptor("cutoff_eta", (0.0, 1.0))
    stretched = FunctionDescriptor("cutoff_eta", (0.0, lam))
    tau = 1.3
    ratio = marchaud_quad(stretched, lam * tau, a) / marchaud_quad(base, tau, a)
    assert ratio == pytest.approx(r ** (-2 * s), rel=1e-6)


def test_scaling_identity_rejects_nonpositive():
    with pytest.raises(ValueError):
        check_scaling_identity(HALF, 0.0)


# -- counterexample trace --------------------------------------------------------


def test_counterexample_trace_values():
    u = counterexample_trace(100.0)
    assert u(math.pi / 2) == pytest.approx(1.0)
    assert u(-105.0) == -100.0
    assert u(1.5 * math.pi) == pytest.approx(-1.0)
    assert u.tail.kind == "eventually_constant" and u.tail.value == -100.0
    # continuous at both joints
    for b in (0.0, -100.0):
        assert u(b - 1e-9) == pytest.approx(u(b + 1e-9), abs=1e-8)


def test_counterexample_trace_rejects_nonpositive_R():
    with pytest.raises(ValueError):
        counterexample_trace(0.0)
