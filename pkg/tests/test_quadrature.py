from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fracdual.quadrature import (
    _curvature_moment,
    c_alpha,
    hat_weights,
    kernel_tail,
    marchaud_diagonal,
    marchaud_weights,
    space_coefficients,
    space_remainders,
    space_tail,
)


def _quad_hats(a, b, p):
    k = lambda z: z ** (-1.0 - p)
    wa = integrate.quad(lambda z: (b - z) / (b - a) * k(z), a, b, epsabs=0, epsrel=1e-13)[0]
    wb = integrate.quad(lambda z: (z - a) / (b - a) * k(z), a, b, epsabs=0, epsrel=1e-13)[0]
    return wa, wb


@given(
    a=st.floats(0.5, 50.0),
    width=st.floats(1e-3, 5.0),
    p=st.floats(0.05, 1.95),
)
def test_hat_weights_match_direct_quadrature(a, width, p):
    wa, wb = hat_weights(a, a + width, p)
    qa, qb = _quad_hats(a, a + width, p)
    assert float(wa) == pytest.approx(qa, rel=1e-9)
    assert float(wb) == pytest.approx(qb, rel=1e-9)


@pytest.mark.parametrize("a", [100.0, 1e3, 1e4])
def test_hat_weights_short_interval_branch(a):
    # log(b/a) < 1e-2 uses the series
    wa, wb = hat_weights(a, a + 1.0, 1.0)
    qa, qb = _quad_hats(a, a + 1.0, 1.0)
    assert float(wb) == pytest.approx(qb, rel=1e-10)
    assert float(wa) == pytest.approx(qa, rel=1e-10)


@pytest.mark.parametrize("p", [0.2, 1.0, 1.7])
@pytest.mark.parametrize("k", [1, 3, 40])
def test_curvature_moment(k, p):
    exact = integrate.quad(lambda z: (z - k) * (k + 1 - z) * z ** (-1 - p), k, k + 1, epsrel=1e-13)[0]
    assert float(_curvature_moment(k, p)) == pytest.approx(exact, rel=1e-9)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_marchaud_weights_positive_for_long_histories(alpha):
    beta, w_last = marchaud_weights(10_000, alpha)
    assert beta[0] == 0.0
    assert np.all(beta[1:] > 0.0)
    assert w_last > 0.0


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("n", [1, 2, 7, 300])
def test_marchaud_weights_exact_on_linear_data(alpha, n):
    # u(t) = t is reproduced by linear interpolation, so the sampled part is the
    # exact integral of z * z^(-1-alpha) over [0, n]
    beta, w_last = marchaud_weights(n, alpha)
    m = np.arange(n)
    total = float(np.dot(beta[1:], m[1:])) + w_last * n
    assert total == pytest.approx(n ** (1 - alpha) / (1 - alpha), rel=1e-12)


def test_marchaud_weights_empty_history():
    beta, w_last = marchaud_weights(0, 0.5)
    assert w_last == 0.0 and not beta.any()


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_marchaud_diagonal(alpha):
    assert marchaud_diagonal(alpha) == pytest.approx(1 / (1 - alpha) + 1 / alpha)


@pytest.mark.parametrize("s", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("kappa", [1, 2])
def test_space_weights_sum_to_total(s, kappa):
    h = 0.05
    c, total = space_coefficients(400, h, s, kappa)
    assert float(np.sum(c)) + float(space_tail(400, h, s, kappa)) == pytest.approx(total, rel=1e-12)


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_space_tail_matches_remainders(s):
    h = 0.1
    c, total = space_coefficients(300, h, s)
    k = np.arange(1, 200)
    np.testing.assert_allclose(space_tail(k, h, s), space_remainders(c, total)[k], rtol=1e-9)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_space_weights_monotone_and_positive(s):
    c, _ = space_coefficients(500, 1.0, s)
    assert np.all(c[1:] > 0)
    assert np.all(np.diff(c[1:]) <= 0)


@pytest.mark.parametrize("s", [0.3, 0.6])
def test_space_weights_scale_with_h(s):
    c1, t1 = space_coefficients(50, 1.0, s)
    c2, t2 = space_coefficients(50, 0.1, s)
    np.testing.assert_allclose(c2, c1 * 0.1 ** (-2 * s))
    assert t2 == pytest.approx(t1 * 0.1 ** (-2 * s))


@pytest.mark.parametrize("s", [0.3, 0.6])
def test_uncorrected_inner_zone_is_exact_taylor_term(s):
    # without the correction, c1 carries the inner-zone mass kappa^(2-2s)/(2-2s)
    c, _ = space_coefficients(10, 1.0, s, kappa=1, corrected=False)
    wa, _ = hat_weights(1.0, 2.0, 2 * s)
    assert c[1] == pytest.approx(float(wa) + 1 / (2 - 2 * s))


def test_space_tail_below_inner_radius_needs_total():
    with pytest.raises(ValueError):
        space_tail(np.array([0, 1]), 0.1, 0.5, kappa=2)


def test_kernel_tail_and_c_alpha():
    assert kernel_tail(2.0, 0.5) == pytest.approx(integrate.quad(lambda z: z**-1.5, 2.0, np.inf)[0])
    assert c_alpha(0.5) == pytest.approx(0.5 / math.sqrt(math.pi))
