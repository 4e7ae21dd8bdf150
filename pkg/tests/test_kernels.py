from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdual import kernels
from fracdual.kernels import BACKENDS

backends = pytest.mark.parametrize("backend", sorted(BACKENDS))


def _naive_history(levels, n, beta, w_last):
    out = w_last * levels[0].copy()
    for m in range(1, n):
        out += beta[m] * levels[n - m]
    return out


@backends
@given(n=st.integers(1, 30), nodes=st.integers(1, 12), seed=st.integers(0, 2**16))
def test_history_sum(backend, n, nodes, seed):
    rng = np.random.default_rng(seed)
    levels = rng.normal(size=(n + 1, nodes))
    beta = rng.random(n + 1)
    got = BACKENDS[backend]["history_sum"](levels, n, beta, 0.7)
    np.testing.assert_allclose(got, _naive_history(levels, n, beta, 0.7), rtol=1e-12, atol=1e-12)


@backends
@pytest.mark.parametrize("n", [3, 8, 25])
def test_lattice_matrix(backend, n):
    c = 1.0 / (1.0 + np.arange(n + 1.0))
    M = BACKENDS[backend]["lattice_matrix"](c, n)
    for i in range(n):
        for j in range(n):
            assert M[i, j] == (0.0 if i == j else -c[abs(i - j)])


@backends
@given(K=st.integers(1, 15), seed=st.integers(0, 2**16))
def test_gather_apply(backend, K, seed):
    rng = np.random.default_rng(seed)
    ext = rng.normal(size=2 * K + 10)
    pos = np.arange(K, K + 10, dtype=np.int64)
    c = rng.random(K + 1)
    want = [sum(c[k] * (2 * ext[p] - ext[p + k] - ext[p - k]) for k in range(1, K + 1)) for p in pos]
    np.testing.assert_allclose(BACKENDS[backend]["gather_apply"](ext, pos, c, K), want, rtol=1e-12, atol=1e-12)


def test_public_wrappers_cast_inputs():
    levels = [[1, 2], [3, 4], [5, 6]]
    np.testing.assert_allclose(kernels.history_sum(levels, 2, [0, 2, 0], 1.0), [1 + 2 * 3, 2 + 2 * 4])
    np.testing.assert_allclose(kernels.lattice_matrix([0, 1, 2], 2), [[0, -1], [-1, 0]])


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("off", "numpy")])
def test_env_var_forces_numpy(flag, expected):
    env = {**os.environ, "FRACDUAL_NUMBA": flag}
    code = "from fracdual._accel import backend_name; print(backend_name())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


@pytest.mark.skipif("numba" not in BACKENDS, reason="numba not installed")
def test_numba_is_default_when_available():
    env = {k: v for k, v in os.environ.items() if k != "FRACDUAL_NUMBA"}
    code = "from fracdual._accel import backend_name; print(backend_name())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"
