"""Hot loops with a numba backend and a pure-numpy fallback.

Each public kernel dispatches on :data:`fracdual._accel.USE_NUMBA`.  The two
variants are kept side by side so tests and the benchmark can call both.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = ["history_sum", "lattice_matrix", "gather_apply", "BACKENDS"]


# -- history sum ------------------------------------------------------------


def _history_sum_numpy(levels: np.ndarray, n: int, beta: np.ndarray, w_last: float) -> np.ndarray:
    """``sum_{m=1}^{n-1} beta[m] levels[n-m] + w_last * levels[0]`` per node."""
    out = w_last * levels[0]
    if n > 1:
        out = out + beta[1:n] @ levels[n - 1 : 0 : -1]
    return out


def _history_sum_py(levels, n, beta, w_last):
    nodes = levels.shape[1]
    out = np.empty(nodes)
    for i in range(nodes):
        out[i] = w_last * levels[0, i]
    for m in range(1, n):
        b = beta[m]
        row = n - m
        for i in range(nodes):
            out[i] += b * levels[row, i]
    return out


# -- dense lattice matrix ---------------------------------------------------


def _lattice_matrix_numpy(c: np.ndarray, n: int) -> np.ndarray:
    """Symmetric Toeplitz block ``M[i, j] = -c[|i - j|]`` with a zero diagonal."""
    idx = np.arange(n)
    M = -c[np.abs(idx[:, None] - idx[None, :])]
    np.fill_diagonal(M, 0.0)
    return M


def _lattice_matrix_py(c, n):
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d = i - j if i > j else j - i
                M[i, j] = -c[d]
    return M


# -- pointwise operator application ----------------------------------------


def _gather_apply_numpy(ext: np.ndarray, pos: np.ndarray, c: np.ndarray, K: int) -> np.ndarray:
    """``sum_{k=1}^K c[k] (2 e[p] - e[p+k] - e[p-k])`` for every ``p`` in ``pos``."""
    centre = ext[pos]
    out = np.zeros(pos.size)
    for k in range(1, K + 1):
        out += c[k] * (2.0 * centre - ext[pos + k] - ext[pos - k])
    return out


def _gather_apply_py(ext, pos, c, K):
    out = np.zeros(pos.size)
    for j in range(pos.size):
        p = pos[j]
        e0 = 2.0 * ext[p]
        acc = 0.0
        for k in range(1, K + 1):
            acc += c[k] * (e0 - ext[p + k] - ext[p - k])
        out[j] = acc
    return out


_history_sum_nb = njit(_history_sum_py)
_lattice_matrix_nb = njit(_lattice_matrix_py)
_gather_apply_nb = njit(_gather_apply_py)

BACKENDS = {
    "numpy": {
        "history_sum": _history_sum_numpy,
        "lattice_matrix": _lattice_matrix_numpy,
        "gather_apply": _gather_apply_numpy,
    },
}
if _history_sum_nb is not None:
    BACKENDS["numba"] = {
        "history_sum": _history_sum_nb,
        "lattice_matrix": _lattice_matrix_nb,
        "gather_apply": _gather_apply_nb,
    }

_ACTIVE = BACKENDS["numba" if USE_NUMBA and "numba" in BACKENDS else "numpy"]


def history_sum(levels: np.ndarray, n: int, beta: np.ndarray, w_last: float) -> np.ndarray:
    levels = np.ascontiguousarray(levels, dtype=float)
    return _ACTIVE["history_sum"](levels, int(n), np.ascontiguousarray(beta, dtype=float), float(w_last))


def lattice_matrix(c: np.ndarray, n: int) -> np.ndarray:
    return _ACTIVE["lattice_matrix"](np.ascontiguousarray(c, dtype=float), int(n))


def gather_apply(ext: np.ndarray, pos: np.ndarray, c: np.ndarray, K: int) -> np.ndarray:
    return _ACTIVE["gather_apply"](
        np.ascontiguousarray(ext, dtype=float),
        np.ascontiguousarray(pos, dtype=np.int64),
        np.ascontiguousarray(c, dtype=float),
        int(K),
    )
