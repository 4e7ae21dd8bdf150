"""Operator-level sweeps against closed-form values, shared by the CLI and tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FracParams, FunctionDescriptor, SpaceGrid
from .frac_space import SpaceQuadratureConfig, SpatialField, frac_laplacian_field
from .frac_time import TimeQuadratureConfig, TimeTrace, marchaud

__all__ = ["EigenRow", "eigenfunction_rows", "sine_symbol_errors"]


@dataclass(frozen=True)
class EigenRow:
    alpha: float
    rate: float
    t: float
    value: float
    exact: float

    @property
    def rel_error(self) -> float:
        return abs(self.value - self.exact) / abs(self.exact)


def eigenfunction_rows(
    alphas: Sequence[float],
    rates: Sequence[float],
    *,
    dt: float = 1e-3,
    depth: float = 20.0,
    probes: Sequence[float] | None = None,
    cfg: TimeQuadratureConfig | None = None,
) -> list[EigenRow]:
    """``d^alpha e^(rate t)`` from ``depth`` time units of samples against ``rate^alpha e^(rate t)``.

    The samples start at ``-depth``; older values come from the exact exponential.
    """
    probes = np.linspace(0.1, 1.0, 10) if probes is None else np.asarray(probes, dtype=float)
    t_end = float(np.max(probes))
    rows = []
    for a in alphas:
        p = FracParams(float(a), 0.5)
        for k in rates:
            e = FunctionDescriptor("exponential", (1.0, float(k)))
            trace = TimeTrace.from_function(e, -depth, t_end, dt)
            for t in probes:
                # snap to the sample lattice
                t = float(trace.t_start + round((t - trace.t_start) / dt) * dt)
                rows.append(EigenRow(float(a), float(k), t, marchaud(trace, t, p, cfg), k**a * math.exp(k * t)))
    return rows


def sine_symbol_errors(
    s: float,
    probes: Sequence[float] = (-2.0, -1.0, 0.3, 1.0, 2.5),
    *,
    z_max: float = 200.0,
    half_width: float = 5.0,
    n: int = 1001,
) -> list[tuple[float, float, float]]:
    """``(x, (-Delta)^s sin (x), sin x)`` from the grid evaluator with the sine as exterior."""
    grid = SpaceGrid(-half_width, half_width, n, "interval", (-half_width, half_width))
    sine = FunctionDescriptor("sine", (1.0, 1.0, 0.0))
    field_ = SpatialField.from_descriptor(grid, sine, refine=False)
    idx = np.array([grid.index_of(x) for x in probes])
    vals = frac_laplacian_field(field_, FracParams(0.5, s), SpaceQuadratureConfig(z_max=z_max), nodes=idx)
    return [(float(x), float(v), math.sin(x)) for x, v in zip(probes, vals)]
