from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdual.core import FracParams, Separable, SpaceGrid
from fracdual.principles import (
    PrincipleTolerance,
    antisym_averaging_experiment,
    antisymmetric_barrier,
    antisymmetric_kernel_integral,
    appendix_tables,
    averaging_effect_experiment,
    check_antisym_max_principle,
    check_max_principle,
    counterexample_experiment,
    kernel_integral,
    moving_plane_scan,
    narrow_region_experiment,
    planted_dip_profile,
    random_antisymmetric_problem,
    random_max_principle_problem,
    static_history,
)
from fracdual.solver import Problem, ReactionSpec, SolveConfig, run_antisymmetric, run_ivp

P = FracParams(0.5, 0.5)


def test_tolerance_invariants():
    with pytest.raises(ValueError):
        PrincipleTolerance(hypothesis_tol=0.0)


# -- bounded-domain checkers ------------------------------------------------------


def test_zero_field_holds():
    grid = SpaceGrid(-1.0, 1.0, 21, "interval", (-0.5, 0.5))
    traj = run_ivp(Problem(P, grid, SolveConfig(0.1, 5))).history
    rep = check_max_principle(traj, (0.0, 0.5), params=P)
    assert rep.verdict == "holds"
    assert rep.data["min_u"] == 0.0 and abs(rep.data["min_operator"]) < 1e-12


def test_nonnegative_data_run_holds():
    grid = SpaceGrid(-1.0, 1.0, 41, "interval", (-0.5, 0.5))
    from fracdual.core import FunctionDescriptor

    ext = Separable(FunctionDescriptor("gaussian_bump", (1.0, 0.8, 0.2)))
    traj = run_ivp(Problem(P, grid, SolveConfig(0.05, 10), ReactionSpec(), Separable.constant(0.0), ext)).history
    rep = check_max_principle(traj, (0.0, 0.5), params=P)
    assert rep.hypotheses_ok and rep.verdict == "holds"


def test_window_validation():
    grid = SpaceGrid(-1.0, 1.0, 21, "interval", (-0.5, 0.5))
    traj = run_ivp(Problem(P, grid, SolveConfig(0.1, 5))).history
    with pytest.raises(ValueError):
        check_max_principle(traj, (0.3, 0.3), params=P)
    with pytest.raises(ValueError):
        check_max_principle(traj, (0.0, 5.0), params=P)


def test_counterexample_reports_the_failed_hypothesis():
    rep = counterexample_experiment(P)
    assert rep.verdict == "inconclusive"
    by_name = {h.description: h.satisfied for h in rep.hypotheses}
    assert by_name["u >= 0 in Omega for t <= t1"] is False
    assert rep.data["dalpha_nonneg"]
    assert rep.data["min_u"] == pytest.approx(-1.0)
    assert rep.data["min_u_time"] == pytest.approx(1.5 * math.pi)
    sweep = rep.data["min_dalpha_by_R"]
    assert all(v >= 0 for v in sweep.values())


def test_increasing_profile_gives_nonnegative_w():
    grid = SpaceGrid(0.0, 10.0, 101, "half_space_truncation")
    traj = static_history(grid, np.where(grid.nodes > 0, np.arctan(grid.nodes), 0.0))
    for lam in (2.0, 3.5, 4.5):
        rep = check_antisym_max_principle(
            traj.with_levels(np.vstack([traj.levels, traj.levels])), lam, (0.0, 1.0), params=P,
            region=lambda x: x > 0.5,
        )
        assert rep.data["min_w"] >= 0.0


def test_even_field_gives_zero_w():
    grid = SpaceGrid(-3.0, 3.0, 61, "interval", (-3.0, 3.0))
    levels = np.exp(-grid.nodes**2)
    traj = static_history(grid, levels)
    traj = traj.with_levels(np.vstack([levels, levels]))
    rep = check_antisym_max_principle(traj, 0.0, (0.0, 1.0), params=P, region=lambda x: np.abs(x) < 2.0)
    # mirrored nodes agree up to rounding of the lattice coordinates
    assert rep.data["min_w"] == pytest.approx(0.0, abs=1e-15)


def test_reflection_compatibility():
    grid = SpaceGrid(0.0, 1.0, 11, "interval", (0.0, 1.0))
    traj = static_history(grid, np.zeros(11))
    with pytest.raises(ValueError, match="reflection"):
        check_antisym_max_principle(traj.with_levels(np.zeros((2, 11))), 0.52, (0.0, 1.0), params=P)


@settings(max_examples=15)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_plain_runs_never_violate(seed):
    pr = random_max_principle_problem(np.random.default_rng(seed), max_nodes=60)
    traj = run_ivp(pr).history
    rep = check_max_principle(traj, (pr.t_start, float(traj.times[-1])), params=pr.params)
    assert rep.verdict != "violated"
    assert rep.data["min_u"] >= -1e-10


@settings(max_examples=15)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_antisymmetric_runs_stay_nonnegative(seed):
    pr = random_antisymmetric_problem(np.random.default_rng(seed), max_nodes=60)
    w, _ = run_antisymmetric(pr)
    assert w.levels[:, pr.grid.interior_mask].min() >= -1e-10
    assert w.antisymmetry_residual() <= 1e-12


# -- narrow region ---------------------------------------------------------------


def test_narrow_region_zero_coefficient_every_width():
    rep = narrow_region_experiment(0.2, 0.0, lambda x: 0.0 * x, l_sweep=(0.05, 1.0, 5.0))
    assert rep.verdict == "holds"
    assert all(row["min_w"] >= -1e-8 for row in rep.data["rows"])
    assert rep.data["l_star"] == 5.0


def test_narrow_region_small_width_holds():
    rep = narrow_region_experiment(0.05, 0.0, lambda x: 5.0 + 0.0 * x)
    assert rep.hypotheses_ok and rep.verdict == "holds"
    assert rep.data["barrier_ratio"] > 0


def test_wide_region_is_out_of_hypothesis():
    rep = narrow_region_experiment(5.0, 0.0, lambda x: 5.0 + 0.0 * x)
    assert rep.verdict == "inconclusive"
    assert not rep.data["rows"][0]["narrow"]


def test_narrow_region_validation():
    with pytest.raises(ValueError):
        narrow_region_experiment(0.0, 0.0, lambda x: 0.0 * x)
    with pytest.raises(ValueError):
        narrow_region_experiment(0.1, 0.0, lambda x: 0.0 * x, amplitude=2.0)


# -- averaging -------------------------------------------------------------------


def test_averaging_effect_holds():
    rep = averaging_effect_experiment((2.0, 4.0), 0.0, 0.5, 1.0, nodes_per_r=20, n_steps=50)
    assert rep.verdict == "holds"
    d = rep.data
    assert d["C1"] > 0 and d["u_center"] >= d["C1"]
    # the infimum over the ball sits at its far edge
    assert d["C2"] == pytest.approx(kernel_integral(-0.5, (2.0, 4.0), 0.5), rel=1e-9)


def test_averaging_degenerate_data():
    rep = averaging_effect_experiment((2.0, 4.0), 0.0, 0.5, 0.0, nodes_per_r=10, n_steps=20)
    assert rep.data["C1"] == 0.0
    assert rep.verdict == "holds" and rep.data["u_center"] >= 0.0


def test_averaging_sweep_monotone_in_distance():
    rep = averaging_effect_experiment(
        (2.0, 4.0), 0.0, 0.5, 1.0, nodes_per_r=10, n_steps=20, distances=(1.0, 2.0, 4.0, 8.0)
    )
    c1 = [row["C1"] for row in rep.data["sweep"]]
    assert rep.data["sweep_monotone"] and all(b < a for a, b in zip(c1, c1[1:]))


def test_averaging_nondecreasing_in_data_size():
    c1 = [
        averaging_effect_experiment((2.0, 4.0), 0.0, 0.5, c0, nodes_per_r=10, n_steps=20).data["C1"]
        for c0 in (0.5, 1.0, 2.0)
    ]
    assert c1[0] <= c1[1] <= c1[2]


def test_averaging_geometry_checks():
    with pytest.raises(ValueError):
        averaging_effect_experiment((0.2, 1.0), 0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        averaging_effect_experiment((2.0, 4.0), 0.0, 0.5, -1.0)


def test_kernel_integral_closed_form():
    # int_2^4 (y - x)^-2 dy at x = 0 is 1/2 - 1/4
    assert kernel_integral(0.0, (2.0, 4.0), 0.5) == pytest.approx(0.25 / math.pi, rel=1e-12)
    with pytest.raises(ValueError):
        kernel_integral(3.0, (2.0, 4.0), 0.5)


def test_antisymmetric_averaging_holds():
    rep = antisym_averaging_experiment((2.0, 4.0), 0.0, 0.5, 1.0, None, 6.0, nodes_per_r=20, n_steps=50)
    assert rep.hypotheses_ok and rep.verdict == "holds"
    assert rep.data["barrier_on_plane"] == 0.0
    assert rep.data["C1"] > 0


def test_antisymmetric_barrier_vanishes_on_plane():
    for lam in (1.0, 3.7, 6.0):
        assert antisymmetric_barrier(lam, 0.0, 0.5, 0.5, lam) == 0.0
    x = np.linspace(-1, 1, 9)
    np.testing.assert_array_equal(
        antisymmetric_barrier(x, 0.0, 0.5, 0.5, 3.0), -antisymmetric_barrier(6.0 - x, 0.0, 0.5, 0.5, 3.0)
    )


@given(x=st.floats(-1.0, 1.5), a=st.floats(2.0, 4.0), w=st.floats(0.1, 1.5))
def test_kernel_difference_is_nonnegative(x, a, w):
    assert antisymmetric_kernel_integral(x, (a, a + w), 6.0, 0.5) >= 0.0


def test_antisymmetric_averaging_geometry_checks():
    with pytest.raises(ValueError):
        antisym_averaging_experiment((2.0, 4.0), 0.0, 0.5, 1.0, None, 3.0)
    with pytest.raises(ValueError):
        antisym_averaging_experiment((2.0, 4.0), 0.0, 4.0, 1.0, None, 6.0)


# -- moving planes ---------------------------------------------------------------


def two_level(grid, values):
    h = static_history(grid, values)
    return h.with_levels(np.vstack([values, values]))


def test_scan_on_increasing_profile_returns_sentinel():
    grid = SpaceGrid(0.0, 20.0, 201, "half_space_truncation")
    traj = two_level(grid, np.where(grid.nodes > 0, np.arctan(grid.nodes), 0.0))
    lams = grid.nodes[1:101:5] + 0.0
    rep = moving_plane_scan(traj, lams)
    assert math.isinf(rep.data["lambda0"])
    assert all(row["min_w"] >= 0.0 for row in rep.data["rows"])
    assert rep.verdict == "holds"


def test_scan_finds_planted_dip():
    grid = SpaceGrid(0.0, 20.0, 201, "half_space_truncation")
    traj = two_level(grid, planted_dip_profile(grid.nodes))
    rep = moving_plane_scan(traj, grid.nodes[1:101])
    assert math.isfinite(rep.data["lambda0"])
    assert rep.verdict == "violated"
    assert rep.data["dip_location"] == pytest.approx(5.0, abs=0.5)


def test_scan_validation():
    grid = SpaceGrid(0.0, 10.0, 101, "half_space_truncation")
    traj = two_level(grid, np.zeros(101))
    with pytest.raises(ValueError):
        moving_plane_scan(traj, [])
    with pytest.raises(ValueError):
        moving_plane_scan(traj, [0.33])


def test_unsteady_trajectory_is_inconclusive():
    grid = SpaceGrid(0.0, 10.0, 101, "half_space_truncation")
    a = np.where(grid.nodes > 0, np.arctan(grid.nodes), 0.0)
    traj = static_history(grid, a).with_levels(np.vstack([a, 2 * a]))
    assert moving_plane_scan(traj, [2.0]).verdict == "inconclusive"


# -- appendix --------------------------------------------------------------------


def test_appendix_tables_shape():
    tab = appendix_tables(alphas=(0.5,))
    assert len(tab["cutoff_bounds"]) == 1 and tab["cutoff_bounds"][0]["strict"]
    assert [row["lambda"] for row in tab["scaling_errors"]] == [0.5, 2.0, 0.25]
