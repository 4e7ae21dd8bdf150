from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdual.core import (
    AntisymmetricField,
    Conclusion,
    ExperimentReport,
    FracParams,
    FunctionDescriptor,
    HistoryField,
    Hypothesis,
    Reflected,
    Separable,
    SpaceGrid,
    Tail,
    antisymmetric_difference,
    growth_check,
    laplacian_constant,
    reflect_point,
)

finite = st.floats(-50, 50, allow_nan=False)


# -- parameters ---------------------------------------------------------------


@pytest.mark.parametrize("alpha,s", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0), (math.nan, 0.5), (0.5, -0.2)])
def test_frac_params_reject_boundaries(alpha, s):
    with pytest.raises(ValueError):
        FracParams(alpha, s)


def test_frac_params_constants():
    p = FracParams(0.5, 0.5)
    assert p.c_alpha == pytest.approx(0.5 / math.sqrt(math.pi))
    # 1-D, s = 1/2: 2 Gamma(1) / (sqrt(pi) * 2 sqrt(pi)) = 1/pi
    assert p.c_ns == pytest.approx(1 / math.pi)


@given(a=st.floats(0.01, 0.99), s=st.floats(0.01, 0.99), n=st.sampled_from([1, 2]))
def test_constants_positive(a, s, n):
    p = FracParams(a, s, n)
    assert p.c_alpha > 0 and p.c_ns > 0
    assert p.c_ns == laplacian_constant(n, s)


def test_laplacian_constant_two_dims():
    # n = 2, s = 1/2: 2 Gamma(3/2) / (pi |Gamma(-1/2)|) = 1 / (2 pi)
    assert laplacian_constant(2, 0.5) == pytest.approx(1 / (2 * math.pi))


# -- reflection -----------------------------------------------------------------


def test_reflect_point_example():
    assert reflect_point((1.0, 0.0), 2.0) == (3.0, 0.0)


@given(lam=finite, y=finite)
def test_reflect_point_fixes_plane(lam, y):
    assert reflect_point((lam, y), lam) == pytest.approx((lam, y))


@given(x=finite, y=finite, lam=finite)
def test_reflect_point_involution(x, y, lam):
    assert reflect_point(reflect_point((x, y), lam), lam) == pytest.approx((x, y), abs=1e-9)
    assert reflect_point(reflect_point(x, lam), lam) == pytest.approx(x, abs=1e-9)


def test_reflect_point_arrays_act_on_first_coordinate():
    pts = np.array([[0.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(reflect_point(pts, 1.0), [[2.0, 1.0], [1.0, 2.0]])


# -- grids ------------------------------------------------------------------------


def test_grid_spacing_and_nodes():
    g = SpaceGrid(-1.0, 2.0, 31)
    assert g.h == pytest.approx(0.1)
    np.testing.assert_allclose(g.nodes, -1.0 + np.arange(31) * g.h)


def test_slab_mask():
    lam, l = 2.0, 0.5
    g = SpaceGrid(0.0, 4.0, 41, "slab", (lam - 2 * l, lam))
    x = g.nodes
    np.testing.assert_array_equal(g.interior_mask, (x > lam - 2 * l) & (x < lam))


def test_half_space_and_ball_masks():
    g = SpaceGrid(0.0, 2.0, 5, "half_space_truncation")
    np.testing.assert_array_equal(g.interior_mask, [False, True, True, True, True])
    b = SpaceGrid(-2.0, 2.0, 9, "ball", (0.0, 1.0))
    np.testing.assert_array_equal(b.interior_mask, np.abs(b.nodes) < 1.0)


@pytest.mark.parametrize(
    "args",
    [(0.0, 1.0, 2), (1.0, 0.0, 5), (0.0, 1.0, 5, "disk"), (0.0, 1.0, 5, "ball", (0.0,))],
)
def test_grid_rejects_bad_input(args):
    with pytest.raises(ValueError):
        SpaceGrid(*args)


def test_index_of():
    g = SpaceGrid(0.0, 1.0, 11)
    assert g.index_of(0.3) == 3
    with pytest.raises(ValueError):
        g.index_of(0.35)


def test_two_dimensional_points():
    g = SpaceGrid(-1.0, 1.0, 5, "ball", (0.0, 1.0), dim=2)
    assert g.points.shape == (5, 5, 2)
    assert g.interior_mask[2, 2] and not g.interior_mask[0, 0]


# -- descriptors ----------------------------------------------------------------


CONSTANT_TAILED = [
    FunctionDescriptor("constant", (2.5,)),
    FunctionDescriptor("ball_barrier_phi", (0.0, 1.0, 0.5)),
    FunctionDescriptor("slab_barrier_h", (1.0, 0.3, 0.5, 0.5)),
    FunctionDescriptor("cutoff_eta", (0.0, 1.0)),
    FunctionDescriptor("counterexample_u", (10.0,)),
    FunctionDescriptor("tabulated", (0.0, 1.0, 1.0, 3.0, 2.0, -1.0)),
]


@pytest.mark.parametrize("desc", CONSTANT_TAILED, ids=lambda d: d.family)
@given(offset=st.floats(0.0, 1e3))
def test_eventually_constant_tails_are_honored(desc, offset):
    t = desc.tail
    assert t.kind == "eventually_constant"
    if t.left_constant:
        assert desc(t.cutoff - offset) == t.value
    if t.right_constant:
        assert desc(t.right_cutoff + offset) == t.right_value


@pytest.mark.parametrize(
    "family,params,x,expected",
    [
        ("linear", (1.0, 2.0), 3.0, 7.0),
        ("sine", (2.0, 1.0, 0.0), math.pi / 2, 2.0),
        ("exponential", (1.0, 1.0), 1.0, math.e),
        ("gaussian_bump", (1.0, 0.0, 1.0), 1.0, math.exp(-0.5)),
        ("ball_barrier_phi", (0.0, 1.0, 0.5), 0.5, math.sqrt(0.75)),
        ("cutoff_eta", (0.0, 1.0), 0.0, 1.0),
        ("cutoff_eta", (0.0, 1.0), 2.5, 0.0),
        ("counterexample_u", (100.0,), math.pi / 2, 1.0),
        ("counterexample_u", (100.0,), -105.0, -100.0),
        ("counterexample_u", (100.0,), -3.0, -3.0),
    ],
)
def test_descriptor_values(family, params, x, expected):
    assert FunctionDescriptor(family, params)(x) == pytest.approx(expected)


def test_descriptor_planar_points():
    g = FunctionDescriptor("gaussian_bump", (1.0, 0.0, 1.0)).in_two_dims()
    assert g(np.array([1.0, 1.0])) == pytest.approx(math.exp(-1.0))


@pytest.mark.parametrize(
    "family,params",
    [("sine", (1.0,)), ("unknown", ()), ("tabulated", (1.0, 0.0, 0.0, 1.0)), ("ball_barrier_phi", (0.0, -1.0, 0.5))],
)
def test_descriptor_rejects_bad_params(family, params):
    with pytest.raises(ValueError):
        FunctionDescriptor(family, params)


@pytest.mark.parametrize("desc", CONSTANT_TAILED + [FunctionDescriptor("sine", (1.0, 2.0, 0.1))], ids=lambda d: d.family)
def test_descriptor_round_trip(desc):
    assert FunctionDescriptor.from_dict(desc.to_dict()) == desc


def test_separable_round_trip_and_slices():
    sep = Separable(FunctionDescriptor("linear", (0.0, 1.0)), FunctionDescriptor("exponential", (1.0, -1.0)))
    assert Separable.from_dict(sep.to_dict()) == sep
    assert sep.at_point(2.0)(0.0) == pytest.approx(2.0)
    assert sep.at_time(1.0)(3.0) == pytest.approx(3.0 / math.e)


def test_tail_round_trip_with_infinities():
    t = Tail("bounded", 2.0)
    assert Tail.from_dict(t.to_dict()) == t


@given(x=st.floats(-10, 10))
def test_reflected_is_odd(x):
    base = FunctionDescriptor("gaussian_bump", (1.0, 0.5, 0.7))
    r = Reflected(base, 2.0, 1.5)
    assert r(x) == pytest.approx(-r(4.0 - x), abs=1e-12)
    assert r(2.0) == 0.0


def test_reflected_tail_mirrors_constant_side():
    base = FunctionDescriptor("tabulated", (0.0, 3.0, 1.0, 1.0))
    r = Reflected(base, 2.0)
    assert r.tail.kind == "eventually_constant"
    assert (r.tail.value, r.tail.right_value, r.tail.right_cutoff) == (3.0, -3.0, 4.0)
    assert r(10.0) == -3.0


# -- fields ---------------------------------------------------------------------


def _field(values_fn, grid, n_levels=3, ext=None):
    x = grid.nodes
    levels = np.array([values_fn(x) for _ in range(n_levels)])
    ext = ext or Separable.constant(0.0)
    return HistoryField(grid, 0.0, 0.1, levels, ext, ext)


def test_history_field_validation():
    g = SpaceGrid(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        HistoryField(g, 0.0, 0.0, np.zeros((1, 5)), None, None)
    with pytest.raises(ValueError):
        HistoryField(g, 0.0, 0.1, np.zeros((1, 4)), None, None)


def test_history_field_is_read_only():
    f = _field(lambda x: x, SpaceGrid(0.0, 1.0, 5))
    with pytest.raises(ValueError):
        f.levels[0, 0] = 1.0


def test_antisymmetric_difference_linear():
    g = SpaceGrid(0.0, 2.0, 21)
    w = antisymmetric_difference(_field(lambda x: x, g), 1.0)
    np.testing.assert_allclose(w.levels[0], 2.0 * (1.0 - w.nodes), atol=1e-12)


def test_antisymmetric_difference_even_field_vanishes():
    g = SpaceGrid(0.0, 4.0, 41)
    w = antisymmetric_difference(_field(lambda x: np.cos(x - 2.0), g), 2.0)
    np.testing.assert_allclose(w.levels, 0.0, atol=1e-12)


def test_antisymmetric_difference_cubic_point():
    g = SpaceGrid(0.0, 2.0, 21)
    w = antisymmetric_difference(_field(lambda x: x**3, g), 1.0)
    assert w.levels[0][0] == pytest.approx(2.0**3 - 0.0**3)


def test_antisymmetric_difference_uses_exterior_beyond_grid():
    g = SpaceGrid(0.0, 1.0, 11, "interval", (0.0, 1.0))
    ext = Separable(FunctionDescriptor("linear", (0.0, 1.0)))
    w = antisymmetric_difference(_field(lambda x: x, g, ext=ext), 0.8)
    np.testing.assert_allclose(w.levels[0], 2.0 * (0.8 - w.nodes), atol=1e-12)


@given(lam_index=st.integers(1, 20))
def test_antisymmetry_residual_on_lattice_planes(lam_index):
    g = SpaceGrid(0.0, 2.0, 21)
    lam = lam_index * g.h / 2
    w = antisymmetric_difference(_field(np.sin, g), lam)
    assert w.antisymmetry_residual() <= 1e-12
    nodes, vals = w.mirrored()
    assert np.all(np.diff(nodes) > 0)


def test_antisymmetric_difference_rejects_outside_plane():
    with pytest.raises(ValueError):
        antisymmetric_difference(_field(np.sin, SpaceGrid(0.0, 1.0, 5)), 2.0)


def test_antisymmetric_field_mirror_signs():
    w = AntisymmetricField(1.0, np.array([0.0, 0.5, 1.0]), 0.0, 1.0, np.array([[2.0, 1.0, 0.0]]))
    nodes, vals = w.mirrored()
    np.testing.assert_allclose(nodes, [0.0, 0.5, 1.0, 1.5, 2.0])
    np.testing.assert_allclose(vals[0], [2.0, 1.0, 0.0, -1.0, -2.0])


def test_history_field_value_lookup():
    g = SpaceGrid(0.0, 1.0, 11, "interval", (0.0, 1.0))
    ext = Separable.constant(5.0)
    f = _field(lambda x: x, g, ext=ext)
    assert f.value(0.25, 0.1) == pytest.approx(0.25)
    assert f.value(3.0, 0.1) == 5.0
    assert f.value(0.5, -1.0) == 5.0


# -- growth check ------------------------------------------------------------------


def test_growth_check_nonnegative():
    assert growth_check([(x, x**2) for x in range(5)], 0.5) == (0.0, True)


@pytest.mark.parametrize("gamma", [0.3, 0.9])
def test_growth_check_power_samples(gamma):
    c_fit, ok = growth_check([(x, -abs(x) ** gamma) for x in np.linspace(-5, 5, 41)], gamma)
    assert c_fit <= 1.0 and ok


def test_growth_check_quadratic_against_brute_force():
    gamma = 1.5
    xs = np.linspace(0, 10, 101)
    c_fit, _ = growth_check([(x, -(x**2)) for x in xs], gamma)
    assert c_fit == pytest.approx(max(x**2 / (1 + x**gamma) for x in xs))


def test_growth_check_budget_and_errors():
    assert growth_check([(1.0, -10.0)], 1.0, budget=1.0) == (5.0, False)
    with pytest.raises(ValueError):
        growth_check([], 1.0)


# -- reports ----------------------------------------------------------------------


def test_report_serialization():
    rep = ExperimentReport(
        "demo",
        (Hypothesis("h", math.inf, True),),
        Conclusion("c", -0.5, "violated"),
        data={"arr": np.arange(2.0), "flag": np.bool_(True)},
    )
    d = rep.to_dict()
    assert d["hypotheses"][0]["residual"] == "inf"
    assert d["data"] == {"arr": [0.0, 1.0], "flag": True}
    assert rep.verdict == "violated" and rep.hypotheses_ok


def test_conclusion_rejects_unknown_verdict():
    with pytest.raises(ValueError):
        Conclusion("c", 0.0, "maybe")
