import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrimap.dynamics import RobotState
from hrimap.interface import ActionSpace, LinearInterfaceMap, operator_space, robot_space
from oracles import tree_reachable

from hrimap.props import (
    Grid,
    PrincipleReport,
    completeness_check,
    continuity_modulus,
    evaluate_principles,
    induced_controls,
    linearity_residual,
    reachable,
    symmetry_check,
)

ANTI = np.array([[0.24, 2.15], [1.73, -0.62]])
PURE_ANTI = np.array([[0.0, 2.15], [1.73, 0.0]])
WIDE_OPS = operator_space(head=(-3.0, 3.0), body=(-3.0, 3.0))


def box(v, w):
    return ActionSpace(("v", "w"), (v[0], w[0]), (v[1], w[1]))


# ---------------------------------------------------------------- linearity / continuity / symmetry


def test_report_invariants():
    with pytest.raises(ValueError):
        PrincipleReport("x", True, math.nan, 1)
    with pytest.raises(ValueError):
        PrincipleReport("x", True, 0.0, 0)


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.integers(0, 1000))
def test_linear_maps_are_homogeneous(entries, seed):
    m = LinearInterfaceMap(np.reshape(entries, (2, 2)))
    assert linearity_residual(m, operator_space(), 200, seed) < 1e-12


def test_saturation_breaks_homogeneity():
    m = LinearInterfaceMap(np.eye(2) * 5)
    assert linearity_residual(m, operator_space(), 200, 0, clamped=True) > 0
    assert linearity_residual(m, operator_space(), 200, 0) < 1e-12


def test_linearity_at_origin_is_zero():
    m = LinearInterfaceMap(ANTI)
    assert linearity_residual(m, operator_space(), 1, points=[[0.0, 0.0]]) == 0


@pytest.mark.parametrize("G, bound", [(np.eye(2), 1.0), ([[0, 2], [2, 0]], 2.0), (np.zeros((2, 2)), 0.0)])
def test_continuity_examples(G, bound):
    m = LinearInterfaceMap(G, robot_space((-100, 100), (-100, 100)))
    est = continuity_modulus(m, operator_space(), 1000, 0)
    assert est <= bound + 1e-9
    if bound == 0:
        assert est == 0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.integers(0, 100))
def test_continuity_bounded_by_largest_singular_value(entries, seed):
    G = np.reshape(entries, (2, 2))
    est = continuity_modulus(LinearInterfaceMap(G), operator_space(), 500, seed)
    assert est <= np.linalg.svd(G, compute_uv=False)[0] + 1e-9


def test_continuity_needs_two_samples():
    with pytest.raises(ValueError):
        continuity_modulus(LinearInterfaceMap(np.eye(2)), operator_space(), 1, 0)


def test_continuity_redraws_on_degenerate_bounds():
    flat = operator_space(head=(0.0, 0.0), body=(0.0, 0.0))
    with pytest.raises(ValueError):
        continuity_modulus(LinearInterfaceMap(np.eye(2)), flat, 5, 0)


def test_symmetry_examples():
    assert symmetry_check(LinearInterfaceMap([[0, 2], [2, 0]]), "head", 500, 0) < 1e-12
    assert symmetry_check(LinearInterfaceMap(np.eye(2)), "head", 500, 0) > 0.1
    assert symmetry_check(LinearInterfaceMap(np.eye(2)), "head", 1, points=[[0, 0]]) == 0
    with pytest.raises(ValueError):
        symmetry_check(LinearInterfaceMap(np.eye(2)), "diagonal", 5, 0)


def test_body_reflection_on_anti_diagonal_map():
    assert symmetry_check(LinearInterfaceMap(PURE_ANTI), "body", 500, 0) < 1e-12
    assert symmetry_check(LinearInterfaceMap(ANTI), "body", 500, 0) > 0


def test_checkers_are_deterministic():
    m = LinearInterfaceMap(ANTI)
    for fn in (
        lambda s: linearity_residual(m, operator_space(), 50, s, clamped=True),
        lambda s: continuity_modulus(m, operator_space(), 50, s),
        lambda s: symmetry_check(m, "body", 50, s),
    ):
        assert fn(3) == fn(3)


# ---------------------------------------------------------------- reachability


def test_grid_cells():
    g = Grid()
    assert g.cell(RobotState(0, 0, 0)) == (20, 20, 0)
    assert g.cell(RobotState(0.13, -0.12, -math.pi / 8)) == (21, 20, 15)
    assert g.state(g.cell(RobotState(1.0, 2.0, math.pi / 2))) == RobotState(1.0, 2.0, math.pi / 2)
    with pytest.raises(ValueError):
        g.cell(RobotState(6, 0, 0))
    with pytest.raises(ValueError):
        Grid(resolution=0)
    with pytest.raises(ValueError):
        g.depth(0)


def test_reachable_examples():
    unit = box((-1, 1), (-1, 1))
    x0 = RobotState(0, 0, 0)
    assert reachable(unit, x0, x0, 0.5)
    assert reachable(unit, x0, RobotState(1, 0, 0), 2.0)
    assert not reachable(box((0, 0), (-1, 1)), x0, RobotState(1, 0, 0), 5.0)


def test_reachable_rejects_outside_states():
    with pytest.raises(ValueError):
        reachable(robot_space(), RobotState(0, 0, 0), RobotState(50, 0, 0), 1.0)


def test_reachable_respects_horizon():
    unit = box((-1, 1), (-1, 1))
    assert not reachable(unit, RobotState(0, 0, 0), RobotState(3, 0, 0), 1.0)


def test_reachable_matches_exhaustive_tree_on_small_workspace():
    grid = Grid(resolution=0.25, headings=8, workspace=((0.0, 1.0), (0.0, 1.0)))
    assert grid.shape == (5, 5)
    bounds = box((-0.5, 0.5), (-math.pi / 2, math.pi / 2))
    controls = bounds.lattice_points()
    rng = np.random.default_rng(0)
    horizon = 1.5
    outcomes = []
    for _ in range(50):
        c0 = tuple(int(v) for v in (rng.integers(5), rng.integers(5), rng.integers(8)))
        c1 = tuple(int(v) for v in (rng.integers(5), rng.integers(5), rng.integers(8)))
        got = reachable(bounds, grid.state(c0), grid.state(c1), horizon, grid)
        assert got == tree_reachable(controls, grid, c0, c1, grid.depth(horizon)), (c0, c1)
        outcomes.append(got)
    assert any(outcomes) and not all(outcomes)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.5, 2.0), st.floats(0.0, 2.0))
def test_reachable_monotone_in_horizon(seed, t1, extra):
    grid = Grid(resolution=0.5, headings=8, workspace=((-2, 2), (-2, 2)))
    rng = np.random.default_rng(seed)
    x0 = RobotState(*rng.uniform(-2, 2, 2), rng.uniform(-3, 3))
    x1 = RobotState(*rng.uniform(-2, 2, 2), rng.uniform(-3, 3))
    b = box((-1, 1), (-1, 1))
    if reachable(b, x0, x1, t1, grid):
        assert reachable(b, x0, x1, t1 + extra, grid)


# ---------------------------------------------------------------- completeness


SMALL = Grid(resolution=0.5, headings=8, workspace=((-2.0, 2.0), (-2.0, 2.0)))


def test_induced_controls_cover_robot_box_with_wide_operator_bounds():
    m = LinearInterfaceMap(PURE_ANTI)
    got = {tuple(u) for u in induced_controls(m, WIDE_OPS)}
    assert got == {tuple(u) for u in robot_space().lattice_points()}


def test_completeness_surjective_map():
    rep = completeness_check(LinearInterfaceMap(PURE_ANTI), WIDE_OPS, robot_space(), 20, 1.5, SMALL, 0)
    assert rep.statistic == 1.0 and rep.passed and rep.samples == 20


def test_completeness_zero_map():
    pairs = [
        (RobotState(0, 0, 0), RobotState(0, 0, 0)),
        (RobotState(0, 0, 0), RobotState(-1.5, 0, 0)),
        (RobotState(-1, 1, 0), RobotState(-1, 1, 0)),
        (RobotState(0, 0, 0), RobotState(1.5, 0, 0)),
    ]
    rep = completeness_check(LinearInterfaceMap(np.zeros((2, 2))), operator_space(), robot_space(), 4, 1.0, SMALL, pairs=pairs)
    assert rep.samples == 4
    assert rep.statistic == 0.5 and not rep.passed


def test_completeness_identical_pairs_always_preserved():
    pairs = [(RobotState(x, y, 0), RobotState(x, y, 0)) for x, y in [(0, 0), (1, -1), (-2, 2)]]
    for G in (np.zeros((2, 2)), np.eye(2), ANTI):
        rep = completeness_check(LinearInterfaceMap(G), operator_space(), robot_space(), 3, 1.0, SMALL, pairs=pairs)
        assert rep.statistic == 1.0


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.integers(0, 100))
def test_completeness_fraction_in_unit_interval(entries, seed):
    rep = completeness_check(LinearInterfaceMap(np.reshape(entries, (2, 2))), operator_space(), robot_space(), 5, 1.0, SMALL, seed)
    assert 0.0 <= rep.statistic <= 1.0


def test_completeness_is_deterministic():
    m = LinearInterfaceMap(ANTI)
    a = completeness_check(m, operator_space(), robot_space(), 10, 1.0, SMALL, 4)
    assert a == completeness_check(m, operator_space(), robot_space(), 10, 1.0, SMALL, 4)


def test_evaluate_principles_on_reference_map():
    reps = {r.name: r for r in evaluate_principles(LinearInterfaceMap(ANTI), operator_space(), 2000, 0)}
    assert reps["linearity"].passed and reps["continuity"].passed
    assert not reps["symmetry_head"].passed  # the small diagonal entries break it
    reps = {r.name: r for r in evaluate_principles(LinearInterfaceMap(PURE_ANTI), operator_space(), 2000, 0)}
    assert reps["symmetry_head"].passed and reps["symmetry_body"].passed
