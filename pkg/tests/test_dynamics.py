import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hrimap.dynamics import (
    AffineDiffeomorphism,
    RobotControl,
    RobotState,
    SingularMapError,
    integrate,
    pullback_derivative,
    time_grid,
    unicycle_derivative,
    wrap_angle,
)

finite = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize(
    "state, control, expected",
    [
        ((0, 0, 0), (1, 0), [1, 0, 0]),
        ((0, 0, math.pi / 2), (2, 1), [0, 2, 1]),
        ((3, -1, math.pi / 4), (math.sqrt(2), 0.5), [1, 1, 0.5]),
    ],
)
def test_unicycle_derivative_examples(state, control, expected):
    out = unicycle_derivative(RobotState(*state), RobotControl(*control))
    assert np.allclose(out, expected, atol=1e-12)


def test_non_finite_inputs_rejected():
    with pytest.raises(ValueError):
        RobotState(0, math.nan, 0)
    with pytest.raises(ValueError):
        RobotControl(math.inf, 0)


@given(st.floats(-100, 100, allow_nan=False))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)
    assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)


def test_wrap_keeps_pi():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi


def test_zero_control_is_stationary():
    x0 = RobotState(1.5, -2.0, 0.3)
    tr = integrate(x0, RobotControl(0, 0), 3.0, 0.1)
    assert np.all(tr.states == x0.as_array())


def test_straight_line():
    tr = integrate(RobotState(0, 0, 0), RobotControl(1, 0), 1.0, 0.05)
    assert np.allclose(tr.states[-1], [1, 0, 0], atol=1e-9)


def test_sample_count_and_last_time():
    tr = integrate(RobotState(0, 0, 0), RobotControl(1, 0), 1.0, 0.3)
    assert len(tr) == math.ceil(1.0 / 0.3) + 1
    assert tr.times[-1] == 1.0


def _closure_error(dt):
    tr = integrate(RobotState(0, 0, 0), RobotControl(1, 1), 2 * math.pi, dt)
    f = tr.states[-1]
    return math.hypot(f[0], f[1]), abs(wrap_angle(f[2]))


def test_unit_circle_closure():
    pos, head = _closure_error(1e-3)
    assert pos < 1e-3 and head < 1e-3


def test_fourth_order_convergence():
    # coarse steps keep the error well above rounding
    errs = [_closure_error(dt)[0] for dt in (0.2, 0.1, 0.05)]
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_trajectory_matches_closed_form_circle():
    tr = integrate(RobotState(0, 0, 0), RobotControl(1, 1), 3.0, 1e-3)
    t = tr.times
    exact = np.column_stack([np.sin(t), 1 - np.cos(t)])
    assert np.abs(tr.states[:, :2] - exact).max() < 1e-9


@given(st.floats(-math.pi, math.pi), st.floats(-2, 2), st.floats(-1.5, 1.5))
def test_rotational_equivariance(phi, v, w):
    R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    base = integrate(RobotState(0.5, -0.2, 0.1), RobotControl(v, w), 2.0, 0.05)
    p = R @ np.array([0.5, -0.2])
    rot = integrate(RobotState(p[0], p[1], 0.1 + phi), RobotControl(v, w), 2.0, 0.05)
    back = rot.states[:, :2] @ R
    assert np.abs(back - base.states[:, :2]).max() < 1e-9
    assert np.abs(wrap_angle(rot.states[:, 2] - phi - base.states[:, 2])).max() < 1e-9


def test_knot_signal_holds_per_interval():
    knots = np.array([[1.0, 0.0], [0.0, 0.0]])
    tr = integrate(RobotState(0, 0, 0), knots, 2.0, 0.1)
    assert np.allclose(tr.states[-1], [1, 0, 0], atol=1e-12)
    assert np.allclose(tr.controls[:10], [1, 0]) and np.allclose(tr.controls[10:], 0)


@pytest.mark.parametrize("duration, dt", [(1.0, 0.0), (1.0, -0.1), (-1.0, 0.1)])
def test_integrate_rejects_bad_grid(duration, dt):
    with pytest.raises(ValueError):
        integrate(RobotState(0, 0, 0), RobotControl(0, 0), duration, dt)


def test_zero_duration():
    tr = integrate(RobotState(1, 2, 0), RobotControl(1, 1), 0.0, 0.1)
    assert len(tr) == 1 and tr.controls.shape == (0, 2)


def test_trajectory_arrays_are_read_only():
    tr = integrate(RobotState(0, 0, 0), RobotControl(1, 0), 1.0, 0.1)
    with pytest.raises(ValueError):
        tr.states[0, 0] = 5.0


def test_time_grid_is_uniform():
    t = time_grid(10.0, 0.05)
    assert len(t) == 201 and np.allclose(np.diff(t), 0.05)


def test_pullback_identity_is_plain_derivative():
    psi = AffineDiffeomorphism(np.eye(3))
    z = np.array([1.0, 2.0, 0.3])
    u = RobotControl(1.2, -0.4)
    out = pullback_derivative(psi, z, u)
    assert np.array_equal(out, unicycle_derivative(RobotState(*z), u))


def test_pullback_scaling_positions():
    psi = AffineDiffeomorphism(2 * np.eye(2))
    out = pullback_derivative(psi, np.zeros(3), RobotControl(1, 0))
    assert np.allclose(out, [0.5, 0, 0])


def test_pullback_singular():
    with pytest.raises(SingularMapError):
        pullback_derivative(AffineDiffeomorphism(np.zeros((2, 2))), np.zeros(3), RobotControl(1, 0))


@given(st.floats(0.5, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_pullback_of_affine_offset(scale, ox, oy):
    psi = AffineDiffeomorphism(scale * np.eye(2), offset=np.array([ox, oy]))
    z = np.array([0.1, 0.2, 0.7])
    u = RobotControl(1.0, 0.3)
    f = unicycle_derivative(RobotState(*psi(z)), u)
    out = pullback_derivative(psi, z, u)
    assert np.allclose(out[:2] * scale, f[:2]) and math.isclose(out[2], f[2])
