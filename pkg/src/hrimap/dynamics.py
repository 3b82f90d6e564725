"""Planar unicycle kinematics, RK4 rollouts and affine pullbacks.

States are ``(x_pos, y_pos, theta)`` with theta wrapped to (-pi, pi].
Controls are ``(v, w)``: forward speed in m/s and turn rate in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numba
import numpy as np

TWO_PI = 2.0 * math.pi

# Tolerance used when mapping a step start time onto its control knot.
_KNOT_EPS = 1e-9


def wrap_angle(a):
    """Wrap an angle (scalar or array) into (-pi, pi]."""
    if np.ndim(a) == 0:
        a = float(a)
        return a - TWO_PI * math.ceil((a - math.pi) / TWO_PI)
    a = np.asarray(a, dtype=float)
    return a - TWO_PI * np.ceil((a - math.pi) / TWO_PI)


def _require_finite(name, values):
    if not np.all(np.isfinite(np.asarray(values, dtype=float))):
        raise ValueError(f"{name} must be finite, got {values!r}")


@dataclass(frozen=True)
class RobotState:
    x_pos: float
    y_pos: float
    theta: float

    def __post_init__(self):
        _require_finite("RobotState", (self.x_pos, self.y_pos, self.theta))
        object.__setattr__(self, "x_pos", float(self.x_pos))
        object.__setattr__(self, "y_pos", float(self.y_pos))
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x_pos, self.y_pos, self.theta])

    @classmethod
    def from_array(cls, arr) -> "RobotState":
        x, y, th = (float(c) for c in arr)
        return cls(x, y, th)


@dataclass(frozen=True)
class RobotControl:
    v: float
    w: float

    def __post_init__(self):
        _require_finite("RobotControl", (self.v, self.w))
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "w", float(self.w))

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.w])


def _frozen(arr, shape_tail, name):
    arr = np.array(arr, dtype=float)
    if arr.ndim != 1 + len(shape_tail) or arr.shape[1:] != shape_tail:
        raise ValueError(f"{name} has shape {arr.shape}, expected (n, {shape_tail})")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Trajectory:
    """Sampled rollout.

    ``states`` has one row per time sample; ``controls`` and ``actions`` have
    one row per interval (the value held over ``[times[i], times[i+1])``).
    ``actions`` is ``None`` for rollouts that were not driven by an operator.
    """

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    actions: Optional[np.ndarray] = None

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        if times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        states = _frozen(self.states, (3,), "states")
        controls = _frozen(np.reshape(self.controls, (-1, 2)), (2,), "controls")
        if len(states) != len(times):
            raise ValueError("len(states) must equal len(times)")
        if len(times) and len(controls) != len(times) - 1:
            raise ValueError("len(controls) must equal len(times) - 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "controls", controls)
        if self.actions is not None:
            actions = _frozen(np.reshape(self.actions, (-1, 2)), (2,), "actions")
            if len(actions) != len(controls):
                raise ValueError("len(actions) must equal len(controls)")
            object.__setattr__(self, "actions", actions)

    def __len__(self):
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0]) if len(self.times) else 0.0

    @property
    def dts(self) -> np.ndarray:
        return np.diff(self.times)

    def state(self, i: int) -> RobotState:
        return RobotState.from_array(self.states[i])

    @property
    def final_state(self) -> RobotState:
        return self.state(-1)


@dataclass(frozen=True)
class AffineDiffeomorphism:
    """x = linear_part @ z + offset.

    A 2x2 linear part acts on positions only and leaves the heading alone.
    """

    linear_part: np.ndarray
    offset: np.ndarray = field(default=None)

    def __post_init__(self):
        A = np.array(self.linear_part, dtype=float)
        if A.shape not in ((2, 2), (3, 3)):
            raise ValueError(f"linear_part must be 2x2 or 3x3, got {A.shape}")
        n = A.shape[0]
        b = np.zeros(n) if self.offset is None else np.array(self.offset, dtype=float)
        if b.shape != (n,):
            raise ValueError(f"offset must have length {n}")
        _require_finite("linear_part", A)
        _require_finite("offset", b)
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "linear_part", A)
        object.__setattr__(self, "offset", b)

    @property
    def jacobian(self) -> np.ndarray:
        """Full 3x3 Jacobian on (x, y, theta)."""
        A = self.linear_part
        if A.shape == (3, 3):
            return A
        J = np.eye(3)
        J[:2, :2] = A
        return J

    @property
    def full_offset(self) -> np.ndarray:
        return self.offset if self.offset.shape == (3,) else np.append(self.offset, 0.0)

    def is_singular(self, tol: float = 1e-9) -> bool:
        return abs(np.linalg.det(self.linear_part)) < tol

    def __call__(self, z) -> np.ndarray:
        return self.jacobian @ np.asarray(z, dtype=float) + self.full_offset


class SingularMapError(ValueError):
    """Raised when a coordinate change has a (numerically) singular Jacobian."""


def unicycle_derivative(state: RobotState, control: RobotControl) -> np.ndarray:
    """Return ``[v cos(theta), v sin(theta), w]``."""
    th = state.theta
    return np.array([control.v * math.cos(th), control.v * math.sin(th), control.w])


@numba.njit(cache=True)
def _rk4_rollout(x0, y0, th0, v, w, h):
    n = v.shape[0]
    out = np.empty((n + 1, 3))
    out[0, 0] = x0
    out[0, 1] = y0
    out[0, 2] = th0
    x = x0
    y = y0
    th = th0
    for i in range(n):
        vi = v[i]
        wi = w[i]
        hi = h[i]
        # classical RK4 stages; theta-dot is constant over a step
        c1 = math.cos(th)
        s1 = math.sin(th)
        t2 = th + 0.5 * hi * wi
        c2 = math.cos(t2)
        s2 = math.sin(t2)
        t3 = th + 0.5 * hi * wi
        c3 = math.cos(t3)
        s3 = math.sin(t3)
        t4 = th + hi * wi
        c4 = math.cos(t4)
        s4 = math.sin(t4)
        x = x + hi / 6.0 * vi * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        y = y + hi / 6.0 * vi * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
        th = th + hi * wi
        th = th - 2.0 * math.pi * math.ceil((th - math.pi) / (2.0 * math.pi))
        out[i + 1, 0] = x
        out[i + 1, 1] = y
        out[i + 1, 2] = th
    return out


ControlSignal = Union[RobotControl, Sequence, np.ndarray, Callable[[float], RobotControl]]


def time_grid(duration: float, dt: float) -> np.ndarray:
    """Uniform grid ``0, dt, 2dt, ...`` ending exactly at ``duration``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not duration >= 0:
        raise ValueError(f"duration must be non-negative, got {duration}")
    n = math.ceil(duration / dt - _KNOT_EPS) if duration > 0 else 0
    t = np.arange(n + 1, dtype=float) * dt
    t[-1] = duration
    return t


def knot_index(times, duration: float, n_knots: int) -> np.ndarray:
    """Index of the piecewise-constant knot active at each time in ``times``."""
    knot_len = duration / n_knots
    idx = np.floor(np.asarray(times) / knot_len + _KNOT_EPS).astype(int)
    return np.clip(idx, 0, n_knots - 1)


def sample_signal(signal, step_starts: np.ndarray, duration: float) -> np.ndarray:
    """Evaluate a control/action signal at each step start; returns (n, 2)."""
    if isinstance(signal, RobotControl):
        return np.tile(signal.as_array(), (len(step_starts), 1))
    if callable(signal):
        rows = []
        for t in step_starts:
            u = signal(float(t))
            rows.append(u.as_array() if hasattr(u, "as_array") else np.asarray(u, float))
        return np.array(rows, dtype=float).reshape(-1, 2)
    knots = np.asarray(signal, dtype=float)
    if knots.ndim == 1:
        knots = knots.reshape(1, 2)
    if knots.ndim != 2 or knots.shape[1] != 2 or len(knots) == 0:
        raise ValueError("knot signal must have shape (n_knots, 2)")
    if len(step_starts) == 0:
        return np.empty((0, 2))
    return knots[knot_index(step_starts, duration, len(knots))]


def integrate(
    state0: RobotState,
    controls: ControlSignal,
    duration: float,
    dt: float,
    actions=None,
) -> Trajectory:
    """Fixed-step RK4 rollout of the unicycle under a piecewise-constant control.

    ``controls`` may be a single :class:`RobotControl`, an ``(n_knots, 2)``
    array of knots spread uniformly over ``[0, duration]``, or a callable of
    time. The control is held at its step-start value for the whole step; the
    last step is shortened so the grid ends exactly at ``duration``.
    ``actions`` (same forms) is sampled identically and stored alongside.
    """
    times = time_grid(duration, dt)
    starts = times[:-1]
    u = sample_signal(controls, starts, duration)
    _require_finite("controls", u)
    h = np.diff(times)
    states = _rk4_rollout(
        state0.x_pos, state0.y_pos, state0.theta,
        np.ascontiguousarray(u[:, 0]), np.ascontiguousarray(u[:, 1]), h,
    )
    acts = None if actions is None else sample_signal(actions, starts, duration)
    return Trajectory(times, states, u, acts)


def pullback_derivative(
    psi: AffineDiffeomorphism, operator_state, control: RobotControl
) -> np.ndarray:
    """Operator-frame velocity ``Dpsi^-1 f(psi(z), u)`` for an affine psi."""
    if psi.is_singular():
        raise SingularMapError("psi has a singular linear part")
    z = np.asarray(operator_state, dtype=float)
    if z.shape != (3,):
        raise ValueError("operator_state must have 3 components")
    _require_finite("operator_state", z)
    x = RobotState.from_array(psi(z))
    return np.linalg.solve(psi.jacobian, unicycle_derivative(x, control))
