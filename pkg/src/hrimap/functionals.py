"""Cost terms evaluated on sampled trajectories.

All integrals use left-endpoint rectangles over the trajectory's intervals,
which is exact for the piecewise-constant signals produced by ``integrate``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import RobotState, Trajectory, wrap_angle
from .interface import orthogonality_distance

__all__ = [
    "CostWeights",
    "CostBreakdown",
    "Trajectory",
    "terminal_cost",
    "effort_cost",
    "arc_length",
    "mean_curvature",
    "total_cost",
]

TERMS = ("terminal", "effort", "arc_length", "orthogonality")


def _check_spd(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2) or not np.all(np.isfinite(M)):
        raise ValueError("M must be a finite 2x2 matrix")
    if not np.allclose(M, M.T, rtol=0, atol=tol * max(1.0, np.abs(M).max())):
        raise ValueError("M must be symmetric")
    if np.linalg.eigvalsh(M).min() <= 0:
        raise ValueError("M must be positive definite")
    return M


@dataclass(frozen=True)
class CostWeights:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    delta: float = 1.0
    M: np.ndarray = None

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be a finite non-negative number, got {val}")
            object.__setattr__(self, name, val)
        M = np.eye(2) if self.M is None else _check_spd(self.M).copy()
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    def as_vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta])


@dataclass(frozen=True)
class CostBreakdown:
    """Unweighted terms plus the weights they were combined with."""

    terminal: float
    effort: float
    arc_length: float
    orthogonality: float
    weights: CostWeights

    @property
    def raw(self) -> np.ndarray:
        return np.array([self.terminal, self.effort, self.arc_length, self.orthogonality])

    @property
    def weighted(self) -> dict:
        return dict(zip(TERMS, (self.weights.as_vector() * self.raw).tolist()))

    @property
    def total(self) -> float:
        return float(np.dot(self.weights.as_vector(), self.raw))


def _require_samples(traj: Trajectory, n: int):
    if len(traj) < n:
        raise ValueError(f"trajectory needs at least {n} samples, has {len(traj)}")


def terminal_cost(traj: Trajectory, x_final: RobotState) -> float:
    """Squared distance of the last state to ``x_final`` with a wrapped heading error."""
    _require_samples(traj, 1)
    d = traj.states[-1] - x_final.as_array()
    d[2] = wrap_angle(d[2])
    return float(d @ d)


def effort_cost(traj: Trajectory, M) -> float:
    """Quadrature of ``a^T M a`` over the trajectory's intervals."""
    _require_samples(traj, 1)
    M = _check_spd(M)
    if traj.actions is None:
        raise ValueError("trajectory carries no operator actions")
    a = traj.actions
    q = np.einsum("ij,jk,ik->i", a, M, a)
    return float(q @ traj.dts)


def arc_length(traj: Trajectory, positions_only: bool = False) -> float:
    """Summed state-space chord length; heading steps use wrapped differences."""
    _require_samples(traj, 2)
    d = np.diff(traj.states, axis=0)
    d[:, 2] = wrap_angle(d[:, 2])
    if positions_only:
        d = d[:, :2]
    return float(np.sqrt((d * d).sum(axis=1)).sum())


def _is_uniform(dts: np.ndarray, rtol: float = 1e-9) -> bool:
    return bool(np.all(np.abs(dts - dts[0]) <= rtol * dts[0]))


def mean_curvature(traj: Trajectory) -> float:
    """Time-average of ``||x''||`` from second central differences.

    Heading is unwrapped before differencing. The interior values are
    integrated with the trapezoid rule, reusing the nearest interior stencil at
    both endpoints so a constant curvature is reproduced exactly. A trailing
    shortened step is left out.
    """
    _require_samples(traj, 3)
    dts = traj.dts
    s = traj.states.copy()
    duration = traj.duration
    # a grid from integrate() may end with one shortened step; drop it
    if not _is_uniform(dts) and len(dts) > 2 and _is_uniform(dts[:-1]) and dts[-1] < dts[0]:
        dts, s = dts[:-1], s[:-1]
        duration = float(traj.times[-2] - traj.times[0])
    if not _is_uniform(dts):
        raise ValueError("mean_curvature needs a uniform time grid")
    h = dts[0]
    s[:, 2] = np.unwrap(s[:, 2])
    acc = (s[2:] - 2.0 * s[1:-1] + s[:-2]) / (h * h)
    kappa = np.sqrt((acc * acc).sum(axis=1))
    integral = h * (kappa.sum() + 0.5 * kappa[0] + 0.5 * kappa[-1])
    return float(integral / duration)


def total_cost(
    traj: Trajectory,
    x_final: RobotState,
    G,
    weights: CostWeights,
    positions_only: bool = False,
) -> tuple:
    """Weighted objective ``alpha*terminal + beta*effort + gamma*arc + delta*dist(G, O(2))``.

    Returns ``(total, CostBreakdown)``.
    """
    bd = CostBreakdown(
        terminal=terminal_cost(traj, x_final),
        effort=effort_cost(traj, weights.M),
        arc_length=arc_length(traj, positions_only=positions_only),
        orthogonality=orthogonality_distance(G),
        weights=weights,
    )
    return bd.total, bd
