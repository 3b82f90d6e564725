"""Action spaces and the linear operator-to-robot interface map."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dynamics import RobotControl, _require_finite


@dataclass(frozen=True)
class ActionSpace:
    """Axis-aligned box ``prod_i [lower_i, upper_i]`` with named, unit-labelled axes."""

    names: tuple
    lower: tuple
    upper: tuple
    units: tuple = None

    def __post_init__(self):
        names = tuple(self.names)
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        units = tuple(self.units) if self.units is not None else ("",) * len(names)
        if not (len(names) == len(lower) == len(upper) == len(units)) or not names:
            raise ValueError("names, lower, upper and units must have equal, non-zero length")
        _require_finite("ActionSpace bounds", lower + upper)
        for n, lo, hi in zip(names, lower, upper):
            if not lo <= hi:
                raise ValueError(f"axis {n!r}: lower {lo} exceeds upper {hi}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "units", units)

    @property
    def ndim(self) -> int:
        return len(self.names)

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.upper)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def clip(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.ndim))

    def corners_and_center(self) -> np.ndarray:
        """All 2^n corners followed by the centre, deduplicated in order."""
        pts = [np.array(c) for c in itertools.product(*zip(self.lower, self.upper))]
        pts.append((self.lo + self.hi) / 2)
        out = []
        for p in pts:
            if not any(np.array_equal(p, q) for q in out):
                out.append(p)
        return np.array(out)

    def lattice_points(self) -> np.ndarray:
        """Every combination of lower, midpoint and upper per axis (3^n points, deduplicated)."""
        levels = [sorted({lo, (lo + hi) / 2, hi}) for lo, hi in zip(self.lower, self.upper)]
        return np.array(list(itertools.product(*levels)), dtype=float)

    def subspace(self, names: Sequence[str]) -> "ActionSpace":
        idx = [self.names.index(n) for n in names]
        return ActionSpace(
            tuple(self.names[i] for i in idx),
            tuple(self.lower[i] for i in idx),
            tuple(self.upper[i] for i in idx),
            tuple(self.units[i] for i in idx),
        )


def operator_space(head=(-1.0, 1.0), body=(-1.5, 1.5)) -> ActionSpace:
    return ActionSpace(("a_head", "a_body"), (head[0], body[0]), (head[1], body[1]), ("rad/s", "m/s"))


def robot_space(v=(-3.0, 3.0), w=(-2.0, 2.0)) -> ActionSpace:
    return ActionSpace(("v", "w"), (v[0], w[0]), (v[1], w[1]), ("m/s", "rad/s"))


@dataclass(frozen=True)
class OperatorAction:
    a_head: float
    a_body: float

    def __post_init__(self):
        _require_finite("OperatorAction", (self.a_head, self.a_body))
        object.__setattr__(self, "a_head", float(self.a_head))
        object.__setattr__(self, "a_body", float(self.a_body))

    def as_array(self) -> np.ndarray:
        return np.array([self.a_head, self.a_body])


@dataclass(frozen=True)
class LinearInterfaceMap:
    """``u = G a`` with ``a = [a_head, a_body]`` and ``u = [v, w]``, saturated to ``robot_bounds``."""

    G: np.ndarray
    robot_bounds: ActionSpace = None

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        if G.shape != (2, 2):
            raise ValueError(f"G must be 2x2, got shape {G.shape}")
        _require_finite("G", G)
        G.setflags(write=False)
        object.__setattr__(self, "G", G)
        if self.robot_bounds is None:
            object.__setattr__(self, "robot_bounds", robot_space())
        elif self.robot_bounds.ndim != 2:
            raise ValueError("robot_bounds must be two-dimensional (v, w)")

    def raw(self, a) -> np.ndarray:
        """Unclamped image of one action or a stack of actions (..., 2)."""
        return np.asarray(a, dtype=float) @ self.G.T

    def __call__(self, a) -> np.ndarray:
        return self.robot_bounds.clip(self.raw(a))


class MappedControl(NamedTuple):
    control: RobotControl
    raw: np.ndarray
    clamped: bool


def apply_interface(map: LinearInterfaceMap, a: OperatorAction) -> MappedControl:
    raw = map.raw(a.as_array())
    u = map.robot_bounds.clip(raw)
    return MappedControl(RobotControl(u[0], u[1]), raw, bool(np.any(u != raw)))


def orthogonality_distance(G) -> float:
    """Frobenius distance from G to the nearest orthogonal matrix, ``||U V^T - G||_F``."""
    G = np.asarray(G, dtype=float)
    _require_finite("G", G)
    U, _, Vt = np.linalg.svd(G)
    return float(np.linalg.norm(U @ Vt - G))
