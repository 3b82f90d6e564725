"""Executable checks of interface-design principles: linearity, continuity,
symmetry, lattice reachability and completeness."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .dynamics import RobotState, wrap_angle
from .interface import ActionSpace, LinearInterfaceMap, operator_space

EPS = 1e-12
AXES = ("head", "body")


@dataclass(frozen=True)
class PrincipleReport:
    name: str
    passed: bool
    statistic: float
    samples: int
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.statistic):
            raise ValueError(f"{self.name}: statistic must be finite")
        if self.samples < 1:
            raise ValueError(f"{self.name}: samples must be >= 1")


def _points(bounds: ActionSpace, samples: int, rng_seed, points):
    if points is not None:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != 2 or len(pts) == 0:
            raise ValueError("points must have shape (n, 2)")
        return pts
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return bounds.sample(np.random.default_rng(rng_seed), samples)


def linearity_residual(
    map: LinearInterfaceMap, bounds: ActionSpace, samples: int, rng_seed=0,
    *, clamped: bool = False, points=None,
) -> float:
    """max ||g(2a) - 2 g(a)|| / (||2 g(a)|| + eps) over sampled actions.

    Unclamped outputs by default; ``clamped=True`` exposes saturation.
    """
    a = _points(bounds, samples, rng_seed, points)
    g = map if clamped else map.raw
    ga, g2a = g(a), g(2.0 * a)
    num = np.linalg.norm(g2a - 2.0 * ga, axis=1)
    den = np.linalg.norm(2.0 * ga, axis=1) + EPS
    return float(np.max(num / den))


def continuity_modulus(
    map: LinearInterfaceMap, bounds: ActionSpace, samples: int, rng_seed=0
) -> float:
    """Largest observed ||g(a1) - g(a2)|| / ||a1 - a2|| over ``samples`` random
    pairs of clamped outputs. Nearly coincident pairs are redrawn."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = np.random.default_rng(rng_seed)
    a1 = bounds.sample(rng, samples)
    a2 = bounds.sample(rng, samples)
    for _ in range(100):
        bad = np.linalg.norm(a1 - a2, axis=1) < EPS
        if not bad.any():
            break
        a2[bad] = bounds.sample(rng, int(bad.sum()))
    else:
        raise ValueError("bounds too narrow to draw distinct action pairs")
    num = np.linalg.norm(map(a1) - map(a2), axis=1)
    return float(np.max(num / np.linalg.norm(a1 - a2, axis=1)))


def _reflections(axis: str):
    if axis == "head":  # negate a_head, induced: negate w
        return np.array([-1.0, 1.0]), np.array([1.0, -1.0])
    if axis == "body":  # negate a_body, induced: negate v
        return np.array([1.0, -1.0]), np.array([-1.0, 1.0])
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def symmetry_check(
    map: LinearInterfaceMap, axis: str, samples: int, rng_seed=0,
    *, bounds: ActionSpace | None = None, points=None,
) -> float:
    """max ||g(R_a a) - R_u g(a)|| on unclamped outputs."""
    ra, ru = _reflections(axis)
    a = _points(bounds or operator_space(), samples, rng_seed, points)
    return float(np.max(np.linalg.norm(map.raw(a * ra) - map.raw(a) * ru, axis=1)))


# ---------------------------------------------------------------- reachability


@dataclass(frozen=True)
class Grid:
    """Lattice over a rectangular workspace. Lattice points sit at
    ``x_min + i*resolution``; headings at multiples of ``2*pi/headings``."""

    resolution: float = 0.25
    headings: int = 16
    workspace: tuple = ((-5.0, 5.0), (-5.0, 5.0))
    primitive_dt: float = 0.5
    substeps: int = 10

    def __post_init__(self):
        (x0, x1), (y0, y1) = self.workspace
        object.__setattr__(self, "workspace", ((float(x0), float(x1)), (float(y0), float(y1))))
        if not self.resolution > 0:
            raise ValueError("grid resolution must be positive")
        if self.headings < 1 or self.substeps < 1 or not self.primitive_dt > 0:
            raise ValueError("headings, substeps and primitive_dt must be positive")
        if not (x1 >= x0 and y1 >= y0):
            raise ValueError("empty workspace")

    @property
    def shape(self) -> tuple[int, int]:
        (x0, x1), (y0, y1) = self.workspace
        return (_round((x1 - x0) / self.resolution) + 1, _round((y1 - y0) / self.resolution) + 1)

    def cell(self, state: RobotState) -> tuple[int, int, int]:
        (x0, x1), (y0, y1) = self.workspace
        tol = 1e-9
        if not (x0 - tol <= state.x_pos <= x1 + tol and y0 - tol <= state.y_pos <= y1 + tol):
            raise ValueError(f"state ({state.x_pos}, {state.y_pos}) lies outside the workspace")
        ix = _round((state.x_pos - x0) / self.resolution)
        iy = _round((state.y_pos - y0) / self.resolution)
        k = _round(state.theta / (2 * math.pi / self.headings)) % self.headings
        return ix, iy, k

    def state(self, cell) -> RobotState:
        (x0, _), (y0, _) = self.workspace
        ix, iy, k = cell
        return RobotState(x0 + ix * self.resolution, y0 + iy * self.resolution, k * 2 * math.pi / self.headings)

    def inside(self, ix: int, iy: int) -> bool:
        nx, ny = self.shape
        return 0 <= ix < nx and 0 <= iy < ny

    def depth(self, horizon: float) -> int:
        if not horizon > 0:
            raise ValueError("horizon must be positive")
        return int(math.floor(horizon / self.primitive_dt + 1e-9))


def _round(x: float) -> int:
    return int(math.floor(x + 0.5))


def _unicycle(s, u):
    return np.array([u[0] * math.cos(s[2]), u[0] * math.sin(s[2]), u[1]])


def _rk4(f, s, u, dt, steps):
    h = dt / steps
    for _ in range(steps):
        k1 = f(s, u)
        k2 = f(s + 0.5 * h * k1, u)
        k3 = f(s + 0.5 * h * k2, u)
        k4 = f(s + h * k3, u)
        s = s + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return s


def primitive_table(controls, grid: Grid, dynamics: Callable | None = None):
    """Lattice offsets ``(dix, diy, dk)`` of each control held for one
    primitive interval, indexed ``[heading][control]``. Offsets are computed
    from the origin so every lattice point sees the same motion."""
    f = dynamics or _unicycle
    table = []
    for k in range(grid.headings):
        th = k * 2 * math.pi / grid.headings
        row = []
        for u in np.asarray(controls, dtype=float):
            end = _rk4(f, np.array([0.0, 0.0, th]), u, grid.primitive_dt, grid.substeps)
            dk = _round((wrap_angle(end[2]) - wrap_angle(th)) / (2 * math.pi / grid.headings))
            row.append((_round(end[0] / grid.resolution), _round(end[1] / grid.resolution), dk))
        table.append(tuple(dict.fromkeys(row)))
    return table


def reachable_cells(controls, start_cell, depth: int, grid: Grid, dynamics=None) -> set:
    """All lattice cells reachable from ``start_cell`` in at most ``depth`` primitives."""
    table = primitive_table(controls, grid, dynamics)
    seen = {tuple(start_cell)}
    frontier = deque([(tuple(start_cell), 0)])
    while frontier:
        (ix, iy, k), d = frontier.popleft()
        if d == depth:
            continue
        for dix, diy, dk in table[k]:
            nxt = (ix + dix, iy + diy, (k + dk) % grid.headings)
            if nxt not in seen and grid.inside(nxt[0], nxt[1]):
                seen.add(nxt)
                frontier.append((nxt, d + 1))
    return seen


def reachable(
    robot_bounds: ActionSpace, x0: RobotState, x1: RobotState, horizon: float,
    grid: Grid = Grid(), dynamics=None, controls=None,
) -> bool:
    """Breadth-first lattice search with motion primitives at the lower, middle
    and upper value of each ``robot_bounds`` axis (or the explicit ``controls``)."""
    c0, c1 = grid.cell(x0), grid.cell(x1)
    depth = grid.depth(horizon)
    if c0 == c1:
        return True
    prims = robot_bounds.lattice_points() if controls is None else controls
    return c1 in reachable_cells(prims, c0, depth, grid, dynamics)


def induced_controls(map: LinearInterfaceMap, operator_bounds: ActionSpace) -> np.ndarray:
    """``{clamp(G a)}`` over the lattice points of ``operator_bounds``, deduplicated."""
    out = []
    for u in map(operator_bounds.lattice_points()):
        if not any(np.array_equal(u, q) for q in out):
            out.append(u)
    return np.array(out)


def completeness_check(
    map: LinearInterfaceMap, operator_bounds: ActionSpace, robot_bounds: ActionSpace,
    sample_pairs: int, horizon: float, grid: Grid = Grid(), rng_seed=0,
    *, pairs: Sequence[tuple[RobotState, RobotState]] | None = None,
    max_attempts: int | None = None, dynamics=None,
) -> PrincipleReport:
    """Fraction of u-reachable lattice pairs that stay reachable through ``map``."""
    if sample_pairs < 1:
        raise ValueError("sample_pairs must be >= 1")
    depth = grid.depth(horizon)
    robot_prims = robot_bounds.lattice_points()
    op_prims = induced_controls(map, operator_bounds)
    cache_u, cache_a = {}, {}

    def reach(cache, prims, c0, c1):
        if c0 not in cache:
            cache[c0] = reachable_cells(prims, c0, depth, grid, dynamics)
        return c1 in cache[c0]

    if pairs is not None:
        cells = [(grid.cell(a), grid.cell(b)) for a, b in pairs]
        chosen = [p for p in cells if reach(cache_u, robot_prims, *p)]
        attempts = len(cells)
    else:
        rng = np.random.default_rng(rng_seed)
        nx, ny = grid.shape
        chosen, attempts = [], 0
        limit = max_attempts if max_attempts is not None else 200 * sample_pairs
        while len(chosen) < sample_pairs and attempts < limit:
            attempts += 1
            c0 = (int(rng.integers(nx)), int(rng.integers(ny)), int(rng.integers(grid.headings)))
            c1 = (int(rng.integers(nx)), int(rng.integers(ny)), int(rng.integers(grid.headings)))
            if reach(cache_u, robot_prims, c0, c1):
                chosen.append((c0, c1))
    if not chosen:
        raise ValueError("no u-reachable pairs found; enlarge the horizon or workspace")
    kept = sum(reach(cache_a, op_prims, c0, c1) for c0, c1 in chosen)
    fraction = kept / len(chosen)
    return PrincipleReport(
        "completeness", fraction == 1.0, fraction, len(chosen),
        {"preserved": kept, "attempts": attempts, "induced_controls": len(op_prims)},
    )


def evaluate_principles(
    map: LinearInterfaceMap, operator_bounds: ActionSpace, samples: int = 1000, rng_seed=0,
    *, completeness: dict | None = None, tol: float = 1e-9,
) -> list[PrincipleReport]:
    """Standard report set. ``completeness`` holds keyword arguments for
    :func:`completeness_check` (robot bounds come from the map); omit to skip it."""
    reports = []
    lin = linearity_residual(map, operator_bounds, samples, rng_seed)
    reports.append(PrincipleReport("linearity", lin < tol, lin, samples))
    lip = continuity_modulus(map, operator_bounds, max(samples, 2), rng_seed)
    sigma = float(np.linalg.svd(map.G, compute_uv=False)[0])
    reports.append(
        PrincipleReport("continuity", lip <= sigma + 1e-6, lip, max(samples, 2), {"sigma_max": sigma})
    )
    for axis in AXES:
        asym = symmetry_check(map, axis, samples, rng_seed, bounds=operator_bounds)
        reports.append(PrincipleReport(f"symmetry_{axis}", asym < tol, asym, samples))
    if completeness is not None:
        reports.append(
            completeness_check(map, operator_bounds, map.robot_bounds, rng_seed=rng_seed, **completeness)
        )
    return reports
