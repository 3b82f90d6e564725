"""Scripted teleoperation sessions: head/body streams, command smoothing, the
interface map and unicycle dynamics, plus an optional bandwidth-limited camera
channel."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import RobotState, _rk4_rollout
from .interface import LinearInterfaceMap
from .obschannel import ChannelBudget, ImageFrame, Selection, select_transform

LEFT, RIGHT, NONE = "left", "right", "none"
DEFAULT_RATE_HZ = 20.0


@dataclass(frozen=True)
class SmootherConfig:
    buffer_size: int = 10
    turn_threshold: float = 0.02  # rad
    head_rate: float = 0.5  # rad/s emitted for a left/right decision

    def __post_init__(self):
        if int(self.buffer_size) != self.buffer_size or self.buffer_size < 1:
            raise ValueError("buffer_size must be an integer >= 1")
        if not self.turn_threshold > 0:
            raise ValueError("turn_threshold must be positive")
        if not (math.isfinite(self.head_rate) and self.head_rate >= 0):
            raise ValueError("head_rate must be finite and non-negative")


@dataclass(frozen=True, eq=False)
class OperatorScript:
    """Uniformly ticked operator streams.

    ``head`` holds head-orientation samples (rad) unless ``actions`` is given,
    in which case the ``(n, 2)`` rows ``[a_head, a_body]`` are replayed directly
    and smoothing is bypassed. ``depth`` is an optional pass-through channel.
    """

    times: np.ndarray
    head: np.ndarray | None = None
    body: np.ndarray | None = None
    actions: np.ndarray | None = None
    depth: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) == 0:
            raise ValueError("script needs at least one tick")
        if len(t) > 1:
            d = np.diff(t)
            if np.any(d <= 0):
                raise ValueError("script timestamps must be strictly increasing")
            if np.max(np.abs(d - d.mean())) > 1e-6 * max(1.0, abs(d.mean())):
                raise ValueError("script timestamps must be uniform")
        fields = {"times": t}
        if self.actions is not None:
            a = np.asarray(self.actions, dtype=float)
            if a.shape != (len(t), 2):
                raise ValueError(f"actions must have shape ({len(t)}, 2)")
            fields["actions"] = a
        else:
            if self.head is None or self.body is None:
                raise ValueError("script needs head and body streams or an action replay")
            for name in ("head", "body"):
                arr = np.asarray(getattr(self, name), dtype=float)
                if arr.shape != t.shape:
                    raise ValueError(f"{name} stream length differs from the tick count")
                fields[name] = arr
        if self.depth is not None:
            arr = np.asarray(self.depth, dtype=float)
            if arr.shape != t.shape:
                raise ValueError("depth stream length differs from the tick count")
            fields["depth"] = arr
        for name, arr in fields.items():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, head, body, rate_hz: float = DEFAULT_RATE_HZ, depth=None) -> "OperatorScript":
        n = len(head)
        return cls(np.arange(n) / rate_hz, head, body, depth=depth)

    @property
    def replay(self) -> bool:
        return self.actions is not None

    def __len__(self):
        return len(self.times)


def _differences(samples: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.diff(samples)])


def moving_averages(samples, cfg: SmootherConfig) -> np.ndarray:
    """Per-tick mean of the last ``buffer_size`` orientation differences
    (zero-padded while the buffer fills)."""
    s = np.asarray(samples, dtype=float)
    buf = deque([0.0] * cfg.buffer_size, maxlen=cfg.buffer_size)
    out = np.empty(len(s))
    for i, d in enumerate(_differences(s)):
        if i > 0:
            buf.append(d)
        out[i] = math.fsum(buf) / cfg.buffer_size
    return out


def smooth_commands(samples, cfg: SmootherConfig = SmootherConfig()) -> list[str]:
    """Ternary turn decision per tick. Decisions start once the buffer holds
    ``buffer_size`` real differences; positive averages mean a leftward turn."""
    s = np.asarray(samples, dtype=float)
    if s.ndim != 1 or len(s) < 2:
        raise ValueError("smoothing needs at least two orientation samples")
    m = moving_averages(s, cfg)
    out = []
    for i, mi in enumerate(m):
        if i < cfg.buffer_size:
            out.append(NONE)
        elif mi > cfg.turn_threshold:
            out.append(LEFT)
        elif mi < -cfg.turn_threshold:
            out.append(RIGHT)
        else:
            out.append(NONE)
    return out


@dataclass(frozen=True)
class Channel:
    """Camera channel: candidate transforms, a budget and timestamped frames."""

    candidates: Sequence
    budget: ChannelBudget
    frames: Sequence[ImageFrame]
    bins: int | None = None


@dataclass(frozen=True)
class SessionRecord:
    t: float
    head: float
    body: float
    average: float
    decision: str
    a_head: float
    a_body: float
    v: float
    w: float
    clamped: bool
    depth: float
    x: float
    y: float
    theta: float
    frame: int
    transform: str
    bits: int
    information: float
    over_budget: bool


FIELDS = tuple(SessionRecord.__dataclass_fields__)


@dataclass(frozen=True)
class SessionLog:
    records: tuple[SessionRecord, ...]
    selections: tuple[tuple[float, Selection], ...] = ()

    def __len__(self):
        return len(self.records)

    @property
    def states(self) -> np.ndarray:
        return np.array([[r.x, r.y, r.theta] for r in self.records])

    @property
    def final_state(self) -> RobotState:
        r = self.records[-1]
        return RobotState(r.x, r.y, r.theta)

    def to_jsonl(self) -> str:
        """One JSON object per record, keys in ``FIELDS`` order."""
        lines = [json.dumps({k: getattr(r, k) for k in FIELDS}, allow_nan=False) for r in self.records]
        return "".join(line + "\n" for line in lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in self.records:
            w.writerow([_cell(getattr(r, k)) for k in FIELDS])
        return buf.getvalue()

    @classmethod
    def from_jsonl(cls, text: str) -> "SessionLog":
        recs = [SessionRecord(**json.loads(line)) for line in text.splitlines() if line.strip()]
        return cls(tuple(recs))


def _cell(x):
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, float):
        return repr(x)
    return x


def run_session(
    script: OperatorScript,
    map: LinearInterfaceMap,
    smoother: SmootherConfig = SmootherConfig(),
    x0: RobotState = RobotState(0.0, 0.0, 0.0),
    channel: Channel | None = None,
) -> SessionLog:
    """Simulate a session. Record ``k`` holds the state at tick ``k`` and the
    command emitted there, which is held until the next tick."""
    n = len(script)
    if script.replay:
        acts = np.array(script.actions)
        avg = np.zeros(n)
        decisions = ["replay"] * n
        head = acts[:, 0]
        body = acts[:, 1]
    else:
        head, body = script.head, script.body
        if n >= 2:
            avg = moving_averages(head, smoother)
            decisions = smooth_commands(head, smoother)
        else:
            avg, decisions = np.zeros(1), [NONE]
        sign = {LEFT: 1.0, RIGHT: -1.0, NONE: 0.0}
        acts = np.column_stack([[sign[d] * smoother.head_rate for d in decisions], body])
    raw = map.raw(acts)
    u = map(acts)
    h = np.diff(script.times)
    states = _rk4_rollout(
        x0.x_pos, x0.y_pos, x0.theta,
        np.ascontiguousarray(u[:-1, 0]), np.ascontiguousarray(u[:-1, 1]), h,
    )
    depth = script.depth if script.depth is not None else np.zeros(n)

    frame_of_tick = np.full(n, -1)
    selections = []
    if channel is not None:
        for i, f in enumerate(channel.frames):
            selections.append((f.timestamp, select_transform(channel.candidates, f, channel.budget, f.timestamp, channel.bins)))
        stamps = np.array([f.timestamp for f in channel.frames])
        if len(stamps):
            frame_of_tick = np.searchsorted(stamps, script.times, side="right") - 1

    records = []
    for k in range(n):
        fi = int(frame_of_tick[k])
        sel = selections[fi][1] if fi >= 0 else None
        records.append(
            SessionRecord(
                t=float(script.times[k]), head=float(head[k]), body=float(body[k]),
                average=float(avg[k]), decision=decisions[k],
                a_head=float(acts[k, 0]), a_body=float(acts[k, 1]),
                v=float(u[k, 0]), w=float(u[k, 1]), clamped=bool(np.any(u[k] != raw[k])),
                depth=float(depth[k]),
                x=float(states[k, 0]), y=float(states[k, 1]), theta=float(states[k, 2]),
                frame=fi, transform=sel.name if sel else "",
                bits=sel.bits if sel else 0, information=float(sel.information) if sel else 0.0,
                over_budget=bool(sel.over_budget) if sel else False,
            )
        )
    return SessionLog(tuple(records), tuple(selections))


def replay_script(times, actions) -> OperatorScript:
    """Script that feeds ``actions`` (one row per tick) straight to the map."""
    return OperatorScript(np.asarray(times, dtype=float), actions=np.asarray(actions, dtype=float))


def generated_script(kind: str, duration: float, rate_hz: float = DEFAULT_RATE_HZ, **kw) -> OperatorScript:
    """Synthetic operator streams.

    ``still``: constant head, ``body_speed`` forward. ``ramp``: head turns at
    ``head_rate`` rad/s. ``sine``: head sways with ``amplitude`` and ``period``.
    """
    n = int(round(duration * rate_hz)) + 1
    t = np.arange(n) / rate_hz
    body = np.full(n, float(kw.get("body_speed", 0.0)))
    if kind == "still":
        head = np.zeros(n)
    elif kind == "ramp":
        head = float(kw.get("head_rate", 0.5)) * t
    elif kind == "sine":
        head = float(kw.get("amplitude", 0.5)) * np.sin(2 * math.pi * t / float(kw.get("period", 4.0)))
    else:
        raise ValueError(f"unknown script kind {kind!r}")
    return OperatorScript(t, head, body)
