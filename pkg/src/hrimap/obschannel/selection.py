from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .frames import ImageFrame, bits_required
from .information import RGB, preserved_info
from .transforms import Pipeline, apply_transform, as_pipeline, pipeline_name

TIE_TOL = 1e-12


@dataclass(frozen=True)
class ChannelBudget:
    """Piecewise-constant bits-per-frame schedule.

    ``bits[i]`` holds from ``starts[i]`` until the next start; times before the
    first start use ``bits[0]``.
    """

    starts: tuple[float, ...]
    bits: tuple[int, ...]

    def __post_init__(self):
        starts = tuple(float(s) for s in self.starts)
        bits = tuple(int(b) for b in self.bits)
        if not starts or len(starts) != len(bits):
            raise ValueError("budget needs matching, non-empty start and bit lists")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("budget start times must be strictly increasing")
        if any(b <= 0 for b in bits):
            raise ValueError("budget bits must be positive")
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def constant(cls, bits: int) -> "ChannelBudget":
        return cls((0.0,), (bits,))

    @classmethod
    def from_pairs(cls, pairs) -> "ChannelBudget":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __call__(self, t: float) -> int:
        i = bisect.bisect_right(self.starts, t) - 1
        return self.bits[max(i, 0)]


class Selection(NamedTuple):
    transform: Pipeline
    index: int
    bits: int
    information: float
    over_budget: bool

    @property
    def name(self) -> str:
        return pipeline_name(self.transform)


def evaluate_candidates(candidates, frame: ImageFrame, bins=None, color_mode=RGB):
    """``(pipeline, bits, mutual information)`` for each candidate."""
    rows = []
    for h in candidates:
        pipe = as_pipeline(h)
        bits = bits_required(apply_transform(pipe, frame))
        rows.append((pipe, bits, preserved_info(pipe, frame, bins, color_mode)))
    return rows


def select_transform(
    candidates: Sequence,
    frame: ImageFrame,
    budget: ChannelBudget,
    t: float,
    bins: int | None = None,
    color_mode: str = RGB,
) -> Selection:
    """Best information-preserving candidate that fits ``budget(t)``.

    Ties on information go to fewer bits, then to list order. When nothing
    fits, the cheapest candidate is returned with ``over_budget`` set.
    """
    if not candidates:
        raise ValueError("no candidates")
    cap = budget(t)
    rows = evaluate_candidates(candidates, frame, bins, color_mode)
    best = None
    for i, (pipe, bits, info) in enumerate(rows):
        if bits > cap:
            continue
        if best is None:
            best = i
            continue
        _, bbits, binfo = rows[best]
        if info > binfo + TIE_TOL or (abs(info - binfo) <= TIE_TOL and bits < bbits):
            best = i
    if best is not None:
        pipe, bits, info = rows[best]
        return Selection(pipe, best, bits, info, False)
    cheapest = min(range(len(rows)), key=lambda i: (rows[i][1], i))
    pipe, bits, info = rows[cheapest]
    return Selection(pipe, cheapest, bits, info, True)
