"""Turn a noisy normalized trace into classified phases.

The pipeline is farthest-point polyline simplification followed by
slope classification: segments with near-zero slope become constant
phases, the rest raising or dropping by sign. Short low-shift phases
(pen jitter) are absorbed into a neighbor so genuine breaks survive on
shift magnitude rather than duration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .trace_model import NormalizedTrace, Point

CONSTANT = "constant"
RAISING = "raising"
DROPPING = "dropping"

DEFAULT_TOLERANCE = 0.02  # presence units
DEFAULT_EPS_SLOPE = 0.1  # presence units per full timeline
DEFAULT_MIN_DURATION = 0.01  # fraction of the timeline

#: Phases shorter than min_duration are absorbed only when their shift is
#: also below this bound (2x the simplification tolerance by default), so
#: short sharp drops are never swallowed.
DEFAULT_MAX_ABSORB_SHIFT = 2 * DEFAULT_TOLERANCE

#: Duplicate time values (vertical pen strokes) are nudged apart by this
#: much so every segment has a finite slope.
_TIME_NUDGE = 1e-9


@dataclass(frozen=True)
class Segment:
    """A straight piece of the simplified polyline."""

    start: Point
    end: Point
    slope: float


@dataclass(frozen=True)
class Phase:
    """A classified stretch of the drawing."""

    kind: str  # constant | raising | dropping
    start: Point
    end: Point

    @property
    def duration(self) -> float:
        return self.end.t - self.start.t

    @property
    def shift(self) -> float:
        return self.end.p - self.start.p


def _chord_distance(pt: Point, a: Point, b: Point) -> float:
    # distance to the chord segment (projection clamped to it), so the
    # every-sample-within-tolerance guarantee holds for the polyline itself
    dx = b.t - a.t
    dy = b.p - a.p
    norm2 = dx * dx + dy * dy
    if norm2 == 0.0:
        return math.hypot(pt.t - a.t, pt.p - a.p)
    s = ((pt.t - a.t) * dx + (pt.p - a.p) * dy) / norm2
    s = max(0.0, min(1.0, s))
    return math.hypot(pt.t - (a.t + s * dx), pt.p - (a.p + s * dy))


def _strictly_increasing(points: list[Point]) -> list[Point]:
    out: list[Point] = []
    prev_t = -math.inf
    for pt in points:
        t = pt.t if pt.t > prev_t else prev_t + _TIME_NUDGE
        out.append(Point(t, pt.p))
        prev_t = t
    return out


def simplify(trace: NormalizedTrace, tolerance: float = DEFAULT_TOLERANCE) -> list[Segment]:
    """Simplify the trace polyline by recursive farthest-point splitting.

    Endpoints are kept exactly; every input sample stays within
    ``tolerance`` perpendicular distance of the output polyline.
    """
    if len(trace.samples) < 2:
        raise ValueError("simplify needs at least 2 samples")
    points = _strictly_increasing([Point(t, p) for t, p in trace.samples])

    keep = [False] * len(points)
    keep[0] = keep[-1] = True
    stack = [(0, len(points) - 1)]
    while stack:
        first, last = stack.pop()
        max_dist = tolerance
        index = -1
        a, b = points[first], points[last]
        for i in range(first + 1, last):
            dist = _chord_distance(points[i], a, b)
            if dist > max_dist:
                index = i
                max_dist = dist
        if index >= 0:
            keep[index] = True
            if index - first > 1:
                stack.append((first, index))
            if last - index > 1:
                stack.append((index, last))

    vertices = [pt for pt, k in zip(points, keep) if k]
    return [_segment(a, b) for a, b in zip(vertices, vertices[1:])]


def _segment(a: Point, b: Point) -> Segment:
    return Segment(a, b, (b.p - a.p) / (b.t - a.t))


def _kind(slope: float, eps_slope: float) -> str:
    if abs(slope) < eps_slope:
        return CONSTANT
    return RAISING if slope > 0 else DROPPING


class _Run:
    """Working phase: a chord over a slice of the simplified vertices."""

    __slots__ = ("kind", "vertices")

    def __init__(self, kind: str, vertices: list[Point]):
        self.kind = kind
        self.vertices = vertices

    @property
    def start(self) -> Point:
        return self.vertices[0]

    @property
    def end(self) -> Point:
        return self.vertices[-1]

    @property
    def duration(self) -> float:
        return self.end.t - self.start.t

    @property
    def shift(self) -> float:
        return self.end.p - self.start.p

    def chord_error(self) -> float:
        a, b = self.start, self.end
        return max(
            (_chord_distance(v, a, b) for v in self.vertices[1:-1]),
            default=0.0,
        )


def classify(
    segments: list[Segment],
    eps_slope: float = DEFAULT_EPS_SLOPE,
    min_duration: float = DEFAULT_MIN_DURATION,
    *,
    max_absorb_shift: float = DEFAULT_MAX_ABSORB_SHIFT,
) -> list[Phase]:
    """Label contiguous segments and merge them into phases.

    A segment is constant when ``|slope| < eps_slope``, otherwise
    raising or dropping by sign. Adjacent same-kind phases merge.
    Phases shorter than ``min_duration`` whose shift is below
    ``max_absorb_shift`` are absorbed into the neighbor whose merged
    chord deviates less from the underlying polyline (ties merge left),
    and the result is reclassified from the merged chord.
    """
    if not segments:
        return []
    for a, b in zip(segments, segments[1:]):
        if a.end != b.start:
            raise ValueError("segments must be contiguous")

    runs = [_Run(_kind(seg.slope, eps_slope), [seg.start, seg.end]) for seg in segments]
    runs = _merge_same_kind(runs)

    while len(runs) > 1:
        index = next(
            (
                i
                for i, run in enumerate(runs)
                if run.duration < min_duration and abs(run.shift) < max_absorb_shift
            ),
            None,
        )
        if index is None:
            break
        runs = _absorb(runs, index, eps_slope)
        runs = _merge_same_kind(runs)

    return [Phase(run.kind, run.start, run.end) for run in runs]


def _merge_same_kind(runs: list[_Run]) -> list[_Run]:
    merged: list[_Run] = []
    for run in runs:
        if merged and merged[-1].kind == run.kind:
            merged[-1].vertices.extend(run.vertices[1:])
        else:
            merged.append(_Run(run.kind, list(run.vertices)))
    return merged


def _absorb(runs: list[_Run], index: int, eps_slope: float) -> list[_Run]:
    target = runs[index]

    def merged_with(neighbor: _Run, left: bool) -> _Run:
        vertices = (
            neighbor.vertices + target.vertices[1:]
            if left
            else target.vertices + neighbor.vertices[1:]
        )
        run = _Run("", vertices)
        run.kind = _kind(run.shift / run.duration, eps_slope)
        return run

    candidates: list[tuple[float, int, _Run]] = []
    if index > 0:
        run = merged_with(runs[index - 1], left=True)
        candidates.append((run.chord_error(), 0, run))
    if index < len(runs) - 1:
        run = merged_with(runs[index + 1], left=False)
        candidates.append((run.chord_error(), 1, run))
    # ties merge left: side 0 = left wins at equal error
    _error, side, merged = min(candidates, key=lambda c: (c[0], c[1]))
    if side == 0:
        return runs[: index - 1] + [merged] + runs[index + 1 :]
    return runs[:index] + [merged] + runs[index + 2 :]


def segment_phases(
    trace: NormalizedTrace,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    eps_slope: float = DEFAULT_EPS_SLOPE,
    min_duration: float = DEFAULT_MIN_DURATION,
) -> list[Phase]:
    """Full segmentation: simplify, then classify into tiling phases."""
    segments = simplify(trace, tolerance)
    return classify(
        segments,
        eps_slope,
        min_duration,
        max_absorb_shift=2 * tolerance,
    )
