"""Shared fixtures and independent oracles for the test suite.

Everything here is deliberately independent of the implementation
paths it checks: deviations are brute-forced over raw samples, slope
labels are recomputed per sample pair, and expected statistics are
frozen numbers or constructed-by-hand value sets.
"""

from __future__ import annotations

import math
import random

from presence_trace.analysis import (
    BipReport,
    GroundTruthEvent,
    SessionRecord,
    match_events,
)
from presence_trace.descriptive_model import BreakParams, ModelPoints, Parameters
from presence_trace.segmentation import CONSTANT, DROPPING, RAISING, Phase
from presence_trace.trace_model import (
    Annotation,
    NormalizedTrace,
    Point,
    RawTrace,
    Template,
    TraceSource,
    build_template,
)

EPS_SLOPE = 0.1
TOLERANCE = 0.02


# --- brute-force oracles ------------------------------------------------------


def point_segment_distance(pt, a, b) -> float:
    ax, ay = a
    bx, by = b
    px, py = pt
    dx, dy = bx - ax, by - ay
    norm2 = dx * dx + dy * dy
    if norm2 == 0.0:
        return math.hypot(px - ax, py - ay)
    s = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / norm2))
    return math.hypot(px - (ax + s * dx), py - (ay + s * dy))


def max_polyline_deviation(samples, vertices) -> float:
    """Largest distance of any sample from the simplified polyline."""
    worst = 0.0
    for pt in samples:
        nearest = min(
            point_segment_distance(pt, a, b) for a, b in zip(vertices, vertices[1:])
        )
        worst = max(worst, nearest)
    return worst


def brute_kind(slope: float, eps_slope: float = EPS_SLOPE) -> str:
    if abs(slope) < eps_slope:
        return CONSTANT
    return RAISING if slope > 0 else DROPPING


def phase_at(phases: list[Phase], t: float) -> Phase:
    for ph in phases:
        if ph.start.t <= t <= ph.end.t:
            return ph
    raise AssertionError(f"no phase covers t={t}")


# --- clean piecewise-linear generator -----------------------------------------
#
# Pieces are at least 0.08 long and their slopes stay outside the
# ambiguity band [eps/2, 2*eps] = [0.05, 0.2]: "constant" pieces use
# |slope| <= 0.04, sloped pieces |slope| >= 2. Adjacent pieces always
# classify differently, and the resulting corners deviate far more than
# the default simplification tolerance, so every generator breakpoint
# must survive segmentation exactly.

_MIN_PIECE = 0.08
_MAX_PIECE = 0.25
_SLOPED_MIN = 2.0
_SLOPED_MAX = 5.0
_BODY_CAP = 0.6
_SAMPLE_STEP = 0.01


def _body_piece(rng: random.Random, t: float, p: float, prev: str | None, room: float):
    options = [k for k in (CONSTANT, RAISING, DROPPING) if k != prev]
    feasible = []
    for kind in options:
        if kind == CONSTANT:
            feasible.append(kind)
        elif kind == RAISING and p + _SLOPED_MIN * _MIN_PIECE <= _BODY_CAP:
            feasible.append(kind)
        elif kind == DROPPING and p - _SLOPED_MIN * _MIN_PIECE >= -_BODY_CAP:
            feasible.append(kind)
    kind = rng.choice(feasible)
    if kind == CONSTANT:
        max_d = min(_MAX_PIECE, room)
        duration = rng.uniform(_MIN_PIECE, max_d)
        slope = rng.uniform(-0.04, 0.04)
    else:
        headroom = (_BODY_CAP - p) if kind == RAISING else (p + _BODY_CAP)
        max_d = min(_MAX_PIECE, room, headroom / _SLOPED_MIN)
        duration = rng.uniform(_MIN_PIECE, max_d)
        magnitude = rng.uniform(_SLOPED_MIN, min(_SLOPED_MAX, headroom / duration))
        slope = magnitude if kind == RAISING else -magnitude
    return kind, slope, duration


def _emit_samples(samples: list[Point], t0: float, p0: float, t1: float, p1: float):
    steps = max(1, round((t1 - t0) / _SAMPLE_STEP))
    slope = (p1 - p0) / (t1 - t0)
    for k in range(1, steps):
        tk = t0 + (t1 - t0) * k / steps
        samples.append(Point(tk, p0 + slope * (tk - t0)))
    samples.append(Point(t1, p1))


def gen_piecewise(
    rng: random.Random, *, end_drop: bool = False
) -> tuple[NormalizedTrace, list[Point], list[str]]:
    """A clean trace plus its true vertices and piece kinds.

    With ``end_drop`` the trace finishes with a long dropping piece that
    lands at presence <= -0.55, preceded by a non-dropping piece, so the
    descriptive model applies.
    """
    t = 0.0
    p = rng.uniform(-0.4, 0.4)
    vertices = [Point(t, p)]
    samples = [Point(t, p)]
    kinds: list[str] = []
    prev: str | None = None
    horizon = 0.68 if end_drop else 0.92

    while t < horizon:
        limit = (0.76 if end_drop else 1.0) - t
        kind, slope, duration = _body_piece(rng, t, p, prev, limit)
        t1 = t + duration
        p1 = p + slope * duration
        _emit_samples(samples, t, p, t1, p1)
        t, p = t1, p1
        vertices.append(Point(t, p))
        kinds.append(kind)
        prev = kind

    if end_drop:
        # lift (or hold) for 0.12, then drop to the real world
        lift = RAISING if prev != RAISING else CONSTANT
        if lift == RAISING:
            slope = rng.uniform(_SLOPED_MIN, min(_SLOPED_MAX, (0.95 - p) / 0.12))
        else:
            slope = rng.uniform(-0.04, 0.04)
        t1, p1 = t + 0.12, p + slope * 0.12
        _emit_samples(samples, t, p, t1, p1)
        vertices.append(Point(t1, p1))
        kinds.append(lift)
        t, p = t1, p1

        duration = 1.0 - t
        lo = max(_SLOPED_MIN, (p + 0.55) / duration)
        hi = (p + 0.95) / duration
        slope = -rng.uniform(lo, hi)
        t1, p1 = 1.0, p + slope * duration
        _emit_samples(samples, t, p, t1, p1)
        vertices.append(Point(t1, p1))
        kinds.append(DROPPING)

    trace = NormalizedTrace(tuple(samples), (), TraceSource("gen"))
    return trace, vertices, kinds


# --- the hand-digitized reference drawing --------------------------------------
#
# Nine phases: rise, plateau, sharp drop, rise, plateau, slower drop,
# rise, plateau, final drop. Two interior breaks, annotated; ends deep
# in the real world just on the HMD-off line.

REFERENCE_VERTICES_MM = (
    (0.0, 0.0),
    (40.0, 32.0),
    (70.0, 32.0),
    (74.0, 12.0),
    (86.0, 31.2),
    (110.0, 31.2),
    (120.0, 18.0),
    (134.0, 30.0),
    (184.0, 30.0),
    (200.0, -37.2),
)

REFERENCE_KINDS = (
    RAISING,
    CONSTANT,
    DROPPING,
    RAISING,
    CONSTANT,
    DROPPING,
    RAISING,
    CONSTANT,
    DROPPING,
)


def _with_collinear_filler(vertices) -> tuple[tuple[float, float], ...]:
    out = [vertices[0]]
    for (x0, y0), (x1, y1) in zip(vertices, vertices[1:]):
        steps = max(1, int((x1 - x0) // 8))
        for k in range(1, steps):
            xk = x0 + (x1 - x0) * k / steps
            out.append((xk, y0 + (y1 - y0) * (xk - x0) / (x1 - x0)))
        out.append((x1, y1))
    return tuple(out)


def reference_template() -> Template:
    return build_template({"ticks": [["task1", 68.0], ["task2", 108.0]]})


def reference_drawing(participant: str = "P01", group: str = "A") -> tuple[RawTrace, Template]:
    trace = RawTrace(
        samples=_with_collinear_filler(REFERENCE_VERTICES_MM),
        annotations=(
            Annotation(72.0, "break_note", "screen froze"),
            Annotation(116.0, "break_note", "drifted off"),
        ),
        source=TraceSource(participant, group, "digital"),
    )
    return trace, reference_template()


def _scaled(vertices, annotations=()) -> RawTrace:
    return RawTrace(
        samples=_with_collinear_filler(tuple((t * 200.0, p * 40.0) for t, p in vertices)),
        annotations=annotations,
        source=TraceSource("PX", "A", "digital"),
    )


def prerequisite_traces() -> dict[str, RawTrace]:
    """Five drawings, each violating exactly one prerequisite a-e."""
    note = lambda t, text="break": (Annotation(t * 200.0, "break_note", text),)
    base_tail = [(0.43, 0.78), (0.92, 0.78), (1.0, -0.93)]
    return {
        "a": _scaled(
            [(0.06, 0.02), (0.2, 0.8), (0.35, 0.8), (0.37, 0.3)] + base_tail,
            note(0.36),
        ),
        "b": _scaled(
            [(0.0, 0.0), (0.2, 0.8), (0.35, 0.8), (0.37, 0.3)]
            + [(0.43, 0.78), (0.92, 0.78), (1.0, -0.2)],
            note(0.36),
        ),
        "c": _scaled(
            [(0.0, 0.0), (0.2, 0.8), (0.35, 0.8), (0.37, 0.3)] + base_tail,
            note(0.6, "not actually a drop"),
        ),
        "d": _scaled(
            [(0.0, 0.0), (0.48, 0.8), (0.55, 0.8), (0.57, 0.3)]
            + [(0.63, 0.78), (0.92, 0.78), (1.0, -0.93)],
            note(0.56),
        ),
        "e": _scaled(
            [(0.0, 0.0), (0.05, 0.8), (0.35, 0.8), (0.37, 0.3)] + base_tail,
            note(0.36),
        ),
    }


# --- detection-table fixture ----------------------------------------------------
#
# Five staged disturbances, strongest first. Presentation order differs
# per randomization group; the expected detection frequencies and mean
# intensities below are the frozen targets the constructed store must
# reproduce.

BIP_LABELS = {
    1: "Cable Malfunction",
    2: "White Screen",
    3: "Teleport",
    4: "Failed Interaction",
    5: "Vibration",
}

GROUP_ORDERS = {"A": (2, 4, 5, 3, 1), "B": (5, 4, 2, 1, 3), "C": (1, 4, 3, 5, 2)}

TICK_POSITIONS = (0.20, 0.36, 0.52, 0.68, 0.84)

# (event, group) -> (pos, detection_pct, mean_sh_break, mean_p_break)
DETECTION_EXPECTED = {
    ("Cable Malfunction", "A"): (5, 100, -0.33, -0.72),
    ("Cable Malfunction", "B"): (4, 90, -0.28, -0.33),
    ("Cable Malfunction", "C"): (1, 70, -0.28, -0.34),
    ("White Screen", "A"): (1, 60, -0.38, -0.4),
    ("White Screen", "B"): (3, 70, -0.25, -0.03),
    ("White Screen", "C"): (5, 70, -0.28, -0.29),
    ("Teleport", "A"): (4, 30, -0.45, -0.15),
    ("Teleport", "B"): (5, 50, -0.18, 0.08),
    ("Teleport", "C"): (3, 40, -0.3, -0.11),
    ("Failed Interaction", "A"): (2, 70, -0.2, -0.23),
    ("Failed Interaction", "B"): (2, 90, -0.15, 0.23),
    ("Failed Interaction", "C"): (2, 50, -0.34, -0.2),
    ("Vibration", "A"): (3, 20, -0.1, 0.19),
    ("Vibration", "B"): (1, 0, None, None),
    ("Vibration", "C"): (4, 20, -0.22, 0.09),
}


def detection_events() -> dict[str, tuple[GroundTruthEvent, ...]]:
    groups = {}
    for group, order in GROUP_ORDERS.items():
        groups[group] = tuple(
            GroundTruthEvent(BIP_LABELS[rank], TICK_POSITIONS[pos], True, rank)
            for pos, rank in enumerate(order)
        )
    return groups


def write_events_file(path, events_by_group=None) -> None:
    import json

    events_by_group = events_by_group or detection_events()
    doc = {
        "schema_version": "1",
        "groups": {
            group: [
                {
                    "label": e.label,
                    "tick_t": e.tick_t,
                    "expected_bip": e.expected_bip,
                    "bip_rank": e.bip_rank,
                }
                for e in events
            ]
            for group, events in events_by_group.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def reference_events_file(path) -> None:
    """Events for the reference drawing's template ticks (fractions of 200mm)."""
    events = {
        "A": (
            GroundTruthEvent("task1", 0.34, True, 1),
            GroundTruthEvent("task2", 0.54, True, 2),
        )
    }
    write_events_file(path, events)


def _stub_model() -> tuple[ModelPoints, Parameters]:
    points = ModelPoints(
        p_transition=Point(0.0, 0.0),
        p_experience=Point(0.21, 0.8),
        p_mentalexit=Point(0.92, 0.75),
        p_return=Point(0.996, -0.93),
    )
    params = Parameters(
        t_transition=0.21,
        sh_transition=0.8,
        t_experience=0.71,
        t_exit=0.076,
        t_mental=0.076,
        t_physical=0.0,
    )
    return points, params


def build_detection_records(group_size: int = 10) -> list[SessionRecord]:
    """3 groups x 10 sessions whose matched breaks hit the frozen table."""
    events = detection_events()
    records = []
    for group, group_events in sorted(events.items()):
        for i in range(group_size):
            bips = []
            for event in sorted(group_events, key=lambda e: e.tick_t):
                pos, pct, sh, p_break = DETECTION_EXPECTED[(event.label, group)]
                if sh is None or i >= round(pct * group_size / 100):
                    continue
                bips.append(
                    BipReport(
                        p_dropping=Point(event.tick_t + 0.01, p_break - sh),
                        p_break=Point(event.tick_t + 0.02, p_break),
                        sh_break=sh,
                        t_dropping=0.01,
                        t_raising=0.0125,
                    )
                )
            result = match_events(bips, group_events)
            points, params = _stub_model()
            records.append(
                SessionRecord(
                    study_id="fixture",
                    participant_id=f"{group}{i:02d}",
                    group=group,
                    points=points,
                    parameters=params,
                    bip_reports=result.reports,
                )
            )
    return records


# --- global statistics fixture ---------------------------------------------------
#
# Thirty sessions whose marginal distributions are constructed so that
# the sample statistics land exactly on the frozen targets:
#   transition 0.21 (SD 0.10), exit 0.08 (SD 0.05),
#   return time 0.996 (SD 0.01), return presence -0.93 (SD 0.30),
#   118 breaks of which 97 attributed, drop/raise ratio 0.8.

GLOBAL_N = 30
_D_TRANSITION = math.sqrt(29 * 0.01 / 30)
_D_EXIT = math.sqrt(29 * 0.0025 / 30)
_D_RETURN_T = math.sqrt(29 * 0.0001 / 30)
_RETURN_P_SPREAD = math.sqrt(2.7)
_RETURN_P_LOW = (-27.9 - _RETURN_P_SPREAD) / 30.0
_RETURN_P_HIGH = _RETURN_P_LOW + _RETURN_P_SPREAD


def build_global_records() -> list[SessionRecord]:
    t_transition = [0.21 - _D_TRANSITION] * 15 + [0.21 + _D_TRANSITION] * 15
    t_exit = [0.08 - _D_EXIT] * 15 + [0.08 + _D_EXIT] * 15
    return_t = [0.996 - _D_RETURN_T] * 15 + [0.996 + _D_RETURN_T] * 15
    return_p = [_RETURN_P_LOW] * 29 + [_RETURN_P_HIGH]
    bip_counts = [4] * 28 + [3] * 2  # 118 detected breaks
    matched_budget = 97

    records = []
    for i in range(GLOBAL_N):
        p_ret = Point(return_t[i], return_p[i])
        p_exp = Point(t_transition[i], 0.8)
        p_exit = Point(return_t[i] - t_exit[i], 0.7)
        points = ModelPoints(
            p_transition=Point(0.0, 0.0),
            p_experience=p_exp,
            p_mentalexit=p_exit,
            p_return=p_ret,
        )
        params = Parameters(
            t_transition=t_transition[i],
            sh_transition=0.8,
            t_experience=p_exit.t - p_exp.t,
            t_exit=t_exit[i],
            t_mental=t_exit[i],
            t_physical=0.0,
        )
        bips = []
        for j in range(bip_counts[i]):
            matched = matched_budget > 0
            if matched:
                matched_budget -= 1
            t0 = 0.3 + 0.1 * j
            bips.append(
                BipReport(
                    p_dropping=Point(t0, 0.1),
                    p_break=Point(t0 + 0.008, -0.3),
                    sh_break=-0.4,
                    t_dropping=0.008,
                    t_raising=0.010,
                    matched_event="Staged Event" if matched else None,
                )
            )
        records.append(
            SessionRecord(
                study_id="global",
                participant_id=f"G{i:02d}",
                group="ABC"[i % 3],
                points=points,
                parameters=params,
                bip_reports=tuple(bips),
            )
        )
    return records


# --- intensity-ordering fixture ---------------------------------------------------

INTENSITY_MEDIANS = {
    "Cable Malfunction": -0.5,
    "White Screen": -0.3,
    "Teleport": -0.1,
    "Failed Interaction": 0.0,
    "Vibration": 0.2,
}


def build_intensity_records() -> list[SessionRecord]:
    """Each event matched three times with its frozen median in the middle."""
    records = []
    for i in range(3):
        bips = []
        for j, (label, median) in enumerate(sorted(INTENSITY_MEDIANS.items())):
            offset = (i - 1) * 0.05  # -0.05, 0, +0.05 across the three records
            t0 = 0.15 + 0.14 * j
            p_break = median + offset
            bips.append(
                BipReport(
                    p_dropping=Point(t0, p_break + 0.4),
                    p_break=Point(t0 + 0.01, p_break),
                    sh_break=-0.4,
                    t_dropping=0.01,
                    t_raising=0.0125,
                    matched_event=label,
                )
            )
        points, params = _stub_model()
        records.append(
            SessionRecord(
                study_id="intensity",
                participant_id=f"I{i:02d}",
                group="A",
                points=points,
                parameters=params,
                bip_reports=tuple(bips),
            )
        )
    return records
