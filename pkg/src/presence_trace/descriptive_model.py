"""Named points, parameters and drawing prerequisites.

A phase sequence is reduced to the descriptive model: the transition
start, the end of the opening rise, every interior drop (a break in
presence), the start of the final drop (mental exit), the HMD-off
crossing (physical exit, usually absent) and the return point. Relative
parameters between those points quantify the session.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean

from .segmentation import CONSTANT, DROPPING, RAISING, Phase
from .trace_model import NormalizedAnnotation, NormalizedTrace, Point

#: Final presence at or below this level counts as back in the real world.
DEFAULT_RETURN_THRESHOLD = -0.5
#: The experience phase is expected to cover at least this fraction.
DEFAULT_EXPERIENCE_MIN_FRACTION = 0.5
#: Start-dot tolerance in normalized units (5mm on the default sheet).
START_TOLERANCE_T = 0.025
START_TOLERANCE_P = 0.125

PREREQUISITE_IDS = ("a", "b", "c", "d", "e")


class ModelError(ValueError):
    """Raised when model values violate their structural invariants."""


class ModelIncompleteError(ValueError):
    """The drawing cannot be described by the model.

    Carries the prerequisite the drawing fails, e.g. a drawing whose
    line never comes back down has no return point (prerequisite b).
    """

    def __init__(self, prerequisite: str, message: str):
        self.prerequisite = prerequisite
        super().__init__(message)


@dataclass(frozen=True)
class BreakPoints:
    """Start and bottom of one interior dropping phase."""

    p_dropping: Point
    p_break: Point

    def __post_init__(self) -> None:
        if self.p_break.t <= self.p_dropping.t:
            raise ModelError("break must end after it starts")
        if self.p_break.p >= self.p_dropping.p:
            raise ModelError("break must end below its start")


@dataclass(frozen=True)
class ModelPoints:
    p_transition: Point
    p_experience: Point
    p_mentalexit: Point
    p_return: Point
    p_physicalexit: Point | None = None
    breaks: tuple[BreakPoints, ...] = ()

    def __post_init__(self) -> None:
        if not (
            self.p_transition.t
            <= self.p_experience.t
            <= self.p_mentalexit.t
            <= self.p_return.t
        ):
            raise ModelError("model points must be ordered in time")


@dataclass(frozen=True)
class BreakParams:
    sh_break: float
    t_dropping: float
    t_raising: float | None = None
    recovery_plateau: float | None = None

    def __post_init__(self) -> None:
        if self.sh_break >= 0:
            raise ModelError(f"sh_break must be negative, got {self.sh_break}")
        if self.t_dropping < 0:
            raise ModelError("t_dropping must be non-negative")


@dataclass(frozen=True)
class Parameters:
    t_transition: float
    sh_transition: float
    t_experience: float
    t_exit: float
    t_mental: float
    t_physical: float
    breaks: tuple[BreakParams, ...] = ()
    drop_raise_ratio: float | None = None
    #: Alternative transition endpoint: first upward crossing of the middle line.
    t_transition_midcross: float | None = None

    def __post_init__(self) -> None:
        for name in ("t_transition", "t_experience", "t_exit", "t_mental", "t_physical"):
            if getattr(self, name) < -1e-12:
                raise ModelError(f"{name} must be non-negative")
        if self.sh_transition < 0:
            raise ModelError("sh_transition must be non-negative")


@dataclass(frozen=True)
class PrerequisiteResult:
    id: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ConformanceReport:
    entries: tuple[PrerequisiteResult, ...]

    def __post_init__(self) -> None:
        if tuple(e.id for e in self.entries) != PREREQUISITE_IDS:
            raise ModelError("conformance report must cover prerequisites a-e in order")

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, prereq_id: str) -> PrerequisiteResult:
        return next(e for e in self.entries if e.id == prereq_id)

    def failed_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.entries if not e.passed)


def extract_points(phases: list[Phase], trace: NormalizedTrace) -> ModelPoints:
    """Locate the model points on a segmented drawing.

    The transition starts at the first sample. The experience starts
    where the opening raising phase ends (or immediately, if the drawing
    does not open with a rise; prerequisite e will flag that). Every
    dropping phase except the final one is a break; the final one is the
    exit, and a drawing that does not end dropping has no return point.
    """
    if not phases:
        raise ValueError("need at least one phase")

    if phases[-1].kind != DROPPING:
        raise ModelIncompleteError(
            "b",
            "drawing does not end with a dropping phase, so no return point exists",
        )

    p_transition = Point(*trace.samples[0])
    p_experience = phases[0].end if phases[0].kind == RAISING else p_transition
    p_mentalexit = phases[-1].start
    p_return = Point(*trace.samples[-1])
    p_physicalexit = (
        Point(1.0, _presence_at(trace, 1.0)) if trace.samples[-1].t >= 1.0 else None
    )
    breaks = tuple(
        BreakPoints(ph.start, ph.end) for ph in phases[:-1] if ph.kind == DROPPING
    )
    return ModelPoints(
        p_transition=p_transition,
        p_experience=p_experience,
        p_mentalexit=p_mentalexit,
        p_return=p_return,
        p_physicalexit=p_physicalexit,
        breaks=breaks,
    )


def _presence_at(trace: NormalizedTrace, t: float) -> float:
    samples = trace.samples
    if t <= samples[0].t:
        return samples[0].p
    for a, b in zip(samples, samples[1:]):
        if a.t <= t <= b.t:
            if b.t == a.t:
                return b.p
            frac = (t - a.t) / (b.t - a.t)
            return a.p + frac * (b.p - a.p)
    return samples[-1].p


def _midline_crossing(trace: NormalizedTrace) -> float | None:
    """Time of the first upward crossing of the middle line."""
    samples = trace.samples
    if samples[0].p > 0:
        return samples[0].t
    for a, b in zip(samples, samples[1:]):
        if a.p <= 0 < b.p:
            if b.t == a.t:
                return a.t
            return a.t + (0.0 - a.p) / (b.p - a.p) * (b.t - a.t)
    return None


def compute_parameters(
    points: ModelPoints,
    phases: list[Phase],
    trace: NormalizedTrace | None = None,
) -> Parameters:
    """Derive the relative parameters from the extracted points.

    Per break, the attention shift is the presence change across the
    drop (negative by construction) and the recovery time is the
    duration of the raising phase that immediately follows, absent when
    the drop runs into a plateau or another drop instead.
    """
    t_exit = points.p_return.t - points.p_mentalexit.t
    t_physical = (
        points.p_return.t - points.p_physicalexit.t if points.p_physicalexit else 0.0
    )

    break_params = []
    for brk in points.breaks:
        index = next(
            i
            for i, ph in enumerate(phases)
            if ph.start == brk.p_dropping and ph.end == brk.p_break
        )
        t_raising = None
        recovery_plateau = None
        if index + 1 < len(phases):
            nxt = phases[index + 1]
            if nxt.kind == RAISING:
                t_raising = nxt.duration
            elif nxt.kind == CONSTANT:
                recovery_plateau = nxt.duration
        break_params.append(
            BreakParams(
                sh_break=brk.p_break.p - brk.p_dropping.p,
                t_dropping=brk.p_break.t - brk.p_dropping.t,
                t_raising=t_raising,
                recovery_plateau=recovery_plateau,
            )
        )

    recovered = [bp for bp in break_params if bp.t_raising is not None]
    ratio = None
    if recovered:
        mean_raising = fmean(bp.t_raising for bp in recovered)
        if mean_raising > 0:
            ratio = fmean(bp.t_dropping for bp in recovered) / mean_raising

    return Parameters(
        t_transition=points.p_experience.t - points.p_transition.t,
        sh_transition=points.p_experience.p - points.p_transition.p,
        t_experience=points.p_mentalexit.t - points.p_experience.t,
        t_exit=t_exit,
        t_mental=t_exit - t_physical,
        t_physical=t_physical,
        breaks=tuple(break_params),
        drop_raise_ratio=ratio,
        t_transition_midcross=_midline_crossing(trace) if trace is not None else None,
    )


def check_prerequisites(
    points: ModelPoints,
    phases: list[Phase],
    params: Parameters,
    annotations: tuple[NormalizedAnnotation, ...] = (),
    *,
    experience_min_fraction: float = DEFAULT_EXPERIENCE_MIN_FRACTION,
    return_threshold: float = DEFAULT_RETURN_THRESHOLD,
    start_tolerance_t: float = START_TOLERANCE_T,
    start_tolerance_p: float = START_TOLERANCE_P,
) -> ConformanceReport:
    """Evaluate the five structural properties a valid drawing shows.

    a: the line starts at the start dot.
    b: the line returns to the real world at the end.
    c: every annotated break lies on a dropping phase.
    d: the experience phase covers most of the timeline.
    e: shifts toward the virtual world take longer than toward the real
       world, both for the transition/exit pair and for break recovery.
    """
    entries = []

    start_ok = (
        abs(points.p_transition.t) <= start_tolerance_t
        and abs(points.p_transition.p) <= start_tolerance_p
    )
    entries.append(
        PrerequisiteResult(
            "a",
            start_ok,
            f"drawing starts at (t={points.p_transition.t:.4g}, p={points.p_transition.p:.4g})",
        )
    )

    return_ok = points.p_return.p <= return_threshold
    entries.append(
        PrerequisiteResult(
            "b",
            return_ok,
            f"final presence {points.p_return.p:.4g} vs threshold {return_threshold:g}",
        )
    )

    break_notes = [a for a in annotations if a.kind == "break_note"]
    dropping = [ph for ph in phases if ph.kind == DROPPING]
    misplaced = [
        note
        for note in break_notes
        if not any(ph.start.t <= note.t <= ph.end.t for ph in dropping)
    ]
    entries.append(
        PrerequisiteResult(
            "c",
            not misplaced,
            (
                f"{len(break_notes)} break note(s), {len(misplaced)} off any dropping phase"
                if break_notes
                else "no break notes to check"
            ),
        )
    )

    entries.append(
        PrerequisiteResult(
            "d",
            params.t_experience >= experience_min_fraction,
            f"experience covers {params.t_experience:.4g} of the timeline "
            f"(required {experience_min_fraction:g})",
        )
    )

    transition_ok = params.t_transition > params.t_exit
    recovered = [bp for bp in params.breaks if bp.t_raising is not None]
    if recovered:
        mean_raising = fmean(bp.t_raising for bp in recovered)
        mean_dropping = fmean(bp.t_dropping for bp in recovered)
        recovery_ok = mean_raising > mean_dropping
        recovery_detail = f"mean recovery {mean_raising:.4g} vs mean drop {mean_dropping:.4g}"
    else:
        recovery_ok = True
        recovery_detail = "no recovered breaks to compare"
    detail_e = (
        f"transition {params.t_transition:.4g} vs exit {params.t_exit:.4g}"
        + (" (transition shorter than exit)" if not transition_ok else "")
        + "; "
        + recovery_detail
    )
    entries.append(PrerequisiteResult("e", transition_ok and recovery_ok, detail_e))

    return ConformanceReport(tuple(entries))
