"""Domain types for drawing templates and captured presence traces.

Sheet coordinates are millimeters: time measured from the HMD-on line,
presence measured from the middle line, positive toward the virtual
world. Normalized coordinates divide by the template dimensions so time
lands in [0, ~1] and presence in [-1, +1].

All types are immutable value objects; all operations are pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

SCHEMA_VERSION = "1"

DEFAULT_TIME_AXIS_MM = 200.0
DEFAULT_HALF_RANGE_MM = 40.0

#: Maximum distance of the first sample from the start dot (mm).
START_DOT_TOLERANCE_MM = 5.0
#: Presence overshoot beyond the half range that is clamped with a warning (mm).
CLAMP_TOLERANCE_MM = 2.0
#: Drawings may run slightly past the HMD-off line; beyond this fraction is fatal.
MAX_OVERRUN_FRACTION = 1.05
#: Drawings ending before this fraction of the timeline draw a warning.
MIN_END_FRACTION = 0.9

GRADIENT_FROM = "#ffffff"
GRADIENT_TO = "#bfbfbf"  # 25% grey

ANNOTATION_KINDS = ("break_note", "constant_note", "event_note", "free_text")
CAPTURE_KINDS = ("paper_scan", "digital")


class TemplateError(ValueError):
    """Raised when a template configuration violates its invariants."""


class TraceFormatError(ValueError):
    """Raised when a trace or template document cannot be parsed."""


class TraceValidationError(ValueError):
    """Raised when an operation requires a trace free of fatal issues."""

    def __init__(self, report: ValidationReport):
        self.report = report
        codes = ", ".join(i.code for i in report.fatal_issues())
        super().__init__(f"trace has fatal validation issues: {codes}")


class Point(NamedTuple):
    """A normalized sample: time fraction and presence level."""

    t: float
    p: float


@dataclass(frozen=True)
class EventTick:
    label: str
    x_mm: float


@dataclass(frozen=True)
class Template:
    """Geometry of the standardized drawing sheet.

    The HMD-on line sits at x=0, the dashed HMD-off line at
    ``time_axis_len_mm``. The start dot marks the sheet origin.
    """

    time_axis_len_mm: float = DEFAULT_TIME_AXIS_MM
    presence_half_range_mm: float = DEFAULT_HALF_RANGE_MM
    event_ticks: tuple[EventTick, ...] = ()
    gradient_from: str = GRADIENT_FROM
    gradient_to: str = GRADIENT_TO

    def __post_init__(self) -> None:
        if self.time_axis_len_mm <= 0:
            raise TemplateError("time_axis_len_mm must be positive")
        if self.presence_half_range_mm <= 0:
            raise TemplateError("presence_half_range_mm must be positive")
        labels = set()
        prev_x = -math.inf
        for tick in self.event_ticks:
            if not 0.0 <= tick.x_mm <= self.time_axis_len_mm:
                raise TemplateError(f"event tick {tick.label!r} outside axis: {tick.x_mm}mm")
            if tick.x_mm <= prev_x:
                raise TemplateError(f"event ticks not strictly increasing at {tick.label!r}")
            if tick.label in labels:
                raise TemplateError(f"duplicate event tick label {tick.label!r}")
            labels.add(tick.label)
            prev_x = tick.x_mm

    @property
    def hmd_on_x_mm(self) -> float:
        return 0.0

    @property
    def hmd_off_x_mm(self) -> float:
        return self.time_axis_len_mm

    def tick_fractions(self) -> tuple[tuple[str, float], ...]:
        """Tick positions as fractions of the timeline."""
        return tuple((t.label, t.x_mm / self.time_axis_len_mm) for t in self.event_ticks)


@dataclass(frozen=True)
class Annotation:
    """A note the participant or examiner attached at a sheet position."""

    x_mm: float
    kind: str
    text: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ANNOTATION_KINDS:
            raise TraceFormatError(f"unknown annotation kind {self.kind!r}")


@dataclass(frozen=True)
class NormalizedAnnotation:
    t: float
    kind: str
    text: str = ""


@dataclass(frozen=True)
class TraceSource:
    participant_id: str
    group: str = ""
    capture: str = "digital"

    def __post_init__(self) -> None:
        if self.capture not in CAPTURE_KINDS:
            raise TraceFormatError(f"unknown capture kind {self.capture!r}")


@dataclass(frozen=True)
class RawTrace:
    """A digitized drawing in sheet millimeters.

    Structural requirements (sample count, monotone x, presence range)
    are checked by :func:`validate_trace` rather than at construction so
    that malformed input can be reported instead of rejected opaquely.
    """

    samples: tuple[tuple[float, float], ...]
    annotations: tuple[Annotation, ...] = ()
    source: TraceSource = field(default_factory=lambda: TraceSource("unknown"))


@dataclass(frozen=True)
class NormalizedTrace:
    samples: tuple[Point, ...]
    annotations: tuple[NormalizedAnnotation, ...] = ()
    source: TraceSource = field(default_factory=lambda: TraceSource("unknown"))

    def time_span(self) -> float:
        return self.samples[-1].t - self.samples[0].t


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "fatal" | "warning"
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    def fatal_issues(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "fatal")

    def warning_issues(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.fatal_issues()

    def codes(self) -> tuple[str, ...]:
        return tuple(i.code for i in self.issues)


def build_template(config: dict[str, Any] | None = None) -> Template:
    """Build a template from a plain config mapping.

    Recognized keys: ``time_len_mm``, ``half_range_mm``, ``ticks`` (list
    of ``{"label": ..., "x_mm": ...}`` or ``[label, x_mm]`` pairs).
    Omitted fields fall back to the 200mm / 40mm defaults. Ticks are
    sorted by position; duplicate labels or positions are rejected.
    """
    config = config or {}
    time_len = float(config.get("time_len_mm", DEFAULT_TIME_AXIS_MM))
    half_range = float(config.get("half_range_mm", DEFAULT_HALF_RANGE_MM))
    ticks = [_as_tick(entry) for entry in config.get("ticks", [])]
    ticks.sort(key=lambda t: t.x_mm)
    return Template(time_len, half_range, tuple(ticks))


def _as_tick(entry: Any) -> EventTick:
    if isinstance(entry, dict):
        return EventTick(str(entry["label"]), float(entry["x_mm"]))
    label, x_mm = entry
    return EventTick(str(label), float(x_mm))


def validate_trace(
    trace: RawTrace,
    template: Template,
    *,
    start_tolerance_mm: float = START_DOT_TOLERANCE_MM,
    clamp_tolerance_mm: float = CLAMP_TOLERANCE_MM,
) -> ValidationReport:
    """Check a raw trace against the template. Pure and deterministic.

    Fatal: fewer than two samples, decreasing x, first sample missing
    the start dot, presence beyond the clampable overshoot, time beyond
    the allowed overrun past the HMD-off line, annotations off-sheet.
    Warning: clampable presence overshoot, drawing ending early.
    """
    issues: list[ValidationIssue] = []
    length = template.time_axis_len_mm
    half = template.presence_half_range_mm

    if len(trace.samples) < 2:
        issues.append(
            ValidationIssue("fatal", "too-few-samples", f"need >= 2 samples, got {len(trace.samples)}")
        )
        return ValidationReport(tuple(issues))

    prev_x = trace.samples[0][0]
    for i, (x, _y) in enumerate(trace.samples[1:], start=1):
        if x < prev_x:
            issues.append(
                ValidationIssue("fatal", "x-decreasing", f"x drops from {prev_x}mm to {x}mm at sample {i}")
            )
            break
        prev_x = x

    x0, y0 = trace.samples[0]
    if math.hypot(x0, y0) > start_tolerance_mm:
        issues.append(
            ValidationIssue(
                "fatal",
                "start-dot-miss",
                f"first sample ({x0}mm, {y0}mm) is farther than {start_tolerance_mm}mm from the start dot",
            )
        )

    for i, (x, y) in enumerate(trace.samples):
        overshoot = abs(y) - half
        if overshoot > clamp_tolerance_mm:
            issues.append(
                ValidationIssue("fatal", "y-out-of-range", f"presence {y}mm at sample {i} beyond clampable range")
            )
        elif overshoot > 0:
            issues.append(
                ValidationIssue("warning", "y-clamped", f"presence {y}mm at sample {i} clamped to ±{half}mm")
            )
        if x > MAX_OVERRUN_FRACTION * length:
            issues.append(
                ValidationIssue("fatal", "x-overrun", f"time {x}mm at sample {i} beyond {MAX_OVERRUN_FRACTION:g}x axis")
            )

    if trace.samples[-1][0] < MIN_END_FRACTION * length:
        issues.append(
            ValidationIssue(
                "warning", "ends-early", f"drawing ends at {trace.samples[-1][0]}mm, before {MIN_END_FRACTION:g} of the timeline"
            )
        )

    for note in trace.annotations:
        if not 0.0 <= note.x_mm <= length:
            issues.append(
                ValidationIssue("fatal", "annotation-off-sheet", f"annotation at {note.x_mm}mm outside the timeline")
            )

    return ValidationReport(tuple(issues))


def normalize(
    trace: RawTrace,
    template: Template,
    *,
    start_tolerance_mm: float = START_DOT_TOLERANCE_MM,
    clamp_tolerance_mm: float = CLAMP_TOLERANCE_MM,
    check: bool = True,
) -> NormalizedTrace:
    """Divide sheet coordinates by the template dimensions.

    Time divides by the HMD-on/HMD-off distance, presence by the half
    range. Clampable overshoots are clamped; fatal validation issues
    raise :class:`TraceValidationError` unless ``check=False``.
    """
    if check:
        report = validate_trace(
            trace,
            template,
            start_tolerance_mm=start_tolerance_mm,
            clamp_tolerance_mm=clamp_tolerance_mm,
        )
        if not report.ok:
            raise TraceValidationError(report)

    length = template.time_axis_len_mm
    half = template.presence_half_range_mm
    samples = tuple(
        Point(x / length, max(-half, min(half, y)) / half) for x, y in trace.samples
    )
    annotations = tuple(
        NormalizedAnnotation(a.x_mm / length, a.kind, a.text) for a in trace.annotations
    )
    return NormalizedTrace(samples, annotations, trace.source)


def denormalize(trace: NormalizedTrace, template: Template) -> RawTrace:
    """Map a normalized trace back onto sheet millimeters."""
    length = template.time_axis_len_mm
    half = template.presence_half_range_mm
    samples = tuple((pt.t * length, pt.p * half) for pt in trace.samples)
    annotations = tuple(Annotation(a.t * length, a.kind, a.text) for a in trace.annotations)
    return RawTrace(samples, annotations, trace.source)


# --- trace file documents -------------------------------------------------
#
# The on-disk trace format is a JSON document:
#   {"schema_version": "1",
#    "template": {"time_axis_len_mm": ..., "presence_half_range_mm": ...,
#                 "event_ticks": [{"label": ..., "x_mm": ...}, ...]},
#    "samples": [[x_mm, y_mm], ...],
#    "annotations": [{"x_mm": ..., "kind": ..., "text": ...}, ...],
#    "source": {"participant_id": ..., "group": ..., "capture": ...}}
# Units in raw files are always millimeters.


def template_to_dict(template: Template) -> dict[str, Any]:
    return {
        "time_axis_len_mm": template.time_axis_len_mm,
        "presence_half_range_mm": template.presence_half_range_mm,
        "event_ticks": [{"label": t.label, "x_mm": t.x_mm} for t in template.event_ticks],
    }


def template_from_dict(doc: dict[str, Any]) -> Template:
    try:
        ticks = tuple(EventTick(str(t["label"]), float(t["x_mm"])) for t in doc.get("event_ticks", []))
        return Template(
            float(doc.get("time_axis_len_mm", DEFAULT_TIME_AXIS_MM)),
            float(doc.get("presence_half_range_mm", DEFAULT_HALF_RANGE_MM)),
            ticks,
        )
    except (KeyError, TypeError) as exc:
        raise TraceFormatError(f"malformed template section: {exc}") from exc


def trace_to_document(trace: RawTrace, template: Template) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "template": template_to_dict(template),
        "samples": [[x, y] for x, y in trace.samples],
        "annotations": [
            {"x_mm": a.x_mm, "kind": a.kind, "text": a.text} for a in trace.annotations
        ],
        "source": {
            "participant_id": trace.source.participant_id,
            "group": trace.source.group,
            "capture": trace.source.capture,
        },
    }


def trace_from_document(doc: dict[str, Any]) -> tuple[RawTrace, Template]:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise TraceFormatError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    template = template_from_dict(doc.get("template", {}))
    try:
        samples = tuple((float(x), float(y)) for x, y in doc["samples"])
        annotations = tuple(
            Annotation(float(a["x_mm"]), str(a["kind"]), str(a.get("text", "")))
            for a in doc.get("annotations", [])
        )
        src = doc.get("source", {})
        source = TraceSource(
            str(src.get("participant_id", "unknown")),
            str(src.get("group", "")),
            str(src.get("capture", "digital")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceFormatError(f"malformed trace document: {exc}") from exc
    return RawTrace(samples, annotations, source), template


def load_trace_file(path: str | Path) -> tuple[RawTrace, Template]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{path}: not valid JSON: {exc}") from exc
    return trace_from_document(doc)


def save_trace_file(path: str | Path, trace: RawTrace, template: Template) -> None:
    doc = trace_to_document(trace, template)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
