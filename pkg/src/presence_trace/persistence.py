"""Session record storage and document rendering.

Records live in an append-only newline-delimited JSON log, one record
per line, headed by a line carrying the schema version and the run
configuration. Floating-point fields are quantized to 9 significant
decimal digits on write so that write/read round-trips compare equal.

Rendering produces standalone SVG documents with millimeter-sized user
units; identical inputs yield byte-identical output.
"""

from __future__ import annotations

import io
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .analysis import (
    AggregateStats,
    BipReport,
    EventBoxSummary,
    EventGroupCell,
    SessionRecord,
)
from .descriptive_model import (
    BreakParams,
    BreakPoints,
    ConformanceReport,
    ModelPoints,
    Parameters,
    PrerequisiteResult,
)
from .trace_model import (
    NormalizedAnnotation,
    NormalizedTrace,
    Point,
    SCHEMA_VERSION,
    Template,
    TraceSource,
)

FLOAT_DIGITS = 9

#: Cell text for absent table values.
ABSENT_CELL = "−"

#: Overlay stroke colors keyed by group order (A=green, B=red, C=blue, extras).
GROUP_PALETTE = ("#2ca02c", "#d62728", "#1f77b4", "#9467bd", "#8c564b", "#e377c2")


class DuplicateRecordError(ValueError):
    """A record with the same (study, participant, version) key already exists."""


class StoreFormatError(ValueError):
    """The store file cannot be parsed or has an unsupported schema."""


def quantize(value: float) -> float:
    """Round to 9 significant decimal digits; stable under re-quantization."""
    return float(format(value, f".{FLOAT_DIGITS}g"))


def fnum(value: float) -> str:
    return format(value, f".{FLOAT_DIGITS}g")


def _q(value: float | None) -> float | None:
    return None if value is None else quantize(value)


def _qpoint(pt: Point | None) -> list[float] | None:
    return None if pt is None else [quantize(pt.t), quantize(pt.p)]


# --- record serialization ---------------------------------------------------


def record_to_dict(record: SessionRecord) -> dict[str, Any]:
    points = record.points
    params = record.parameters
    return {
        "study_id": record.study_id,
        "participant_id": record.participant_id,
        "group": record.group,
        "capture": record.capture,
        "version": record.version,
        "points": None
        if points is None
        else {
            "p_transition": _qpoint(points.p_transition),
            "p_experience": _qpoint(points.p_experience),
            "p_mentalexit": _qpoint(points.p_mentalexit),
            "p_physicalexit": _qpoint(points.p_physicalexit),
            "p_return": _qpoint(points.p_return),
            "breaks": [
                {"p_dropping": _qpoint(b.p_dropping), "p_break": _qpoint(b.p_break)}
                for b in points.breaks
            ],
        },
        "parameters": None
        if params is None
        else {
            "t_transition": _q(params.t_transition),
            "sh_transition": _q(params.sh_transition),
            "t_experience": _q(params.t_experience),
            "t_exit": _q(params.t_exit),
            "t_mental": _q(params.t_mental),
            "t_physical": _q(params.t_physical),
            "t_transition_midcross": _q(params.t_transition_midcross),
            "drop_raise_ratio": _q(params.drop_raise_ratio),
            "breaks": [
                {
                    "sh_break": _q(b.sh_break),
                    "t_dropping": _q(b.t_dropping),
                    "t_raising": _q(b.t_raising),
                    "recovery_plateau": _q(b.recovery_plateau),
                }
                for b in params.breaks
            ],
        },
        "bip_reports": None
        if record.bip_reports is None
        else [
            {
                "p_dropping": _qpoint(b.p_dropping),
                "p_break": _qpoint(b.p_break),
                "sh_break": _q(b.sh_break),
                "t_dropping": _q(b.t_dropping),
                "t_raising": _q(b.t_raising),
                "matched_event": b.matched_event,
            }
            for b in record.bip_reports
        ],
        "conformance": None
        if record.conformance is None
        else [
            {"id": e.id, "passed": e.passed, "detail": e.detail}
            for e in record.conformance.entries
        ],
        "trace": None
        if record.trace is None
        else {
            "samples": [[quantize(pt.t), quantize(pt.p)] for pt in record.trace.samples],
            "annotations": [
                {"t": quantize(a.t), "kind": a.kind, "text": a.text}
                for a in record.trace.annotations
            ],
        },
        "error": record.error,
    }


def _point(value: Sequence[float] | None) -> Point | None:
    return None if value is None else Point(float(value[0]), float(value[1]))


def record_from_dict(doc: Mapping[str, Any]) -> SessionRecord:
    points_doc = doc.get("points")
    points = None
    if points_doc is not None:
        points = ModelPoints(
            p_transition=_point(points_doc["p_transition"]),
            p_experience=_point(points_doc["p_experience"]),
            p_mentalexit=_point(points_doc["p_mentalexit"]),
            p_return=_point(points_doc["p_return"]),
            p_physicalexit=_point(points_doc.get("p_physicalexit")),
            breaks=tuple(
                BreakPoints(_point(b["p_dropping"]), _point(b["p_break"]))
                for b in points_doc.get("breaks", [])
            ),
        )
    params_doc = doc.get("parameters")
    params = None
    if params_doc is not None:
        params = Parameters(
            t_transition=params_doc["t_transition"],
            sh_transition=params_doc["sh_transition"],
            t_experience=params_doc["t_experience"],
            t_exit=params_doc["t_exit"],
            t_mental=params_doc["t_mental"],
            t_physical=params_doc["t_physical"],
            t_transition_midcross=params_doc.get("t_transition_midcross"),
            drop_raise_ratio=params_doc.get("drop_raise_ratio"),
            breaks=tuple(
                BreakParams(
                    sh_break=b["sh_break"],
                    t_dropping=b["t_dropping"],
                    t_raising=b.get("t_raising"),
                    recovery_plateau=b.get("recovery_plateau"),
                )
                for b in params_doc.get("breaks", [])
            ),
        )
    bips_doc = doc.get("bip_reports")
    bips = None
    if bips_doc is not None:
        bips = tuple(
            BipReport(
                p_dropping=_point(b["p_dropping"]),
                p_break=_point(b["p_break"]),
                sh_break=b["sh_break"],
                t_dropping=b["t_dropping"],
                t_raising=b.get("t_raising"),
                matched_event=b.get("matched_event"),
            )
            for b in bips_doc
        )
    conf_doc = doc.get("conformance")
    conformance = None
    if conf_doc is not None:
        conformance = ConformanceReport(
            tuple(PrerequisiteResult(e["id"], e["passed"], e["detail"]) for e in conf_doc)
        )
    trace_doc = doc.get("trace")
    trace = None
    if trace_doc is not None:
        trace = NormalizedTrace(
            samples=tuple(Point(float(t), float(p)) for t, p in trace_doc["samples"]),
            annotations=tuple(
                NormalizedAnnotation(float(a["t"]), a["kind"], a.get("text", ""))
                for a in trace_doc.get("annotations", [])
            ),
            source=TraceSource(doc["participant_id"], doc["group"], doc["capture"]),
        )
    return SessionRecord(
        study_id=doc["study_id"],
        participant_id=doc["participant_id"],
        group=doc["group"],
        capture=doc.get("capture", "digital"),
        version=int(doc.get("version", 1)),
        points=points,
        parameters=params,
        bip_reports=bips,
        conformance=conformance,
        trace=trace,
        error=doc.get("error"),
    )


def canonical_record(record: SessionRecord) -> SessionRecord:
    """The record as it reads back from storage (floats quantized)."""
    return record_from_dict(record_to_dict(record))


# --- the session store -------------------------------------------------------


class SessionStore:
    """Append-only NDJSON log of session records.

    Single writer, any number of readers. Records are immutable once
    written; a correction is a new record with a bumped version.
    """

    def __init__(self, path: str | Path, config: Mapping[str, Any] | None = None):
        self.path = Path(path)
        self._records: dict[tuple[str, str, int], SessionRecord] = {}
        self._order: list[tuple[str, str, int]] = []
        if self.path.exists():
            self._load()
        else:
            self.config = dict(config or {})
            header = {
                "schema_version": SCHEMA_VERSION,
                "kind": "header",
                "config": self.config,
            }
            self.path.write_text(
                json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n",
                encoding="utf-8",
            )

    def _load(self) -> None:
        lines = self.path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise StoreFormatError(f"{self.path}: empty store file")
        header = json.loads(lines[0])
        if header.get("kind") != "header":
            raise StoreFormatError(f"{self.path}: missing header line")
        if header.get("schema_version") != SCHEMA_VERSION:
            raise StoreFormatError(
                f"{self.path}: unsupported schema_version {header.get('schema_version')!r}"
            )
        self.config = header.get("config", {})
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            doc = json.loads(line)
            if doc.get("kind") != "record":
                raise StoreFormatError(f"{self.path}:{lineno}: unexpected line kind")
            record = record_from_dict(doc["record"])
            self._records[record.key] = record
            self._order.append(record.key)

    def write_record(self, record: SessionRecord) -> SessionRecord:
        """Append a record; returns the canonical (stored) form."""
        canonical = canonical_record(record)
        if canonical.key in self._records:
            raise DuplicateRecordError(f"duplicate record key {canonical.key}")
        line = json.dumps(
            {"kind": "record", "record": record_to_dict(record)},
            sort_keys=True,
            separators=(",", ":"),
        )
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
        self._records[canonical.key] = canonical
        self._order.append(canonical.key)
        return canonical

    def read_record(
        self, study_id: str, participant_id: str, version: int | None = None
    ) -> SessionRecord:
        """Fetch one record; the latest version when none is given."""
        if version is not None:
            return self._records[(study_id, participant_id, version)]
        versions = [
            v for (s, p, v) in self._records if s == study_id and p == participant_id
        ]
        if not versions:
            raise KeyError((study_id, participant_id))
        return self._records[(study_id, participant_id, max(versions))]

    def records(self) -> tuple[SessionRecord, ...]:
        """All records ordered by key, latest version per participant."""
        latest: dict[tuple[str, str], int] = {}
        for study, participant, version in self._records:
            key = (study, participant)
            latest[key] = max(latest.get(key, 0), version)
        return tuple(
            self._records[(s, p, v)] for (s, p), v in sorted(latest.items())
        )

    def __len__(self) -> int:
        return len(self._records)


# --- table and stats documents ----------------------------------------------


def _config_comment(config: Mapping[str, Any] | None) -> str:
    payload = json.dumps(dict(config or {}), sort_keys=True, separators=(",", ":"))
    return f"# config={payload}"


def detection_csv(cells: Sequence[EventGroupCell], config: Mapping[str, Any] | None = None) -> str:
    """Render the detection table as CSV, one row per event and group."""
    out = io.StringIO()
    out.write(_config_comment(config) + "\n")
    out.write("event,group,pos,detection_pct,mean_sh_break,mean_p_break\n")
    for cell in sorted(cells, key=lambda c: (c.group, c.pos)):
        sh = ABSENT_CELL if cell.mean_sh_break is None else fnum(cell.mean_sh_break)
        p = ABSENT_CELL if cell.mean_p_break is None else fnum(cell.mean_p_break)
        out.write(
            f"{cell.event},{cell.group},{cell.pos},{fnum(cell.detection_pct)},{sh},{p}\n"
        )
    return out.getvalue()


def global_stats_document(
    stats: AggregateStats, config: Mapping[str, Any] | None = None
) -> str:
    """Key/value JSON document for the cross-session statistics."""
    gs = stats.global_stats
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": dict(config or {}),
        "stats": {
            "n_records": gs.n_records,
            "mean_t_transition": _q(gs.mean_t_transition),
            "sd_t_transition": _q(gs.sd_t_transition),
            "mean_t_exit": _q(gs.mean_t_exit),
            "sd_t_exit": _q(gs.sd_t_exit),
            "mean_experience_fraction": _q(gs.mean_experience_fraction),
            "mean_return_t": _q(gs.mean_return_t),
            "sd_return_t": _q(gs.sd_return_t),
            "mean_return_p": _q(gs.mean_return_p),
            "sd_return_p": _q(gs.sd_return_p),
            "mean_bip_count": _q(gs.mean_bip_count),
            "sd_bip_count": _q(gs.sd_bip_count),
            "total_bips": gs.total_bips,
            "matched_bips": gs.matched_bips,
            "correct_position_rate": _q(gs.correct_position_rate),
            "drop_raise_ratio": _q(gs.drop_raise_ratio),
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# --- SVG rendering ------------------------------------------------------------

_MARGIN = 18.0
_TICK_LEN = 3.0


class _Svg:
    def __init__(self, width: float, height: float, config: Mapping[str, Any] | None):
        self.width = width
        self.height = height
        self.parts: list[str] = []
        payload = json.dumps(dict(config or {}), sort_keys=True, separators=(",", ":"))
        self.metadata = payload.replace("&", "&amp;").replace("<", "&lt;")

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def document(self) -> str:
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{fnum(self.width)}mm" '
            f'height="{fnum(self.height)}mm" '
            f'viewBox="0 0 {fnum(self.width)} {fnum(self.height)}">\n'
            f"<metadata>{self.metadata}</metadata>\n"
            f"{body}\n</svg>\n"
        )


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


class _SheetFrame:
    """Maps sheet millimeters onto the SVG canvas (y grows downward)."""

    def __init__(self, template: Template):
        self.template = template
        self.width = template.time_axis_len_mm + 2 * _MARGIN
        self.height = 2 * template.presence_half_range_mm + 2 * _MARGIN

    def x(self, x_mm: float) -> float:
        return _MARGIN + x_mm

    def y(self, y_mm: float) -> float:
        return _MARGIN + self.template.presence_half_range_mm - y_mm


def _draw_sheet(svg: _Svg, frame: _SheetFrame) -> None:
    tpl = frame.template
    length = tpl.time_axis_len_mm
    half = tpl.presence_half_range_mm
    x0, x1 = frame.x(0.0), frame.x(length)
    y_top, y_mid, y_bot = frame.y(half), frame.y(0.0), frame.y(-half)

    svg.add(
        "<defs>\n"
        f'<linearGradient id="fade-up" x1="0" y1="{fnum(y_mid)}" x2="0" y2="{fnum(y_top)}" '
        'gradientUnits="userSpaceOnUse">\n'
        f'<stop offset="0" stop-color="{tpl.gradient_from}"/>\n'
        f'<stop offset="1" stop-color="{tpl.gradient_to}"/>\n'
        "</linearGradient>\n"
        f'<linearGradient id="fade-down" x1="0" y1="{fnum(y_mid)}" x2="0" y2="{fnum(y_bot)}" '
        'gradientUnits="userSpaceOnUse">\n'
        f'<stop offset="0" stop-color="{tpl.gradient_from}"/>\n'
        f'<stop offset="1" stop-color="{tpl.gradient_to}"/>\n'
        "</linearGradient>\n"
        "</defs>"
    )
    svg.add(
        f'<rect x="{fnum(x0)}" y="{fnum(y_top)}" width="{fnum(length)}" '
        f'height="{fnum(half)}" fill="url(#fade-up)"/>'
    )
    svg.add(
        f'<rect x="{fnum(x0)}" y="{fnum(y_mid)}" width="{fnum(length)}" '
        f'height="{fnum(half)}" fill="url(#fade-down)"/>'
    )
    # frame and middle (time) line
    svg.add(
        f'<rect x="{fnum(x0)}" y="{fnum(y_top)}" width="{fnum(length)}" '
        f'height="{fnum(2 * half)}" fill="none" stroke="#999999" stroke-width="0.2"/>'
    )
    svg.add(
        f'<line x1="{fnum(x0)}" y1="{fnum(y_mid)}" x2="{fnum(x1)}" y2="{fnum(y_mid)}" '
        'stroke="#000000" stroke-width="0.4"/>'
    )
    # start dot on the HMD-on line
    svg.add(f'<circle cx="{fnum(x0)}" cy="{fnum(y_mid)}" r="1.4" fill="#000000"/>')
    # dashed HMD-off line with a symbol placeholder beneath it
    svg.add(
        f'<line x1="{fnum(x1)}" y1="{fnum(y_top)}" x2="{fnum(x1)}" y2="{fnum(y_bot)}" '
        'stroke="#000000" stroke-width="0.4" stroke-dasharray="2.5 2"/>'
    )
    svg.add(
        f'<g class="hmd-off-symbol"><rect x="{fnum(x1 - 3)}" y="{fnum(y_bot + 3)}" '
        'width="6" height="3.2" rx="1" fill="none" stroke="#000000" stroke-width="0.4"/>'
        f'<circle cx="{fnum(x1 - 1.5)}" cy="{fnum(y_bot + 4.6)}" r="0.7" fill="#000000"/>'
        f'<circle cx="{fnum(x1 + 1.5)}" cy="{fnum(y_bot + 4.6)}" r="0.7" fill="#000000"/></g>'
    )
    svg.add(
        f'<text x="{fnum(x0 - 2)}" y="{fnum(y_top + 3)}" font-size="3" '
        'text-anchor="end" fill="#555555">virtual</text>'
    )
    svg.add(
        f'<text x="{fnum(x0 - 2)}" y="{fnum(y_bot)}" font-size="3" '
        'text-anchor="end" fill="#555555">real</text>'
    )
    if tpl.event_ticks:
        svg.add('<g class="event-ticks">')
        for tick in tpl.event_ticks:
            tx = frame.x(tick.x_mm)
            svg.add(
                f'<line x1="{fnum(tx)}" y1="{fnum(y_mid - _TICK_LEN)}" x2="{fnum(tx)}" '
                f'y2="{fnum(y_mid + _TICK_LEN)}" stroke="#000000" stroke-width="0.3"/>'
            )
            svg.add(
                f'<text x="{fnum(tx)}" y="{fnum(y_bot + 6)}" font-size="3" '
                f'text-anchor="middle">{_escape(tick.label)}</text>'
            )
        svg.add("</g>")


def render_template(template: Template, config: Mapping[str, Any] | None = None) -> str:
    """The blank drawing sheet as a standalone SVG document."""
    frame = _SheetFrame(template)
    svg = _Svg(frame.width, frame.height, config)
    _draw_sheet(svg, frame)
    return svg.document()


def _group_colors(groups: Iterable[str]) -> dict[str, str]:
    ordered = sorted(set(groups))
    return {
        group: GROUP_PALETTE[i % len(GROUP_PALETTE)] for i, group in enumerate(ordered)
    }


def render_overlay(
    records: Sequence[SessionRecord],
    template: Template,
    *,
    mark_points: bool = False,
    config: Mapping[str, Any] | None = None,
) -> str:
    """All retained traces drawn over one sheet, colored by group.

    With ``mark_points`` the experience start and the mental exit of
    each record are marked as filled dots.
    """
    drawable = [r for r in records if r.trace is not None]
    if not drawable:
        raise ValueError("no records with a retained trace to draw")

    frame = _SheetFrame(template)
    svg = _Svg(frame.width, frame.height, config)
    _draw_sheet(svg, frame)

    colors = _group_colors(r.group for r in drawable)
    length = template.time_axis_len_mm
    half = template.presence_half_range_mm
    for record in sorted(drawable, key=lambda r: r.key):
        pts = " ".join(
            f"{fnum(frame.x(pt.t * length))},{fnum(frame.y(pt.p * half))}"
            for pt in record.trace.samples
        )
        svg.add(
            f'<polyline points="{pts}" fill="none" stroke="{colors[record.group]}" '
            'stroke-width="0.5" stroke-opacity="0.75"/>'
        )
    if mark_points:
        svg.add('<g class="model-points">')
        for record in sorted(drawable, key=lambda r: r.key):
            if record.points is None:
                continue
            for pt in (record.points.p_experience, record.points.p_mentalexit):
                svg.add(
                    f'<circle cx="{fnum(frame.x(pt.t * length))}" '
                    f'cy="{fnum(frame.y(pt.p * half))}" r="1.1" fill="#000000"/>'
                )
        svg.add("</g>")
    legend_y = 6.0
    for i, (group, color) in enumerate(sorted(colors.items())):
        lx = _MARGIN + i * 30.0
        svg.add(
            f'<line x1="{fnum(lx)}" y1="{fnum(legend_y)}" x2="{fnum(lx + 8)}" '
            f'y2="{fnum(legend_y)}" stroke="{color}" stroke-width="1"/>'
        )
        svg.add(
            f'<text x="{fnum(lx + 10)}" y="{fnum(legend_y + 1.2)}" font-size="3.2">'
            f"{_escape(group)}</text>"
        )
    return svg.document()


def render_boxplot(
    summaries: Sequence[EventBoxSummary],
    config: Mapping[str, Any] | None = None,
) -> str:
    """Box plots of break intensity, one box per event, strongest first.

    Strongest means the lowest median presence at the break bottom;
    boxes span the quartiles, whiskers the 1.5 IQR fences, and retained
    outliers appear as open circles.
    """
    boxes = sorted((s for s in summaries if s.n >= 1), key=lambda s: s.median)
    if not boxes:
        raise ValueError("no event summaries with data to draw")

    slot = 34.0
    scale = 50.0  # mm per presence unit
    width = 2 * _MARGIN + slot * len(boxes)
    height = 2 * _MARGIN + 2 * scale
    svg = _Svg(width, height, config)

    def y(p: float) -> float:
        return _MARGIN + scale - p * scale

    x_axis = _MARGIN - 6
    svg.add(
        f'<line x1="{fnum(x_axis)}" y1="{fnum(y(1.0))}" x2="{fnum(x_axis)}" '
        f'y2="{fnum(y(-1.0))}" stroke="#000000" stroke-width="0.3"/>'
    )
    for level in (-1.0, -0.5, 0.0, 0.5, 1.0):
        svg.add(
            f'<line x1="{fnum(x_axis - 1.5)}" y1="{fnum(y(level))}" x2="{fnum(x_axis)}" '
            f'y2="{fnum(y(level))}" stroke="#000000" stroke-width="0.3"/>'
        )
        svg.add(
            f'<text x="{fnum(x_axis - 2.5)}" y="{fnum(y(level) + 1.1)}" font-size="3" '
            f'text-anchor="end">{fnum(level)}</text>'
        )
    svg.add(
        f'<line x1="{fnum(x_axis)}" y1="{fnum(y(0.0))}" x2="{fnum(width - _MARGIN / 2)}" '
        f'y2="{fnum(y(0.0))}" stroke="#bbbbbb" stroke-width="0.25" stroke-dasharray="1.5 1.5"/>'
    )

    half_box = 9.0
    for i, box in enumerate(boxes):
        cx = _MARGIN + slot * i + slot / 2
        svg.add(f'<g class="box" data-event="{_escape(box.event)}">')
        svg.add(
            f'<line x1="{fnum(cx)}" y1="{fnum(y(box.whisker_high))}" x2="{fnum(cx)}" '
            f'y2="{fnum(y(box.q3))}" stroke="#000000" stroke-width="0.35"/>'
        )
        svg.add(
            f'<line x1="{fnum(cx)}" y1="{fnum(y(box.q1))}" x2="{fnum(cx)}" '
            f'y2="{fnum(y(box.whisker_low))}" stroke="#000000" stroke-width="0.35"/>'
        )
        for w in (box.whisker_low, box.whisker_high):
            svg.add(
                f'<line x1="{fnum(cx - half_box / 2)}" y1="{fnum(y(w))}" '
                f'x2="{fnum(cx + half_box / 2)}" y2="{fnum(y(w))}" '
                'stroke="#000000" stroke-width="0.35"/>'
            )
        svg.add(
            f'<rect x="{fnum(cx - half_box)}" y="{fnum(y(box.q3))}" '
            f'width="{fnum(2 * half_box)}" height="{fnum(y(box.q1) - y(box.q3))}" '
            'fill="#e8e8e8" stroke="#000000" stroke-width="0.4"/>'
        )
        svg.add(
            f'<line x1="{fnum(cx - half_box)}" y1="{fnum(y(box.median))}" '
            f'x2="{fnum(cx + half_box)}" y2="{fnum(y(box.median))}" '
            'stroke="#000000" stroke-width="0.6"/>'
        )
        for outlier in box.outliers:
            svg.add(
                f'<circle cx="{fnum(cx)}" cy="{fnum(y(outlier))}" r="0.9" '
                'fill="none" stroke="#000000" stroke-width="0.35"/>'
            )
        svg.add(
            f'<text x="{fnum(cx)}" y="{fnum(height - _MARGIN + 6)}" font-size="3" '
            f'text-anchor="middle">{_escape(box.event)}</text>'
        )
        svg.add("</g>")
    return svg.document()
