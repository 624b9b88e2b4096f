"""Break detection, event matching and cross-session aggregation.

Detected breaks are matched to ground-truth event ticks inside an
asymmetric time window (drawings place breaks late rather than early),
then sessions are reduced to detection frequencies per event and group,
intensity summaries per event, and global descriptive statistics.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

from .descriptive_model import ConformanceReport, ModelPoints, Parameters
from .trace_model import NormalizedTrace, Point, SCHEMA_VERSION, TraceFormatError

#: Match window around an event tick, in timeline fractions.
DEFAULT_WINDOW_BEFORE = 0.025
DEFAULT_WINDOW_AFTER = 0.125


class EventConfigError(ValueError):
    """Raised for malformed ground-truth event definitions."""


@dataclass(frozen=True)
class GroundTruthEvent:
    label: str
    tick_t: float
    expected_bip: bool = True
    bip_rank: int | None = None  # 1 = strongest

    def __post_init__(self) -> None:
        if not 0.0 <= self.tick_t <= 1.0:
            raise EventConfigError(f"tick_t for {self.label!r} outside [0, 1]: {self.tick_t}")


@dataclass(frozen=True)
class BipReport:
    """One detected break, optionally attributed to a known event."""

    p_dropping: Point
    p_break: Point
    sh_break: float
    t_dropping: float
    t_raising: float | None = None
    matched_event: str | None = None

    def __post_init__(self) -> None:
        if self.sh_break >= 0:
            raise ValueError(f"sh_break must be negative, got {self.sh_break}")


@dataclass(frozen=True)
class MatchWindow:
    before: float = DEFAULT_WINDOW_BEFORE
    after: float = DEFAULT_WINDOW_AFTER


@dataclass(frozen=True)
class MatchResult:
    reports: tuple[BipReport, ...]
    warnings: tuple[str, ...] = ()

    def matched(self) -> tuple[BipReport, ...]:
        return tuple(r for r in self.reports if r.matched_event is not None)

    def unexplained(self) -> tuple[BipReport, ...]:
        return tuple(r for r in self.reports if r.matched_event is None)


@dataclass(frozen=True)
class SessionRecord:
    """One analyzed session, the unit stored in the session store."""

    study_id: str
    participant_id: str
    group: str
    capture: str = "digital"
    version: int = 1
    points: ModelPoints | None = None
    parameters: Parameters | None = None
    bip_reports: tuple[BipReport, ...] | None = None
    conformance: ConformanceReport | None = None
    trace: NormalizedTrace | None = None
    error: str | None = None

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.study_id, self.participant_id, self.version)


def validate_events(events: Sequence[GroundTruthEvent]) -> None:
    labels = [e.label for e in events]
    if len(set(labels)) != len(labels):
        raise EventConfigError("event labels must be unique")
    ranks = [e.bip_rank for e in events if e.expected_bip and e.bip_rank is not None]
    if len(set(ranks)) != len(ranks):
        raise EventConfigError("bip ranks must be unique among expected events")


def match_events(
    bips: Sequence[BipReport],
    events: Sequence[GroundTruthEvent],
    window: MatchWindow = MatchWindow(),
) -> MatchResult:
    """Assign detected breaks to event ticks.

    A break is eligible for an event when its drop start or its bottom
    falls inside [tick - before, tick + after], bounds inclusive. Events
    are served in tick order; each takes the eligible break whose drop
    start is nearest the tick (ties go to the earlier break), and every
    break is used at most once. Leftover breaks stay unexplained.
    """
    validate_events(events)
    ordered = sorted(events, key=lambda e: e.tick_t)

    warnings = []
    for a, b in zip(ordered, ordered[1:]):
        if a.tick_t + window.after >= b.tick_t - window.before:
            warnings.append(f"match windows overlap: {a.label!r} and {b.label!r}")

    assigned: dict[int, str] = {}
    for event in ordered:
        lo = event.tick_t - window.before
        hi = event.tick_t + window.after
        candidates = [
            i
            for i, bip in enumerate(bips)
            if i not in assigned
            and (lo <= bip.p_dropping.t <= hi or lo <= bip.p_break.t <= hi)
        ]
        if candidates:
            best = min(
                candidates,
                key=lambda i: (abs(bips[i].p_dropping.t - event.tick_t), bips[i].p_dropping.t),
            )
            assigned[best] = event.label

    reports = tuple(
        replace(bip, matched_event=assigned.get(i)) for i, bip in enumerate(bips)
    )
    return MatchResult(reports, tuple(warnings))


@dataclass(frozen=True)
class EventGroupCell:
    """One Table-style row: an event inside one randomization group."""

    event: str
    group: str
    pos: int
    n_group: int
    n_matched: int
    detection_pct: float
    mean_sh_break: float | None
    mean_p_break: float | None


@dataclass(frozen=True)
class EventBoxSummary:
    """Box-plot statistics of break intensity for one event."""

    event: str
    n: int
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...] = ()
    bip_rank: int | None = None


@dataclass(frozen=True)
class GlobalStats:
    n_records: int
    mean_t_transition: float | None
    sd_t_transition: float | None
    mean_t_exit: float | None
    sd_t_exit: float | None
    mean_experience_fraction: float | None
    mean_return_t: float | None
    sd_return_t: float | None
    mean_return_p: float | None
    sd_return_p: float | None
    mean_bip_count: float | None
    sd_bip_count: float | None
    total_bips: int
    matched_bips: int
    correct_position_rate: float | None
    drop_raise_ratio: float | None


@dataclass(frozen=True)
class AggregateStats:
    cells: tuple[EventGroupCell, ...]
    box_summaries: tuple[EventBoxSummary, ...]
    global_stats: GlobalStats
    bip_counts: tuple[int, ...]
    zero_match_events: tuple[str, ...] = ()


def _mean(values: list[float]) -> float | None:
    return statistics.fmean(values) if values else None


def _sd(values: list[float]) -> float | None:
    # sample standard deviation (n-1); undefined below two observations
    return statistics.stdev(values) if len(values) >= 2 else None


def detection_table(
    records: Sequence[SessionRecord],
    events_by_group: Mapping[str, Sequence[GroundTruthEvent]],
) -> tuple[EventGroupCell, ...]:
    """Detection frequency and mean intensity per event and group.

    Detection is the percentage of the group's sessions containing a
    break matched to the event; intensity means run over matched breaks
    only and are absent for events nobody detected.
    """
    cells = []
    for group in sorted(events_by_group):
        events = sorted(events_by_group[group], key=lambda e: e.tick_t)
        expected = [e for e in events if e.expected_bip]
        group_records = [r for r in records if r.group == group]
        if not group_records:
            continue
        for pos, event in enumerate(expected, start=1):
            matched = [
                bip
                for record in group_records
                for bip in (record.bip_reports or ())
                if bip.matched_event == event.label
            ]
            detected_in = sum(
                1
                for record in group_records
                if any(b.matched_event == event.label for b in (record.bip_reports or ()))
            )
            cells.append(
                EventGroupCell(
                    event=event.label,
                    group=group,
                    pos=pos,
                    n_group=len(group_records),
                    n_matched=detected_in,
                    detection_pct=100.0 * detected_in / len(group_records),
                    mean_sh_break=_mean([b.sh_break for b in matched]),
                    mean_p_break=_mean([b.p_break.p for b in matched]),
                )
            )
    return tuple(cells)


def _box_summary(event: str, values: list[float], rank: int | None) -> EventBoxSummary:
    ordered = sorted(values)
    if len(ordered) == 1:
        q1 = median = q3 = ordered[0]
    else:
        q1, median, q3 = statistics.quantiles(ordered, n=4, method="inclusive")
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    in_fence = [v for v in ordered if lo_fence <= v <= hi_fence]
    outliers = tuple(v for v in ordered if not lo_fence <= v <= hi_fence)
    return EventBoxSummary(
        event=event,
        n=len(ordered),
        median=median,
        q1=q1,
        q3=q3,
        whisker_low=min(in_fence),
        whisker_high=max(in_fence),
        outliers=outliers,
        bip_rank=rank,
    )


def aggregate(
    records: Sequence[SessionRecord],
    events_by_group: Mapping[str, Sequence[GroundTruthEvent]] | None = None,
) -> AggregateStats:
    """Reduce a record set to the full descriptive summary.

    Permutation-invariant over records. The per-participant break count
    includes unexplained breaks; intensity summaries cover matched ones.
    When the ground-truth events are supplied, the table slice and break
    ranks are attached.
    """
    if not records:
        raise ValueError("aggregate needs at least one record")
    modeled = [r for r in records if r.parameters is not None and r.points is not None]

    t_transitions = [r.parameters.t_transition for r in modeled]
    t_exits = [r.parameters.t_exit for r in modeled]
    experience = [r.parameters.t_experience for r in modeled]
    return_ts = [r.points.p_return.t for r in modeled]
    return_ps = [r.points.p_return.p for r in modeled]

    all_bips = [bip for r in records for bip in (r.bip_reports or ())]
    matched = [b for b in all_bips if b.matched_event is not None]
    bip_counts = tuple(len(r.bip_reports or ()) for r in records)

    recovered = [b for b in all_bips if b.t_raising is not None]
    ratio = None
    if recovered:
        mean_raising = statistics.fmean(b.t_raising for b in recovered)
        if mean_raising > 0:
            ratio = statistics.fmean(b.t_dropping for b in recovered) / mean_raising

    ranks: dict[str, int] = {}
    if events_by_group:
        for events in events_by_group.values():
            for event in events:
                if event.bip_rank is not None:
                    ranks.setdefault(event.label, event.bip_rank)

    by_event: dict[str, list[float]] = {}
    for bip in matched:
        by_event.setdefault(bip.matched_event, []).append(bip.p_break.p)
    box_summaries = tuple(
        _box_summary(label, values, ranks.get(label))
        for label, values in sorted(by_event.items())
    )

    cells = detection_table(records, events_by_group) if events_by_group else ()
    zero_match = tuple(
        sorted(
            {cell.event for cell in cells if cell.event not in by_event}
        )
    )

    counts = [float(c) for c in bip_counts]
    global_stats = GlobalStats(
        n_records=len(records),
        mean_t_transition=_mean(t_transitions),
        sd_t_transition=_sd(t_transitions),
        mean_t_exit=_mean(t_exits),
        sd_t_exit=_sd(t_exits),
        mean_experience_fraction=_mean(experience),
        mean_return_t=_mean(return_ts),
        sd_return_t=_sd(return_ts),
        mean_return_p=_mean(return_ps),
        sd_return_p=_sd(return_ps),
        mean_bip_count=_mean(counts),
        sd_bip_count=_sd(counts),
        total_bips=len(all_bips),
        matched_bips=len(matched),
        correct_position_rate=len(matched) / len(all_bips) if all_bips else None,
        drop_raise_ratio=ratio,
    )
    return AggregateStats(
        cells=cells,
        box_summaries=box_summaries,
        global_stats=global_stats,
        bip_counts=bip_counts,
        zero_match_events=zero_match,
    )


@dataclass(frozen=True)
class IntensityOrdering:
    """Events ordered strongest first by median break intensity."""

    ordered: tuple[EventBoxSummary, ...]
    #: (pairwise agreements with the expected ranks, pair count); ties
    #: count one half. Absent when fewer than two ranked events matched.
    concordance: tuple[float, int] | None
    omitted: tuple[str, ...] = ()


def intensity_ordering(stats: AggregateStats) -> IntensityOrdering:
    """Order events by how close to the real world their breaks bottom out.

    Ascending median presence at the break bottom: the most negative
    median (nearest the real world) ranks as strongest. Equal medians
    keep their input order. Events without any matched break are listed
    separately, not ordered.
    """
    summaries = [s for s in stats.box_summaries if s.n >= 1]
    ordered = tuple(sorted(summaries, key=lambda s: s.median))

    ranked = [s for s in ordered if s.bip_rank is not None]
    concordance = None
    if len(ranked) >= 2:
        agreements = 0.0
        pairs = 0
        for i in range(len(ranked)):
            for j in range(i + 1, len(ranked)):
                a, b = ranked[i], ranked[j]
                pairs += 1
                if a.median == b.median:
                    agreements += 0.5
                elif (a.median < b.median) == (a.bip_rank < b.bip_rank):
                    agreements += 1.0
        concordance = (agreements, pairs)

    return IntensityOrdering(
        ordered=ordered,
        concordance=concordance,
        omitted=stats.zero_match_events,
    )


# --- ground-truth event files ----------------------------------------------
#
# Events are configured per randomization group:
#   {"schema_version": "1",
#    "groups": {"A": [{"label": ..., "tick_t": ..., "expected_bip": true,
#                      "bip_rank": 1}, ...], ...}}


def events_from_document(doc: dict[str, Any]) -> dict[str, tuple[GroundTruthEvent, ...]]:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise TraceFormatError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    groups = {}
    try:
        for group, entries in doc["groups"].items():
            events = tuple(
                GroundTruthEvent(
                    label=str(e["label"]),
                    tick_t=float(e["tick_t"]),
                    expected_bip=bool(e.get("expected_bip", True)),
                    bip_rank=int(e["bip_rank"]) if e.get("bip_rank") is not None else None,
                )
                for e in entries
            )
            validate_events(events)
            groups[str(group)] = events
    except (KeyError, TypeError) as exc:
        raise TraceFormatError(f"malformed events document: {exc}") from exc
    return groups


def load_events_file(path: str | Path) -> dict[str, tuple[GroundTruthEvent, ...]]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{path}: not valid JSON: {exc}") from exc
    return events_from_document(doc)
