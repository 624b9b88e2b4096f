"""Command-line pipeline: template, ingest, analyze, aggregate, validate, render.

Numeric parameters resolve in three layers: built-in defaults, then a
JSON config file (``--config`` or the ``PRESENCE_TRACE_CONFIG``
environment variable), then explicit flags. Every output document
embeds the effective configuration, and identical inputs produce
byte-identical outputs.

Exit codes: 0 success, 2 usage, 3 missing file, 4 schema mismatch,
5 fatal trace validation, 6 malformed data, 7 duplicate record.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import analysis, descriptive_model, persistence, segmentation, trace_model

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_SCHEMA = 4
EXIT_VALIDATION = 5
EXIT_DATA = 6
EXIT_DUPLICATE = 7

CONFIG_ENV_VAR = "PRESENCE_TRACE_CONFIG"


class CliError(Exception):
    def __init__(self, code: int, kind: str, detail: str):
        self.code = code
        self.kind = kind
        self.detail = detail
        super().__init__(detail)


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = segmentation.DEFAULT_TOLERANCE
    eps_slope: float = segmentation.DEFAULT_EPS_SLOPE
    min_duration: float = segmentation.DEFAULT_MIN_DURATION
    window_before: float = analysis.DEFAULT_WINDOW_BEFORE
    window_after: float = analysis.DEFAULT_WINDOW_AFTER
    start_tolerance_mm: float = trace_model.START_DOT_TOLERANCE_MM
    clamp_tolerance_mm: float = trace_model.CLAMP_TOLERANCE_MM
    return_threshold: float = descriptive_model.DEFAULT_RETURN_THRESHOLD
    experience_min: float = descriptive_model.DEFAULT_EXPERIENCE_MIN_FRACTION
    study_id: str = "study"

    def __post_init__(self) -> None:
        for name in (
            "tolerance",
            "eps_slope",
            "min_duration",
            "window_before",
            "window_after",
            "start_tolerance_mm",
            "clamp_tolerance_mm",
            "experience_min",
        ):
            if getattr(self, name) <= 0:
                raise CliError(EXIT_DATA, "bad-config", f"{name} must be positive")

    def as_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _load_config_file(path: str | None) -> dict[str, Any]:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    if not Path(path).exists():
        raise CliError(EXIT_MISSING_FILE, "missing-file", f"config file not found: {path}")
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_DATA, "bad-config", f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise CliError(EXIT_DATA, "bad-config", f"{path}: config must be an object")
    return doc


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults < config file < explicit flags"""
    merged: dict[str, Any] = {}
    file_values = _load_config_file(getattr(args, "config", None))
    known = {f.name for f in fields(RunConfig)}
    for key, value in file_values.items():
        if key in known:
            merged[key] = value
    for key in known:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise CliError(EXIT_DATA, "bad-config", str(exc)) from exc


def _require_file(path: str | Path) -> Path:
    p = Path(path)
    if not p.exists():
        raise CliError(EXIT_MISSING_FILE, "missing-file", str(p))
    return p


def _open_store(path: str | Path, config: Mapping[str, Any] | None = None) -> persistence.SessionStore:
    try:
        return persistence.SessionStore(path, config)
    except persistence.StoreFormatError as exc:
        raise CliError(EXIT_SCHEMA, "schema-mismatch", str(exc)) from exc


def _load_events(path: str) -> dict[str, tuple[analysis.GroundTruthEvent, ...]]:
    _require_file(path)
    try:
        return analysis.load_events_file(path)
    except trace_model.TraceFormatError as exc:
        code = EXIT_SCHEMA if "schema_version" in str(exc) else EXIT_DATA
        raise CliError(code, "bad-events", str(exc)) from exc


# --- subcommands --------------------------------------------------------------


def cmd_template(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    template_config = json.loads(Path(args.template).read_text(encoding="utf-8")) if args.template else {}
    try:
        template = trace_model.build_template(template_config)
    except trace_model.TemplateError as exc:
        raise CliError(EXIT_DATA, "bad-template", str(exc)) from exc
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    svg = persistence.render_template(template, config.as_dict())
    (out_dir / "template.svg").write_text(svg, encoding="utf-8")
    doc = {
        "schema_version": trace_model.SCHEMA_VERSION,
        "config": config.as_dict(),
        "template": trace_model.template_to_dict(template),
    }
    (out_dir / "template.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {out_dir / 'template.svg'} and {out_dir / 'template.json'}")
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    store = _open_store(args.store, config.as_dict())
    for path in args.traces:
        _require_file(path)
        try:
            raw, template = trace_model.load_trace_file(path)
        except trace_model.TraceFormatError as exc:
            code = EXIT_SCHEMA if "schema_version" in str(exc) else EXIT_DATA
            raise CliError(code, "bad-trace-file", f"{path}: {exc}") from exc
        report = trace_model.validate_trace(
            raw,
            template,
            start_tolerance_mm=config.start_tolerance_mm,
            clamp_tolerance_mm=config.clamp_tolerance_mm,
        )
        for issue in report.warning_issues():
            print(f"{path}: warning {issue.code}: {issue.message}", file=sys.stderr)
        if not report.ok:
            codes = ", ".join(i.code for i in report.fatal_issues())
            raise CliError(EXIT_VALIDATION, "fatal-validation", f"{path}: {codes}")
        normalized = trace_model.normalize(
            raw,
            template,
            start_tolerance_mm=config.start_tolerance_mm,
            clamp_tolerance_mm=config.clamp_tolerance_mm,
            check=False,
        )
        record = analysis.SessionRecord(
            study_id=config.study_id,
            participant_id=raw.source.participant_id,
            group=raw.source.group,
            capture=raw.source.capture,
            trace=normalized,
        )
        try:
            store.write_record(record)
        except persistence.DuplicateRecordError as exc:
            raise CliError(EXIT_DUPLICATE, "duplicate-record", str(exc)) from exc
    print(f"ingested {len(args.traces)} trace(s) into {args.store}")
    return EXIT_OK


def analyze_record(
    record: analysis.SessionRecord,
    events_by_group: Mapping[str, Sequence[analysis.GroundTruthEvent]],
    config: RunConfig,
) -> analysis.SessionRecord:
    """Segment one provisional record and attach model, matches and report."""
    trace = record.trace
    phases = segmentation.segment_phases(
        trace,
        tolerance=config.tolerance,
        eps_slope=config.eps_slope,
        min_duration=config.min_duration,
    )
    try:
        points = descriptive_model.extract_points(phases, trace)
    except descriptive_model.ModelIncompleteError as exc:
        return analysis.SessionRecord(
            study_id=record.study_id,
            participant_id=record.participant_id,
            group=record.group,
            capture=record.capture,
            version=record.version,
            trace=trace,
            error=f"model-incomplete:{exc.prerequisite}",
        )
    params = descriptive_model.compute_parameters(points, phases, trace)

    bips = [
        analysis.BipReport(
            p_dropping=bp.p_dropping,
            p_break=bp.p_break,
            sh_break=param.sh_break,
            t_dropping=param.t_dropping,
            t_raising=param.t_raising,
        )
        for bp, param in zip(points.breaks, params.breaks)
    ]
    events = events_by_group.get(record.group, ())
    window = analysis.MatchWindow(config.window_before, config.window_after)
    result = analysis.match_events(bips, events, window)
    for warning in result.warnings:
        print(f"{record.participant_id}: {warning}", file=sys.stderr)

    conformance = descriptive_model.check_prerequisites(
        points,
        phases,
        params,
        trace.annotations,
        experience_min_fraction=config.experience_min,
        return_threshold=config.return_threshold,
    )
    return analysis.SessionRecord(
        study_id=record.study_id,
        participant_id=record.participant_id,
        group=record.group,
        capture=record.capture,
        version=record.version,
        points=points,
        parameters=params,
        bip_reports=result.reports,
        conformance=conformance,
        trace=trace,
    )


def cmd_analyze(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    _require_file(args.store)
    store = _open_store(args.store)
    events_by_group = _load_events(args.events)
    out_store = _open_store(args.out, config.as_dict())
    for record in store.records():
        if record.trace is None:
            print(f"{record.participant_id}: no retained trace, skipped", file=sys.stderr)
            continue
        analyzed = analyze_record(record, events_by_group, config)
        if analyzed.error:
            print(f"{record.participant_id}: {analyzed.error}", file=sys.stderr)
        try:
            out_store.write_record(analyzed)
        except persistence.DuplicateRecordError as exc:
            raise CliError(EXIT_DUPLICATE, "duplicate-record", str(exc)) from exc
    print(f"analyzed {len(store.records())} record(s) into {args.out}")
    return EXIT_OK


def cmd_aggregate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    _require_file(args.store)
    store = _open_store(args.store)
    events_by_group = _load_events(args.events) if args.events else None
    records = store.records()
    if not records:
        raise CliError(EXIT_DATA, "empty-store", f"{args.store} holds no records")
    stats = analysis.aggregate(records, events_by_group)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo = config.as_dict()
    (out_dir / "detection.csv").write_text(
        persistence.detection_csv(stats.cells, echo), encoding="utf-8"
    )
    (out_dir / "global_stats.json").write_text(
        persistence.global_stats_document(stats, echo), encoding="utf-8"
    )
    if stats.box_summaries:
        (out_dir / "intensity_boxplot.svg").write_text(
            persistence.render_boxplot(stats.box_summaries, echo), encoding="utf-8"
        )
    print(f"wrote aggregate documents to {out_dir}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    _require_file(args.store)
    store = _open_store(args.store)
    lines = [json.dumps({"config": config.as_dict()}, sort_keys=True, separators=(",", ":"))]
    for record in store.records():
        entry: dict[str, Any] = {
            "study_id": record.study_id,
            "participant_id": record.participant_id,
        }
        if record.conformance is not None:
            entry["prerequisites"] = [
                {"id": e.id, "passed": e.passed, "detail": e.detail}
                for e in record.conformance.entries
            ]
            entry["all_passed"] = record.conformance.all_passed
        else:
            entry["all_passed"] = None
            entry["note"] = record.error or "not analyzed yet"
        lines.append(json.dumps(entry, sort_keys=True, separators=(",", ":")))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote conformance report to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    _require_file(args.store)
    store = _open_store(args.store)
    template_config = (
        json.loads(Path(args.template).read_text(encoding="utf-8")) if args.template else {}
    )
    if "template" in template_config:
        template = trace_model.template_from_dict(template_config["template"])
    else:
        template = trace_model.build_template(template_config)
    try:
        svg = persistence.render_overlay(
            store.records(),
            template,
            mark_points=args.mark_points,
            config=config.as_dict(),
        )
    except ValueError as exc:
        raise CliError(EXIT_DATA, "empty-input", str(exc)) from exc
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote overlay to {args.out}")
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (also via $" + CONFIG_ENV_VAR + ")")
    parser.add_argument("--tolerance", type=float, help="simplification tolerance, presence units")
    parser.add_argument("--eps-slope", dest="eps_slope", type=float, help="constant-phase slope bound")
    parser.add_argument("--min-duration", dest="min_duration", type=float, help="shortest surviving phase")
    parser.add_argument("--window-before", dest="window_before", type=float, help="match window before a tick")
    parser.add_argument("--window-after", dest="window_after", type=float, help="match window after a tick")
    parser.add_argument("--return-threshold", dest="return_threshold", type=float, help="presence level counting as returned")
    parser.add_argument("--experience-min", dest="experience_min", type=float, help="minimum experience fraction")
    parser.add_argument("--start-tolerance-mm", dest="start_tolerance_mm", type=float, help="start dot tolerance")
    parser.add_argument("--clamp-tolerance-mm", dest="clamp_tolerance_mm", type=float, help="presence clamp tolerance")
    parser.add_argument("--study-id", dest="study_id", help="study identifier for record keys")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="presence-trace",
        description="Digitize, segment and evaluate post-experience presence drawings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("template", help="write the drawing sheet SVG and its config")
    p.add_argument("--template", help="template config JSON (defaults when omitted)")
    p.add_argument("--out", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=cmd_template)

    p = sub.add_parser("ingest", help="validate and normalize trace files into a store")
    p.add_argument("traces", nargs="+", help="trace JSON files")
    p.add_argument("--store", required=True, help="session store (NDJSON)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="segment stored traces and match breaks to events")
    p.add_argument("--store", required=True, help="store with ingested traces")
    p.add_argument("--events", required=True, help="ground-truth events JSON")
    p.add_argument("--out", required=True, help="store to write analyzed records to")
    _add_config_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("aggregate", help="detection table, global stats and box plot")
    p.add_argument("--store", required=True, help="store with analyzed records")
    p.add_argument("--events", help="ground-truth events JSON")
    p.add_argument("--out", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("validate", help="prerequisite conformance per session")
    p.add_argument("--store", required=True, help="store with analyzed records")
    p.add_argument("--out", help="output file (stdout when omitted)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="overlay all stored drawings on one sheet")
    p.add_argument("--store", required=True, help="store with retained traces")
    p.add_argument("--template", help="template config JSON")
    p.add_argument("--mark-points", action="store_true", help="mark experience/exit points")
    p.add_argument("--out", required=True, help="output SVG file")
    _add_config_flags(p)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": exc.kind, "detail": exc.detail}), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
