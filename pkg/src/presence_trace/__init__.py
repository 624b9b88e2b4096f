"""Toolkit for post-experience presence drawings.

Turns digitized drawings (polylines over a standardized sheet) into a
descriptive model of the session: named points, classified phases and
relative parameters; detects breaks in presence, matches them to known
events and aggregates sessions into detection and intensity statistics.
"""

from .analysis import (
    AggregateStats,
    BipReport,
    EventBoxSummary,
    EventGroupCell,
    GlobalStats,
    GroundTruthEvent,
    IntensityOrdering,
    MatchResult,
    MatchWindow,
    SessionRecord,
    aggregate,
    detection_table,
    intensity_ordering,
    load_events_file,
    match_events,
)
from .descriptive_model import (
    BreakParams,
    BreakPoints,
    ConformanceReport,
    ModelIncompleteError,
    ModelPoints,
    Parameters,
    PrerequisiteResult,
    check_prerequisites,
    compute_parameters,
    extract_points,
)
from .persistence import (
    DuplicateRecordError,
    SessionStore,
    detection_csv,
    global_stats_document,
    render_boxplot,
    render_overlay,
    render_template,
)
from .segmentation import (
    CONSTANT,
    DROPPING,
    RAISING,
    Phase,
    Segment,
    classify,
    segment_phases,
    simplify,
)
from .trace_model import (
    Annotation,
    EventTick,
    NormalizedAnnotation,
    NormalizedTrace,
    Point,
    RawTrace,
    Template,
    TemplateError,
    TraceSource,
    TraceValidationError,
    ValidationReport,
    build_template,
    denormalize,
    load_trace_file,
    normalize,
    save_trace_file,
    validate_trace,
)

__version__ = "0.1.0"
