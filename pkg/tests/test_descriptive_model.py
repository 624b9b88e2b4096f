from __future__ import annotations

import random

import pytest

from presence_trace.descriptive_model import (
    BreakParams,
    ConformanceReport,
    ModelError,
    ModelIncompleteError,
    ModelPoints,
    Parameters,
    PrerequisiteResult,
    check_prerequisites,
    compute_parameters,
    extract_points,
)
from presence_trace.segmentation import DROPPING, RAISING, Phase, segment_phases
from presence_trace.trace_model import NormalizedTrace, Point, TraceSource, normalize

from synth import gen_piecewise, prerequisite_traces, reference_drawing


def ntrace(samples, annotations=()):
    return NormalizedTrace(
        tuple(Point(t, p) for t, p in samples), tuple(annotations), TraceSource("t")
    )


def analyzed(trace):
    phases = segment_phases(trace)
    points = extract_points(phases, trace)
    params = compute_parameters(points, phases, trace)
    return phases, points, params


@pytest.fixture(scope="module")
def reference():
    raw, template = reference_drawing()
    trace = normalize(raw, template)
    return trace, *analyzed(trace)


class TestExtractPoints:
    def test_reference_points(self, reference):
        trace, phases, points, _params = reference
        assert points.p_transition == Point(0.0, 0.0)
        assert points.p_experience.t == pytest.approx(0.2)
        assert points.p_experience.p == pytest.approx(0.8)
        assert len(points.breaks) == 2
        assert points.p_mentalexit.t == pytest.approx(0.92)
        assert points.p_return.t == pytest.approx(1.0)
        assert points.p_return.p == pytest.approx(-0.93)

    def test_monotone_rise_then_final_drop_has_no_breaks(self):
        trace = ntrace([(0.0, 0.0), (0.5, 0.8), (0.9, 0.85), (1.0, -0.9)])
        _phases, points, _params = analyzed(trace)
        assert points.breaks == ()

    def test_trace_short_of_the_line_has_no_physical_exit(self):
        trace = ntrace([(0.0, 0.0), (0.2, 0.8), (0.9, 0.8), (0.996, -0.93)])
        _phases, points, _params = analyzed(trace)
        assert points.p_return == Point(0.996, -0.93)
        assert points.p_physicalexit is None

    def test_trace_on_the_line_has_physical_exit(self, reference):
        _trace, _phases, points, _params = reference
        assert points.p_physicalexit is not None
        assert points.p_physicalexit.t == 1.0

    def test_no_final_drop_is_model_incomplete(self):
        trace = ntrace([(0.0, 0.0), (0.3, 0.6), (0.6, -0.5), (1.0, 0.7)])
        phases = segment_phases(trace)
        with pytest.raises(ModelIncompleteError) as err:
            extract_points(phases, trace)
        assert err.value.prerequisite == "b"

    def test_non_raising_opening_collapses_experience_onto_transition(self):
        trace = ntrace([(0.0, 0.5), (0.4, 0.5), (0.6, 0.8), (1.0, -0.8)])
        _phases, points, _params = analyzed(trace)
        assert points.p_experience == points.p_transition


class TestComputeParameters:
    def test_break_shift(self):
        # a drop from (0.40, 0.60) to (0.42, 0.27)
        trace = ntrace(
            [(0.0, 0.0), (0.1, 0.6), (0.40, 0.6), (0.42, 0.27), (0.47, 0.6), (0.9, 0.6), (1.0, -0.9)]
        )
        _phases, _points, params = analyzed(trace)
        assert len(params.breaks) == 1
        assert params.breaks[0].sh_break == pytest.approx(-0.33)

    def test_transition_and_exit_times(self):
        points = ModelPoints(
            p_transition=Point(0.0, 0.0),
            p_experience=Point(0.21, 0.8),
            p_mentalexit=Point(0.92, 0.7),
            p_return=Point(1.0, -0.95),
        )
        phases = [
            Phase(RAISING, Point(0.0, 0.0), Point(0.21, 0.8)),
            Phase("constant", Point(0.21, 0.8), Point(0.92, 0.7)),
            Phase(DROPPING, Point(0.92, 0.7), Point(1.0, -0.95)),
        ]
        params = compute_parameters(points, phases)
        assert params.t_transition == pytest.approx(0.21)
        assert params.t_exit == pytest.approx(0.08)
        assert params.t_experience == pytest.approx(0.71)

    def test_drop_raise_ratio(self, reference):
        _trace, _phases, _points, params = reference
        drops = [bp.t_dropping for bp in params.breaks]
        raises_ = [bp.t_raising for bp in params.breaks]
        expected = (sum(drops) / 2) / (sum(raises_) / 2)
        assert params.drop_raise_ratio == pytest.approx(expected)

    def test_ratio_frozen_example(self):
        # means 0.008 and 0.010 give exactly 0.8
        trace = ntrace(
            [
                (0.0, 0.0),
                (0.1, 0.7),
                (0.4, 0.7),
                (0.408, 0.3),
                (0.418, 0.7),
                (0.6, 0.7),
                (0.608, 0.3),
                (0.618, 0.7),
                (0.9, 0.7),
                (1.0, -0.9),
            ]
        )
        _phases, _points, params = analyzed(trace)
        assert [bp.t_dropping for bp in params.breaks] == pytest.approx([0.008, 0.008])
        assert [bp.t_raising for bp in params.breaks] == pytest.approx([0.010, 0.010])
        assert params.drop_raise_ratio == pytest.approx(0.8)

    def test_plateau_after_break_reports_recovery_plateau(self):
        trace = ntrace(
            [(0.0, 0.0), (0.1, 0.8), (0.4, 0.8), (0.42, 0.3), (0.6, 0.3), (0.62, -0.1), (0.7, 0.6), (0.9, 0.6), (1.0, -0.9)]
        )
        _phases, _points, params = analyzed(trace)
        first = params.breaks[0]
        assert first.t_raising is None
        assert first.recovery_plateau == pytest.approx(0.18)

    def test_accounting_identity(self, reference):
        _trace, _phases, points, params = reference
        total = params.t_transition + params.t_experience + params.t_exit
        assert total == pytest.approx(points.p_return.t - points.p_transition.t, abs=1e-9)

    def test_exit_split_when_physical_exit_present(self):
        points = ModelPoints(
            p_transition=Point(0.0, 0.0),
            p_experience=Point(0.2, 0.8),
            p_mentalexit=Point(0.9, 0.7),
            p_return=Point(1.02, -0.9),
            p_physicalexit=Point(1.0, -0.5),
        )
        phases = [
            Phase(RAISING, Point(0.0, 0.0), Point(0.2, 0.8)),
            Phase("constant", Point(0.2, 0.8), Point(0.9, 0.7)),
            Phase(DROPPING, Point(0.9, 0.7), Point(1.02, -0.9)),
        ]
        params = compute_parameters(points, phases)
        assert params.t_physical == pytest.approx(0.02)
        assert params.t_exit == pytest.approx(params.t_mental + params.t_physical)

    def test_midline_crossing(self):
        trace = ntrace([(0.0, -0.2), (0.1, -0.1), (0.3, 0.3), (0.9, 0.3), (1.0, -0.9)])
        phases = segment_phases(trace)
        points = extract_points(phases, trace)
        params = compute_parameters(points, phases, trace)
        # crosses zero halfway between (0.1, -0.1) and (0.3, 0.3)
        assert params.t_transition_midcross == pytest.approx(0.15)

    def test_sh_sign_enforced(self):
        with pytest.raises(ModelError, match="sh_break"):
            BreakParams(sh_break=0.1, t_dropping=0.01)

    def test_time_axis_affine_invariance(self):
        rng = random.Random(21)
        for _ in range(10):
            trace, _v, _k = gen_piecewise(rng, end_drop=True)
            phases = segment_phases(trace)
            points = extract_points(phases, trace)
            params = compute_parameters(points, phases, trace)

            c, delta = 0.5, 0.25
            scaled = ntrace([(delta + c * pt.t, pt.p) for pt in trace.samples])
            phases2 = segment_phases(scaled, min_duration=0.01 * c)
            points2 = extract_points(phases2, scaled)
            params2 = compute_parameters(points2, phases2, scaled)

            assert len(points2.breaks) == len(points.breaks)
            for b1, b2 in zip(params.breaks, params2.breaks):
                assert b2.sh_break == pytest.approx(b1.sh_break, abs=1e-9)
                assert b2.t_dropping == pytest.approx(c * b1.t_dropping, abs=1e-9)
            assert params2.t_transition == pytest.approx(c * params.t_transition, abs=1e-9)
            assert params2.t_exit == pytest.approx(c * params.t_exit, abs=1e-9)


class TestPrerequisites:
    def test_reference_passes_all(self, reference):
        trace, phases, points, params = reference
        report = check_prerequisites(points, phases, params, trace.annotations)
        assert report.all_passed
        assert [e.id for e in report.entries] == ["a", "b", "c", "d", "e"]

    def test_return_above_threshold_fails_b(self):
        trace = ntrace([(0.0, 0.0), (0.2, 0.8), (0.9, 0.8), (1.0, -0.2)])
        phases, points, params = analyzed(trace)
        report = check_prerequisites(points, phases, params)
        assert report.failed_ids() == ("b",)

    def test_transition_shorter_than_exit_fails_e(self):
        trace = ntrace([(0.0, 0.0), (0.05, 0.8), (0.92, 0.8), (1.0, -0.9)])
        phases, points, params = analyzed(trace)
        report = check_prerequisites(points, phases, params)
        assert report.failed_ids() == ("e",)
        assert "transition shorter than exit" in report.entry("e").detail

    def test_each_violation_flags_exactly_one(self):
        for prereq_id, raw in prerequisite_traces().items():
            from presence_trace.trace_model import Template

            trace = normalize(raw, Template(), check=False)
            phases, points, params = analyzed(trace)
            report = check_prerequisites(points, phases, params, trace.annotations)
            assert report.failed_ids() == (prereq_id,), (
                prereq_id,
                [(e.id, e.passed, e.detail) for e in report.entries],
            )

    def test_report_must_cover_all_five(self):
        with pytest.raises(ModelError):
            ConformanceReport((PrerequisiteResult("a", True, ""),))
