"""Pattern layout tests: equidistance arithmetic, feasibility screening,
mirroring, persistence, and the developed-view rendering."""

import math

import pytest

from foamact.pattern import (
    FeasibilityError,
    PatternSpec,
    Substrate,
    derived_interval,
    developed_view_svg,
    layout,
    load_spec,
    mirror,
    save_spec,
    validate,
)

SUB = Substrate()  # H=80, R=20, t=1


class TestSubstrate:
    def test_defaults(self):
        assert SUB.H == 80.0 and SUB.R == 20.0 and SUB.t == 1.0
        assert SUB.circumference == pytest.approx(2 * math.pi * 20.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            Substrate(H=0.0)
        with pytest.raises(ValueError):
            Substrate(t=25.0)


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            PatternSpec(kind="radial", N=1, l=10.0, d=5.0)

    def test_diagonal_requires_gamma_and_handedness(self):
        with pytest.raises(ValueError, match="gamma"):
            PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0)
        with pytest.raises(ValueError, match="handedness"):
            PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0, gamma=32.5)

    def test_unilateral_kinds_reject_gamma(self):
        with pytest.raises(ValueError):
            PatternSpec(kind="transverse", N=1, l=60.0, d=10.0, gamma=30.0)


class TestEquidistance:
    def test_transverse_intervals(self):
        # H=80: N=1..4 -> w = 40, 26.7, 20, 16 mm
        expected = {1: 40.0, 2: 80.0 / 3.0, 3: 20.0, 4: 16.0}
        for n, w in expected.items():
            assert derived_interval("transverse", n, SUB) == pytest.approx(w)
        assert derived_interval("transverse", 2, SUB) == pytest.approx(26.7, abs=0.05)

    def test_longitudinal_intervals(self):
        # theta = 180/(N+1): N=1..4 -> 90, 60, 45, 36 deg
        for n, th in {1: 90.0, 2: 60.0, 3: 45.0, 4: 36.0}.items():
            assert derived_interval("longitudinal", n) == pytest.approx(th)

    def test_diagonal_intervals(self):
        # theta = 360/N: N=2,4,6,8 -> 180, 90, 60, 45 deg
        for n, th in {2: 180.0, 4: 90.0, 6: 60.0, 8: 45.0}.items():
            assert derived_interval("diagonal", n) == pytest.approx(th)


class TestLayout:
    def test_transverse_placement(self):
        spec = PatternSpec(kind="transverse", N=3, l=62.8, d=20.0)
        segs = layout(spec, SUB)
        assert len(segs) == 3
        assert [s.start[1] for s in segs] == pytest.approx([20.0, 40.0, 60.0])
        for s in segs:
            assert s.start[1] == s.end[1]  # horizontal on the developed view
            assert s.end[0] - s.start[0] == pytest.approx(62.8)
            # centered on azimuth 0
            assert s.start[0] == pytest.approx(-31.4)

    def test_longitudinal_placement(self):
        spec = PatternSpec(kind="longitudinal", N=3, l=60.0, d=10.0)
        segs = layout(spec, SUB)
        assert len(segs) == 3
        phis = [math.degrees(s.start[0] / SUB.R) for s in segs]
        assert phis == pytest.approx([-45.0, 0.0, 45.0])
        for s in segs:
            assert s.start[0] == s.end[0]  # vertical
            assert s.start[1] == pytest.approx(10.0)
            assert s.end[1] == pytest.approx(70.0)

    def test_diagonal_extents(self):
        # l=74.5, gamma=32.5 deg -> circumferential 62.8 mm, axial 40.0 mm
        spec = PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0,
                           gamma=32.5, handedness="right")
        segs = layout(spec, SUB)
        assert len(segs) == 2
        ds = segs[0].end[0] - segs[0].start[0]
        dz = segs[0].end[1] - segs[0].start[1]
        assert abs(ds) == pytest.approx(62.8, abs=0.1)
        assert dz == pytest.approx(40.0, abs=0.1)
        assert math.hypot(ds, dz) == pytest.approx(74.5)
        assert ds > 0  # right-handed rises with +s

    def test_diagonal_handedness_flips_slope(self):
        left = PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0,
                           gamma=32.5, handedness="left")
        segs = layout(left, SUB)
        assert segs[0].end[0] - segs[0].start[0] < 0

    def test_diagonal_centered_axially(self):
        spec = PatternSpec(kind="diagonal", N=4, l=74.5, d=10.0,
                           gamma=32.5, handedness="left")
        segs = layout(spec, SUB)
        z_mid = 0.5 * (segs[0].start[1] + segs[0].end[1])
        assert z_mid == pytest.approx(SUB.H / 2.0)


class TestFeasibility:
    def test_depth_exceeds_radius(self):
        spec = PatternSpec(kind="transverse", N=1, l=62.8, d=25.0)
        assert any("depth" in v for v in validate(spec, SUB))
        with pytest.raises(FeasibilityError, match="depth"):
            layout(spec, SUB)

    def test_transverse_too_many_rows(self):
        spec = PatternSpec(kind="transverse", N=3, l=62.8, d=20.0, w=30.0)
        assert any("do not fit" in v for v in validate(spec, SUB))

    def test_longitudinal_too_long(self):
        spec = PatternSpec(kind="longitudinal", N=1, l=90.0, d=10.0)
        assert any("exceeds height" in v for v in validate(spec, SUB))

    def test_diagonal_axial_overrun(self):
        spec = PatternSpec(kind="diagonal", N=2, l=120.0, d=10.0,
                           gamma=60.0, handedness="left")
        assert any("axial extent" in v for v in validate(spec, SUB))

    def test_parallel_helices_do_not_intersect(self):
        # crowded but parallel helices stay disjoint on the developed view
        spec = PatternSpec(kind="diagonal", N=8, l=95.0, d=10.0,
                           gamma=55.0, handedness="left")
        assert validate(spec, SUB) == []

    def test_reference_patterns_feasible(self):
        for spec in (
            PatternSpec(kind="transverse", N=4, l=62.8, d=20.0),
            PatternSpec(kind="longitudinal", N=4, l=60.0, d=10.0),
            PatternSpec(kind="diagonal", N=8, l=74.5, d=10.0,
                        gamma=32.5, handedness="left"),
        ):
            assert validate(spec, SUB) == []


class TestMirror:
    def test_diagonal_flips_handedness(self):
        spec = PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0,
                           gamma=32.5, handedness="left")
        assert mirror(spec).handedness == "right"
        assert mirror(mirror(spec)) == spec

    def test_unilateral_is_self_mirror(self):
        spec = PatternSpec(kind="transverse", N=2, l=62.8, d=20.0)
        assert mirror(spec) == spec


class TestPersistence:
    def test_spec_round_trip(self, tmp_path):
        spec = PatternSpec(kind="diagonal", N=4, l=74.5, d=10.0,
                           gamma=32.5, handedness="left")
        path = tmp_path / "spec.json"
        save_spec(spec, SUB, path)
        back_spec, back_sub = load_spec(path)
        assert back_spec == spec
        assert back_sub == SUB

    def test_svg_renders_all_segments(self, tmp_path):
        spec = PatternSpec(kind="transverse", N=3, l=62.8, d=20.0)
        text = developed_view_svg(spec, SUB, tmp_path / "view.svg")
        assert text.count("<line") >= 3
        assert (tmp_path / "view.svg").read_text() == text

    def test_svg_wraps_segments_inside_rectangle(self):
        # l = circumference/2 centered at azimuth 0 crosses the wrap line
        spec = PatternSpec(kind="transverse", N=1, l=62.8, d=20.0)
        text = developed_view_svg(spec, SUB)
        assert text.count("<line") == 2  # split at the wrap
