"""Pose extraction tests: swing-twist decomposition, angle conventions,
mirror equivariance, and sweep bookkeeping.  Pure geometry -- no solver runs."""

import math

import numpy as np
import pytest

from foamact.kinematics import (
    TABLE2_REFERENCE,
    PoseAngles,
    SweepResult,
    extract_angles,
    swing_twist,
    write_sweep_csv,
)
from foamact.pattern import PatternSpec, Substrate

SUB = Substrate()


def rot_z(deg):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(deg):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rand_rotation(rng):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


class TestSwingTwist:
    def test_identity(self):
        swing, twist = swing_twist(np.eye(3))
        assert np.allclose(swing, np.eye(3))
        assert np.allclose(twist, np.eye(3))

    def test_pure_twist(self):
        swing, twist = swing_twist(rot_z(37.0))
        assert np.allclose(swing, np.eye(3), atol=1e-12)
        assert np.allclose(twist, rot_z(37.0), atol=1e-12)

    def test_pure_swing(self):
        swing, twist = swing_twist(rot_x(25.0))
        assert np.allclose(twist, np.eye(3), atol=1e-12)
        assert np.allclose(swing, rot_x(25.0), atol=1e-12)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            rot = rand_rotation(rng)
            swing, twist = swing_twist(rot)
            assert np.linalg.norm(swing @ twist - rot) < 1e-10
            # twist is a rotation about +z exactly
            assert twist[2, 2] == pytest.approx(1.0, abs=1e-12)
            assert abs(twist[0, 2]) < 1e-12 and abs(twist[1, 2]) < 1e-12

    def test_degenerate_flip(self):
        swing, twist = swing_twist(rot_x(180.0))
        assert np.allclose(twist, np.eye(3), atol=1e-9)

    def test_rejects_non_rotation(self):
        with pytest.raises(ValueError):
            swing_twist(np.diag([1.0, 1.0, 2.0]))
        with pytest.raises(ValueError):
            swing_twist(np.diag([1.0, 1.0, -1.0]) @ rot_z(10.0))


class TestExtractAngles:
    def test_undeformed(self):
        pose = extract_angles(np.eye(3), np.zeros(3), SUB)
        assert pose == PoseAngles(0.0, 0.0, 0.0, 0.0)

    def test_pure_twist(self):
        pose = extract_angles(rot_z(30.0), np.zeros(3), SUB)
        assert pose.twist_deg == pytest.approx(30.0)
        assert pose.bend_deg == pytest.approx(0.0, abs=1e-9)

    def test_twist_sign_convention(self):
        # positive = counter-clockwise seen from +z
        assert extract_angles(rot_z(-30.0), np.zeros(3), SUB).twist_deg == pytest.approx(-30.0)

    def test_pure_bend(self):
        pose = extract_angles(rot_x(20.0), np.zeros(3), SUB)
        assert pose.bend_deg == pytest.approx(20.0)
        assert pose.twist_deg == pytest.approx(0.0, abs=1e-9)

    def test_tilt_from_translation(self):
        # plate slides 20 mm sideways while dropping to height 63 mm
        t = np.array([20.0, 0.0, 63.0 - SUB.H])
        pose = extract_angles(np.eye(3), t, SUB)
        assert pose.tilt_deg == pytest.approx(math.degrees(math.atan2(20.0, 63.0)))
        assert pose.tilt_deg == pytest.approx(17.6, abs=0.05)
        assert pose.contraction_mm == pytest.approx(17.0)

    def test_contraction_sign(self):
        pose = extract_angles(np.eye(3), np.array([0.0, 0.0, -25.0]), SUB)
        assert pose.contraction_mm == pytest.approx(25.0)

    def test_mirror_equivariance(self):
        # reflecting the deformation across the x-z plane flips the twist
        # sign and preserves bend and tilt
        rng = np.random.default_rng(4)
        mirror = np.diag([1.0, -1.0, 1.0])
        for _ in range(50):
            rot = rand_rotation(rng)
            t = rng.standard_normal(3) * 10.0
            pose = extract_angles(rot, t, SUB)
            rot_m = mirror @ rot @ mirror
            t_m = mirror @ t
            pose_m = extract_angles(rot_m, t_m, SUB)
            # the two-to-one quaternion cover can offset the raw angle by
            # 360 degrees; compare the twist as an angle, not a number
            diff = (pose_m.twist_deg + pose.twist_deg) % 360.0
            assert min(diff, 360.0 - diff) == pytest.approx(0.0, abs=1e-9)
            assert pose_m.bend_deg == pytest.approx(pose.bend_deg, abs=1e-9)
            assert pose_m.tilt_deg == pytest.approx(pose.tilt_deg, abs=1e-9)


class TestSweepResult:
    def poses(self):
        return [PoseAngles(10.0, 5.0, -20.0, 12.0),
                PoseAngles(20.0, 8.0, -35.0, 18.0)]

    def test_characteristic_columns(self):
        spec = PatternSpec(kind="transverse", N=1, l=62.8, d=20.0)
        r = SweepResult(spec, [40.0, 80.0], self.poses(), [True, True])
        assert r.characteristic() == [10.0, 20.0]
        assert r.characteristic("longitudinal") == [5.0, 8.0]
        assert r.characteristic("diagonal") == [20.0, 35.0]  # absolute twist

    def test_csv_byte_stable(self, tmp_path):
        spec = PatternSpec(kind="transverse", N=1, l=62.8, d=20.0)
        r = SweepResult(spec, [40.0, 80.0], self.poses(), [True, False])
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep_csv(r, p1)
        write_sweep_csv(r, p2)
        assert p1.read_bytes() == p2.read_bytes()
        header = p1.read_text().splitlines()[0]
        assert header.split(",") == ["pressure_kPa", "bend_deg", "tilt_deg",
                                     "twist_deg", "contraction_mm", "converged"]


class TestReferenceTable:
    def test_geometry_consistency(self):
        # all rows must be feasible on the default substrate
        from foamact.pattern import validate
        for (kind, n), (l, d, gamma, angle) in TABLE2_REFERENCE.items():
            spec = PatternSpec(kind=kind, N=n, l=l, d=d,
                               gamma=gamma,
                               handedness="left" if kind == "diagonal" else None)
            assert validate(spec, SUB) == [], (kind, n)

    def test_diagonal_projections(self):
        l, d, gamma, _ = TABLE2_REFERENCE[("diagonal", 2)]
        assert l * math.cos(math.radians(gamma)) == pytest.approx(62.8, abs=0.1)
        assert l * math.sin(math.radians(gamma)) == pytest.approx(40.0, abs=0.1)
