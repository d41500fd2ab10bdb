"""Acceptance suite.

One test per shipped claim, each ending in a single printed PASS/FAIL line
(run with ``pytest -s`` or read captured output).  Tolerances are pinned in
the assertions.  Claim 8 is report-only by design: the published per-N
angles come from a foam whose fitted coefficients were never released, so
no tolerance ties the simulated column to the reference column.
"""

import math
import time

import numpy as np
import pytest

from foamact.defaults import data_path, default_foam_model, default_skin_model
from foamact.fitting import fit_hyperfoam, load_curve_csv
from foamact.kinematics import (
    Actuator,
    TABLE2_REFERENCE,
    angles_of,
    simulate,
    sweep,
)
from foamact.material import (
    HyperfoamModel,
    YeohModel,
    hyperfoam_energy,
    hyperfoam_principal_stress,
    yeoh_uniaxial_nominal,
)
from foamact.mesh import MeshResolution
from foamact.pattern import PatternSpec, Substrate, derived_interval, mirror
from foamact.solver import LoadCase, MaterialSet, relax_to_equilibrium, write_summary_csv

SUB = Substrate()


def _report(num: int, name: str, ok: bool, detail: str):
    line = f"[criterion {num}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _materials() -> MaterialSet:
    return MaterialSet(foam=default_foam_model(), skin=default_skin_model())


def _actuator(spec=None) -> Actuator:
    return Actuator(substrate=SUB, pattern=spec, materials=_materials())


class TestCriterion1MaterialCorrectness:
    def test_stress_matches_energy_gradient_and_beta_limit(self):
        t0 = time.time()
        model = HyperfoamModel(((0.02, 8.0, 0.1), (0.005, -3.0, 0.2)))
        rng = np.random.default_rng(7)
        # 4th-order finite difference: truncation sits far below the 1e-6 gate
        h = 1e-4
        worst = 0.0
        for _ in range(1000):
            lam = rng.uniform(0.2, 3.0, 3)
            p = hyperfoam_principal_stress(model, lam)
            for i in range(3):
                def w(delta, i=i, lam=lam):
                    v = lam.copy(); v[i] += delta
                    return hyperfoam_energy(model, v)
                fd = (-w(2 * h) + 8 * w(h) - 8 * w(-h) + w(-2 * h)) / (12 * h)
                worst = max(worst, abs(p[i] - fd) / max(abs(fd), 1e-12))
        beta_worst = 0.0
        zero = HyperfoamModel(((0.02, 8.0, 0.0),))
        tiny = HyperfoamModel(((0.02, 8.0, 1e-8),))
        for _ in range(100):
            lam = rng.uniform(0.2, 3.0, 3)
            p0 = hyperfoam_principal_stress(zero, lam)
            p1 = hyperfoam_principal_stress(tiny, lam)
            beta_worst = max(beta_worst, float(np.max(
                np.abs(p0 - p1) / np.maximum(np.abs(p0), 1e-12))))
        wall = time.time() - t0
        ok = worst < 1e-6 and beta_worst < 1e-4 and wall < 10.0
        _report(1, "hyperfoam stress vs energy gradient", ok,
                f"max rel dev {worst:.2e} (tol 1e-6), beta-limit dev "
                f"{beta_worst:.2e} (tol 1e-4), {wall:.1f}s")


class TestCriterion2YeohAnchor:
    def test_small_strain_modulus(self):
        t0 = time.time()
        skin = YeohModel()  # C10=0.11, C20=0.02
        eps = 1e-5
        p = yeoh_uniaxial_nominal(skin, 1.0 + eps)
        e_num = p / eps
        e_ref = 6.0 * skin.c10
        rel = abs(e_num - e_ref) / e_ref
        wall = time.time() - t0
        _report(2, "Yeoh small-strain modulus 6*C10",
                rel < 1e-4 and wall < 1.0,
                f"numeric {e_num:.6f} MPa vs {e_ref:.2f} MPa, rel {rel:.2e}, {wall:.2f}s")


class TestCriterion3FittingRoundTrip:
    def test_round_trip_and_shipped_dataset(self):
        t0 = time.time()
        truth = HyperfoamModel(((0.018, 7.0, 0.0), (0.004, -4.5, 0.0)))
        lam = np.linspace(0.35, 1.0, 40)
        from foamact.fitting import StressStrainCurve
        from foamact.material import hyperfoam_uniaxial_nominal
        stress = hyperfoam_uniaxial_nominal(truth, lam)
        curve = StressStrainCurve(lam - 1.0, stress)
        rt = fit_hyperfoam(curve, order=2)
        shipped = fit_hyperfoam(load_curve_csv(data_path("pu40_compression.csv")),
                                order=2)
        wall = time.time() - t0
        ok = (rt.rms_relative_error < 0.01
              and shipped.rms_relative_error <= 0.05 and wall < 30.0)
        _report(3, "hyperfoam fit round-trip",
                ok,
                f"round-trip RMS {rt.rms_relative_error:.3%}, "
                f"shipped dataset RMS {shipped.rms_relative_error:.3%}, {wall:.1f}s")


class TestCriterion4PatternArithmetic:
    def test_derived_intervals_and_diagonal_consistency(self):
        t0 = time.time()
        w = [derived_interval("transverse", n, SUB) for n in (1, 2, 3, 4)]
        th_long = [derived_interval("longitudinal", n) for n in (1, 2, 3, 4)]
        th_diag = [derived_interval("diagonal", n) for n in (2, 4, 6, 8)]
        ok = (np.allclose(w, [40.0, 80.0 / 3.0, 20.0, 16.0])
              and np.allclose(np.round(w, 1), [40.0, 26.7, 20.0, 16.0])
              and th_long == [90.0, 60.0, 45.0, 36.0]
              and th_diag == [180.0, 90.0, 60.0, 45.0])
        l, _, gamma, _ = TABLE2_REFERENCE[("diagonal", 2)]
        ok = ok and abs(l * math.cos(math.radians(gamma)) - 62.8) <= 0.1
        ok = ok and abs(l * math.sin(math.radians(gamma)) - 40.0) <= 0.1
        wall = time.time() - t0
        _report(4, "pattern interval arithmetic", ok and wall < 1.0,
                f"w={np.round(w, 1).tolist()} mm, theta={th_long} deg, "
                f"diag theta={th_diag} deg, {wall:.2f}s")


@pytest.fixture(scope="session")
def plain_run(tmp_path_factory):
    """Criterion 5's run, shared with criterion 9's determinism check."""
    mesh = _actuator().build_mesh()
    t0 = time.time()
    result = relax_to_equilibrium(mesh, _materials(), LoadCase(80.0))
    wall = time.time() - t0
    path = tmp_path_factory.mktemp("c5") / "summary.csv"
    write_summary_csv(result, path)
    return result, wall, path


class TestCriterion5SolverSymmetry:
    def test_unincised_actuator_stays_axisymmetric(self, plain_run):
        result, wall, _ = plain_run
        ke_ratio = result.diagnostics["ke_over_ie"]
        pose = angles_of(result, SUB)
        lateral = math.hypot(result.translation[0], result.translation[1])
        contraction = pose.contraction_mm
        ok = (result.converged and ke_ratio < 0.05
              and lateral < 0.01 * contraction
              and abs(pose.twist_deg) < 0.5
              and wall < 300.0)
        _report(5, "un-incised solver symmetry", ok,
                f"KE/IE {ke_ratio:.2e}, lateral {lateral:.4f} mm vs "
                f"contraction {contraction:.2f} mm, twist {pose.twist_deg:.4f} deg, "
                f"{'converged' if result.converged else 'NOT converged'}, {wall:.0f}s")


class TestCriterion6DirectionalClaims:
    def test_transverse_bends_toward_incised_side(self):
        t0 = time.time()
        spec = PatternSpec(kind="transverse", N=1, l=62.8, d=20.0)
        pose, result = simulate(_actuator(spec), 80.0)
        wall = time.time() - t0
        # the cut is centred at azimuth 0: the +x side
        toward = result.translation[0] > 0.0
        ok = pose.bend_deg > 5.0 and toward and wall < 300.0
        _report(6, "transverse N=1 bends toward the incised side", ok,
                f"bend {pose.bend_deg:.2f} deg, plate drift x "
                f"{result.translation[0]:+.2f} mm, {wall:.0f}s")

    def test_longitudinal_tilts_and_pushes_its_mount(self):
        t0 = time.time()
        spec = PatternSpec(kind="longitudinal", N=1, l=60.0, d=10.0)
        pose, result = simulate(_actuator(spec), 80.0)
        wall = time.time() - t0
        # cut at azimuth 0 (+x side); the mount is pushed away from it
        away = result.base_force[0] < 0.0
        ok = pose.tilt_deg > 2.0 and away and wall < 300.0
        _report(6, "longitudinal N=1 tilts, base reaction opposite the cut", ok,
                f"tilt {pose.tilt_deg:.2f} deg, base Fx "
                f"{result.base_force[0]:+.3f} N, {wall:.0f}s")

    def test_diagonal_twist_handedness_and_mirror(self):
        t0 = time.time()
        left = PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0, gamma=32.5,
                           handedness="left")
        pose_l, _ = simulate(_actuator(left), 80.0)
        pose_r, _ = simulate(_actuator(mirror(left)), 80.0)
        wall = time.time() - t0
        ccw = pose_l.twist_deg > 0.0
        cw = pose_r.twist_deg < 0.0
        dphi = abs(abs(pose_l.twist_deg) - abs(pose_r.twist_deg))
        ok = ccw and cw and dphi <= 2.0 and wall < 600.0
        _report(6, "diagonal N=2 twist handedness and mirror", ok,
                f"left {pose_l.twist_deg:+.2f} deg, right {pose_r.twist_deg:+.2f} deg, "
                f"|dphi| {dphi:.2f} deg, {wall:.0f}s")


class TestCriterion7MonotonicPressure:
    PRESSURES = [16.0, 32.0, 48.0, 64.0, 80.0]

    @pytest.mark.parametrize("spec", [
        PatternSpec(kind="transverse", N=1, l=62.8, d=20.0),
        PatternSpec(kind="longitudinal", N=1, l=60.0, d=10.0),
        PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0, gamma=32.5,
                    handedness="left"),
    ], ids=["transverse", "longitudinal", "diagonal"])
    def test_angle_grows_with_vacuum(self, spec):
        t0 = time.time()
        result = sweep(_actuator(spec), self.PRESSURES)
        wall = time.time() - t0
        angles = result.characteristic(spec.kind)
        monotone = all(b >= a - 1e-9 for a, b in zip(angles, angles[1:]))
        ok = monotone and wall < 400.0
        _report(7, f"{spec.kind} sweep monotone", ok,
                "angles " + "/".join(f"{a:.2f}" for a in angles)
                + f" deg at {self.PRESSURES} kPa, {wall:.0f}s")


class TestCriterion8ReportOnly:
    def test_reference_comparison_is_report_only(self):
        # the published foam coefficients are unavailable, so the per-N
        # comparison ships as a report with no tolerance; here we only pin
        # that the reference table carries the published angles verbatim
        ok = (TABLE2_REFERENCE[("transverse", 2)][3] == 80.0
              and TABLE2_REFERENCE[("longitudinal", 1)][3] == 17.6
              and TABLE2_REFERENCE[("diagonal", 8)][3] == 115.0)
        _report(8, "per-N comparison is report-only (no tolerance enforced)", ok,
                "reference angles pinned: bend N=2 80.0, tilt N=1 17.6, "
                "twist N=8 115.0 deg")


class TestCriterion9Determinism:
    def test_repeat_run_is_bitwise_identical(self, plain_run, tmp_path):
        _, _, first = plain_run
        mesh = _actuator().build_mesh()
        result = relax_to_equilibrium(mesh, _materials(), LoadCase(80.0))
        again = tmp_path / "summary.csv"
        write_summary_csv(result, again)
        same = first.read_bytes() == again.read_bytes()
        _report(9, "repeated run summary CSV bitwise identical", same,
                f"{first.stat().st_size} bytes compared")
