"""Characteristic-angle extraction and pressure sweeps.

The performance of an actuator is summarised by three angles read off the
rigid top endplate: bend ``beta`` (deviation of the deformed plate normal
from the undeformed axis), tilt ``alpha`` (arctangent of lateral plate
translation over deformed height), and twist ``phi`` (signed rotation about
the cylinder axis, positive counter-clockwise viewed from +z).  The paper's
source measurements come from a 6-DOF pose sensor on the distal plate; none
of the three angles is defined mathematically there, so the conventions are
pinned here:

* ``phi`` is the twist factor of the swing-twist decomposition of the plate
  rotation about the undeformed cylinder axis,
* ``beta`` is the angle of the swing factor (equivalently, the angle between
  the deformed plate normal and +z),
* ``alpha`` uses translation, not orientation: atan2(lateral, deformed
  height).

Sweeps re-run the relaxation solver over a pressure schedule, warm-starting
every point from the previous equilibrium.  All numbers are mm / kPa / deg.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .material import HyperfoamModel, YeohModel
from .mesh import MeshResolution, SeamedMesh, mesh_cylinder
from .pattern import PatternSpec, Substrate, layout
from .solver import (
    Discretization,
    EquilibriumResult,
    LoadCase,
    MaterialSet,
    SolverControls,
    relax_to_equilibrium,
)

__all__ = [
    "PoseAngles",
    "SweepResult",
    "Actuator",
    "extract_angles",
    "swing_twist",
    "simulate",
    "sweep",
    "n_sweep_study",
    "write_sweep_csv",
    "TABLE2_REFERENCE",
]

#: Published design rows (kind, N) -> (l, d, gamma, reported angle at -80 kPa).
TABLE2_REFERENCE = {
    ("transverse", 1): (62.8, 20.0, None, 58.8),
    ("transverse", 2): (62.8, 20.0, None, 80.0),
    ("transverse", 3): (62.8, 20.0, None, 38.5),
    ("transverse", 4): (62.8, 20.0, None, 19.8),
    ("longitudinal", 1): (60.0, 10.0, None, 17.6),
    ("longitudinal", 2): (60.0, 10.0, None, 13.7),
    ("longitudinal", 3): (60.0, 10.0, None, 8.5),
    ("longitudinal", 4): (60.0, 10.0, None, 7.1),
    ("diagonal", 2): (74.5, 10.0, 32.5, 76.4),
    ("diagonal", 4): (74.5, 10.0, 32.5, 94.9),
    ("diagonal", 6): (74.5, 10.0, 32.5, 99.8),
    ("diagonal", 8): (74.5, 10.0, 32.5, 115.0),
}


@dataclass(frozen=True)
class PoseAngles:
    """Characteristic angles (deg) and axial contraction (mm) of the plate."""

    bend_deg: float
    tilt_deg: float
    twist_deg: float
    contraction_mm: float


@dataclass
class SweepResult:
    """Angles per pressure point of one actuator."""

    pattern: PatternSpec | None
    pressures_kpa: list[float]
    poses: list[PoseAngles]
    converged: list[bool]
    cold_check_diff_deg: float | None = None

    def characteristic(self, kind: str | None = None) -> list[float]:
        """The angle column matching the pattern's dominant motion."""
        kind = kind or (self.pattern.kind if self.pattern else "transverse")
        if kind == "transverse":
            return [p.bend_deg for p in self.poses]
        if kind == "longitudinal":
            return [p.tilt_deg for p in self.poses]
        return [abs(p.twist_deg) for p in self.poses]


@dataclass
class Actuator:
    """A complete simulation definition: geometry, pattern, and materials."""

    substrate: Substrate = field(default_factory=Substrate)
    pattern: PatternSpec | None = None
    materials: MaterialSet = None
    resolution: MeshResolution | None = None

    def build_mesh(self) -> SeamedMesh:
        incisions = (layout(self.pattern, self.substrate)
                     if self.pattern is not None else None)
        return mesh_cylinder(self.substrate, incisions, self.resolution)


def _check_rotation(rot: np.ndarray) -> np.ndarray:
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (3, 3):
        raise ValueError("rotation must be a 3x3 matrix")
    if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-8):
        raise ValueError("rotation matrix is not orthonormal")
    if np.linalg.det(rot) < 0.0:
        raise ValueError("rotation matrix has negative determinant")
    return rot


def _quaternion(rot: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a rotation matrix (Shepperd's method)."""
    tr = rot[0, 0] + rot[1, 1] + rot[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (rot[2, 1] - rot[1, 2]) / s,
                      (rot[0, 2] - rot[2, 0]) / s,
                      (rot[1, 0] - rot[0, 1]) / s])
    else:
        i = int(np.argmax([rot[0, 0], rot[1, 1], rot[2, 2]]))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(0.0, 1.0 + rot[i, i] - rot[j, j] - rot[k, k])) * 2.0
        q = np.empty(4)
        q[0] = (rot[k, j] - rot[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (rot[j, i] + rot[i, j]) / s
        q[1 + k] = (rot[k, i] + rot[i, k]) / s
    return q / np.linalg.norm(q)


def _quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def swing_twist(rot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a rotation into swing and twist factors about the +z axis.

    Returns ``(swing, twist)`` rotation matrices with ``rot = swing @ twist``;
    the twist factor is a pure rotation about +z.
    """
    rot = _check_rotation(rot)
    q = _quaternion(rot)
    w, z = q[0], q[3]
    norm = math.hypot(w, z)
    if norm < 1e-12:
        # plate flipped a full 180 deg off axis: twist is degenerate, pin to 0
        twist_q = np.array([1.0, 0.0, 0.0, 0.0])
    else:
        twist_q = np.array([w / norm, 0.0, 0.0, z / norm])
    twist = _quat_to_matrix(twist_q)
    swing = rot @ twist.T
    return swing, twist


def extract_angles(rotation: np.ndarray, translation: np.ndarray,
                   sub: Substrate) -> PoseAngles:
    """Characteristic angles of a rigid endplate transform.

    ``translation`` is the displacement of the plate centre from its
    undeformed position (mm).
    """
    rot = _check_rotation(rotation)
    trans = np.asarray(translation, dtype=float).reshape(3)

    q = _quaternion(rot)
    w, z = q[0], q[3]
    phi = math.degrees(2.0 * math.atan2(z, w)) if math.hypot(w, z) > 1e-12 else 0.0
    beta = math.degrees(math.acos(max(-1.0, min(1.0, rot[2, 2]))))
    lateral = math.hypot(trans[0], trans[1])
    height = sub.H + trans[2]
    alpha = math.degrees(math.atan2(lateral, height))
    return PoseAngles(bend_deg=float(beta), tilt_deg=float(alpha),
                      twist_deg=float(phi), contraction_mm=float(-trans[2]))


def angles_of(result: EquilibriumResult, sub: Substrate) -> PoseAngles:
    """Angles of a finished relaxation run."""
    return extract_angles(result.rotation, result.translation, sub)


def simulate(actuator: Actuator, pressure_kpa: float,
             controls: SolverControls | None = None,
             ) -> tuple[PoseAngles, EquilibriumResult]:
    """Single-pressure convenience wrapper around the relaxation solver."""
    mesh = actuator.build_mesh()
    result = relax_to_equilibrium(mesh, actuator.materials,
                                  LoadCase(pressure_kpa=pressure_kpa), controls)
    return angles_of(result, actuator.substrate), result


def sweep(actuator: Actuator, pressures_kpa, controls: SolverControls | None = None,
          cold_check: bool = False) -> SweepResult:
    """Relax the actuator at each pressure, warm-starting from the previous one.

    ``pressures_kpa`` must be strictly increasing in magnitude.  A
    non-converged point is flagged and the sweep continues.  With
    ``cold_check`` the final pressure is re-run from scratch and the
    characteristic-angle difference recorded (guards against accumulated
    path dependence of the warm starts).
    """
    pressures = [float(p) for p in pressures_kpa]
    mags = [abs(p) for p in pressures]
    if any(b <= a for a, b in zip(mags, mags[1:])):
        raise ValueError("sweep pressures must be strictly increasing in magnitude")
    result = SweepResult(pattern=actuator.pattern, pressures_kpa=pressures,
                        poses=[], converged=[])
    if not pressures:
        return result

    controls = controls or SolverControls()
    mesh = actuator.build_mesh()
    disc = Discretization(mesh, actuator.materials, controls)
    state = None
    prev_p = 0.0
    last = None
    for p in pressures:
        if state is not None:
            # resume the load ramp from the fraction already carried
            state.load_fraction = prev_p / p if p != 0.0 else 0.0
        last = relax_to_equilibrium(mesh, actuator.materials,
                                    LoadCase(pressure_kpa=abs(p)), controls,
                                    initial_state=state, disc=disc)
        state = last.state
        result.poses.append(angles_of(last, actuator.substrate))
        result.converged.append(last.converged)
        prev_p = abs(p)

    if cold_check and pressures:
        cold = relax_to_equilibrium(actuator.build_mesh(), actuator.materials,
                                    LoadCase(pressure_kpa=abs(pressures[-1])),
                                    controls)
        kind = actuator.pattern.kind if actuator.pattern else "transverse"
        warm = result.characteristic(kind)[-1]
        pose = angles_of(cold, actuator.substrate)
        coldr = SweepResult(actuator.pattern, [pressures[-1]], [pose], [cold.converged])
        result.cold_check_diff_deg = abs(warm - coldr.characteristic(kind)[0])
    return result


def n_sweep_study(kind: str, n_values, materials: MaterialSet,
                  pressure_kpa: float = 80.0,
                  sub: Substrate | None = None,
                  resolution: MeshResolution | None = None,
                  controls: SolverControls | None = None) -> list[dict]:
    """Simulated analogue of the published per-N performance column.

    Returns one row per N with the simulated characteristic angle and, where
    available, the published reference angle.  Report-only: no tolerance ties
    the two columns together (the source foam coefficients are unpublished).
    """
    sub = sub or Substrate()
    rows = []
    for n in n_values:
        ref = TABLE2_REFERENCE.get((kind, int(n)))
        if ref is not None:
            l, d, gamma, ref_angle = ref
        else:
            l, d, gamma, ref_angle = 62.8, 10.0, 32.5, None
        spec = PatternSpec(kind=kind, N=int(n), l=l, d=d,
                           gamma=gamma if kind == "diagonal" else None,
                           handedness="left" if kind == "diagonal" else None)
        actuator = Actuator(substrate=sub, pattern=spec, materials=materials,
                            resolution=resolution)
        pose, result = simulate(actuator, pressure_kpa, controls)
        sweep_row = SweepResult(spec, [pressure_kpa], [pose], [result.converged])
        rows.append({
            "kind": kind,
            "N": int(n),
            "angle_deg": sweep_row.characteristic(kind)[0],
            "reference_deg": ref_angle,
            "converged": result.converged,
        })
    return rows


def write_sweep_csv(result: SweepResult, path):
    """Sweep CSV with shortest-exact float formatting (byte-reproducible)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pressure_kPa", "bend_deg", "tilt_deg", "twist_deg",
                         "contraction_mm", "converged"])
        for p, pose, conv in zip(result.pressures_kpa, result.poses,
                                 result.converged):
            writer.writerow([repr(float(p)), repr(pose.bend_deg),
                             repr(pose.tilt_deg), repr(pose.twist_deg),
                             repr(pose.contraction_mm), int(conv)])
