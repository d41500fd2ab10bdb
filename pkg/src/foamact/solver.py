"""Quasi-static explicit solution of the sealed actuator under vacuum.

The actuator is driven by ambient pressure acting on its current external
surface (a follower load), with the top endplate moving as a rigid 6-DOF
body, the base fully fixed, and penalty self-contact across incision seams.
Equilibrium is found by dynamic relaxation: central-difference explicit
integration with mass-proportional damping (and optional uniform mass
scaling), run until kinetic energy and residual force vanish.

Unit system: mm - tonne - s - MPa (forces in N, moments in N mm).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as _k
from .material import HyperfoamModel, YeohModel, hyperfoam_principal_stress
from .mesh import MAT_FOAM, MAT_SKIN, SeamedMesh, shape_gradients, _GP

__all__ = [
    "SolverError",
    "ElementInversionError",
    "NonConvergedError",
    "MaterialSet",
    "LoadCase",
    "SolverControls",
    "SimState",
    "EquilibriumResult",
    "Discretization",
    "internal_forces",
    "follower_pressure",
    "seam_contact",
    "relax_to_equilibrium",
    "base_reactions",
    "write_summary_csv",
    "write_snapshot",
    "ATMOSPHERE_KPA",
]

ATMOSPHERE_KPA = 101.325

# volumetric penalty for the (nominally incompressible) skin, as a multiple
# of C10: kappa = 100 C10 corresponds to nu ~ 0.495
SKIN_KAPPA_FACTOR = 100.0

# damping ratio of the seam-contact dashpot (relative to the local contact
# mode); deliberately overdamped -- the global mass-proportional damping is
# tuned to the lowest structural mode and leaves the stiff contact mode
# essentially undamped, so the dashpot alone must kill impact chatter
CONTACT_ZETA = 2.0


class SolverError(RuntimeError):
    pass


class ElementInversionError(SolverError):
    def __init__(self, element_ids):
        self.element_ids = list(element_ids)
        super().__init__(f"element inversion persisted in elements {self.element_ids[:10]}")


class NonConvergedError(SolverError):
    pass


@dataclass(frozen=True)
class MaterialSet:
    foam: HyperfoamModel
    skin: YeohModel | None = None


@dataclass(frozen=True)
class LoadCase:
    """Vacuum load: ``pressure_kpa`` is the magnitude of the external
    over-pressure (kPa) applied to the current outer surface."""

    pressure_kpa: float
    gravity: tuple[float, float, float] | None = None  # mm/s^2, off by default

    def __post_init__(self):
        if not 0.0 <= self.pressure_kpa <= ATMOSPHERE_KPA:
            raise ValueError(
                f"pressure magnitude {self.pressure_kpa} kPa outside [0, {ATMOSPHERE_KPA}]")

    @property
    def pressure_mpa(self) -> float:
        return self.pressure_kpa * 1e-3


@dataclass(frozen=True)
class SolverControls:
    dt_target: float = 4e-5          # s; mass scaling raises the stable dt to this
    safety: float = 0.9              # stable-timestep safety factor
    ramp_time: float = 0.12          # s, linear load ramp from zero
    max_steps: int = 200_000
    report_interval: int = 250       # steps between convergence checks / rows
    ke_tol: float = 0.05             # kinetic/internal energy ratio
    residual_tol: float = 0.01       # residual force / applied load norm
    damping: float | str = "auto"    # "auto" (analytic), "probe", or 1/s value
    probe_steps: int = 800
    penalty: float | str = "auto"    # linear stiffness (MPa/mm), or "auto":
                                     # compaction law at the foam plateau stress
    mass_scaling: float | str = "auto"
    include_end_pressure: bool = True
    seam_pressure: bool = False
    reduced_integration: bool = False
    settle_time: float = 0.35        # s of simulated time budget after ramp

    def __post_init__(self):
        if self.dt_target <= 0 or self.ramp_time <= 0 or self.max_steps < 1:
            raise ValueError("invalid solver controls")


@dataclass
class SimState:
    coords: np.ndarray               # (n, 3) current positions
    vel: np.ndarray                  # (n, 3)
    time: float = 0.0
    step: int = 0
    load_fraction: float = 0.0
    kinetic: float = 0.0
    internal: float = 0.0
    external_work: float = 0.0
    dissipated: float = 0.0
    plate_rot: np.ndarray = field(default_factory=lambda: np.eye(3))
    plate_center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    plate_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    plate_omega: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass
class EquilibriumResult:
    state: SimState
    rotation: np.ndarray             # top endplate rotation (3, 3)
    translation: np.ndarray          # top endplate center displacement (3,)
    base_force: np.ndarray           # N, transmitted through the mount
    base_moment: np.ndarray          # N mm, about the base center
    converged: bool
    diagnostics: dict
    history: list                    # report rows (dicts)


# ---------------------------------------------------------------------------
# Discretization: everything precomputed from mesh + materials + controls


def _hex_min_edge(nodes, elems):
    edges = ((0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
             (0, 4), (1, 5), (2, 6), (3, 7))
    h = np.full(elems.shape[0], np.inf)
    for a, b in edges:
        d = np.linalg.norm(nodes[elems[:, a]] - nodes[elems[:, b]], axis=1)
        h = np.minimum(h, d)
    return h


class Discretization:
    """Precomputed arrays binding a mesh to materials and solver controls."""

    def __init__(self, mesh: SeamedMesh, materials: MaterialSet,
                 controls: SolverControls | None = None):
        self.mesh = mesh
        self.materials = materials
        self.controls = controls or SolverControls()
        ctl = self.controls
        nodes, elems, mat = mesh.nodes, mesh.elems, mesh.mat
        self.n_nodes = nodes.shape[0]
        ne = elems.shape[0]

        # integration: reference shape gradients and weights
        gps = [(0.0, 0.0, 0.0)] if ctl.reduced_integration else list(_GP)
        ngp = len(gps)
        self.bmats = np.empty((ne, ngp, 8, 3))
        self.dvols = np.empty((ne, ngp))
        w_gp = 8.0 if ctl.reduced_integration else 1.0
        for g, xi in enumerate(gps):
            dn = shape_gradients(np.asarray(xi))  # (8, 3) d/dxi
            xe = nodes[elems]                     # (ne, 8, 3)
            jac = np.einsum("eai,aj->eij", xe, dn)
            detj = np.linalg.det(jac)
            if np.any(detj <= 0):
                raise SolverError("non-positive reference Jacobian")
            jinv = np.linalg.inv(jac)
            self.bmats[:, g] = np.einsum("aj,eji->eai", dn, jinv)
            self.dvols[:, g] = detj * w_gp

        # material arrays
        mus, alphas, betas = materials.foam.arrays()
        self.mus, self.alphas, self.betas = mus, alphas, betas
        if materials.skin is not None:
            self.c10 = materials.skin.c10
            self.c20 = materials.skin.c20
            self.kappa = SKIN_KAPPA_FACTOR * materials.skin.c10
        else:
            if np.any(mat == MAT_SKIN):
                raise SolverError("mesh has skin elements but no skin material given")
            self.c10 = self.c20 = self.kappa = 0.0

        # lumped mass (unscaled), then mass scaling for the target timestep
        vol = self.dvols.sum(axis=1)
        rho = np.where(mat == MAT_FOAM, materials.foam.density,
                       materials.skin.density if materials.skin else 0.0)
        m_e = rho * vol / 8.0
        mass = np.zeros(self.n_nodes)
        for a in range(8):
            np.add.at(mass, elems[:, a], m_e)

        # stable timestep estimate: min over elements of h / c_wave with a
        # stiffened-modulus bound for the foam (densification raises tangent)
        h = _hex_min_edge(nodes, elems)
        foam_mod = self._foam_modulus_bound()
        skin_mod = (self.kappa + 4.0 / 3.0 * 2.0 * self.c10) if materials.skin else 1.0
        mod = np.where(mat == MAT_FOAM, foam_mod, skin_mod)
        c_wave = np.sqrt(mod / rho)
        dt_stable = ctl.safety * float(np.min(h / c_wave))
        if ctl.mass_scaling == "auto":
            scale = max(1.0, (ctl.dt_target / dt_stable) ** 2)
        else:
            scale = float(ctl.mass_scaling)
        self.mass_scale = scale
        self.dt = min(ctl.dt_target, dt_stable * math.sqrt(scale))
        self.mass = mass * scale
        self.minv = np.where(self.mass > 0, 1.0 / np.maximum(self.mass, 1e-300), 0.0)

        # incidence CSR for the deterministic gather
        order = []
        for e in range(ne):
            for a in range(8):
                order.append((int(elems[e, a]), e, a))
        order.sort()
        inc_elem = np.array([e for _, e, _ in order], dtype=np.int64)
        inc_slot = np.array([a for _, _, a in order], dtype=np.int64)
        counts = np.zeros(self.n_nodes + 1, dtype=np.int64)
        for n, _, _ in order:
            counts[n + 1] += 1
        self.inc_ptr = np.cumsum(counts)
        self.inc_elem, self.inc_slot = inc_elem, inc_slot

        # pressure faces (outward oriented)
        keep = np.ones(mesh.surface_faces.shape[0], dtype=bool)
        if not ctl.include_end_pressure:
            keep = mesh.surface_tags == 0
        pf = [mesh.surface_faces[keep]]
        if ctl.seam_pressure:
            for seam in mesh.seams:
                pf.append(seam.faces_a)
                pf.append(seam.faces_b)
        self.pressure_faces = np.ascontiguousarray(np.vstack(pf), dtype=np.int64)

        # contact: two symmetric node-to-face passes at half stiffness
        self.element_h = h
        if mesh.substrate is not None and mesh.resolution is not None:
            h_ring = (mesh.substrate.R / 2.0) / mesh.resolution.nr
        else:
            h_ring = float(np.mean(h))
        if ctl.penalty == "auto":
            # compaction contact: cut lips engage at the foam's plateau
            # stress and stiffen over one element depth of crushed cells
            self.penalty = 0.0
            self.contact_sigma = abs(float(
                hyperfoam_principal_stress(materials.foam, (0.65, 1.0, 1.0))[0]))
            self.contact_depth = h_ring
        else:
            # explicit stiffness: plain linear penalty
            self.penalty = float(ctl.penalty)
            self.contact_sigma = 0.0
            self.contact_depth = 0.0
        self.contact_passes = []
        for seam in mesh.seams:
            for sl_faces, ms_faces in ((seam.faces_b, seam.faces_a),
                                       (seam.faces_a, seam.faces_b)):
                self.contact_passes.append(
                    self._build_contact_pass(nodes, sl_faces, ms_faces))
        # candidate-refresh radius: a touch over one face diagonal
        self._contact_radius = []
        for nodes_s, faces_m, _, _, _, ref_area in self.contact_passes:
            if faces_m.shape[0]:
                self._contact_radius.append(1.3 * float(np.sqrt(2.0 * ref_area.max())))
            else:
                self._contact_radius.append(0.0)

        # seam nodes see the contact tangent stiffness on top of the material
        # stiffness; the mass scaling above only covers the latter, so add
        # enough mass at the seam to keep the timestep stable when the lips
        # are fully engaged (m >= 4 k dt^2 is 16x the central-difference
        # limit: master nodes collect force from several slaves, and the
        # seam mode must sit well inside the stable region to avoid chatter)
        if self.contact_passes:
            if self.contact_depth > 0.0:
                om = 1.0 - _k.CONTACT_X_CAP
                k_area = (self.contact_sigma * (1.0 + _k.CONTACT_X_CAP)
                          / (self.contact_depth * om ** 3))
            else:
                k_area = self.penalty
            trib_node = np.zeros(self.n_nodes)
            for nodes_s, _, cand_ptr, _, trib, _ in self.contact_passes:
                for i, n in enumerate(nodes_s):
                    a_t = trib[cand_ptr[i]:cand_ptr[i + 1]]
                    if a_t.size:
                        trib_node[n] = max(trib_node[n], float(a_t.max()))
            self.mass += 4.0 * k_area * self.dt ** 2 * trib_node
            self.minv = np.where(self.mass > 0,
                                 1.0 / np.maximum(self.mass, 1e-300), 0.0)

        # boundary sets
        self.base = np.asarray(mesh.bottom_nodes, dtype=np.int64)
        self.top = np.asarray(mesh.top_nodes, dtype=np.int64)
        self.free_mask = np.ones(self.n_nodes, dtype=np.bool_)
        self.free_mask[self.base] = False
        self.free_mask[self.top] = False
        self.plate_mass = float(self.mass[self.top].sum())
        self.plate_center0 = (nodes[self.top].mean(axis=0) if self.top.size
                              else np.zeros(3))
        self.plate_offsets0 = nodes[self.top] - self.plate_center0
        self.base_center = (nodes[self.base].mean(axis=0) if self.base.size
                            else np.zeros(3))

        # scratch
        self._fe = np.empty((ne, 8, 3))
        self._ee = np.empty(ne)
        self._flags = np.empty(ne, dtype=np.int64)

    def _foam_modulus_bound(self) -> float:
        """Upper bound on the uniaxial tangent modulus over the working range."""
        lam = np.linspace(0.35, 1.2, 64)
        s = np.zeros_like(lam)
        for mu, alpha, _ in self.materials.foam.coefficients:
            s += 2.0 * mu / alpha * ((alpha - 1.0) * lam ** (alpha - 2.0) + lam ** -2.0)
        return max(float(np.max(np.abs(s))), self.materials.foam.initial_youngs_modulus)

    @staticmethod
    def _build_contact_pass(nodes, slave_faces, master_faces):
        """Candidate lists: each slave node against the master faces that are
        reference-coincident with a slave face containing it."""
        if slave_faces.shape[0] == 0:
            return (np.zeros(0, dtype=np.int64), np.zeros((0, 4), dtype=np.int64),
                    np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64),
                    np.zeros(0), np.zeros(0))
        slave_nodes = np.unique(slave_faces)
        # master faces are index-aligned with slave faces (same cut front)
        node_cands = {int(n): [] for n in slave_nodes}
        areas = np.empty(master_faces.shape[0])
        for f in range(master_faces.shape[0]):
            q = nodes[master_faces[f]]
            areas[f] = 0.5 * np.linalg.norm(np.cross(q[2] - q[0], q[3] - q[1]))
            for n in slave_faces[f]:
                node_cands[int(n)].append(f)
        cand_ptr = [0]
        cand_face = []
        trib = []
        for n in slave_nodes:
            for f in node_cands[int(n)]:
                cand_face.append(f)
                trib.append(0.25 * areas[f])
            cand_ptr.append(len(cand_face))
        return (np.ascontiguousarray(slave_nodes, dtype=np.int64),
                np.ascontiguousarray(master_faces, dtype=np.int64),
                np.asarray(cand_ptr, dtype=np.int64),
                np.asarray(cand_face, dtype=np.int64),
                np.asarray(trib), areas)

    def refresh_contact(self, coords):
        """Rebuild candidate lists against the deformed master geometry.

        Seam faces slide tangentially once the cut region densifies; the
        reference-aligned candidate lists then pair nodes with the wrong
        faces.  Called periodically from the relaxation loop.
        """
        from scipy.spatial import cKDTree

        for i, (nodes_s, faces_m, _, _, _, ref_area) in enumerate(self.contact_passes):
            if nodes_s.size == 0 or faces_m.shape[0] == 0:
                continue
            cents = coords[faces_m].mean(axis=1)
            tree = cKDTree(cents)
            near = tree.query_ball_point(coords[nodes_s], self._contact_radius[i])
            cand_ptr = np.empty(nodes_s.size + 1, dtype=np.int64)
            cand_ptr[0] = 0
            cand_face = []
            trib = []
            for k, lst in enumerate(near):
                for f in sorted(lst):
                    cand_face.append(f)
                    trib.append(0.25 * ref_area[f])
                cand_ptr[k + 1] = len(cand_face)
            self.contact_passes[i] = (
                nodes_s, faces_m, cand_ptr,
                np.asarray(cand_face, dtype=np.int64),
                np.asarray(trib), ref_area)

    # -- force evaluations --------------------------------------------------

    def internal_forces(self, coords) -> tuple[np.ndarray, float, np.ndarray]:
        """Restoring nodal forces (-dU/dx), strain energy, per-element flags."""
        _k.internal_forces_elems(coords, self.mesh.elems, self.mesh.mat,
                                 self.bmats, self.dvols,
                                 self.mus, self.alphas, self.betas,
                                 self.c10, self.c20, self.kappa,
                                 self._fe, self._ee, self._flags)
        out = np.empty((self.n_nodes, 3))
        _k.gather_nodal(self._fe, self.inc_ptr, self.inc_elem, self.inc_slot, out)
        return out, float(self._ee.sum()), self._flags

    def pressure_forces(self, coords, p_mpa: float) -> np.ndarray:
        out = np.zeros((self.n_nodes, 3))
        if p_mpa != 0.0 and self.pressure_faces.shape[0]:
            _k.pressure_forces(coords, self.pressure_faces, p_mpa, out)
        return out

    def contact_forces(self, coords, vel=None) -> tuple[np.ndarray, float, float, float]:
        """Contact forces, stored energy, worst penetration, dashpot power.

        With ``vel`` given, a critically damped normal dashpot acts while
        the lips are engaged (impact chatter would otherwise persist: the
        contact mode is far stiffer than anything the global mass-
        proportional damping can reach)."""
        out = np.zeros((self.n_nodes, 3))
        if vel is None:
            vel = np.zeros((self.n_nodes, 3))
            zeta = 0.0
        else:
            zeta = CONTACT_ZETA
        e_pen = 0.0
        pen_max = 0.0
        p_visc = 0.0
        for nodes_s, faces_m, cptr, cface, trib, _ in self.contact_passes:
            if nodes_s.shape[0] == 0:
                continue
            e, p, pv = _k.contact_forces(coords, vel, self.mass, nodes_s,
                                         faces_m, cptr, cface,
                                         trib, 0.5 * self.penalty,
                                         0.5 * self.contact_sigma,
                                         self.contact_depth, zeta, out)
            e_pen += e
            pen_max = max(pen_max, p)
            p_visc += pv
        return out, e_pen, pen_max, p_visc


# ---------------------------------------------------------------------------
# Stand-alone force operations (test/diagnostic surface)


def internal_forces(mesh: SeamedMesh, materials: MaterialSet, coords) -> np.ndarray:
    """Nodal restoring forces (-dU/dx) at the given configuration."""
    disc = Discretization(mesh, materials)
    f, _, flags = disc.internal_forces(np.ascontiguousarray(coords, dtype=float))
    bad = np.nonzero(flags == 2)[0]
    if bad.size:
        raise ElementInversionError(bad)
    return f


def follower_pressure(mesh: SeamedMesh, coords, p_mpa: float,
                      include_end_pressure: bool = True) -> np.ndarray:
    """Nodal forces from pressure p (MPa) on the current external surface."""
    if p_mpa < 0:
        raise ValueError("pressure magnitude must be >= 0")
    coords = np.ascontiguousarray(coords, dtype=float)
    keep = np.ones(mesh.surface_faces.shape[0], dtype=bool)
    if not include_end_pressure:
        keep = mesh.surface_tags == 0
    faces = np.ascontiguousarray(mesh.surface_faces[keep], dtype=np.int64)
    q = coords[faces]
    areas = 0.5 * np.linalg.norm(np.cross(q[:, 2] - q[:, 0], q[:, 3] - q[:, 1]), axis=1)
    if np.any(areas < 1e-12):
        raise SolverError("degenerate (zero-area) surface face")
    out = np.zeros((coords.shape[0], 3))
    _k.pressure_forces(coords, faces, p_mpa, out)
    return out


def seam_contact(mesh: SeamedMesh, coords, penalty: float) -> np.ndarray:
    """Penalty self-contact forces across all seam pairs at this configuration."""
    if penalty <= 0:
        raise ValueError("penalty stiffness must be positive")
    # the material set only sizes timestep estimates, not contact forces
    disc = Discretization(mesh, MaterialSet(HyperfoamModel(((0.035, 2.0, 0.0),)),
                                            YeohModel()),
                          SolverControls(penalty=penalty))
    f, _, _, _ = disc.contact_forces(np.ascontiguousarray(coords, dtype=float))
    return f


# ---------------------------------------------------------------------------
# Dynamic relaxation


def _rodrigues(w):
    th = np.linalg.norm(w)
    if th < 1e-14:
        return np.eye(3) + _skew(w)
    k = w / th
    kx = _skew(k)
    return np.eye(3) + math.sin(th) * kx + (1.0 - math.cos(th)) * (kx @ kx)


def _skew(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _fresh_state(disc: Discretization) -> SimState:
    return SimState(coords=disc.mesh.nodes.copy(),
                    vel=np.zeros((disc.n_nodes, 3)),
                    plate_center=disc.plate_center0.copy())


def _analytic_omega1(disc: Discretization) -> float:
    """Lowest structural frequency of the actuator, with mass-scaled density.

    Axial: fixed-free composite rod, pi c / (2H).  Bending: first cantilever
    mode 3.516 c r_g / H^2 with the solid-cylinder radius of gyration
    r_g = R/2 -- for this slender column the bending mode lies well below
    the axial one, and damping tuned only to the axial mode leaves lateral
    motion (the programmed bend/tilt) overdamped and crawling."""
    mats = disc.materials
    vol = disc.dvols.sum(axis=1)
    foam_vol = float(vol[disc.mesh.mat == MAT_FOAM].sum())
    skin_vol = float(vol[disc.mesh.mat == MAT_SKIN].sum())
    ea = mats.foam.initial_youngs_modulus * foam_vol
    rho_v = mats.foam.density * foam_vol
    if mats.skin is not None and skin_vol > 0:
        ea += mats.skin.initial_youngs_modulus * skin_vol
        rho_v += mats.skin.density * skin_vol
    c_wave = math.sqrt(ea / (rho_v * disc.mass_scale))
    nodes = disc.mesh.nodes
    height = float(nodes[:, 2].max() - nodes[:, 2].min())
    height = max(height, 1e-12)
    radius = float(np.hypot(nodes[:, 0], nodes[:, 1]).max())
    omega_axial = math.pi * c_wave / (2.0 * height)
    omega_bend = 3.516 * c_wave * (0.5 * radius) / height ** 2
    return min(omega_axial, omega_bend)


def _estimate_damping(disc: Discretization, load: LoadCase, controls: SolverControls):
    """Damping coefficient targeting critical damping of the lowest mode
    (2 * omega_1).  "auto" uses the analytic composite-rod estimate; "probe"
    refines it with a short undamped run under a small step load (first
    kinetic-energy peak ~ a quarter period)."""
    omega_analytic = _analytic_omega1(disc)
    if controls.damping != "probe" or load.pressure_kpa == 0.0:
        return 2.0 * omega_analytic
    st = _fresh_state(disc)
    p = 0.2 * load.pressure_mpa
    ke = []
    for _ in range(controls.probe_steps):
        _advance(disc, st, p, cdamp=0.0, load=load)
        ke.append(st.kinetic)
    i_peak = int(np.argmax(ke))
    if i_peak == 0 or i_peak >= len(ke) - 1:
        return 2.0 * omega_analytic  # no interior peak seen: probe too short
    omega = math.pi / (2.0 * (i_peak + 1) * disc.dt)
    omega = min(max(omega, omega_analytic / 3.0), 3.0 * omega_analytic)
    return 2.0 * omega


def _forces(disc: Discretization, st: SimState, p_mpa: float, load: LoadCase):
    """Assembled nodal forces and energies at the current configuration."""
    fint, e_strain, flags = disc.internal_forces(st.coords)
    fp = disc.pressure_forces(st.coords, p_mpa)
    fc, e_pen, pen_max, p_visc = disc.contact_forces(st.coords, st.vel)
    ftot = fint + fp + fc
    if load.gravity is not None:
        ftot = ftot + disc.mass[:, None] * np.asarray(load.gravity)
    return ftot, fp, flags, e_strain, e_pen, pen_max, p_visc


def _advance(disc: Discretization, st: SimState, p_mpa: float, cdamp: float,
             load: LoadCase):
    """One explicit central-difference step."""
    dt = disc.dt
    coords, vel = st.coords, st.vel
    ftot, fp, flags, e_strain, e_pen, pen_max, p_visc = _forces(disc, st, p_mpa, load)

    x_old = coords.copy()
    v_old = vel.copy()

    # free nodes
    _k.integrate_free(coords, vel, ftot, disc.minv, disc.free_mask, cdamp, dt)

    # rigid top plate
    top = disc.top
    f_plate = ftot[top].sum(axis=0)
    r = coords[top] - st.plate_center
    m_plate = np.sum(np.cross(r, ftot[top]), axis=0)
    mi = disc.mass[top]
    inertia = np.einsum("i,ijk->jk",
                        mi, (np.einsum("ij,ij->i", r, r)[:, None, None] * np.eye(3)
                             - np.einsum("ij,ik->ijk", r, r)))
    half = 0.5 * cdamp * dt
    st.plate_vel = ((1.0 - half) * st.plate_vel + dt * f_plate / max(disc.plate_mass, 1e-300)) / (1.0 + half)
    ang_acc = np.linalg.solve(inertia + 1e-12 * np.eye(3), m_plate)
    st.plate_omega = ((1.0 - half) * st.plate_omega + dt * ang_acc) / (1.0 + half)
    st.plate_center = st.plate_center + dt * st.plate_vel
    st.plate_rot = _rodrigues(st.plate_omega * dt) @ st.plate_rot
    coords[top] = st.plate_center + disc.plate_offsets0 @ st.plate_rot.T
    vel[top] = st.plate_vel + np.cross(st.plate_omega, coords[top] - st.plate_center)

    st.time += dt
    st.step += 1

    dx = coords - x_old
    st.external_work += float(np.sum(fp * dx))
    if load.gravity is not None:
        st.external_work += float(np.sum(disc.mass[:, None] * np.asarray(load.gravity) * dx))
    v_mid = 0.5 * (v_old + vel)
    st.dissipated += float(cdamp * dt * np.sum(disc.mass[:, None] * v_mid * vel))
    st.dissipated += p_visc * dt
    st.kinetic = 0.5 * float(np.sum(disc.mass[:, None] * vel ** 2))
    st.internal = e_strain + e_pen

    return ftot, fp, flags, pen_max


def relax_to_equilibrium(mesh: SeamedMesh, materials: MaterialSet, load: LoadCase,
                         controls: SolverControls | None = None,
                         initial_state: SimState | None = None,
                         disc: Discretization | None = None) -> EquilibriumResult:
    """Ramp the load and integrate with dynamic relaxation to equilibrium.

    Convergence requires, on two consecutive report checks after the ramp
    has completed: kinetic/internal energy below ``ke_tol`` and residual
    force norm below ``residual_tol`` of the applied load norm.
    """
    controls = controls or SolverControls()
    if disc is None:
        disc = Discretization(mesh, materials, controls)
    st = initial_state if initial_state is not None else _fresh_state(disc)

    if isinstance(controls.damping, str):
        cdamp = _estimate_damping(disc, load, controls)
    else:
        cdamp = float(controls.damping)

    p_full = load.pressure_mpa
    t0 = st.time
    # warm restarts resume the ramp from the state's current load fraction
    f0 = min(1.0, max(0.0, st.load_fraction))
    history = []
    ok_checks = 0
    inv_checks = 0
    converged = False
    residual = math.inf
    ke_ratio = math.inf
    pen_worst = 0.0
    h_min = float(np.min(disc.element_h))

    while st.step < controls.max_steps:
        frac = min(1.0, f0 + (1.0 - f0) * (st.time - t0) / controls.ramp_time)
        st.load_fraction = frac
        ftot, fp, flags, pen_max = _advance(disc, st, frac * p_full, cdamp, load)
        pen_worst = max(pen_worst, pen_max)

        if st.step % controls.report_interval == 0:
            disc.refresh_contact(st.coords)
            free = disc.free_mask
            fext_norm = float(np.linalg.norm(fp[free]))
            res_norm = float(np.linalg.norm(ftot[free]))
            plate_res = float(np.linalg.norm(ftot[disc.top].sum(axis=0)))
            denom = max(fext_norm, 1e-12)
            residual = (res_norm + plate_res) / denom if p_full > 0 else res_norm + plate_res
            ke_ratio = st.kinetic / max(st.internal, 1e-12)
            balance = st.external_work - st.internal - st.kinetic - st.dissipated
            history.append({
                "step": st.step, "time": st.time, "load_fraction": frac,
                "kinetic_mJ": st.kinetic, "internal_mJ": st.internal,
                "external_work_mJ": st.external_work, "dissipated_mJ": st.dissipated,
                "energy_balance_mJ": balance, "residual": residual,
                "ke_over_ie": ke_ratio,
            })
            if not np.isfinite(st.kinetic) or not np.isfinite(st.internal):
                raise SolverError("energy blow-up: timestep instability "
                                  f"(step {st.step}, dt {disc.dt:g})")
            if np.any(flags == 2):
                inv_checks += 1
                if inv_checks >= 3:
                    raise ElementInversionError(np.nonzero(flags == 2)[0])
            else:
                inv_checks = 0
            pen_limit = (2.0 * disc.contact_depth if disc.contact_depth > 0.0
                         else h_min)
            if pen_max > pen_limit:
                warnings.warn(f"seam penetration {pen_max:.3f} mm exceeds the "
                              "contact depth: contact too soft")
            if frac >= 1.0 and ke_ratio < controls.ke_tol and residual < controls.residual_tol:
                ok_checks += 1
                if ok_checks >= 2:
                    converged = True
                    break
            else:
                ok_checks = 0
        if st.time - t0 > controls.ramp_time + controls.settle_time:
            break  # simulated-time budget exhausted

    # base reactions: load transmitted through the material at the mount.
    # The assembled total (with follower pressure) sums to zero over the
    # whole model at equilibrium, so only the internal+contact part carries
    # the measurable force the actuator applies to its fixture.
    fint, _, _ = disc.internal_forces(st.coords)
    fc, _, _, _ = disc.contact_forces(st.coords)
    rb = -(fint + fc)[disc.base]
    base_force = rb.sum(axis=0)
    base_moment = np.sum(np.cross(st.coords[disc.base] - disc.base_center, rb), axis=0)

    diagnostics = {
        "converged": converged, "steps": st.step, "dt": disc.dt,
        "mass_scale": disc.mass_scale, "damping": cdamp,
        "penalty": disc.penalty, "contact_sigma": disc.contact_sigma,
        "contact_depth": disc.contact_depth,
        "residual": residual, "ke_over_ie": ke_ratio,
        "worst_penetration_mm": pen_worst,
    }
    if not converged:
        warnings.warn(f"dynamic relaxation did not converge in {st.step} steps "
                      f"(residual {residual:.3g}, KE/IE {ke_ratio:.3g})")
    return EquilibriumResult(
        state=st, rotation=st.plate_rot.copy(),
        translation=st.plate_center - disc.plate_center0,
        base_force=base_force, base_moment=base_moment,
        converged=converged, diagnostics=diagnostics, history=history)


def base_reactions(result: EquilibriumResult) -> tuple[np.ndarray, np.ndarray]:
    """Base constraint force (N) and moment about the base center (N mm)."""
    return result.base_force, result.base_moment


# ---------------------------------------------------------------------------
# Artifacts


def write_summary_csv(result: EquilibriumResult, path, header_comment: str | None = None):
    cols = ["step", "time", "load_fraction", "kinetic_mJ", "internal_mJ",
            "external_work_mJ", "dissipated_mJ", "energy_balance_mJ",
            "residual", "ke_over_ie"]
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append(",".join(cols))
    for row in result.history:
        lines.append(",".join(repr(float(row[c])) if c != "step" else str(row[c])
                              for c in cols))
    Path(path).write_text("\n".join(lines) + "\n")


_SNAPSHOT_HEADER = "# foamact snapshot v1"


def write_snapshot(result: EquilibriumResult, path):
    st = result.state
    lines = [_SNAPSHOT_HEADER,
             f"TIME {st.time!r}",
             f"LOAD_FRACTION {st.load_fraction!r}",
             f"CONVERGED {int(result.converged)}",
             "PLATE_ROT " + " ".join(repr(float(x)) for x in result.rotation.ravel()),
             "PLATE_TRANSLATION " + " ".join(repr(float(x)) for x in result.translation),
             f"POSITIONS {st.coords.shape[0]}"]
    for p in st.coords:
        lines.append(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}")
    Path(path).write_text("\n".join(lines) + "\n")
