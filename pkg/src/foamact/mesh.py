"""Structured hexahedral meshing of the incised cylinder.

The cross section is a butterfly (O-grid) layout: a central square block
of ``2m x 2m`` quads blended into ``nr`` ring layers that end on the
circle of radius ``R``; an optional conforming skin layer of solid
elements extends to ``R + t`` and shares nodes with the foam (this is
how the foam-skin tie is realized).  The grid extrudes over ``nz``
layers in z; when diagonal incisions are present the section is rotated
progressively per layer so the circumferential element interfaces form
exactly the helical cut surfaces.

Incisions are realized by duplicating nodes across snapped element-face
sheets: a node is split when the cut faces disconnect its surrounding
elements, which naturally pins crack tips and keeps the skin (when
present) bridging the cut mouth.  The coincident face pairs are recorded
as seams for self-contact.

Unit system: mm-tonne-s-MPa.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .pattern import IncisionSurface, Substrate

__all__ = [
    "MeshResolution",
    "MeshGenerationError",
    "SeamPair",
    "SeamedMesh",
    "mesh_cylinder",
    "quality_report",
    "save_neutral",
    "load_neutral",
]

MAT_FOAM = 0
MAT_SKIN = 1

# Outward-oriented local faces of a hex whose bottom quad (0,1,2,3) is
# counterclockwise viewed from +z and whose top quad is (4,5,6,7).
HEX_FACES = (
    (0, 3, 2, 1),  # bottom, -z
    (4, 5, 6, 7),  # top, +z
    (0, 1, 5, 4),
    (1, 2, 6, 5),
    (2, 3, 7, 6),
    (3, 0, 4, 7),
)

# Fraction of element size beyond which a snap displacement is reported.
SNAP_WARN_FRACTION = 0.25


class MeshGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class MeshResolution:
    """Butterfly resolution: ``m`` (core half-count; outer boundary has
    ``8 m`` circumferential elements), ``nr`` ring layers, ``nz`` axial
    layers, ``skin_layers`` through the skin thickness."""

    m: int = 4
    nr: int = 4
    nz: int = 20
    skin_layers: int = 1

    def __post_init__(self):
        if self.m < 1 or self.nr < 1 or self.nz < 2 or self.skin_layers < 1:
            raise ValueError("invalid resolution")

    def refined(self, factor: int = 2) -> "MeshResolution":
        return MeshResolution(self.m * factor, self.nr * factor,
                              self.nz * factor, self.skin_layers)


@dataclass
class SeamPair:
    """Coincident cut faces: ``faces_a`` oriented toward the B side."""

    faces_a: np.ndarray  # (k, 4) node ids
    faces_b: np.ndarray  # (k, 4) node ids
    label: str = ""


@dataclass
class SeamedMesh:
    nodes: np.ndarray                 # (n, 3) reference positions, mm
    elems: np.ndarray                 # (ne, 8) connectivity
    mat: np.ndarray                   # (ne,) MAT_FOAM / MAT_SKIN
    surface_faces: np.ndarray         # (nf, 4) outward-oriented external faces
    surface_tags: np.ndarray          # (nf,) 0 = lateral, 1 = top cap, 2 = bottom cap
    top_nodes: np.ndarray
    bottom_nodes: np.ndarray
    seams: list = field(default_factory=list)
    substrate: Substrate = None
    resolution: MeshResolution = None
    twist_per_z: float = 0.0          # section rotation rate, rad/mm

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elems(self) -> int:
        return self.elems.shape[0]

    def foam_volume(self) -> float:
        return float(np.sum(element_volumes(self.nodes, self.elems[self.mat == MAT_FOAM])))

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.nodes).tobytes())
        h.update(np.ascontiguousarray(self.elems).tobytes())
        h.update(np.ascontiguousarray(self.mat).tobytes())
        for seam in self.seams:
            h.update(np.ascontiguousarray(seam.faces_a).tobytes())
            h.update(np.ascontiguousarray(seam.faces_b).tobytes())
        return h.hexdigest()


# ---------------------------------------------------------------------------
# Butterfly cross section


def _square_boundary_point(a: float, k: int, m: int) -> tuple[float, float]:
    side, frac = divmod(k, 2 * m)
    t = frac / (2.0 * m)
    if side == 0:
        return a, -a + 2 * a * t
    if side == 1:
        return a - 2 * a * t, a
    if side == 2:
        return -a, a - 2 * a * t
    return -a + 2 * a * t, -a


def _cross_section(res: MeshResolution, R: float, t_skin: float):
    """2-D butterfly section.

    Returns node coordinates, quads (CCW), per-quad material, the id grid
    ``ring_ids[level][k]`` for ring node levels 1..nr (+skin) and the core
    node grid.  Ring level 0 is the core boundary.
    """
    m, nr = res.m, res.nr
    nsk = res.skin_layers if t_skin > 0 else 0
    a = R / 2.0
    nc = 2 * m + 1
    pts = []
    core_id = np.empty((nc, nc), dtype=np.int64)
    for ix in range(nc):
        for iy in range(nc):
            core_id[ix, iy] = len(pts)
            pts.append((-a + 2 * a * ix / (2 * m), -a + 2 * a * iy / (2 * m)))

    n_circ = 8 * m
    phis = -math.pi / 4 + 2 * math.pi * np.arange(n_circ) / n_circ

    def core_boundary_id(k: int) -> int:
        side, frac = divmod(k % n_circ, 2 * m)
        if side == 0:
            return core_id[2 * m, frac]
        if side == 1:
            return core_id[2 * m - frac, 2 * m]
        if side == 2:
            return core_id[0, 2 * m - frac]
        return core_id[frac, 0]

    ring_ids = [np.array([core_boundary_id(k) for k in range(n_circ)], dtype=np.int64)]
    for j in range(1, nr + 1):
        ids = np.empty(n_circ, dtype=np.int64)
        for k in range(n_circ):
            sx, sy = _square_boundary_point(a, k, m)
            cx, cy = R * math.cos(phis[k]), R * math.sin(phis[k])
            f = j / nr
            ids[k] = len(pts)
            pts.append((sx + f * (cx - sx), sy + f * (cy - sy)))
        ring_ids.append(ids)
    for j in range(1, nsk + 1):
        ids = np.empty(n_circ, dtype=np.int64)
        r = R + t_skin * j / nsk
        for k in range(n_circ):
            ids[k] = len(pts)
            pts.append((r * math.cos(phis[k]), r * math.sin(phis[k])))
        ring_ids.append(ids)

    quads = []
    qmat = []
    for ix in range(2 * m):
        for iy in range(2 * m):
            quads.append((core_id[ix, iy], core_id[ix + 1, iy],
                          core_id[ix + 1, iy + 1], core_id[ix, iy + 1]))
            qmat.append(MAT_FOAM)
    for j in range(nr + nsk):
        lo, hi = ring_ids[j], ring_ids[j + 1]
        for k in range(n_circ):
            k1 = (k + 1) % n_circ
            quads.append((lo[k], hi[k], hi[k1], lo[k1]))
            qmat.append(MAT_FOAM if j < nr else MAT_SKIN)
    pts = np.asarray(pts, dtype=float)
    return pts, np.asarray(quads, dtype=np.int64), np.asarray(qmat, dtype=np.int64), ring_ids


# ---------------------------------------------------------------------------
# 3-D extrusion


def _extrude(sec_pts, quads, qmat, res, sub, twist_per_z):
    nz = res.nz
    n2 = sec_pts.shape[0]
    dz = sub.H / nz
    nodes = np.empty(((nz + 1) * n2, 3))
    for iz in range(nz + 1):
        z = iz * dz
        psi = twist_per_z * z
        c, s = math.cos(psi), math.sin(psi)
        rot = sec_pts @ np.array([[c, -s], [s, c]]).T  # rotate by +psi
        nodes[iz * n2:(iz + 1) * n2, 0] = rot[:, 0]
        nodes[iz * n2:(iz + 1) * n2, 1] = rot[:, 1]
        nodes[iz * n2:(iz + 1) * n2, 2] = z

    nq = quads.shape[0]
    elems = np.empty((nz * nq, 8), dtype=np.int64)
    mat = np.empty(nz * nq, dtype=np.int64)
    for iz in range(nz):
        base = iz * n2
        top = (iz + 1) * n2
        elems[iz * nq:(iz + 1) * nq, 0:4] = quads + base
        elems[iz * nq:(iz + 1) * nq, 4:8] = quads + top
        mat[iz * nq:(iz + 1) * nq] = qmat
    return nodes, elems, mat


# ---------------------------------------------------------------------------
# Seam realization by node duplication


def _face_key(nodes4):
    return tuple(sorted(int(n) for n in nodes4))


def _build_face_table(elems):
    """Map face key -> list of (elem, local_face)."""
    table = {}
    for e in range(elems.shape[0]):
        conn = elems[e]
        for lf, loc in enumerate(HEX_FACES):
            key = _face_key(conn[list(loc)])
            table.setdefault(key, []).append((e, lf))
    return table


class _UnionFind:
    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _apply_cuts(nodes, elems, cut_face_sets):
    """Duplicate nodes across the cut faces; returns updated arrays,
    the seam pairs, and the duplicate map {new_id: original_id}.

    Splits are planned on the original topology first and applied in one
    pass afterwards, so earlier splits cannot invalidate face lookups.
    """
    all_cut = set()
    for faces in cut_face_sets:
        all_cut |= {key for key, _ in faces}
    if not all_cut:
        return nodes, elems, [], {}

    face_table = _build_face_table(elems)
    n_nodes = nodes.shape[0]
    affected = set()
    for key in all_cut:
        affected.update(key)
    node_elems = {}
    for e in range(elems.shape[0]):
        for n in elems[e]:
            if int(n) in affected:
                node_elems.setdefault(int(n), []).append(e)

    planned = []  # (node, [elements that switch to a fresh copy])
    for n in sorted(affected):
        incident = node_elems[n]
        if len(incident) < 2:
            continue
        uf = _UnionFind(incident)
        for e in incident:
            conn = elems[e]
            for loc in HEX_FACES:
                face = conn[list(loc)]
                if n not in (int(x) for x in face):
                    continue
                key = _face_key(face)
                owners = face_table.get(key, [])
                if len(owners) == 2 and key not in all_cut:
                    uf.union(owners[0][0], owners[1][0])
        comps = {}
        for e in incident:
            comps.setdefault(uf.find(e), []).append(e)
        if len(comps) < 2:
            continue
        roots = sorted(comps)  # component of the smallest element id keeps n
        for root in roots[1:]:
            planned.append((n, comps[root]))

    elems = elems.copy()
    new_coords = []
    dup_map = {}
    for n, comp in planned:
        new_id = n_nodes + len(new_coords)
        new_coords.append(nodes[n])
        dup_map[new_id] = n
        for e in comp:
            elems[e][elems[e] == n] = new_id

    if new_coords:
        nodes = np.vstack([nodes, np.asarray(new_coords)])

    seams = []
    for faces in cut_face_sets:
        fa, fb = [], []
        for key, owner_pair in faces:
            (e1, lf1), (e2, lf2) = owner_pair
            a = [int(x) for x in elems[e1][list(HEX_FACES[lf1])]]
            b = [int(x) for x in elems[e2][list(HEX_FACES[lf2])]]
            if set(a) == set(b):
                continue  # no node was split here; the face stayed bonded
            fa.append(a)
            fb.append(b)
        seams.append((np.asarray(fa, dtype=np.int64).reshape(-1, 4),
                      np.asarray(fb, dtype=np.int64).reshape(-1, 4)))
    return nodes, elems, seams, dup_map


# ---------------------------------------------------------------------------
# Cut face selection


def _wrap_angle(phi):
    return (phi + math.pi) % (2 * math.pi) - math.pi


def _cut_ring_layers(depth: float, R: float, nr: int) -> int:
    """Number of outermost foam ring-element layers spanned by a cut depth."""
    frac = min(depth, R / 2.0) / (R / 2.0)
    return min(max(int(round(frac * nr)), 1), nr)


def _select_transverse_faces(inc, sub, res, sec_pts, quads, face_table,
                             twist_per_z, label):
    """Horizontal interface faces for a transverse cut: one z-level, an
    azimuthal arc, reaching inward by the cut depth.  Faces are addressed
    through the section quad layout, so selection is exact at any
    resolution."""
    m, nr, nz = res.m, res.nr, res.nz
    n_core = (2 * m) ** 2
    n_circ = 8 * m
    n2 = sec_pts.shape[0]
    dz = sub.H / nz
    h_core = (sub.R / 2.0) / m
    z0 = inc.start[1]
    iz = min(max(int(round(z0 / dz)), 1), nz - 1)
    if abs(iz * dz - z0) > SNAP_WARN_FRACTION * dz:
        warnings.warn(f"{label}: snapped z={z0:.3f} to grid z={iz * dz:.3f} "
                      f"(more than {SNAP_WARN_FRACTION:.0%} of element size)")
    d_eff = inc.depth
    if d_eff >= sub.R - h_core:
        d_eff = sub.R - h_core
        warnings.warn(f"{label}: depth {inc.depth} clamped to {d_eff:.3f} "
                      "(one element layer short of the axis)")
    half_arc = (inc.end[0] - inc.start[0]) / 2.0 / sub.R
    # incision azimuths are physical; refer them to the (possibly twisted)
    # section frame at this height
    phi_c = (inc.start[0] + inc.end[0]) / 2.0 / sub.R - twist_per_z * iz * dz
    dphi = 2 * math.pi / n_circ

    q_sel = []
    for j in range(nr - _cut_ring_layers(d_eff, sub.R, nr), nr):
        for k in range(n_circ):
            phi_k = -math.pi / 4 + (k + 0.5) * dphi
            if abs(_wrap_angle(phi_k - phi_c)) <= half_arc + 1e-9:
                q_sel.append(n_core + j * n_circ + k)
    if d_eff > sub.R / 2.0 + 1e-9:
        # the cut continues into the core block
        r_in = sub.R - d_eff
        for q in range(n_core):
            cx, cy = sec_pts[quads[q]].mean(axis=0)
            if math.hypot(cx, cy) < r_in - 1e-9:
                continue
            if abs(_wrap_angle(math.atan2(cy, cx) - phi_c)) <= half_arc + 1e-9:
                q_sel.append(q)

    faces = []
    for q in q_sel:
        key = _face_key(quads[q] + iz * n2)
        owners = face_table.get(key)
        if owners is None or len(owners) != 2:
            continue
        e1, e2 = owners
        if e1[0] > e2[0]:  # element ids grow with layer: orient (below, above)
            e1, e2 = e2, e1
        faces.append((key, (e1, e2)))
    return faces


def _select_vertical_faces(inc, sub, res, sec_pts, ring_ids, nodes, face_table,
                           twist_per_z, label):
    """Interface faces for longitudinal (twist 0) or diagonal (twisted grid)
    cuts: the radial element interface at one azimuth index over an axial
    range, reaching inward by the cut depth."""
    m, nr, nz = res.m, res.nr, res.nz
    n_core = (2 * m) ** 2
    n_circ = 8 * m
    n2 = sec_pts.shape[0]
    nq = n_core + (len(ring_ids) - 1) * n_circ
    dz = sub.H / nz
    z_lo = min(inc.start[1], inc.end[1])
    z_hi = max(inc.start[1], inc.end[1])
    iz_lo = min(max(int(round(z_lo / dz)), 0), nz)
    iz_hi = min(max(int(round(z_hi / dz)), 0), nz)
    if iz_hi - iz_lo < 1:
        raise MeshGenerationError(f"{label}: axial extent unresolved at this resolution")
    for zval, snapped in ((z_lo, iz_lo * dz), (z_hi, iz_hi * dz)):
        if abs(snapped - zval) > SNAP_WARN_FRACTION * dz:
            warnings.warn(f"{label}: snapped z={zval:.3f} to grid z={snapped:.3f}")

    # azimuth of the cut sheet, referred back to the untwisted section (for a
    # diagonal cut the twist makes this height-independent by construction)
    s_lo = inc.start[0] if inc.start[1] <= inc.end[1] else inc.end[0]
    phi_ref = s_lo / sub.R - twist_per_z * z_lo
    dphi = 2 * math.pi / n_circ
    k0f = (phi_ref + math.pi / 4) / dphi
    k0 = int(round(k0f)) % n_circ
    if abs(k0f - round(k0f)) > SNAP_WARN_FRACTION:
        warnings.warn(f"{label}: snapped azimuth {math.degrees(phi_ref):.2f} deg to grid "
                      f"(offset {abs(k0f - round(k0f)):.2f} element)")

    d_eff = inc.depth
    d_max = sub.R / 2.0  # radial sheets exist only outside the core block
    if d_eff > d_max + 1e-9:
        d_eff = d_max
        warnings.warn(f"{label}: depth {inc.depth} clamped to {d_eff:.3f} "
                      "(cut sheets exist only outside the core block)")

    faces = []
    rmin = sub.R
    for j in range(nr - _cut_ring_layers(d_eff, sub.R, nr), nr):
        na, nb = int(ring_ids[j][k0]), int(ring_ids[j + 1][k0])
        for iz in range(iz_lo, iz_hi):
            key = _face_key((na + iz * n2, nb + iz * n2,
                             na + (iz + 1) * n2, nb + (iz + 1) * n2))
            owners = face_table.get(key)
            if owners is None or len(owners) != 2:
                continue
            e1, e2 = owners
            # orient the pair as (clockwise side, counterclockwise side): the
            # quad at azimuth index k0 spans k0 -> k0+1, i.e. the CCW side
            if e1[0] % nq == n_core + j * n_circ + k0:
                e1, e2 = e2, e1
            faces.append((key, (e1, e2)))
        rmin = min(rmin, float(np.hypot(*nodes[na, :2])))
    if faces:
        achieved = sub.R - rmin
        if achieved < inc.depth - 0.5 * (sub.R / 2.0) / max(nr, 1):
            warnings.warn(f"{label}: achieved depth {achieved:.2f} mm short of requested "
                          f"{inc.depth:.2f} mm (core block boundary at this azimuth)")
    return faces


# ---------------------------------------------------------------------------
# Main entry


def mesh_cylinder(sub: Substrate, incisions: list[IncisionSurface] | None = None,
                  resolution: MeshResolution | None = None,
                  skin: bool | None = None) -> SeamedMesh:
    """Mesh the (possibly incised) cylinder.

    ``skin`` defaults to ``sub.t > 0``; pass ``False`` to mesh the bare
    foam core with pressure applied to it directly.
    """
    incisions = list(incisions or [])
    res = resolution or MeshResolution()
    if skin is None:
        skin = sub.t > 0
    t_skin = sub.t if skin else 0.0

    twist_per_z = 0.0
    diag = [inc for inc in incisions if inc.kind == "diagonal"]
    if diag:
        slopes = []
        for inc in diag:
            ds = inc.end[0] - inc.start[0]
            dzc = inc.end[1] - inc.start[1]
            if abs(dzc) < 1e-12:
                raise MeshGenerationError("diagonal incision with zero axial extent")
            slopes.append(ds / dzc)
        if max(slopes) - min(slopes) > 1e-9:
            raise MeshGenerationError("diagonal incisions must share one angle and handedness")
        twist_per_z = slopes[0] / sub.R  # rad of section rotation per mm height

    sec_pts, quads, qmat, ring_ids = _cross_section(res, sub.R, t_skin)
    nodes, elems, mat = _extrude(sec_pts, quads, qmat, res, sub, twist_per_z)

    _check_ligaments(incisions, sub, res)

    dup_map = {}
    if incisions:
        raw_table = _build_face_table(elems)
        cut_sets = []
        labels = []
        for idx, inc in enumerate(incisions):
            label = f"incision[{idx}] ({inc.kind})"
            if inc.kind == "transverse":
                faces = _select_transverse_faces(inc, sub, res, sec_pts, quads,
                                                 raw_table, twist_per_z, label)
            else:
                faces = _select_vertical_faces(inc, sub, res, sec_pts, ring_ids,
                                               nodes, raw_table, twist_per_z, label)
            if not faces:
                raise MeshGenerationError(f"{label}: resolution too coarse to resolve this incision")
            cut_sets.append(faces)
            labels.append(label)
        nodes, elems, seam_arrays, dup_map = _apply_cuts(nodes, elems, cut_sets)
        seams = []
        for (fa, fb), label in zip(seam_arrays, labels):
            if fa.shape[0] == 0:
                raise MeshGenerationError(f"{label}: resolution too coarse to resolve this incision")
            seams.append(SeamPair(fa, fb, label))
    else:
        seams = []

    surface_faces, surface_tags = _external_surface(nodes, elems, sub, res, t_skin)
    n2 = sec_pts.shape[0]
    bottom_nodes = set(range(n2))
    top_nodes = set(range(res.nz * n2, (res.nz + 1) * n2))
    for new_id, orig in dup_map.items():
        if orig in bottom_nodes:
            bottom_nodes.add(new_id)
        if orig in top_nodes:
            top_nodes.add(new_id)
    bottom_nodes = np.array(sorted(bottom_nodes), dtype=np.int64)
    top_nodes = np.array(sorted(top_nodes), dtype=np.int64)

    mesh = SeamedMesh(nodes=nodes, elems=elems, mat=mat,
                      surface_faces=surface_faces, surface_tags=surface_tags,
                      top_nodes=top_nodes, bottom_nodes=bottom_nodes,
                      seams=seams, substrate=sub, resolution=res,
                      twist_per_z=twist_per_z)

    jmin = scaled_jacobians(nodes, elems).min()
    if jmin <= 0.0:
        raise MeshGenerationError(f"negative-Jacobian element (min scaled Jacobian {jmin:.3g})")
    return mesh


def _check_ligaments(incisions, sub, res, min_elems: int = 3):
    dz = sub.H / res.nz
    trans_z = sorted(inc.start[1] for inc in incisions if inc.kind == "transverse")
    for z1, z2 in zip(trans_z, trans_z[1:]):
        if (z2 - z1) / dz < min_elems:
            raise MeshGenerationError(
                f"ligament between transverse cuts at z={z1:g} and z={z2:g} spans fewer "
                f"than {min_elems} element layers")
    dphi = 360.0 / (8 * res.m)
    vert = sorted(math.degrees((inc.start[0] + inc.end[0]) / 2.0 / sub.R)
                  for inc in incisions if inc.kind in ("longitudinal", "diagonal"))
    for p1, p2 in zip(vert, vert[1:]):
        if (p2 - p1) / dphi < min_elems:
            raise MeshGenerationError(
                f"ligament between cuts at azimuths {p1:.1f} and {p2:.1f} deg spans fewer "
                f"than {min_elems} elements")


def _external_surface(nodes, elems, sub, res, t_skin):
    """All boundary faces, outward oriented, tagged lateral/top/bottom."""
    table = {}
    for e in range(elems.shape[0]):
        conn = elems[e]
        for loc in HEX_FACES:
            face = tuple(int(x) for x in conn[list(loc)])
            key = tuple(sorted(face))
            if key in table:
                table[key] = None
            else:
                table[key] = face
    faces, tags = [], []
    for key, face in sorted(table.items()):
        if face is None:
            continue
        z = nodes[list(face), 2]
        if np.allclose(z, sub.H, atol=1e-9):
            tag = 1
        elif np.allclose(z, 0.0, atol=1e-9):
            tag = 2
        else:
            # seam faces are also unpaired; exclude anything not on the
            # outer cylinder
            r = np.hypot(nodes[list(face), 0], nodes[list(face), 1])
            if np.any(r < sub.R + t_skin - 1e-6):
                continue
            tag = 0
        faces.append(face)
        tags.append(tag)
    return np.asarray(faces, dtype=np.int64), np.asarray(tags, dtype=np.int64)


# ---------------------------------------------------------------------------
# Quality metrics


_CORNER_SIGNS = np.array([
    [0, 1, 3, 4], [1, 2, 0, 5], [2, 3, 1, 6], [3, 0, 2, 7],
    [4, 7, 5, 0], [5, 4, 6, 1], [6, 5, 7, 2], [7, 6, 4, 3],
])


def scaled_jacobians(nodes, elems) -> np.ndarray:
    """Minimum corner scaled Jacobian per element."""
    x = nodes[elems]  # (ne, 8, 3)
    out = np.full(elems.shape[0], np.inf)
    for corner, (c, ca, cb, cc) in enumerate(_CORNER_SIGNS):
        e1 = x[:, ca] - x[:, c]
        e2 = x[:, cb] - x[:, c]
        e3 = x[:, cc] - x[:, c]
        det = np.einsum("ij,ij->i", np.cross(e1, e2), e3)
        norm = (np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
                * np.linalg.norm(e3, axis=1))
        out = np.minimum(out, det / np.maximum(norm, 1e-300))
    return out


_GAUSS = 1.0 / math.sqrt(3.0)
_GP = np.array([[sx * _GAUSS, sy * _GAUSS, sz * _GAUSS]
                for sz in (-1, 1) for sy in (-1, 1) for sx in (-1, 1)])
_HEX_CORNERS = np.array([
    [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
    [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
], dtype=float)


def shape_gradients(xi) -> np.ndarray:
    """d N_a / d xi for the trilinear hex at a natural point (8, 3)."""
    g = np.empty((8, 3))
    for a in range(8):
        sa = _HEX_CORNERS[a]
        g[a, 0] = 0.125 * sa[0] * (1 + sa[1] * xi[1]) * (1 + sa[2] * xi[2])
        g[a, 1] = 0.125 * sa[1] * (1 + sa[0] * xi[0]) * (1 + sa[2] * xi[2])
        g[a, 2] = 0.125 * sa[2] * (1 + sa[0] * xi[0]) * (1 + sa[1] * xi[1])
    return g


def element_volumes(nodes, elems) -> np.ndarray:
    x = nodes[elems]  # (ne, 8, 3)
    vol = np.zeros(elems.shape[0])
    for gp in _GP:
        g = shape_gradients(gp)  # (8, 3)
        jac = np.einsum("eai,aj->eij", x, g)
        vol += np.abs(np.linalg.det(jac))
    return vol


def aspect_ratios(nodes, elems) -> np.ndarray:
    x = nodes[elems]
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
             (0, 4), (1, 5), (2, 6), (3, 7)]
    lens = np.stack([np.linalg.norm(x[:, a] - x[:, b], axis=1) for a, b in edges], axis=1)
    return lens.max(axis=1) / np.maximum(lens.min(axis=1), 1e-300)


def quality_report(mesh: SeamedMesh) -> dict:
    sj = scaled_jacobians(mesh.nodes, mesh.elems)
    ar = aspect_ratios(mesh.nodes, mesh.elems)
    coincident = _coincident_pairs(mesh.nodes)
    seam_nodes = set()
    for seam in mesh.seams:
        seam_nodes |= set(int(n) for n in seam.faces_a.ravel())
        seam_nodes |= set(int(n) for n in seam.faces_b.ravel())
    stray = [p for p in coincident if not (p[0] in seam_nodes and p[1] in seam_nodes)]
    return {
        "n_nodes": mesh.n_nodes,
        "n_elems": mesh.n_elems,
        "n_seams": len(mesh.seams),
        "n_seam_faces": int(sum(s.faces_a.shape[0] for s in mesh.seams)),
        "min_scaled_jacobian": float(sj.min()),
        "max_aspect_ratio": float(ar.max()),
        "coincident_node_pairs": len(coincident),
        "coincident_pairs_off_seam": len(stray),
        "content_hash": mesh.content_hash(),
    }


def _coincident_pairs(nodes, tol=1e-9):
    order = np.lexsort((nodes[:, 2], nodes[:, 1], nodes[:, 0]))
    pairs = []
    pts = nodes[order]
    for i in range(len(order) - 1):
        j = i + 1
        while j < len(order) and abs(pts[j, 0] - pts[i, 0]) <= tol:
            if np.all(np.abs(pts[j] - pts[i]) <= tol):
                pairs.append((int(min(order[i], order[j])), int(max(order[i], order[j]))))
            j += 1
    return pairs


# ---------------------------------------------------------------------------
# Neutral mesh format (versioned structured text)

_NEUTRAL_HEADER = "# foamact neutral mesh v1"


def save_neutral(mesh: SeamedMesh, path):
    lines = [_NEUTRAL_HEADER]
    sub = mesh.substrate
    if sub is not None:
        lines.append(f"SUBSTRATE {sub.H!r} {sub.R!r} {sub.t!r}")
    lines.append(f"TWIST {mesh.twist_per_z!r}")
    lines.append(f"NODES {mesh.n_nodes}")
    # repr() gives the shortest digit string that round-trips exactly
    for i, p in enumerate(mesh.nodes):
        lines.append(f"{i} {float(p[0])!r} {float(p[1])!r} {float(p[2])!r}")
    lines.append(f"ELEMENTS {mesh.n_elems}")
    for i, (conn, m) in enumerate(zip(mesh.elems, mesh.mat)):
        lines.append(f"{i} {m} " + " ".join(str(int(n)) for n in conn))
    for name, ids in (("TOP", mesh.top_nodes), ("BOTTOM", mesh.bottom_nodes)):
        lines.append(f"NSET {name} {len(ids)}")
        lines.append(" ".join(str(int(n)) for n in ids))
    lines.append(f"SURFACE EXTERNAL {mesh.surface_faces.shape[0]}")
    for face, tag in zip(mesh.surface_faces, mesh.surface_tags):
        lines.append(f"{tag} " + " ".join(str(int(n)) for n in face))
    lines.append(f"SEAMS {len(mesh.seams)}")
    for seam in mesh.seams:
        lines.append(f"SEAM {seam.label!r} {seam.faces_a.shape[0]}")
        for fa, fb in zip(seam.faces_a, seam.faces_b):
            lines.append(" ".join(str(int(n)) for n in fa) + " | "
                         + " ".join(str(int(n)) for n in fb))
    from pathlib import Path
    Path(path).write_text("\n".join(lines) + "\n")


def load_neutral(path) -> SeamedMesh:
    from pathlib import Path
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != _NEUTRAL_HEADER:
        raise ValueError("not a foamact neutral mesh file (or unsupported version)")
    idx = 1
    sub = None
    twist = 0.0
    if lines[idx].startswith("SUBSTRATE"):
        _, H, R, t = lines[idx].split()
        sub = Substrate(float(H), float(R), float(t))
        idx += 1
    if lines[idx].startswith("TWIST"):
        twist = float(lines[idx].split()[1])
        idx += 1
    assert lines[idx].startswith("NODES")
    n = int(lines[idx].split()[1]); idx += 1
    nodes = np.empty((n, 3))
    for i in range(n):
        parts = lines[idx + i].split()
        nodes[i] = [float(parts[1]), float(parts[2]), float(parts[3])]
    idx += n
    assert lines[idx].startswith("ELEMENTS")
    ne = int(lines[idx].split()[1]); idx += 1
    elems = np.empty((ne, 8), dtype=np.int64)
    mat = np.empty(ne, dtype=np.int64)
    for i in range(ne):
        parts = lines[idx + i].split()
        mat[i] = int(parts[1])
        elems[i] = [int(x) for x in parts[2:10]]
    idx += ne
    nsets = {}
    while idx < len(lines) and lines[idx].startswith("NSET"):
        _, name, cnt = lines[idx].split()
        idx += 1
        nsets[name] = np.array([int(x) for x in lines[idx].split()], dtype=np.int64)
        idx += 1
    assert lines[idx].startswith("SURFACE")
    nf = int(lines[idx].split()[2]); idx += 1
    faces = np.empty((nf, 4), dtype=np.int64)
    tags = np.empty(nf, dtype=np.int64)
    for i in range(nf):
        parts = lines[idx + i].split()
        tags[i] = int(parts[0])
        faces[i] = [int(x) for x in parts[1:5]]
    idx += nf
    seams = []
    assert lines[idx].startswith("SEAMS")
    nseams = int(lines[idx].split()[1]); idx += 1
    for _ in range(nseams):
        head = lines[idx]; idx += 1
        label = head.split("'")[1] if "'" in head else ""
        cnt = int(head.rsplit(" ", 1)[1])
        fa = np.empty((cnt, 4), dtype=np.int64)
        fb = np.empty((cnt, 4), dtype=np.int64)
        for i in range(cnt):
            left, right = lines[idx + i].split("|")
            fa[i] = [int(x) for x in left.split()]
            fb[i] = [int(x) for x in right.split()]
        idx += cnt
        seams.append(SeamPair(fa, fb, label))
    return SeamedMesh(nodes=nodes, elems=elems, mat=mat, surface_faces=faces,
                      surface_tags=tags, top_nodes=nsets.get("TOP"),
                      bottom_nodes=nsets.get("BOTTOM"), seams=seams,
                      substrate=sub, resolution=None, twist_per_z=twist)
