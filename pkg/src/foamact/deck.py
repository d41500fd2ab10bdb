"""Keyword-format input-deck export for commercial explicit FE solvers.

Writes the actuator model (mesh, hyperfoam/Yeoh material cards, follower
surface pressure, rigid endplate coupling, fixed base, seam contact pairs)
as a classic keyword deck so results can be cross-checked against an
independent solver.  Output is byte-stable for identical inputs: floats are
printed with shortest-exact ``repr`` and every set is emitted in sorted
order.

Node and element ids are written 1-based.  A local hex face index ``i``
(the ordering used by :data:`foamact.mesh.HEX_FACES`) maps to keyword face
label ``S(i+1)``.
"""

from __future__ import annotations

import numpy as np

from .mesh import HEX_FACES, MAT_FOAM, MAT_SKIN, SeamedMesh, _build_face_table
from .solver import LoadCase, MaterialSet, SolverError

__all__ = ["export_deck", "read_deck_summary", "DeckExportError"]


class DeckExportError(SolverError):
    """The model uses a feature the deck format cannot express."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _chunk_ids(ids, per_line: int = 16):
    ids = list(ids)
    for i in range(0, len(ids), per_line):
        yield ", ".join(str(j) for j in ids[i:i + per_line])


def _face_assignments(mesh: SeamedMesh, quads: np.ndarray, prefer_mat=None):
    """Map each node-quad to a unique ``(elem, local_face)`` owner."""
    table = _build_face_table(mesh.elems)
    out = []
    for quad in quads:
        key = tuple(sorted(int(n) for n in quad))
        owners = table.get(key)
        if not owners:
            raise DeckExportError(f"face {key} is not a face of any element")
        pick = owners[0]
        if prefer_mat is not None and len(owners) > 1:
            for e, lf in owners:
                if mesh.mat[e] == prefer_mat:
                    pick = (e, lf)
                    break
        out.append(pick)
    return out


def _surface_lines(mesh: SeamedMesh, name: str, quads: np.ndarray) -> list[str]:
    lines = [f"*SURFACE, TYPE=ELEMENT, NAME={name}"]
    rows = sorted((e + 1, lf + 1) for e, lf in _face_assignments(mesh, quads))
    for eid, s in rows:
        lines.append(f"{eid}, S{s}")
    return lines


def export_deck(mesh: SeamedMesh, materials: MaterialSet, load: LoadCase,
                path, element_type: str = "C3D8") -> str:
    """Write the model as a keyword input deck; returns the deck text.

    ``element_type`` selects fully integrated (``C3D8``) or reduced
    integration (``C3D8R``) bricks.
    """
    if element_type not in ("C3D8", "C3D8R"):
        raise DeckExportError(f"unsupported element type {element_type!r}")
    if materials.foam is None:
        raise DeckExportError("a foam material is required")
    has_skin = bool(np.any(mesh.mat == MAT_SKIN))
    if has_skin and materials.skin is None:
        raise DeckExportError("mesh has skin elements but no skin material given")
    if load.gravity is not None:
        raise DeckExportError("gravity loads are not exported")
    for mu, alpha, beta in materials.foam.coefficients:
        if abs(beta) > 1e-12:
            raise DeckExportError("only beta = 0 (nu = 0) hyperfoam cards are exported")

    L = []
    L.append("*HEADING")
    L.append("incised foam actuator, mm-tonne-s-MPa units")
    L.append("*NODE")
    for i, p in enumerate(mesh.nodes):
        L.append(f"{i + 1}, {_fmt(p[0])}, {_fmt(p[1])}, {_fmt(p[2])}")
    ref_id = mesh.n_nodes + 1
    top_c = mesh.nodes[mesh.top_nodes].mean(axis=0)
    L.append(f"{ref_id}, {_fmt(top_c[0])}, {_fmt(top_c[1])}, {_fmt(top_c[2])}")

    for mat_code, elset in ((MAT_FOAM, "FOAM"), (MAT_SKIN, "SKIN")):
        ids = np.nonzero(mesh.mat == mat_code)[0]
        if ids.size == 0:
            continue
        L.append(f"*ELEMENT, TYPE={element_type}, ELSET={elset}")
        for e in ids:
            conn = ", ".join(str(int(n) + 1) for n in mesh.elems[e])
            L.append(f"{int(e) + 1}, {conn}")

    L.append("*NSET, NSET=BASE")
    L.extend(_chunk_ids(sorted(int(n) + 1 for n in mesh.bottom_nodes)))
    L.append("*NSET, NSET=TOP")
    L.extend(_chunk_ids(sorted(int(n) + 1 for n in mesh.top_nodes)))
    L.append("*NSET, NSET=TOPREF")
    L.append(str(ref_id))

    L.append("*SOLID SECTION, ELSET=FOAM, MATERIAL=FOAMCORE")
    if has_skin:
        L.append("*SOLID SECTION, ELSET=SKIN, MATERIAL=SKINSHELL")

    n_order = len(materials.foam.coefficients)
    L.append("*MATERIAL, NAME=FOAMCORE")
    L.append(f"*HYPERFOAM, N={n_order}")
    card = []
    for mu, alpha, beta in materials.foam.coefficients:
        card.extend([_fmt(mu), _fmt(alpha), _fmt(0.0)])
    L.append(", ".join(card))
    L.append("*DENSITY")
    L.append(_fmt(materials.foam.density))
    if has_skin:
        L.append("*MATERIAL, NAME=SKINSHELL")
        L.append("*HYPERELASTIC, YEOH")
        L.append(", ".join([_fmt(materials.skin.c10), _fmt(materials.skin.c20),
                            _fmt(0.0), _fmt(0.0), _fmt(0.0), _fmt(0.0)]))
        L.append("*DENSITY")
        L.append(_fmt(materials.skin.density))

    L.extend(_surface_lines(mesh, "OUTER", mesh.surface_faces))
    for k, seam in enumerate(mesh.seams):
        L.extend(_surface_lines(mesh, f"SEAM{k}A", seam.faces_a))
        L.extend(_surface_lines(mesh, f"SEAM{k}B", seam.faces_b))

    L.append("*SURFACE, TYPE=NODE, NAME=TOPNODES")
    L.append("TOP")
    L.append("*COUPLING, CONSTRAINT NAME=TOPPLATE, REF NODE=TOPREF, SURFACE=TOPNODES")
    L.append("*KINEMATIC")

    L.append("*SURFACE INTERACTION, NAME=SEAMCONTACT")
    L.append("*SURFACE BEHAVIOR, PENALTY")
    for k in range(len(mesh.seams)):
        L.append(f"*CONTACT PAIR, INTERACTION=SEAMCONTACT, TYPE=SURFACE TO SURFACE")
        L.append(f"SEAM{k}A, SEAM{k}B")

    L.append("*BOUNDARY")
    L.append("BASE, ENCASTRE")

    L.append("*AMPLITUDE, NAME=RAMP, DEFINITION=SMOOTH STEP")
    L.append(f"0.0, 0.0, 1.0, 1.0")
    L.append("*STEP")
    L.append("*DYNAMIC, EXPLICIT")
    L.append(", 1.0")
    L.append("*DSLOAD, AMPLITUDE=RAMP")
    L.append(f"OUTER, P, {_fmt(load.pressure_mpa)}")
    L.append("*END STEP")

    text = "\n".join(L) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return text


def read_deck_summary(path) -> dict:
    """Parse a deck back into counts and raw arrays (round-trip checking)."""
    nodes = {}
    elems = []
    elsets = {}
    mode = None
    current_elset = None
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("*"):
                upper = line.upper()
                if upper.startswith("*NODE"):
                    mode = "node"
                elif upper.startswith("*ELEMENT"):
                    mode = "elem"
                    current_elset = None
                    for tok in line.split(","):
                        tok = tok.strip()
                        if tok.upper().startswith("ELSET="):
                            current_elset = tok.split("=", 1)[1]
                    elsets.setdefault(current_elset, [])
                else:
                    mode = None
                continue
            if mode == "node":
                toks = [t.strip() for t in line.split(",")]
                nodes[int(toks[0])] = [float(t) for t in toks[1:4]]
            elif mode == "elem":
                toks = [int(t.strip()) for t in line.split(",")]
                elems.append(toks)
                elsets[current_elset].append(toks[0])
    ids = sorted(nodes)
    return {
        "n_nodes": len(nodes),
        "n_elems": len(elems),
        "nodes": np.array([nodes[i] for i in ids]),
        "node_ids": np.array(ids),
        "elems": np.array([e[1:] for e in sorted(elems)]) if elems else np.empty((0, 8)),
        "elsets": {k: sorted(v) for k, v in elsets.items()},
    }
