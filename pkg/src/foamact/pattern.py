"""Incision pattern geometry on the cylindrical substrate.

Patterns are defined on the developed view of the cylinder's lateral
surface: a rectangle of width ``2 pi R`` (arc length ``s``) and height
``H`` (axial coordinate ``z``).  Three kinds exist:

* ``transverse``  - horizontal cuts on one side, one per axial station,
  driving bending toward the incised side;
* ``longitudinal`` - vertical cuts spread over the incised half,
  driving tilting;
* ``diagonal``    - helical cuts distributed around the full
  circumference, driving twisting; the sign of the developed-view slope
  is the handedness.

The incised side is centered on the canonical azimuth 0 (the +x axis).
Angles ``gamma`` are measured from the circumferential direction.
Lengths in mm, angles in degrees.  Unit system: mm-tonne-s-MPa.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

__all__ = [
    "FeasibilityError",
    "Substrate",
    "PatternSpec",
    "IncisionSurface",
    "derived_interval",
    "layout",
    "validate",
    "mirror",
    "save_spec",
    "load_spec",
    "save_substrate",
    "developed_view_svg",
]

KINDS = ("transverse", "longitudinal", "diagonal")


class FeasibilityError(ValueError):
    """The pattern cannot be realized on the given substrate."""


@dataclass(frozen=True)
class Substrate:
    """Cylindrical foam core: height ``H``, radius ``R``, skin thickness ``t`` (mm)."""

    H: float = 80.0
    R: float = 20.0
    t: float = 1.0

    def __post_init__(self):
        if self.H <= 0 or self.R <= 0:
            raise ValueError("H and R must be positive")
        if not (0.0 <= self.t < self.R):
            raise ValueError("skin thickness must satisfy 0 <= t < R")

    @property
    def circumference(self) -> float:
        return 2.0 * math.pi * self.R


@dataclass(frozen=True)
class PatternSpec:
    """One incision pattern: kind, array count N, length l, depth d (mm).

    ``w`` (mm, transverse) / ``theta`` (deg, longitudinal and diagonal)
    are the array intervals; when omitted they follow the equidistance
    rule (see :func:`derived_interval`).  ``gamma`` (deg, diagonal only)
    is the cut angle from the circumferential direction and
    ``handedness`` is ``"left"`` or ``"right"``.
    """

    kind: str
    N: int
    l: float
    d: float
    w: float | None = None
    theta: float | None = None
    gamma: float | None = None
    handedness: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.l <= 0:
            raise ValueError("incision length must be positive")
        if self.d <= 0:
            raise ValueError("incision depth must be positive")
        if self.kind == "diagonal":
            if self.gamma is None:
                raise ValueError("diagonal pattern requires gamma")
            if not (0.0 < self.gamma < 90.0):
                raise ValueError("gamma must be in (0, 90) degrees")
            if self.handedness not in ("left", "right"):
                raise ValueError("diagonal pattern requires handedness 'left' or 'right'")
        else:
            if self.gamma is not None or self.handedness is not None:
                raise ValueError(f"{self.kind} pattern takes no gamma/handedness")


@dataclass(frozen=True)
class IncisionSurface:
    """One cut: a developed-view centerline segment extruded inward by ``depth``.

    ``start``/``end`` are ``(s, z)`` pairs in mm on the developed view;
    ``s`` may run outside ``[0, 2 pi R)`` and wraps.
    """

    kind: str
    start: tuple[float, float]
    end: tuple[float, float]
    depth: float


def derived_interval(kind: str, N: int, sub: Substrate | None = None) -> float:
    """Equidistant array interval: ``H/(N+1)`` mm (transverse),
    ``180/(N+1)`` deg (longitudinal), ``360/N`` deg (diagonal)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if kind == "transverse":
        if sub is None:
            raise ValueError("transverse interval needs the substrate height")
        return sub.H / (N + 1)
    if kind == "longitudinal":
        return 180.0 / (N + 1)
    if kind == "diagonal":
        return 360.0 / N
    raise ValueError(f"unknown pattern kind {kind!r}")


def _segments(spec: PatternSpec, sub: Substrate) -> list[IncisionSurface]:
    segs = []
    if spec.kind == "transverse":
        w = spec.w if spec.w is not None else derived_interval("transverse", spec.N, sub)
        for k in range(1, spec.N + 1):
            z = k * w
            segs.append(IncisionSurface("transverse", (-spec.l / 2.0, z), (spec.l / 2.0, z), spec.d))
    elif spec.kind == "longitudinal":
        theta = spec.theta if spec.theta is not None else derived_interval("longitudinal", spec.N)
        z0 = (sub.H - spec.l) / 2.0
        for k in range(1, spec.N + 1):
            phi = -90.0 + k * theta
            s = math.radians(phi) * sub.R
            segs.append(IncisionSurface("longitudinal", (s, z0), (s, z0 + spec.l), spec.d))
    else:
        theta = spec.theta if spec.theta is not None else derived_interval("diagonal", spec.N)
        g = math.radians(spec.gamma)
        ds = spec.l * math.cos(g)
        dz = spec.l * math.sin(g)
        if spec.handedness == "left":
            ds = -ds
        z0 = (sub.H - dz) / 2.0
        for k in range(spec.N):
            s0 = math.radians(k * theta) * sub.R - ds / 2.0
            segs.append(IncisionSurface("diagonal", (s0, z0), (s0 + ds, z0 + dz), spec.d))
    return segs


def validate(spec: PatternSpec, sub: Substrate) -> list[str]:
    """Feasibility report: a list of violations (empty when feasible)."""
    violations = []
    if spec.d > sub.R:
        violations.append(f"depth d={spec.d} must be <= substrate radius R={sub.R}")
    circ = sub.circumference
    if spec.kind == "transverse":
        if spec.l > circ:
            violations.append(f"arc length l={spec.l} exceeds circumference {circ:.3f}")
        w = spec.w if spec.w is not None else derived_interval("transverse", spec.N, sub)
        if w <= 0 or spec.N * w >= sub.H:
            violations.append(f"N={spec.N} incisions at interval w={w:.3f} do not fit in H={sub.H}")
    elif spec.kind == "longitudinal":
        if spec.l > sub.H:
            violations.append(f"length l={spec.l} exceeds height H={sub.H}")
        theta = spec.theta if spec.theta is not None else derived_interval("longitudinal", spec.N)
        if theta <= 0 or spec.N * theta >= 360.0:
            violations.append(f"N={spec.N} incisions at interval theta={theta} do not fit")
    else:
        g = math.radians(spec.gamma)
        if spec.l * math.sin(g) > sub.H + 1e-9:
            violations.append(f"axial extent l*sin(gamma)={spec.l * math.sin(g):.3f} exceeds H={sub.H}")
        if spec.l * math.cos(g) > circ + 1e-9:
            violations.append(
                f"circumferential extent l*cos(gamma)={spec.l * math.cos(g):.3f} exceeds {circ:.3f}")
    if not violations:
        segs = _segments(spec, sub)
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                if _segments_intersect(segs[i], segs[j], circ):
                    violations.append(f"incisions {i} and {j} intersect")
    return violations


def layout(spec: PatternSpec, sub: Substrate) -> list[IncisionSurface]:
    """Place the incision surfaces on the substrate; raises on infeasibility."""
    violations = validate(spec, sub)
    if violations:
        raise FeasibilityError("; ".join(violations))
    return _segments(spec, sub)


def mirror(spec: PatternSpec) -> PatternSpec:
    """Reflect the pattern across the plane of the cylinder axis and the
    incised azimuth.  Unilateral patterns are symmetric about that plane
    and map to themselves; diagonal patterns flip handedness."""
    if spec.kind == "diagonal":
        flipped = "right" if spec.handedness == "left" else "left"
        return replace(spec, handedness=flipped)
    return replace(spec)


# ---------------------------------------------------------------------------
# Developed-view segment intersection (with circumferential wrap)


def _segments_intersect(a: IncisionSurface, b: IncisionSurface, circ: float) -> bool:
    for shift in (-circ, 0.0, circ):
        p1 = (a.start[0] + shift, a.start[1])
        p2 = (a.end[0] + shift, a.end[1])
        if _seg_seg(p1, p2, b.start, b.end):
            return True
    return False


def _seg_seg(p1, p2, p3, p4) -> bool:
    d1 = _cross(p3, p4, p1)
    d2 = _cross(p3, p4, p2)
    d3 = _cross(p1, p2, p3)
    d4 = _cross(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
       ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    for d, p, a, b in ((d1, p1, p3, p4), (d2, p2, p3, p4), (d3, p3, p1, p2), (d4, p4, p1, p2)):
        if d == 0 and _on_segment(a, b, p):
            return True
    return False


def _cross(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, p) -> bool:
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and \
           min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


# ---------------------------------------------------------------------------
# Persistence and SVG export


def save_spec(spec: PatternSpec, sub: Substrate, path):
    doc = {
        "kind": spec.kind, "N": spec.N, "l": spec.l, "d": spec.d,
        "w": spec.w, "theta": spec.theta, "gamma": spec.gamma,
        "handedness": spec.handedness,
        "substrate": {"H": sub.H, "R": sub.R, "t": sub.t},
        "units": "mm-deg",
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_spec(path) -> tuple[PatternSpec, Substrate]:
    doc = json.loads(Path(path).read_text())
    sub = doc.get("substrate", {})
    spec = PatternSpec(kind=doc["kind"], N=int(doc["N"]), l=float(doc["l"]), d=float(doc["d"]),
                       w=doc.get("w"), theta=doc.get("theta"), gamma=doc.get("gamma"),
                       handedness=doc.get("handedness"))
    return spec, Substrate(H=float(sub.get("H", 80.0)), R=float(sub.get("R", 20.0)),
                           t=float(sub.get("t", 1.0)))


def save_substrate(sub: Substrate, path):
    Path(path).write_text(json.dumps({"H": sub.H, "R": sub.R, "t": sub.t}, indent=2) + "\n")


def developed_view_svg(spec: PatternSpec, sub: Substrate, path=None) -> str:
    """Render the developed view (substrate rectangle plus cut segments)."""
    circ = sub.circumference
    segs = layout(spec, sub)
    scale = 4.0
    pad = 20.0
    width = circ * scale + 2 * pad
    height = sub.H * scale + 2 * pad

    def x(s):
        return pad + (s % circ) * scale

    def y(z):
        return pad + (sub.H - z) * scale  # svg y grows downward

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">',
        f'<rect x="{pad}" y="{pad}" width="{circ * scale:.2f}" height="{sub.H * scale:.2f}" '
        'fill="none" stroke="black"/>',
    ]
    for seg in segs:
        # split at the wrap line so segments stay inside the rectangle
        for (s0, z0), (s1, z1) in _wrap_split(seg.start, seg.end, circ):
            lines.append(
                f'<line x1="{x(s0):.2f}" y1="{y(z0):.2f}" x2="{x(s1):.2f}" y2="{y(z1):.2f}" '
                'stroke="red" stroke-width="2"/>')
    interval = {
        "transverse": (spec.w if spec.w is not None else derived_interval("transverse", spec.N, sub), "w", "mm"),
        "longitudinal": (spec.theta if spec.theta is not None else derived_interval("longitudinal", spec.N), "theta", "deg"),
        "diagonal": (spec.theta if spec.theta is not None else derived_interval("diagonal", spec.N), "theta", "deg"),
    }[spec.kind]
    label = f"{spec.kind} N={spec.N} l={spec.l:g} d={spec.d:g} {interval[1]}={interval[0]:.1f} {interval[2]}"
    lines.append(f'<text x="{pad}" y="{pad - 6:.1f}" font-size="12">{label}</text>')
    lines.append("</svg>")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _wrap_split(p0, p1, circ):
    """Split a developed segment into pieces that do not cross the wrap line."""
    (s0, z0), (s1, z1) = p0, p1
    if s1 < s0:
        s0, z0, s1, z1 = s1, z1, s0, z0
    pieces = []
    k0 = math.floor(s0 / circ)
    k1 = math.floor((s1 - 1e-12) / circ) if s1 > s0 else k0
    if k0 == k1:
        return [((s0, z0), (s1, z1))]
    cur_s, cur_z = s0, z0
    for k in range(k0, k1):
        sb = (k + 1) * circ
        t = (sb - s0) / (s1 - s0)
        zb = z0 + t * (z1 - z0)
        pieces.append(((cur_s, cur_z), (sb - 1e-9, zb)))
        cur_s, cur_z = sb, zb
    pieces.append(((cur_s, cur_z), (s1, z1)))
    return pieces
