"""Command-line front end: fit, pattern, mesh, sim, sweep, nstudy, export.

One JSON project config describes the actuator (substrate, pattern,
materials, resolution, load, solver controls, sweep schedule); command-line
flags override individual entries.  Every artifact embeds the sha256 hash
of the effective config plus the tool version, so outputs are exactly
reproducible; wall-clock timestamps are confined to a ``.meta.json``
sidecar per command.

Exit codes: 0 success, 2 validation error, 3 non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .deck import export_deck
from .defaults import data_path, default_foam_model, default_skin_model
from .fitting import (
    DataValidationError,
    fit_hyperfoam,
    load_curve_csv,
    write_fit_report,
)
from .kinematics import (
    Actuator,
    TABLE2_REFERENCE,
    angles_of,
    n_sweep_study,
    sweep,
    write_sweep_csv,
)
from .material import load_model, save_model
from .mesh import MeshResolution, mesh_cylinder, quality_report, save_neutral
from .pattern import (
    FeasibilityError,
    PatternSpec,
    Substrate,
    developed_view_svg,
    layout,
    validate,
)
from .solver import (
    LoadCase,
    MaterialSet,
    NonConvergedError,
    SolverControls,
    SolverError,
    relax_to_equilibrium,
    write_snapshot,
    write_summary_csv,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGED = 3
EXIT_IO = 4

_CONFIG_SCHEMA = 1


class CliValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Config plumbing


def _default_config() -> dict:
    return {
        "schema": _CONFIG_SCHEMA,
        "substrate": {"H": 80.0, "R": 20.0, "t": 1.0},
        "pattern": None,
        "materials": {"foam": None, "skin": None, "include_skin": True},
        "resolution": None,
        "load": {"pressure_kpa": 80.0},
        "controls": {},
        "sweep": {"pressures_kpa": [16.0, 32.0, 48.0, 64.0, 80.0]},
    }


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def load_config(path=None, overrides: dict | None = None) -> dict:
    cfg = _default_config()
    if path is not None:
        doc = json.loads(Path(path).read_text())
        if not isinstance(doc, dict):
            raise CliValidationError(f"{path}: config must be a JSON object")
        if doc.get("schema", _CONFIG_SCHEMA) != _CONFIG_SCHEMA:
            raise CliValidationError(
                f"{path}: unrecognized config schema {doc.get('schema')!r}")
        cfg = _merge(cfg, doc)
    if overrides:
        cfg = _merge(cfg, overrides)
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _substrate(cfg: dict) -> Substrate:
    s = cfg["substrate"]
    return Substrate(H=float(s["H"]), R=float(s["R"]), t=float(s["t"]))


def _pattern(cfg: dict) -> PatternSpec | None:
    p = cfg.get("pattern")
    if p is None:
        return None
    return PatternSpec(
        kind=p["kind"], N=int(p["N"]), l=float(p["l"]), d=float(p["d"]),
        w=None if p.get("w") is None else float(p["w"]),
        theta=None if p.get("theta") is None else float(p["theta"]),
        gamma=None if p.get("gamma") is None else float(p["gamma"]),
        handedness=p.get("handedness"),
    )


def _resolution(cfg: dict) -> MeshResolution | None:
    r = cfg.get("resolution")
    if r is None:
        return None
    return MeshResolution(m=int(r.get("m", 4)), nr=int(r.get("nr", 4)),
                          nz=int(r.get("nz", 20)),
                          skin_layers=int(r.get("skin_layers", 1)))


def _materials(cfg: dict, sub: Substrate) -> MaterialSet:
    m = cfg.get("materials") or {}
    foam = load_model(m["foam"]) if m.get("foam") else default_foam_model()
    include_skin = bool(m.get("include_skin", True)) and sub.t > 0.0
    skin = None
    if include_skin:
        skin = load_model(m["skin"]) if m.get("skin") else default_skin_model()
    return MaterialSet(foam=foam, skin=skin)


def _controls(cfg: dict) -> SolverControls:
    return SolverControls(**(cfg.get("controls") or {}))


def _actuator(cfg: dict) -> Actuator:
    sub = _substrate(cfg)
    if not bool((cfg.get("materials") or {}).get("include_skin", True)):
        sub = Substrate(H=sub.H, R=sub.R, t=0.0)
    spec = _pattern(cfg)
    if spec is not None:
        problems = validate(spec, sub)
        if problems:
            raise FeasibilityError("; ".join(problems))
    return Actuator(substrate=sub, pattern=spec, materials=_materials(cfg, sub),
                    resolution=_resolution(cfg))


def _stamp(path: Path, cfg: dict, command: str, extra: dict | None = None):
    """Timestamps live only here, never in the artifacts themselves."""
    meta = {
        "command": command,
        "tool_version": __version__,
        "config_hash": config_hash(cfg),
        "written_unix_time": time.time(),
    }
    if extra:
        meta.update(extra)
    side = path.with_suffix(path.suffix + ".meta.json")
    side.write_text(json.dumps(meta, indent=2) + "\n")


def _tagline(cfg: dict) -> str:
    return f"foamact {__version__} config {config_hash(cfg)}"


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_fit(args) -> int:
    cfg = load_config(args.config)
    curve = load_curve_csv(args.data)
    result = fit_hyperfoam(curve, order=args.order)
    out = Path(args.out)
    save_model(result.model, out)
    doc = json.loads(out.read_text())
    doc["config_hash"] = config_hash(cfg)
    doc["tool_version"] = __version__
    out.write_text(json.dumps(doc, indent=2) + "\n")
    report = Path(args.report) if args.report else out.with_suffix(".report.json")
    write_fit_report(result, report)
    _stamp(out, cfg, "fit", {"rms_relative_error": result.rms_relative_error})
    print(f"fit: order {result.model.order}, RMS {result.rms_relative_error:.3%}, "
          f"{'converged' if result.converged else 'NOT converged'} -> {out}")
    if not result.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK


def _require_pattern(cfg) -> PatternSpec:
    spec = _pattern(cfg)
    if spec is None:
        raise CliValidationError("this command needs a pattern in the config "
                                 "(or --kind/--n/... flags)")
    return spec


def _cmd_pattern(args) -> int:
    cfg = load_config(args.config, _pattern_overrides(args))
    sub = _substrate(cfg)
    spec = _require_pattern(cfg)
    problems = validate(spec, sub)
    if problems:
        raise FeasibilityError("; ".join(problems))
    svg = developed_view_svg(spec, sub)
    svg = svg.replace("<svg ", f"<!-- {_tagline(cfg)} -->\n<svg ", 1)
    out = Path(args.out)
    out.write_text(svg)
    _stamp(out, cfg, "pattern", {"segments": len(layout(spec, sub))})
    print(f"pattern: {spec.kind} N={spec.N} ({len(layout(spec, sub))} segments) -> {out}")
    return EXIT_OK


def _cmd_mesh(args) -> int:
    cfg = load_config(args.config, _pattern_overrides(args))
    act = _actuator(cfg)
    mesh = act.build_mesh()
    out = Path(args.out)
    save_neutral(mesh, out)
    with out.open("a") as fh:
        fh.write(f"# {_tagline(cfg)}\n")
    report = quality_report(mesh)
    report["config_hash"] = config_hash(cfg)
    report["tool_version"] = __version__
    qpath = out.with_suffix(".quality.json")
    qpath.write_text(json.dumps(report, indent=2, default=float) + "\n")
    _stamp(out, cfg, "mesh", {"n_nodes": mesh.n_nodes, "n_elems": mesh.n_elems})
    print(f"mesh: {mesh.n_nodes} nodes, {mesh.n_elems} elements, "
          f"{len(mesh.seams)} seams -> {out}")
    return EXIT_OK


def _cmd_sim(args) -> int:
    overrides = _pattern_overrides(args)
    if args.pressure is not None:
        overrides["load"] = {"pressure_kpa": float(args.pressure)}
    cfg = load_config(args.config, overrides)
    act = _actuator(cfg)
    mesh = act.build_mesh()
    load = LoadCase(pressure_kpa=float(cfg["load"]["pressure_kpa"]))
    result = relax_to_equilibrium(mesh, act.materials, load, _controls(cfg))
    pose = angles_of(result, act.substrate)

    prefix = Path(args.out)
    summary = prefix.with_suffix(".summary.csv")
    write_summary_csv(result, summary, header_comment=_tagline(cfg))
    write_snapshot(result, prefix.with_suffix(".snapshot.txt"))
    diag = dict(result.diagnostics)
    diag.update({
        "bend_deg": pose.bend_deg, "tilt_deg": pose.tilt_deg,
        "twist_deg": pose.twist_deg, "contraction_mm": pose.contraction_mm,
        "base_force_N": [float(x) for x in result.base_force],
        "base_moment_Nmm": [float(x) for x in result.base_moment],
        "config_hash": config_hash(cfg), "tool_version": __version__,
    })
    dpath = prefix.with_suffix(".diagnostics.json")
    dpath.write_text(json.dumps(diag, indent=2, default=float) + "\n")
    _stamp(summary, cfg, "sim")
    print(f"sim: p=-{load.pressure_kpa:g} kPa  bend {pose.bend_deg:.2f} deg  "
          f"tilt {pose.tilt_deg:.2f} deg  twist {pose.twist_deg:.2f} deg  "
          f"contraction {pose.contraction_mm:.2f} mm  "
          f"{'converged' if result.converged else 'NOT converged'}")
    if not result.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_sweep(args) -> int:
    overrides = _pattern_overrides(args)
    if args.pressures:
        overrides["sweep"] = {
            "pressures_kpa": [float(t) for t in args.pressures.split(",")]}
    cfg = load_config(args.config, overrides)
    act = _actuator(cfg)
    pressures = cfg["sweep"]["pressures_kpa"]
    result = sweep(act, pressures, _controls(cfg))

    prefix = Path(args.out)
    csv_path = prefix.with_suffix(".sweep.csv")
    write_sweep_csv(result, csv_path)
    with csv_path.open("r+") as fh:
        body = fh.read()
        fh.seek(0)
        fh.write(f"# {_tagline(cfg)}\n" + body)
    svg_path = prefix.with_suffix(".sweep.svg")
    kind = act.pattern.kind if act.pattern else "transverse"
    svg_path.write_text(_sweep_svg(result, kind, _tagline(cfg)))
    _stamp(csv_path, cfg, "sweep")
    angles = result.characteristic(kind)
    print("sweep:", ", ".join(
        f"{p:g} kPa -> {a:.2f} deg{'' if c else ' (not converged)'}"
        for p, a, c in zip(result.pressures_kpa, angles, result.converged)))
    if not all(result.converged):
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_nstudy(args) -> int:
    cfg = load_config(args.config)
    sub = _substrate(cfg)
    n_values = [int(t) for t in args.n.split(",")]
    mats = _materials(cfg, sub)
    rows = n_sweep_study(args.kind, n_values, mats,
                         pressure_kpa=float(args.pressure), sub=sub,
                         resolution=_resolution(cfg), controls=_controls(cfg))
    out = Path(args.out)
    lines = [f"# {_tagline(cfg)}",
             "kind,N,angle_deg,reference_deg,converged"]
    for r in rows:
        ref = "" if r["reference_deg"] is None else repr(float(r["reference_deg"]))
        lines.append(f"{r['kind']},{r['N']},{repr(float(r['angle_deg']))},"
                     f"{ref},{int(r['converged'])}")
    out.write_text("\n".join(lines) + "\n")
    _stamp(out, cfg, "nstudy")
    print(f"nstudy ({args.kind}, reference angles are report-only):")
    for r in rows:
        ref = ("-" if r["reference_deg"] is None
               else f"{r['reference_deg']:.1f}")
        print(f"  N={r['N']}: {r['angle_deg']:.2f} deg (published {ref})")
    if not all(r["converged"] for r in rows):
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_export(args) -> int:
    cfg = load_config(args.config, _pattern_overrides(args))
    act = _actuator(cfg)
    mesh = act.build_mesh()
    load = LoadCase(pressure_kpa=float(cfg["load"]["pressure_kpa"]))
    out = Path(args.out)
    text = export_deck(mesh, act.materials, load, out,
                       element_type=args.element_type)
    with out.open("a") as fh:
        fh.write(f"** {_tagline(cfg)}\n")
    _stamp(out, cfg, "export", {"n_lines": text.count(chr(10))})
    print(f"export: {mesh.n_elems} elements, {len(mesh.seams)} contact pairs -> {out}")
    return EXIT_OK


def _pattern_overrides(args) -> dict:
    out: dict = {}
    p = {}
    for name in ("kind", "n", "l", "d", "gamma", "handedness"):
        val = getattr(args, name, None)
        if val is not None:
            p["N" if name == "n" else name] = val
    if p:
        out["pattern"] = p
    return out


def _sweep_svg(result, kind: str, tagline: str) -> str:
    """Minimal line plot of characteristic angle vs pressure magnitude."""
    width, height, pad = 480.0, 360.0, 48.0
    ps = [abs(p) for p in result.pressures_kpa]
    angles = result.characteristic(kind)
    pmax = max(ps) if ps else 1.0
    amax = max(max(angles), 1e-9) if angles else 1.0

    def x(p):
        return pad + (p / pmax) * (width - 2 * pad)

    def y(a):
        return height - pad - (a / amax) * (height - 2 * pad)

    pts = " ".join(f"{x(p):.2f},{y(a):.2f}" for p, a in zip(ps, angles))
    label = {"transverse": "bend", "longitudinal": "tilt", "diagonal": "twist"}[kind]
    lines = [
        f"<!-- {tagline} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<line x1="{pad}" y1="{height-pad}" x2="{width-pad}" y2="{height-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height-pad}" stroke="black"/>',
        f'<text x="{width/2:.0f}" y="{height-12:.0f}" text-anchor="middle" font-size="13">vacuum pressure (kPa)</text>',
        f'<text x="14" y="{height/2:.0f}" font-size="13" transform="rotate(-90 14 {height/2:.0f})" text-anchor="middle">{label} angle (deg)</text>',
    ]
    if pts:
        lines.append(f'<polyline points="{pts}" fill="none" stroke="#1f5fa8" stroke-width="2"/>')
        for p, a in zip(ps, angles):
            lines.append(f'<circle cx="{x(p):.2f}" cy="{y(a):.2f}" r="3.5" fill="#1f5fa8"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foamact",
        description="design and simulation toolkit for incision-patterned "
                    "vacuum-driven foam actuators")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON project config", default=None)

    def add_pattern_flags(sp):
        sp.add_argument("--kind", choices=["transverse", "longitudinal", "diagonal"])
        sp.add_argument("--n", type=int, help="incision array count N")
        sp.add_argument("--l", type=float, help="incision length (mm)")
        sp.add_argument("--d", type=float, help="incision depth (mm)")
        sp.add_argument("--gamma", type=float, help="diagonal cut angle (deg)")
        sp.add_argument("--handedness", choices=["left", "right"])

    sp = subs.add_parser("fit", help="fit a hyperfoam model to a compression CSV")
    add_common(sp)
    sp.add_argument("data", help="strain,stress_MPa CSV file")
    sp.add_argument("--order", type=int, default=2)
    sp.add_argument("--out", default="foam_fit.json")
    sp.add_argument("--report", default=None)
    sp.set_defaults(func=_cmd_fit)

    sp = subs.add_parser("pattern", help="developed-view drawing of a pattern")
    add_common(sp)
    add_pattern_flags(sp)
    sp.add_argument("--out", default="pattern.svg")
    sp.set_defaults(func=_cmd_pattern)

    sp = subs.add_parser("mesh", help="generate the seamed hexahedral mesh")
    add_common(sp)
    add_pattern_flags(sp)
    sp.add_argument("--out", default="actuator.mesh")
    sp.set_defaults(func=_cmd_mesh)

    sp = subs.add_parser("sim", help="relax the actuator to equilibrium")
    add_common(sp)
    add_pattern_flags(sp)
    sp.add_argument("--pressure", type=float, help="vacuum magnitude (kPa)")
    sp.add_argument("--out", default="sim")
    sp.set_defaults(func=_cmd_sim)

    sp = subs.add_parser("sweep", help="pressure sweep with warm starts")
    add_common(sp)
    add_pattern_flags(sp)
    sp.add_argument("--pressures", help="comma-separated kPa magnitudes")
    sp.add_argument("--out", default="sweep")
    sp.set_defaults(func=_cmd_sweep)

    sp = subs.add_parser("nstudy", help="per-N study vs published angles (report-only)")
    add_common(sp)
    sp.add_argument("--kind", required=True,
                    choices=["transverse", "longitudinal", "diagonal"])
    sp.add_argument("--n", required=True, help="comma-separated N values")
    sp.add_argument("--pressure", type=float, default=80.0)
    sp.add_argument("--out", default="nstudy.csv")
    sp.set_defaults(func=_cmd_nstudy)

    sp = subs.add_parser("export", help="write a keyword FE input deck")
    add_common(sp)
    add_pattern_flags(sp)
    sp.add_argument("--element-type", default="C3D8", choices=["C3D8", "C3D8R"])
    sp.add_argument("--out", default="actuator.inp")
    sp.set_defaults(func=_cmd_export)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliValidationError, FeasibilityError, DataValidationError,
            ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NonConvergedError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
