"""Draw the three incision-pattern families on the developed view.

The cylinder's lateral surface is unrolled into a 2*pi*R x H rectangle and
each pattern is drawn as its incision centerlines: transverse arrays bend,
longitudinal arrays tilt, diagonal (helical) arrays twist.  The interval
between incisions is derived from the array count N alone.  SVGs land in
./out/.
"""

from pathlib import Path

from foamact.pattern import (
    PatternSpec,
    Substrate,
    derived_interval,
    developed_view_svg,
    layout,
    validate,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

sub = Substrate()  # H=80, R=20, t=1 mm
print(f"substrate: H={sub.H} R={sub.R} t={sub.t} mm "
      f"(developed view {sub.circumference:.1f} x {sub.H} mm)")

specs = [
    PatternSpec(kind="transverse", N=2, l=62.8, d=20.0),
    PatternSpec(kind="longitudinal", N=3, l=60.0, d=10.0),
    PatternSpec(kind="diagonal", N=4, l=74.5, d=10.0, gamma=32.5,
                handedness="left"),
]

for spec in specs:
    problems = validate(spec, sub)
    assert not problems, problems
    segs = layout(spec, sub)
    if spec.kind == "transverse":
        iv = f"w = {derived_interval(spec.kind, spec.N, sub):.1f} mm"
    else:
        iv = f"theta = {derived_interval(spec.kind, spec.N):.1f} deg"
    print(f"{spec.kind:>12} N={spec.N}: {len(segs)} cut(s), interval {iv}")
    path = OUT / f"pattern_{spec.kind}_N{spec.N}.svg"
    path.write_text(developed_view_svg(spec, sub))
    print(f"             -> {path}")

# infeasible requests are refused with a reason, not silently clipped
bad = PatternSpec(kind="transverse", N=1, l=62.8, d=25.0)
print("\ninfeasible example:", "; ".join(validate(bad, sub)))
