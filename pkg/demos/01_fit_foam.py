"""Fit a compressible hyperfoam model to a foam compression curve.

Loads the packaged 40 kg/m^3 polyurethane-foam compression dataset,
fits an order-2 hyperfoam model to it, and prints the three stress
regions (linear / plateau / densification) alongside the fit quality.
Artifacts land in ./out/.
"""

from pathlib import Path

import numpy as np

from foamact.defaults import data_path
from foamact.fitting import classify_regions, fit_hyperfoam, load_curve_csv, write_fit_report
from foamact.material import hyperfoam_uniaxial_nominal, save_model

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

curve = load_curve_csv(data_path("pu40_compression.csv"))
regions = classify_regions(curve)
names = {0: "linear", 1: "plateau", 2: "densification"}
print(f"dataset: {curve.strain.size} samples, strain "
      f"{curve.strain.min():.2f}..{curve.strain.max():.2f}")
for code, name in names.items():
    sel = regions == code
    if sel.any():
        print(f"  {name:>14}: strain {curve.strain[sel].min():+.3f} to "
              f"{curve.strain[sel].max():+.3f}")

result = fit_hyperfoam(curve, order=2)
print(f"\nfit: order {result.model.order}, "
      f"RMS relative error {result.rms_relative_error:.2%}, "
      f"{'converged' if result.converged else 'NOT converged'}")
for i, (mu, alpha, beta) in enumerate(result.model.coefficients, 1):
    print(f"  mu_{i} = {mu:+.6f} MPa   alpha_{i} = {alpha:+.3f}   beta_{i} = {beta:.3f}")
print(f"  E0 = {result.model.initial_youngs_modulus * 1e3:.1f} kPa")

pred = hyperfoam_uniaxial_nominal(result.model, curve.stretch)
worst = np.argmax(np.abs(pred - curve.stress))
print(f"  worst pointwise miss at strain {curve.strain[worst]:+.3f}: "
      f"{pred[worst] * 1e3:+.2f} vs {curve.stress[worst] * 1e3:+.2f} kPa")

save_model(result.model, OUT / "foam_fit.json")
write_fit_report(result, OUT / "foam_fit.report.json")
print(f"\nwrote {OUT / 'foam_fit.json'} and its report")
