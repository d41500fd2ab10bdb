"""Identification of foam model coefficients from uniaxial compression data.

The forward model is the zero-Poisson-ratio uniaxial nominal stress of
:class:`foamact.material.HyperfoamModel`; coefficients are found by damped
nonlinear least squares (trust-region Levenberg-Marquardt style, analytic
Jacobian) with a small multi-start list, since foam fits are multimodal.

Compression is recorded as negative strain / negative stress (MPa).
"""

from __future__ import annotations

import csv as _csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from .material import HyperfoamModel, hyperfoam_uniaxial_nominal, hyperfoam_uniaxial_slope

__all__ = [
    "DataValidationError",
    "StressStrainCurve",
    "FitResult",
    "StabilityReport",
    "fit_hyperfoam",
    "residuals",
    "rms_relative_error",
    "stability_check",
    "synthetic_foam_curve",
    "load_curve_csv",
    "save_curve_csv",
    "write_fit_report",
]

# Denominator floor for relative errors (MPa), so near-zero samples do not
# dominate the relative RMS.
EPS_FLOOR = 1e-4


class DataValidationError(ValueError):
    """The supplied stress-strain data cannot be fit."""


@dataclass(frozen=True)
class StressStrainCurve:
    """Uniaxial nominal stress-strain samples, ordered by strain.

    ``strain``/``stress`` are parallel arrays; compression is negative.
    ``metadata`` may carry specimen dimensions (mm) and density (kg/m^3).
    """

    strain: np.ndarray
    stress: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        strain = np.asarray(self.strain, dtype=float)
        stress = np.asarray(self.stress, dtype=float)
        if strain.shape != stress.shape or strain.ndim != 1:
            raise DataValidationError("strain and stress must be 1-D arrays of equal length")
        if not np.all(np.isfinite(strain)) or not np.all(np.isfinite(stress)):
            raise DataValidationError("non-finite sample present")
        d = np.diff(strain)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise DataValidationError("strains must be strictly monotone")
        if not np.any(np.isclose(strain, 0.0, atol=1e-12)):
            # prepend the reference point, keeping strain monotone
            if strain[0] > 0 or (d[0] < 0 and strain[0] < 0):
                raise DataValidationError("data must include or allow prepending (0, 0)")
            strain = np.concatenate([[0.0], strain]) if d[0] < 0 else np.concatenate([strain, [0.0]])
            stress = np.concatenate([[0.0], stress]) if d[0] < 0 else np.concatenate([stress, [0.0]])
            d = np.diff(strain)
        if strain.size < 8:
            raise DataValidationError(f"need at least 8 samples, got {strain.size}")
        if np.all(stress == 0.0):
            raise DataValidationError("all-zero stress data")
        if np.any(1.0 + strain <= 0.0):
            raise DataValidationError("strain <= -1 is outside the admissible stretch domain")
        # normalize to increasing strain order
        if d[0] < 0:
            strain = strain[::-1]
            stress = stress[::-1]
        object.__setattr__(self, "strain", strain)
        object.__setattr__(self, "stress", stress)

    @property
    def stretch(self) -> np.ndarray:
        return 1.0 + self.strain

    def scaled(self, factor: float) -> "StressStrainCurve":
        return StressStrainCurve(self.strain.copy(), self.stress * factor, dict(self.metadata))


@dataclass
class StabilityReport:
    """Coefficient screen for a foam model.

    ``violating_indices`` lists terms with ``mu_i * alpha_i <= 0`` (such
    terms soften or blow up in tension when acting alone); ``sum_mu_ok``
    checks the positive initial shear modulus.  ``passed`` requires both.
    """

    sum_mu_ok: bool
    violating_indices: list
    passed: bool


def stability_check(model: HyperfoamModel) -> StabilityReport:
    violating = [i for i, (mu, alpha, _) in enumerate(model.coefficients) if mu * alpha <= 0.0]
    sum_mu_ok = model.mu_total > 0.0
    return StabilityReport(sum_mu_ok=sum_mu_ok, violating_indices=violating,
                           passed=sum_mu_ok and not violating)


@dataclass
class FitResult:
    model: HyperfoamModel
    rms_relative_error: float
    residuals: np.ndarray
    converged: bool
    iterations: int
    cost: float = 0.0


def rms_relative_error(predicted: np.ndarray, observed: np.ndarray) -> float:
    denom = np.maximum(np.abs(observed), EPS_FLOOR)
    return float(np.sqrt(np.mean(((predicted - observed) / denom) ** 2)))


def residuals(model: HyperfoamModel, data: StressStrainCurve):
    """Per-sample residual vector (model minus data, MPa) and relative RMS."""
    pred = hyperfoam_uniaxial_nominal(model, data.stretch)
    res = pred - data.stress
    return res, rms_relative_error(pred, data.stress)


# ---------------------------------------------------------------------------
# Region weighting: the three characteristic foam regions are told apart by
# the local slope relative to the initial modulus.


def classify_regions(data: StressStrainCurve) -> np.ndarray:
    """Label each sample 0 = elastic, 1 = plateau, 2 = densification."""
    s = np.abs(data.strain)
    slope = np.gradient(data.stress, data.strain)
    e0 = _initial_slope(data)
    labels = np.ones(s.size, dtype=int)
    labels[slope > 0.5 * e0] = 0
    # densification: past the plateau (compressive strain beyond the last
    # elastic sample) with the slope rising again
    in_comp = s > 0.25
    labels[(slope > 0.75 * e0) & in_comp] = 2
    return labels


def _initial_slope(data: StressStrainCurve) -> float:
    s = np.abs(data.strain)
    mask = (s > 0) & (s <= 0.1)
    if np.count_nonzero(mask) < 2:
        mask = s > 0
    num = np.sum(data.stress[mask] * data.strain[mask])
    den = np.sum(data.strain[mask] ** 2)
    slope = num / den if den > 0 else 0.0
    return abs(float(slope))


# ---------------------------------------------------------------------------
# Fitting


def _predict(params, signs, lam):
    n = len(signs)
    mu = signs * np.exp(params[:n])
    alpha = params[n:]
    p = np.zeros_like(lam)
    for i in range(n):
        p += 2.0 * mu[i] / alpha[i] * (lam ** alpha[i] - 1.0) / lam
    return p, mu, alpha


def _jacobian(params, signs, lam, weights):
    n = len(signs)
    mu = signs * np.exp(params[:n])
    alpha = params[n:]
    jac = np.empty((lam.size, 2 * n))
    loglam = np.log(lam)
    for i in range(n):
        a = alpha[i]
        la = lam ** a
        dp_dmu = 2.0 / a * (la - 1.0) / lam
        jac[:, i] = weights * mu[i] * dp_dmu
        jac[:, n + i] = weights * 2.0 * mu[i] / (a ** 2 * lam) * (a * la * loglam - la + 1.0)
    return jac


def _starts(order: int, slope0: float):
    """Multi-start list: (signs, mu, alpha) per candidate."""
    mu1 = max(slope0 / 2.0, 1e-6)
    starts = []
    alphas1 = (2.0, 5.0, 10.0)
    if order == 1:
        for a1 in alphas1:
            starts.append((np.array([1.0]), np.array([mu1]), np.array([a1])))
        return starts
    # Second term seeds: densifying (mu > 0, alpha < 0) and the softening
    # variant (mu < 0, alpha < 0), to cover both basins.
    seconds = [(1.0, mu1 / 200.0, -2.0), (1.0, mu1 / 200.0, -5.0),
               (-1.0, mu1 / 20.0, -2.0), (-1.0, mu1 / 20.0, -5.0),
               (1.0, mu1 / 10.0, 4.0)]
    for a1 in alphas1:
        for s2, m2, a2 in seconds:
            if order == 2:
                starts.append((np.array([1.0, s2]), np.array([mu1, m2]), np.array([a1, a2])))
            else:
                starts.append((np.array([1.0, s2, 1.0]),
                               np.array([mu1, m2, mu1 / 10.0]),
                               np.array([a1, a2, 2.0])))
    return starts


def _admissible(model: HyperfoamModel, lam: np.ndarray) -> bool:
    """Positive initial modulus and monotone response over the data range."""
    if model.mu_total <= 0.0:
        return False
    grid = np.linspace(lam.min(), lam.max(), 64)
    return bool(np.all(hyperfoam_uniaxial_slope(model, grid) > 0.0))


def fit_hyperfoam(data: StressStrainCurve, order: int = 2,
                  region_weights: dict | None = None,
                  max_iterations: int = 200,
                  ftol: float = 1e-10) -> FitResult:
    """Fit a foam model of the given order to a compression curve.

    Minimizes ``sum w_k (P_model(lam_k) - P_k)^2`` with
    ``lam_k = 1 + strain_k`` over every start in the multi-start list and
    returns the best admissible candidate.  ``region_weights`` optionally
    maps ``{"elastic", "plateau", "densification"}`` to weight factors.
    The result is flagged non-converged (never raises) when no start
    produces an admissible optimum.
    """
    if order not in (1, 2, 3):
        raise DataValidationError(f"order must be 1, 2 or 3, got {order}")
    lam = data.stretch
    mask = np.abs(data.strain) > 0  # the (0,0) sample carries no information
    lam_fit = lam[mask]
    stress_fit = data.stress[mask]

    weights = np.ones_like(lam_fit)
    if region_weights:
        labels = classify_regions(data)[mask]
        names = ("elastic", "plateau", "densification")
        for j, name in enumerate(names):
            weights[labels == j] = region_weights.get(name, 1.0)

    slope0 = _initial_slope(data)
    best = None
    total_nfev = 0
    for signs, mu0, alpha0 in _starts(order, slope0):
        x0 = np.concatenate([np.log(np.abs(mu0)), alpha0])
        n = len(signs)
        lo = np.full(2 * n, -np.inf)
        hi = np.full(2 * n, np.inf)
        for i, a in enumerate(alpha0):  # keep each alpha's sign fixed per start
            if a > 0:
                lo[n + i], hi[n + i] = 0.2, 60.0
            else:
                lo[n + i], hi[n + i] = -60.0, -0.2

        def fun(x):
            p, _, _ = _predict(x, signs, lam_fit)
            return weights * (p - stress_fit)

        def jac(x):
            return _jacobian(x, signs, lam_fit, weights)

        try:
            sol = least_squares(fun, x0, jac=jac, bounds=(lo, hi), method="trf",
                                ftol=ftol, xtol=1e-12, gtol=1e-12,
                                max_nfev=max_iterations * (2 * n + 1))
        except (ValueError, FloatingPointError):
            continue
        total_nfev += sol.nfev
        _, mu, alpha = _predict(sol.x, signs, lam_fit)
        try:
            model = HyperfoamModel(tuple((float(m), float(a), 0.0) for m, a in zip(mu, alpha)),
                                   density=float(data.metadata.get("density_kg_m3", 40.0)) * 1e-12)
        except ValueError:
            continue
        ok = _admissible(model, lam_fit)
        cand = (not ok, sol.cost, model, sol)
        if best is None or cand[:2] < best[:2]:
            best = cand

    if best is None:
        raise DataValidationError("no fit start produced an evaluable model")
    inadmissible, cost, model, sol = best
    res, rms = residuals(model, data)
    converged = (not inadmissible) and sol.status > 0
    return FitResult(model=model, rms_relative_error=rms, residuals=res,
                     converged=converged, iterations=total_nfev, cost=float(cost))


# ---------------------------------------------------------------------------
# Synthetic reference data: a phenomenological generator for a 40 kg/m^3
# open-cell PU foam compression curve with the three characteristic regions.


def synthetic_foam_curve(n_samples: int = 40, strain_min: float = -0.68,
                         initial_modulus: float = 0.06,
                         plateau_stress: float = 0.006,
                         densification_strain: float = 0.6,
                         densification_power: float = 4.0,
                         noise: float = 0.0, seed: int = 0) -> StressStrainCurve:
    """Generate a PU-foam-like compression curve.

    The magnitude follows
    ``plateau * (1 - exp(-E0 |e| / plateau)) * (1 + (|e| / e_d)^q)``:
    an initial linear region of modulus ``E0``, an exponential roll-over
    into a stress plateau, and a power-law densification upturn around
    ``e_d``.  ``noise`` adds zero-mean Gaussian noise relative to the
    local stress magnitude (seeded, reproducible).
    """
    strain = np.linspace(strain_min, 0.0, n_samples)
    s = np.abs(strain)
    mag = plateau_stress * (1.0 - np.exp(-initial_modulus * s / plateau_stress))
    mag *= 1.0 + (s / densification_strain) ** densification_power
    stress = -mag
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        stress = stress * (1.0 + noise * rng.standard_normal(stress.shape))
        stress[strain == 0.0] = 0.0
    return StressStrainCurve(strain, stress, {
        "generator": "synthetic_foam_curve",
        "density_kg_m3": 40.0,
        "specimen_mm": [40.0, 40.0],
    })


# ---------------------------------------------------------------------------
# CSV ingestion / fit report


def load_curve_csv(path) -> StressStrainCurve:
    """Read a two-column (strain, stress_MPa) CSV; '#' lines are comments."""
    path = Path(path)
    strains, stresses = [], []
    with path.open(newline="") as fh:
        header_seen = False
        for lineno, row in enumerate(_csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if not header_seen:
                if len(row) < 2 or _is_number(row[0]):
                    raise DataValidationError(
                        f"{path.name}:{lineno}: expected a header row like 'strain,stress_MPa'")
                header_seen = True
                continue
            if len(row) < 2 or not (_is_number(row[0]) and _is_number(row[1])):
                raise DataValidationError(f"{path.name}:{lineno}: malformed sample row {row!r}")
            strains.append(float(row[0]))
            stresses.append(float(row[1]))
        if not header_seen:
            raise DataValidationError(f"{path.name}:1: file is empty or has no header")
    return StressStrainCurve(np.array(strains), np.array(stresses), {"source": str(path)})


def save_curve_csv(curve: StressStrainCurve, path):
    path = Path(path)
    lines = ["strain,stress_MPa"]
    for e, p in zip(curve.strain, curve.stress):
        lines.append(f"{e:.10g},{p:.10g}")
    path.write_text("\n".join(lines) + "\n")


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def write_fit_report(result: FitResult, path):
    """Emit a JSON-shaped fit report."""
    doc = {
        "converged": bool(result.converged),
        "iterations": int(result.iterations),
        "rms_relative_error": result.rms_relative_error,
        "cost": result.cost,
        "model": {
            "family": "hyperfoam",
            "order": result.model.order,
            "coefficients": [list(c) for c in result.model.coefficients],
            "density": result.model.density,
        },
        "residuals_MPa": [float(r) for r in result.residuals],
        "stability": {
            "passed": stability_check(result.model).passed,
            "violating_indices": stability_check(result.model).violating_indices,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
