"""Hyperelastic constitutive models for the actuator constituents.

Two models are provided:

* a compressible Ogden-type foam model (sum of principal-stretch power
  terms plus a volumetric term) for the open-cell polyurethane core, and
* an incompressible Yeoh model for the silicone skin.

All stresses are principal *nominal* (first Piola) stresses conjugate to
the principal stretches, i.e. force per undeformed area, which is what a
uniaxial test machine reports.

Unit system: mm - tonne - s - MPa.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "MaterialDomainError",
    "UnsupportedConfigurationError",
    "HyperfoamModel",
    "YeohModel",
    "PrincipalState",
    "hyperfoam_energy",
    "hyperfoam_principal_stress",
    "hyperfoam_tangent",
    "hyperfoam_uniaxial_nominal",
    "hyperfoam_uniaxial_slope",
    "yeoh_uniaxial_nominal",
    "load_model",
    "save_model",
]

# Stretches below this are outside the admissible domain; in simulation,
# densification should be resisted by contact, not by energy blow-up.
LAMBDA_MIN = 1e-3

# |beta| below this selects the analytic log-limit volumetric branch.
BETA_ZERO_TOL = 1e-9

# Default densities (tonne/mm^3): 40 kg/m^3 PU foam, Ecoflex 00-30 skin.
FOAM_DENSITY = 4.0e-11
SKIN_DENSITY = 1.07e-9


class MaterialDomainError(ValueError):
    """A stretch state outside the admissible domain was supplied."""


class UnsupportedConfigurationError(ValueError):
    """The model configuration is outside what this operation supports."""


@dataclass(frozen=True)
class HyperfoamModel:
    """Compressible foam model of order ``L``.

    ``coefficients`` is a tuple of ``(mu_i, alpha_i, beta_i)`` triples;
    ``mu_i`` in MPa, the exponents dimensionless.  ``beta_i`` relates to
    the per-term Poisson ratio by ``beta = nu / (1 - 2 nu)`` and must be
    non-negative.  The initial shear modulus is ``sum(mu_i)`` and must be
    positive.  Per-term sign combinations are not restricted beyond
    ``mu_i != 0`` and ``alpha_i != 0``: foam fits routinely use a
    ``mu > 0, alpha < 0`` term for densification (see
    :func:`foamact.fitting.stability_check` for the advisory per-term
    screen).
    """

    coefficients: tuple[tuple[float, float, float], ...]
    density: float = FOAM_DENSITY

    def __post_init__(self):
        if len(self.coefficients) < 1:
            raise ValueError("model order must be >= 1")
        for i, triple in enumerate(self.coefficients):
            if len(triple) != 3:
                raise ValueError(f"coefficient {i} is not a (mu, alpha, beta) triple")
            mu, alpha, beta = triple
            if mu == 0.0:
                raise ValueError(f"mu_{i} must be nonzero")
            if alpha == 0.0:
                raise ValueError(f"alpha_{i} must be nonzero")
            if beta < 0.0:
                raise ValueError(f"beta_{i} must be >= 0 (got {beta})")
        if self.mu_total <= 0.0:
            raise ValueError("sum of mu_i must be positive (initial shear modulus)")
        if self.density <= 0.0:
            raise ValueError("density must be positive")

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def mu_total(self) -> float:
        return float(sum(c[0] for c in self.coefficients))

    @property
    def initial_youngs_modulus(self) -> float:
        """Small-strain Young's modulus for the nu = 0 (beta = 0) case."""
        return 2.0 * self.mu_total

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = np.asarray(self.coefficients, dtype=float)
        return c[:, 0].copy(), c[:, 1].copy(), c[:, 2].copy()


@dataclass(frozen=True)
class YeohModel:
    """Incompressible Yeoh model (J == 1) for the silicone skin."""

    c10: float = 0.11
    c20: float = 0.02
    density: float = SKIN_DENSITY

    def __post_init__(self):
        if self.c10 <= 0.0:
            raise ValueError("C10 must be positive")
        if self.density <= 0.0:
            raise ValueError("density must be positive")

    @property
    def initial_youngs_modulus(self) -> float:
        return 6.0 * self.c10


@dataclass(frozen=True)
class PrincipalState:
    """Principal stretches of a deformation state, each > 0."""

    stretches: tuple[float, float, float]

    def __post_init__(self):
        for lam in self.stretches:
            if not np.isfinite(lam) or lam < LAMBDA_MIN:
                raise MaterialDomainError(
                    f"principal stretch {lam} below admissible minimum {LAMBDA_MIN}"
                )

    @property
    def J(self) -> float:
        l1, l2, l3 = self.stretches
        return l1 * l2 * l3


def _check_stretches(lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam < LAMBDA_MIN):
        raise MaterialDomainError(f"stretch below admissible minimum {LAMBDA_MIN}")
    return lam


def _state_array(state) -> np.ndarray:
    if isinstance(state, PrincipalState):
        return np.asarray(state.stretches, dtype=float)
    return _check_stretches(state)


def hyperfoam_energy(model: HyperfoamModel, state) -> float:
    """Strain energy density (MPa) at the given principal state.

    Each term contributes
    ``(2 mu / alpha^2) [l1^a + l2^a + l3^a - 3 + (1/b)(J^(-a b) - 1)]``
    with the volumetric part evaluated in its analytic limit
    ``-alpha ln J`` when ``beta`` vanishes.
    """
    lam = _state_array(state)
    J = float(np.prod(lam))
    lnJ = np.log(J)
    u = 0.0
    for mu, alpha, beta in model.coefficients:
        dev = float(np.sum(lam ** alpha)) - 3.0
        if abs(beta) < BETA_ZERO_TOL:
            vol = -alpha * lnJ
        else:
            vol = (J ** (-alpha * beta) - 1.0) / beta
        u += 2.0 * mu / alpha ** 2 * (dev + vol)
    return u


def hyperfoam_principal_stress(model: HyperfoamModel, state) -> np.ndarray:
    """Principal nominal stresses P_j = dU/dlambda_j (MPa, 3-vector)."""
    lam = _state_array(state)
    J = float(np.prod(lam))
    p = np.zeros(3)
    for mu, alpha, beta in model.coefficients:
        if abs(beta) < BETA_ZERO_TOL:
            jterm = 1.0
        else:
            jterm = J ** (-alpha * beta)
        p += 2.0 * mu / alpha * (lam ** (alpha - 1.0) - jterm / lam)
    return p


def hyperfoam_tangent(model: HyperfoamModel, state) -> np.ndarray:
    """3x3 symmetric tangent dP_j/dlambda_k of the principal stresses."""
    lam = _state_array(state)
    J = float(np.prod(lam))
    c = np.zeros((3, 3))
    inv = 1.0 / lam
    for mu, alpha, beta in model.coefficients:
        if abs(beta) < BETA_ZERO_TOL:
            jterm = 1.0
        else:
            jterm = J ** (-alpha * beta)
        diag = (alpha - 1.0) * lam ** (alpha - 2.0) + jterm * inv ** 2
        c += 2.0 * mu / alpha * np.diag(diag)
        if abs(beta) >= BETA_ZERO_TOL:
            c += 2.0 * mu * beta * jterm * np.outer(inv, inv)
    return c


def _require_zero_beta(model: HyperfoamModel):
    for i, (_, _, beta) in enumerate(model.coefficients):
        if abs(beta) >= BETA_ZERO_TOL:
            raise UnsupportedConfigurationError(
                f"beta_{i} = {beta} != 0: uniaxial response then requires a "
                "lateral root solve, which is not supported"
            )


def hyperfoam_uniaxial_nominal(model: HyperfoamModel, lam):
    """Uniaxial nominal stress P(lambda) for the nu = 0 (beta = 0) case.

    With zero Poisson ratio the zero-lateral-stress condition keeps the
    lateral stretches at 1, so the axial response is simply
    ``sum_i (2 mu_i / alpha_i) (lam^alpha_i - 1) / lam``.  Accepts scalar
    or array ``lam``.
    """
    _require_zero_beta(model)
    scalar = np.isscalar(lam)
    lam = _check_stretches(np.atleast_1d(lam))
    p = np.zeros_like(lam)
    for mu, alpha, _ in model.coefficients:
        p += 2.0 * mu / alpha * (lam ** alpha - 1.0) / lam
    return float(p[0]) if scalar else p


def hyperfoam_uniaxial_slope(model: HyperfoamModel, lam):
    """dP/dlambda of the uniaxial nominal response (beta = 0 case)."""
    _require_zero_beta(model)
    scalar = np.isscalar(lam)
    lam = _check_stretches(np.atleast_1d(lam))
    s = np.zeros_like(lam)
    for mu, alpha, _ in model.coefficients:
        s += 2.0 * mu / alpha * ((alpha - 1.0) * lam ** (alpha - 2.0) + lam ** -2.0)
    return float(s[0]) if scalar else s


def yeoh_uniaxial_nominal(model: YeohModel, lam):
    """Uniaxial nominal stress of the incompressible Yeoh model.

    Incompressibility forces the lateral stretches to ``lam^(-1/2)``, so
    ``I1 = lam^2 + 2/lam`` and
    ``P = 2 (lam - lam^-2) (C10 + 2 C20 (I1 - 3))``.
    """
    scalar = np.isscalar(lam)
    lam = _check_stretches(np.atleast_1d(lam))
    i1 = lam ** 2 + 2.0 / lam
    p = 2.0 * (lam - lam ** -2.0) * (model.c10 + 2.0 * model.c20 * (i1 - 3.0))
    return float(p[0]) if scalar else p


# ---------------------------------------------------------------------------
# Model files: JSON documents with family/order/coefficients/density/units.

_UNITS = "mm-tonne-s-MPa"


def save_model(model, path):
    """Write a model to a JSON document."""
    path = Path(path)
    if isinstance(model, HyperfoamModel):
        doc = {
            "family": "hyperfoam",
            "order": model.order,
            "coefficients": [list(c) for c in model.coefficients],
            "density": model.density,
            "units": _UNITS,
        }
    elif isinstance(model, YeohModel):
        doc = {
            "family": "yeoh",
            "coefficients": {"C10": model.c10, "C20": model.c20},
            "density": model.density,
            "units": _UNITS,
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    path.write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path):
    """Read a model file written by :func:`save_model`."""
    doc = json.loads(Path(path).read_text())
    units = doc.get("units", _UNITS)
    if units != _UNITS:
        raise ValueError(f"unsupported unit system {units!r} (expected {_UNITS!r})")
    family = doc.get("family")
    if family == "hyperfoam":
        coeffs = tuple(tuple(float(x) for x in c) for c in doc["coefficients"])
        order = doc.get("order", len(coeffs))
        if order != len(coeffs):
            raise ValueError(
                f"order {order} does not match {len(coeffs)} coefficient triples"
            )
        return HyperfoamModel(coefficients=coeffs, density=float(doc["density"]))
    if family == "yeoh":
        c = doc["coefficients"]
        return YeohModel(
            c10=float(c["C10"]), c20=float(c["C20"]), density=float(doc["density"])
        )
    raise ValueError(f"unknown material family {family!r}")
