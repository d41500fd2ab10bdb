"""Packaged default materials and datasets.

The skin coefficients come straight from the published Ecoflex 00-30 Yeoh
card (C10 = 0.11 MPa, C20 = 0.02 MPa).  The source publication does not
give its fitted foam coefficients, so the packaged foam model carries
representative coefficients for a 40 kg/m^3 open-cell polyurethane foam:
initial modulus ~0.06 MPa, a ~5-10 kPa stress plateau, and a densification
upturn that passes 80 kPa near 65% compression.  A matching synthetic
compression dataset (``pu40_compression.csv``, produced by
:func:`foamact.fitting.synthetic_foam_curve` at its default parameters)
ships alongside for exercising the fitting pipeline.
"""

from __future__ import annotations

from importlib import resources

from .fitting import StressStrainCurve, load_curve_csv
from .material import HyperfoamModel, YeohModel, load_model

__all__ = [
    "default_foam_model",
    "default_skin_model",
    "default_compression_curve",
    "data_path",
]


def data_path(name: str):
    """Filesystem path of a packaged data file."""
    return resources.files("foamact").joinpath("data", name)


def default_foam_model() -> HyperfoamModel:
    return load_model(data_path("foam_default.json"))


def default_skin_model() -> YeohModel:
    return load_model(data_path("skin_default.json"))


def default_compression_curve() -> StressStrainCurve:
    return load_curve_csv(data_path("pu40_compression.csv"))
