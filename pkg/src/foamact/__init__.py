"""Design and simulation toolkit for incision-patterned vacuum-driven
soft foam actuators.

Workflow: fit a compressible hyperfoam model to compression data
(:mod:`foamact.fitting`), lay out transverse / longitudinal / diagonal
incision patterns on the cylindrical substrate (:mod:`foamact.pattern`),
generate a seamed hexahedral mesh whose cut faces can separate and
re-contact (:mod:`foamact.mesh`), relax the sealed actuator under vacuum
with an explicit quasi-static solver (:mod:`foamact.solver`), and read the
programmed bend / tilt / twist off the rigid endplate
(:mod:`foamact.kinematics`).  Units are mm-tonne-s-MPa throughout.
"""

__version__ = "0.1.0"

from .material import HyperfoamModel, YeohModel
from .pattern import PatternSpec, Substrate
from .mesh import MeshResolution, SeamedMesh, mesh_cylinder
from .solver import LoadCase, MaterialSet, SolverControls, relax_to_equilibrium
from .kinematics import Actuator, PoseAngles, extract_angles, simulate, sweep
from .defaults import default_foam_model, default_skin_model

__all__ = [
    "__version__",
    "HyperfoamModel",
    "YeohModel",
    "PatternSpec",
    "Substrate",
    "MeshResolution",
    "SeamedMesh",
    "mesh_cylinder",
    "LoadCase",
    "MaterialSet",
    "SolverControls",
    "relax_to_equilibrium",
    "Actuator",
    "PoseAngles",
    "extract_angles",
    "simulate",
    "sweep",
    "default_foam_model",
    "default_skin_model",
]
