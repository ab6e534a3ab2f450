"""Dimensionally homogeneous Jacobians and workspace optimization for 1T2R parallel manipulators."""

__version__ = "0.1.0"

from parawork.screwcore import Ordering, Screw6
from parawork.mechanisms import (
    PoseSpec,
    Prs3Params,
    TmechParams,
    Prs3,
    TMechanism,
    Unreachable,
    SingularLimb,
    SingularUJoint,
)
from parawork.homojac import JacobianBundle, build_jdh
from parawork.workspace import GridConfig, WorkspaceBoundary, boundary_search, volume
from parawork.optimize import OptConfig, OptResult, pattern_search

__all__ = [
    "Ordering",
    "Screw6",
    "PoseSpec",
    "Prs3Params",
    "TmechParams",
    "Prs3",
    "TMechanism",
    "Unreachable",
    "SingularLimb",
    "SingularUJoint",
    "JacobianBundle",
    "build_jdh",
    "GridConfig",
    "WorkspaceBoundary",
    "boundary_search",
    "volume",
    "OptConfig",
    "OptResult",
    "pattern_search",
]
