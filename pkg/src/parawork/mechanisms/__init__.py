from parawork.mechanisms.common import (
    GeometryState,
    PoseSpec,
    SingularLimb,
    SingularUJoint,
    Unreachable,
)
from parawork.mechanisms.prs3 import Prs3, Prs3Params, prs3_gt, prs3_solve
from parawork.mechanisms.reciprocal import (
    DegenerateSystem,
    joint_screws,
    reciprocal_4s0_1sinf,
    reciprocal_5s0,
    rrru_wrenches,
    rrs_wrenches,
)
from parawork.mechanisms.tmech import TMechanism, TmechParams, tmech_gt, tmech_solve


def make_mechanism(kind: str, params: dict):
    """Build a mechanism from a kind tag and a plain parameter mapping."""
    if kind == "prs3":
        return Prs3(Prs3Params(**params))
    if kind == "tmech":
        p = dict(params)
        return TMechanism(TmechParams(tuple(p.pop("rho")), **p))
    raise ValueError(f"unknown mechanism kind {kind!r}")


__all__ = [
    "DegenerateSystem", "GeometryState", "PoseSpec", "Prs3", "Prs3Params", "SingularLimb",
    "SingularUJoint", "TMechanism", "TmechParams", "Unreachable", "joint_screws",
    "make_mechanism", "prs3_gt", "prs3_solve", "reciprocal_4s0_1sinf", "reciprocal_5s0",
    "rrru_wrenches", "rrs_wrenches", "tmech_gt", "tmech_solve",
]
