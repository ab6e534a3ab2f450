"""3-PRS manipulator: position solve and constraint-embedded inverse Jacobian.

Conventions (the position-level model is not fixed by the velocity analysis,
so it is declared here):

* base joints at 0, 120 and 240 deg on a circle of radius ``r_b`` (1 by default);
* rail i runs from b_i along d_i = -cos(gamma) r_i + sin(gamma) z, so gamma = 0
  gives horizontal rails pointing at the base centre;
* each passive revolute axis is normal to its limb plane, t_i = z x r_i;
* plate orientation R = Rz(yaw) Ry(theta) Rx(psi), where (x, y, yaw) are the
  parasitic coordinates that keep every spherical joint in its limb plane.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from parawork.mechanisms.common import (
    EZ,
    LIMB_SINGULAR_TOL,
    GeometryState,
    SingularLimb,
    Unreachable,
    as_pose_arrays,
    rot_x,
    rot_y,
    rot_z,
)

XI = np.deg2rad([0.0, 120.0, 240.0])
RADIAL = np.stack([np.cos(XI), np.sin(XI), np.zeros(3)], axis=-1)
TANGENT = np.cross(EZ, RADIAL)
CLOSURE_TOL = 1e-10


@dataclass(frozen=True)
class Prs3Params:
    r_a: float
    l: float
    gamma: float
    r_b: float = 1.0

    def __post_init__(self):
        for name in ("r_a", "l", "r_b"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive length, got {v}")
        if not (0.0 <= self.gamma <= np.pi / 2):
            raise ValueError(f"gamma must lie in [0, pi/2], got {self.gamma}")

    @property
    def rails(self) -> np.ndarray:
        return -np.cos(self.gamma) * RADIAL + np.sin(self.gamma) * EZ

    @property
    def base(self) -> np.ndarray:
        return self.r_b * RADIAL


def parasitic_yaw(psi, theta):
    """Yaw that keeps the three spherical joints in their limb planes.

    For R = Rz(yaw) Ry(theta) Rx(psi) the three plane conditions reduce to
    R[0,1] == R[1,0], which has this closed form.
    """
    return np.arctan2(np.sin(theta) * np.sin(psi), np.cos(psi) + np.cos(theta))


def prs3_solve(pose=None, params: Prs3Params | None = None, *, z=None, psi=None, theta=None,
               strict: bool = True) -> GeometryState:
    z, psi, theta = as_pose_arrays(pose, z, psi, theta)
    yaw = parasitic_yaw(psi, theta)
    R = rot_z(yaw) @ rot_y(theta) @ rot_x(psi)
    a = np.einsum("...ij,kj->...ki", R, params.r_a * RADIAL)

    # t_i . (p + a_i) = 0 for i = 1, 2 fixes (x, y); limb 3 is then a check
    rhs = -np.einsum("ki,...ki->...k", TANGENT, a)
    m = TANGENT[:2, :2]
    xy = np.linalg.solve(m, rhs[..., :2, None])[..., 0]
    p = np.concatenate([xy, z[..., None]], axis=-1)
    c = p[..., None, :] + a
    closure = np.abs(np.einsum("ki,...ki->...k", TANGENT, c))

    e = c - params.base
    d = params.rails
    ed = np.einsum("...ki,ki->...k", e, d)
    disc = ed * ed - np.sum(e * e, axis=-1) + params.l ** 2
    q = ed - np.sqrt(np.maximum(disc, 0.0))
    slider = params.base + q[..., None] * d
    link = c - slider
    valid = (
        np.all(disc >= 0.0, axis=-1)
        & np.all(link[..., 2] > 0.0, axis=-1)
        & np.all(closure < CLOSURE_TOL * params.r_b, axis=-1)
    )
    if strict and not np.all(valid):
        raise Unreachable(f"3-PRS pose outside the reachable set (z={z}, psi={psi}, theta={theta})")
    return GeometryState(
        z=z, psi=psi, theta=theta, R=R, p=p, a=a, q=q, valid=valid,
        extra={"yaw": yaw, "slider": slider, "link": link, "params": params},
    )


def prs3_gt(state: GeometryState, strict: bool = True) -> np.ndarray:
    """6x6 constraint-embedded inverse Jacobian, twist ordered as [v; omega].

    Rows 1-3 map the twist to slider rates, rows 4-6 are the limb-plane
    constraints on the spherical joint velocities.
    """
    params: Prs3Params = state.extra["params"]
    a = state.a
    lhat = state.extra["link"] / params.l
    den = np.einsum("...ki,ki->...k", lhat, params.rails)
    singular = np.abs(den) < LIMB_SINGULAR_TOL
    if strict and np.any(singular):
        raise SingularLimb("link orthogonal to its rail (actuation singularity)")
    with np.errstate(divide="ignore", invalid="ignore"):
        act = np.concatenate([lhat, np.cross(a, lhat)], axis=-1) / den[..., None]
    tang = np.broadcast_to(TANGENT, a.shape)
    con = np.concatenate([tang, np.cross(a, tang)], axis=-1)
    gt = np.concatenate([act, con], axis=-2)
    bad = singular.any(axis=-1) | ~state.valid
    if np.any(bad):
        gt = np.where(bad[..., None, None], np.nan, gt)
    return gt


class Prs3:
    """3-PRS mechanism bound to one parameter set."""

    kind = "prs3"
    variant = "TzRxRy"
    design_names = ("r_a", "l", "gamma")

    def __init__(self, params: Prs3Params):
        self.params = params

    def __repr__(self):
        return f"Prs3({self.params})"

    @property
    def z_max(self) -> float:
        return 1.0

    @property
    def length_scale(self) -> float:
        return self.params.r_b

    def design(self) -> np.ndarray:
        p = self.params
        return np.array([p.r_a, p.l, p.gamma])

    def with_design(self, rho) -> "Prs3":
        r_a, l, gamma = (float(v) for v in rho)
        return Prs3(replace(self.params, r_a=r_a, l=l, gamma=gamma))

    def scaled(self, lam: float) -> "Prs3":
        p = self.params
        return Prs3(replace(p, r_a=p.r_a * lam, l=p.l * lam, r_b=p.r_b * lam))

    def solve(self, z, psi, theta, strict: bool = False) -> GeometryState:
        return prs3_solve(params=self.params, z=z, psi=psi, theta=theta, strict=strict)

    def gt(self, state: GeometryState, strict: bool = False) -> np.ndarray:
        return prs3_gt(state, strict=strict)

    def points(self, state: GeometryState) -> np.ndarray:
        return state.a

    def actuated(self, state: GeometryState) -> np.ndarray:
        return state.q
