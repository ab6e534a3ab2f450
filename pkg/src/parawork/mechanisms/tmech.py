"""2-RRS/RRRU T-mechanism.

Limbs 1 and 3 are RRS chains working in the x-z plane (revolute axes along y),
limb 2 is an RRRU chain in the y-z plane (revolute axes along x) whose
universal joint sits at the plate origin O'. The plate moves with
p = (0, 0, z) and R = Ry(theta) Rx(psi), so there is no parasitic motion.

Universal joint: the plate-fixed axis is s52 = R z. The link-fixed axis s42
is perpendicular to both x (so link 3 stays in the limb plane) and to s52,
i.e. s42 = unit(R z x x); at theta = 0 this is Rx(psi) y. Link 3 runs from
the third revolute p2 to O' along s42 with length l32.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from parawork.mechanisms.common import (
    EX,
    EY,
    EZ,
    LIMB_SINGULAR_TOL,
    GeometryState,
    SingularLimb,
    SingularUJoint,
    Unreachable,
    as_pose_arrays,
    dot,
    planar_2r,
    rot_x,
    rot_y,
)

CLOSURE_TOL = 1e-10
# knee side in planar_2r convention; all three knees point away from the plate
KNEE_SIGN = (-1.0, 1.0, 1.0)


@dataclass(frozen=True)
class TmechParams:
    rho: tuple
    r_b: float = 45.0

    def __post_init__(self):
        rho = tuple(float(v) for v in self.rho)
        if len(rho) != 7:
            raise ValueError(f"rho must have 7 entries, got {len(rho)}")
        if not all(np.isfinite(v) and v > 0 for v in rho):
            raise ValueError(f"all ratios must be positive and finite, got {rho}")
        if not (np.isfinite(self.r_b) and self.r_b > 0):
            raise ValueError(f"r_b must be positive, got {self.r_b}")
        object.__setattr__(self, "rho", rho)

    @property
    def l11(self) -> float:
        return self.rho[0] * self.r_b

    @property
    def l21(self) -> float:
        return self.rho[1] * self.r_b

    @property
    def l12(self) -> float:
        return self.rho[2] * self.r_b

    @property
    def l22(self) -> float:
        return self.rho[3] * self.r_b

    @property
    def l32(self) -> float:
        return self.rho[4] * self.r_b

    @property
    def r_b2(self) -> float:
        return self.rho[5] * self.r_b

    @property
    def r_a(self) -> float:
        return self.rho[6] * self.r_b

    @property
    def z_max(self) -> float:
        return self.l11 + self.l21

    def lengths(self) -> dict:
        return {k: getattr(self, k) for k in ("l11", "l21", "l12", "l22", "l32", "r_b2", "r_a")}


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _embed(plane_xy, axis: str):
    """Lift planar (u, z) coordinates into 3-D for the x-z or y-z plane."""
    zero = np.zeros(plane_xy.shape[:-1])
    if axis == "xz":
        return np.stack([plane_xy[..., 0], zero, plane_xy[..., 1]], axis=-1)
    return np.stack([zero, plane_xy[..., 0], plane_xy[..., 1]], axis=-1)


def tmech_solve(pose=None, params: TmechParams | None = None, *, z=None, psi=None, theta=None,
                strict: bool = True) -> GeometryState:
    z, psi, theta = as_pose_arrays(pose, z, psi, theta)
    R = rot_y(theta) @ rot_x(psi)
    zero = np.zeros_like(z)
    p = np.stack([zero, zero, z], axis=-1)
    a1 = R @ np.array([params.r_a, 0.0, 0.0])
    a3 = R @ np.array([-params.r_a, 0.0, 0.0])

    base = np.array([[params.r_b, 0.0, 0.0], [0.0, -params.r_b2, 0.0], [-params.r_b, 0.0, 0.0]])
    s52 = R @ EZ
    s42 = _unit(np.cross(s52, EX))
    l32 = params.l32 * s42
    p2 = p - l32

    ends = [p + a1, p2, p + a3]
    planes = ["xz", "yz", "xz"]
    l1s, l2s, oks = [], [], []
    for i in range(3):
        rel = ends[i] - base[i]
        la, lb = (params.l11, params.l21) if i != 1 else (params.l12, params.l22)
        coords = rel[..., [0, 2]] if planes[i] == "xz" else rel[..., [1, 2]]
        knee, ok = planar_2r(coords, la, lb, KNEE_SIGN[i])
        l1 = _embed(knee, planes[i])
        l1s.append(l1)
        l2s.append(rel - l1)
        oks.append(ok)
    l1 = np.stack(l1s, axis=-2)
    l2 = np.stack(l2s, axis=-2)

    q = np.stack(
        [
            np.arctan2(-l1[..., 0, 2], l1[..., 0, 0]),
            np.arctan2(l1[..., 1, 2], l1[..., 1, 1]),
            np.arctan2(-l1[..., 2, 2], l1[..., 2, 0]),
        ],
        axis=-1,
    )
    s45 = np.cross(s42, s52)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = dot(EX, np.cross(l2[..., 1, :], l32)) / dot(EX, s45)

    lens = np.array([[params.l11, params.l21], [params.l12, params.l22], [params.l11, params.l21]])
    closure = np.max(
        np.abs(np.linalg.norm(l1, axis=-1) - lens[:, 0]) + np.abs(np.linalg.norm(l2, axis=-1) - lens[:, 1]),
        axis=-1,
    )
    valid = oks[0] & oks[1] & oks[2] & (closure < CLOSURE_TOL * params.r_b)
    if strict and not np.all(valid):
        raise Unreachable(f"T-mechanism pose outside the reachable set (z={z}, psi={psi}, theta={theta})")

    a = np.stack([a1, np.zeros_like(a1), a3], axis=-2)
    return GeometryState(
        z=z, psi=psi, theta=theta, R=R, p=p, a=a, q=q, valid=valid,
        extra={
            "params": params, "base": base, "l1": l1, "l2": l2,
            "s42": s42, "s52": s52, "l32": l32, "p2": p2, "k": k,
        },
    )


def tmech_gt(state: GeometryState, strict: bool = True) -> np.ndarray:
    """Constraint-embedded inverse Jacobian in [v; omega] ordering.

    Rows 1-3 are the actuation rows of limbs 1, 2, 3 (base revolute rates),
    rows 4-6 the constraint rows (forces along y, x, y through the plate
    joints).
    """
    params: TmechParams = state.extra["params"]
    l1, l2 = state.extra["l1"], state.extra["l2"]
    a1, a3 = state.a[..., 0, :], state.a[..., 2, :]
    s45 = np.cross(state.extra["s42"], state.extra["s52"])
    k = state.extra["k"]

    d1 = dot(l2[..., 0, :], np.cross(EY, l1[..., 0, :]))
    d2 = dot(EX, np.cross(l1[..., 1, :], l2[..., 1, :]))
    d3 = dot(l2[..., 2, :], np.cross(EY, l1[..., 2, :]))
    knee_scale = np.array([params.l11 * params.l21, params.l12 * params.l22, params.l11 * params.l21])
    dens = np.stack([d1, d2, d3], axis=-1)
    limb_sing = np.abs(dens) < LIMB_SINGULAR_TOL * knee_scale
    ujoint_sing = np.abs(dot(EX, s45)) < LIMB_SINGULAR_TOL
    if strict:
        if np.any(ujoint_sing):
            raise SingularUJoint("universal-joint denominator vanishes")
        if np.any(limb_sing):
            raise SingularLimb("straight-knee configuration")

    ey = np.broadcast_to(EY, a1.shape)
    ex = np.broadcast_to(EX, a1.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.concatenate([l2[..., 0, :], np.cross(a1, l2[..., 0, :])], axis=-1) / d1[..., None]
        r2 = np.concatenate([l2[..., 1, :], k[..., None] * s45], axis=-1) / d2[..., None]
        r3 = np.concatenate([l2[..., 2, :], np.cross(a3, l2[..., 2, :])], axis=-1) / d3[..., None]
    r4 = np.concatenate([ey, np.cross(a1, ey)], axis=-1)
    r5 = np.concatenate([ex, np.zeros_like(ex)], axis=-1)
    r6 = np.concatenate([ey, np.cross(a3, ey)], axis=-1)
    gt = np.stack([r1, r2, r3, r4, r5, r6], axis=-2)
    bad = limb_sing.any(axis=-1) | ujoint_sing | ~state.valid
    if np.any(bad):
        gt = np.where(bad[..., None, None], np.nan, gt)
    return gt


class TMechanism:
    """T-mechanism bound to one ratio vector and reference length."""

    kind = "tmech"
    variant = "TzRxRy"
    design_names = tuple(f"rho{i}" for i in range(1, 8))

    def __init__(self, params: TmechParams):
        self.params = params

    def __repr__(self):
        return f"TMechanism({self.params})"

    @classmethod
    def from_rho(cls, rho, r_b: float = 45.0) -> "TMechanism":
        return cls(TmechParams(tuple(rho), r_b))

    @property
    def z_max(self) -> float:
        return self.params.z_max

    @property
    def length_scale(self) -> float:
        return self.params.r_b

    def design(self) -> np.ndarray:
        return np.array(self.params.rho)

    def with_design(self, rho) -> "TMechanism":
        return TMechanism(TmechParams(tuple(rho), self.params.r_b))

    def scaled(self, lam: float) -> "TMechanism":
        return TMechanism(TmechParams(self.params.rho, self.params.r_b * lam))

    def solve(self, z, psi, theta, strict: bool = False) -> GeometryState:
        return tmech_solve(params=self.params, z=z, psi=psi, theta=theta, strict=strict)

    def gt(self, state: GeometryState, strict: bool = False) -> np.ndarray:
        return tmech_gt(state, strict=strict)

    def points(self, state: GeometryState) -> np.ndarray:
        """Representative plate points: both spherical joints and the limb-2 revolute p2."""
        a = state.a.copy()
        a[..., 1, :] = -state.extra["l32"]
        return a

    def actuated(self, state: GeometryState) -> np.ndarray:
        return state.q
