from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EX = np.array([1.0, 0.0, 0.0])
EY = np.array([0.0, 1.0, 0.0])
EZ = np.array([0.0, 0.0, 1.0])

# denominators below this (relative to the squared link scale) count as singular
LIMB_SINGULAR_TOL = 1e-12


class Unreachable(ValueError):
    """The requested pose has no inverse-kinematics solution on the chosen branch."""


class SingularLimb(ArithmeticError):
    """A limb's actuation denominator vanishes (straight knee, link normal to rail)."""


class SingularUJoint(SingularLimb):
    """The universal-joint scalar k of the RRRU limb has a vanishing denominator."""


@dataclass(frozen=True)
class PoseSpec:
    z: float
    psi: float
    theta: float

    def __post_init__(self):
        for name in ("z", "psi", "theta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"pose component {name} must be finite")


def rot_x(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    c, s = np.cos(a), np.sin(a)
    o, z = np.ones_like(a), np.zeros_like(a)
    return np.stack([np.stack([o, z, z], -1), np.stack([z, c, -s], -1), np.stack([z, s, c], -1)], -2)


def rot_y(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    c, s = np.cos(a), np.sin(a)
    o, z = np.ones_like(a), np.zeros_like(a)
    return np.stack([np.stack([c, z, s], -1), np.stack([z, o, z], -1), np.stack([-s, z, c], -1)], -2)


def rot_z(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    c, s = np.cos(a), np.sin(a)
    o, z = np.ones_like(a), np.zeros_like(a)
    return np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)


def dot(a, b) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def planar_2r(target, l_a: float, l_b: float, sign: float):
    """Knee position of a planar two-link chain rooted at the origin.

    ``target`` has shape (..., 2). ``sign`` picks the branch: the knee lies on
    the side of the chord given by rotating the chord direction by +90 deg
    (sign=+1) or -90 deg (sign=-1). Returns (knee, reachable_mask).
    """
    target = np.asarray(target, dtype=float)
    d2 = np.sum(target * target, axis=-1)
    d = np.sqrt(d2)
    ok = (d <= l_a + l_b) & (d >= abs(l_a - l_b)) & (d > 0)
    safe_d = np.where(d > 0, d, 1.0)
    cos_a = np.clip((l_a * l_a + d2 - l_b * l_b) / (2.0 * l_a * safe_d), -1.0, 1.0)
    sin_a = np.sqrt(1.0 - cos_a * cos_a)
    u = target / safe_d[..., None]
    perp = np.stack([-u[..., 1], u[..., 0]], axis=-1)
    knee = l_a * (cos_a[..., None] * u + sign * sin_a[..., None] * perp)
    return knee, ok


@dataclass
class GeometryState:
    """Solved geometry for one pose or a stack of poses.

    Array fields carry the batch shape of the pose inputs in front. ``a`` holds
    the fixed-frame offsets from the plate origin O' to the three plate joints
    (limb index on axis -2); ``q`` the actuated joint values; ``valid`` marks
    poses where the inverse kinematics succeeded.
    """

    z: np.ndarray
    psi: np.ndarray
    theta: np.ndarray
    R: np.ndarray
    p: np.ndarray
    a: np.ndarray
    q: np.ndarray
    valid: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def pose_shape(self) -> tuple:
        return np.shape(self.z)


def as_pose_arrays(pose=None, z=None, psi=None, theta=None):
    if pose is not None:
        z, psi, theta = pose.z, pose.psi, pose.theta
    z, psi, theta = np.broadcast_arrays(
        np.asarray(z, dtype=float), np.asarray(psi, dtype=float), np.asarray(theta, dtype=float)
    )
    return z, psi, theta
