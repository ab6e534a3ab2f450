"""Point-based dimensionally homogeneous Jacobian.

The plate twist is transported to three plate points (velocity transition
map V_p, 9x6), a selection matrix S (3x9) keeps three independent point
velocity components, and J_dh = S V_p J_a maps actuator rates to those
components. Every entry of J_dh then carries the same unit.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from parawork.mechanisms.common import GeometryState
from parawork.screwcore import cond2, det3, invert6, skew

AXES = "xyz"


class UnsupportedVariant(ValueError):
    """The variant needs a combined (extended) selection matrix."""


class DegeneratePoints(ArithmeticError):
    """The point coordinates make the cancellation system singular."""


class Variant(enum.Enum):
    TxRxRy = "TxRxRy"
    TxRxRz = "TxRxRz"
    TxRyRz = "TxRyRz"
    TyRxRy = "TyRxRy"
    TyRxRz = "TyRxRz"
    TyRyRz = "TyRyRz"
    TzRxRy = "TzRxRy"
    TzRxRz = "TzRxRz"
    TzRyRz = "TzRyRz"

    @property
    def translation(self) -> int:
        return AXES.index(self.value[1])

    @property
    def rotations(self) -> tuple[int, int]:
        return AXES.index(self.value[3]), AXES.index(self.value[5])

    @property
    def is_standard(self) -> bool:
        return self.translation not in self.rotations

    def desired(self) -> list[int]:
        """Twist indices in [v; omega] ordering of the wanted motion."""
        r1, r2 = self.rotations
        return [self.translation, 3 + r1, 3 + r2]

    def undesired(self) -> list[int]:
        keep = set(self.desired())
        return [i for i in range(6) if i not in keep]


@dataclass(frozen=True)
class PointSet:
    """Three plate points given as fixed-frame offsets from O' (shape (3, 3))."""

    offsets: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.offsets, dtype=float)
        if a.shape != (3, 3) or not np.all(np.isfinite(a)):
            raise ValueError("PointSet needs three finite 3-vectors")
        area2 = np.linalg.norm(np.cross(a[1] - a[0], a[2] - a[0]))
        scale = max(np.abs(a).max(), 1e-300)
        if area2 <= 2e-12 * scale * scale:
            raise ValueError("PointSet points are collinear")
        object.__setattr__(self, "offsets", a)


@dataclass(frozen=True)
class SelectionMatrix:
    entries: np.ndarray
    variant: Variant


def velocity_transition(points) -> np.ndarray:
    """Stacked [I, -[a_i]x] blocks, (..., 9, 6), for twists ordered [v; omega]."""
    a = points.offsets if isinstance(points, PointSet) else np.asarray(points, dtype=float)
    eye = np.broadcast_to(np.eye(3), a.shape + (3,))
    blocks = np.concatenate([eye, -skew(a)], axis=-1)
    return blocks.reshape(a.shape[:-2] + (9, 6))


def selection_standard(variant) -> SelectionMatrix:
    variant = Variant(variant)
    if not variant.is_standard:
        raise UnsupportedVariant(f"{variant.value} needs the extended selection matrix")
    s = np.zeros((3, 9))
    for i in range(3):
        s[i, 3 * i + variant.translation] = 1.0
    return SelectionMatrix(s, variant)


def selection_extended(variant, points, tol: float = 1e-12) -> SelectionMatrix:
    """Selection matrix combining point components so unwanted motion cancels.

    Row r combines points r and r+1 (cyclically). With t the translation axis,
    u the unwanted rotation axis and w the remaining axis, the t-components
    are mixed with weights summing to one so that omega_u drops out, and the
    u-components enter as a plain difference so that v_u drops out. Rows are
    therefore scaled so the nominal velocity carries v_t with unit weight.
    Standard variants return the usual one-component rows. Points may be
    batched as (..., 3, 3); the entries then have shape (..., 3, 9).
    """
    variant = Variant(variant)
    a = points.offsets if isinstance(points, PointSet) else np.asarray(points, dtype=float)
    if variant.is_standard:
        s = np.broadcast_to(selection_standard(variant).entries, a.shape[:-2] + (3, 9)).copy()
        return SelectionMatrix(s, variant)
    t = variant.translation
    u = ({0, 1, 2} - set(variant.rotations)).pop()
    w = ({0, 1, 2} - {t, u}).pop()
    c = a[..., w]
    scale = np.max(np.abs(a), axis=(-2, -1))
    s = np.zeros(a.shape[:-2] + (3, 9))
    for r in range(3):
        i, j = r, (r + 1) % 3
        den = c[..., j] - c[..., i]
        if np.any(np.abs(den) <= tol * np.maximum(scale, 1e-300)):
            raise DegeneratePoints(f"points {i + 1} and {j + 1} share their {AXES[w]} coordinate")
        s[..., r, 3 * i + t] = c[..., j] / den
        s[..., r, 3 * j + t] = -c[..., i] / den
        s[..., r, 3 * i + u] = 1.0
        s[..., r, 3 * j + u] = -1.0
    return SelectionMatrix(s, variant)


def selection_for(variant, points) -> np.ndarray:
    variant = Variant(variant)
    if variant.is_standard:
        return selection_standard(variant).entries
    return selection_extended(variant, points).entries


@dataclass
class JacobianBundle:
    """All intermediate matrices for one pose (or a stack of poses)."""

    Gt: np.ndarray
    J: np.ndarray
    J_a: np.ndarray
    V_p: np.ndarray
    S: np.ndarray
    J_dh: np.ndarray
    cond: np.ndarray
    det: np.ndarray
    state: GeometryState | None = None

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.cond)

    def to_dict(self) -> dict:
        out = {
            "Gt": self.Gt.tolist(), "J": self.J.tolist(), "V_p": self.V_p.tolist(),
            "S": self.S.tolist(), "J_dh": self.J_dh.tolist(),
            "cond": float(self.cond), "det": float(self.det),
        }
        if self.state is not None and "k" in self.state.extra:
            out["k"] = float(self.state.extra["k"])
        return out


def build_jdh(state: GeometryState, mech, variant=None, strict: bool = False) -> JacobianBundle:
    """Assemble J_dh and its condition number from a solved geometry state.

    With ``strict=False`` unreachable or singular poses give NaN matrices and
    ``cond = inf``; with ``strict=True`` the mechanism and inversion errors
    propagate.
    """
    variant = Variant(variant or mech.variant)
    gt = mech.gt(state, strict=strict)
    j = invert6(gt, strict=strict)
    j_a = j[..., :, :3]
    pts = mech.points(state)
    vp = velocity_transition(pts)
    s = selection_for(variant, pts)
    jdh = s @ vp @ j_a
    k = cond2(jdh)
    d = np.where(np.all(np.isfinite(jdh), axis=(-2, -1)), det3(np.nan_to_num(jdh)), np.nan)
    return JacobianBundle(gt, j, j_a, vp, s, jdh, k, d if np.ndim(d) else float(d), state)


def cond_det(mech, z, psi, theta, variant=None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised (cond, det) of J_dh; unreachable or singular poses give (inf, nan)."""
    state = mech.solve(z, psi, theta, strict=False)
    b = build_jdh(state, mech, variant, strict=False)
    return np.asarray(b.cond), np.asarray(b.det)
