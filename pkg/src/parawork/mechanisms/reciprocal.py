"""Limb joint screws, reciprocal-screw closed forms and manipulator-level wrenches.

Joint twists are stored as Screw6(angular=s, linear=x x s) where x is a point
on the joint axis measured from the chosen reference point. Wrenches keep the
moment in the ``angular`` slot, so ``pairing`` gives the reciprocal product.
"""
from __future__ import annotations

import numpy as np

from parawork.mechanisms.common import EX, EY, EZ, GeometryState, SingularUJoint
from parawork.screwcore import Screw6


class DegenerateSystem(ArithmeticError):
    """The screw system does not determine a unique reciprocal direction."""


def _twist(axis, point) -> Screw6:
    axis = np.asarray(axis, dtype=float)
    return Screw6(axis, np.cross(point, axis))


def _foot(t: Screw6) -> np.ndarray:
    s = t.angular
    return np.cross(s, t.linear) / np.dot(s, s)


def _pick(state: GeometryState, idx):
    """Single-pose view of a (possibly batched) state."""
    def take(v):
        v = np.asarray(v)
        return v[idx] if idx is not None else v
    return take


def joint_screws(state: GeometryState, limb: int, reference: str = "end", idx=None) -> list[Screw6]:
    """Unit joint twists of one limb, base joint first.

    ``limb`` is 1, 2 or 3. With ``reference="end"`` moments are taken about
    the limb terminal (spherical centre or universal-joint centre), with
    ``reference="plate"`` about the plate origin O'. The spherical joint is
    represented by three revolutes along the fixed-frame x, y and z axes.
    """
    take = _pick(state, idx)
    p = take(state.p)
    l1 = take(state.extra["l1"])[limb - 1]
    l2 = take(state.extra["l2"])[limb - 1]
    if limb in (1, 3):
        end = p + take(state.a)[limb - 1]
        knee = end - l2
        base = knee - l1
        axes = [EY, EY, EX, EY, EZ]
        points = [base, knee, end, end, end]
    elif limb == 2:
        end = p
        p2 = take(state.extra["p2"])
        knee = p2 - l2
        base = knee - l1
        axes = [EX, EX, EX, take(state.extra["s42"]), take(state.extra["s52"])]
        points = [base, knee, p2, end, end]
    else:
        raise ValueError(f"limb must be 1, 2 or 3, got {limb}")
    ref = end if reference == "end" else p
    return [_twist(s, x - ref) for s, x in zip(axes, points)]


def reciprocal_5s0(screws: list[Screw6], tol: float = 1e-12) -> np.ndarray:
    """Force direction of the wrench reciprocal to five zero-pitch joint screws.

    Six-term closed form written in the triple products of the axis
    directions and the relative axis points p5i = p_i - p_5.
    """
    if len(screws) != 5:
        raise ValueError("need exactly five joint screws")
    s = [t.angular for t in screws]
    pts = [_foot(t) for t in screws]
    p5 = [pts[i] - pts[4] for i in range(4)]
    m = [np.cross(p5[i], s[i]) for i in range(4)]
    s1, s2, s3, s4, s5 = s
    c = [
        -np.dot(s5, np.cross(s4, s3)),
        np.dot(s5, np.cross(s3, s1)),
        -np.dot(s5, np.cross(s4, s1)),
        np.dot(s5, np.cross(s3, s2)),
        -np.dot(s5, np.cross(s4, s5)),
        np.dot(s5, np.cross(s4, s2)),
    ]
    terms = [
        np.cross(m[1], m[0]),
        np.cross(m[3], m[1]),
        np.cross(m[2], m[1]),
        np.cross(m[3], m[0]),
        np.cross(m[3], m[2]),
        np.cross(m[2], m[0]),
    ]
    out = sum(ci * ti for ci, ti in zip(c, terms))
    scale = max(np.abs(c).max(), 0.0) * max(np.linalg.norm(mi) for mi in m) ** 2
    if np.all(np.abs(c) < tol) or np.linalg.norm(out) <= tol * max(scale, 1e-300):
        raise DegenerateSystem("5-screw system gives no reciprocal direction")
    return out


def reciprocal_4s0_1sinf(screws: list[Screw6], s_inf, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Reciprocal screw of four zero-pitch joints plus one prismatic-like direction.

    ``screws`` are the zero-pitch joints 2..5 (the last two forming the
    universal joint at the reference point), ``s_inf`` the direction of the
    infinite-pitch screw. Returns (force direction, moment) with the moment
    perpendicular to both universal-joint axes.
    """
    if len(screws) != 4:
        raise ValueError("need exactly four zero-pitch screws")
    s2, s3, s4, s5 = (t.angular for t in screws)
    pts = [_foot(t) for t in screws]
    p52, p53, p54 = (pts[i] - pts[3] for i in range(3))
    s1 = np.asarray(s_inf, dtype=float)
    c = [-np.dot(s5, np.cross(s3, s2)), np.dot(s5, np.cross(s4, s2)), -np.dot(s5, np.cross(s4, s3))]
    force = (
        c[0] * np.cross(np.cross(p54, s4), s1)
        + c[1] * np.cross(np.cross(p53, s3), s1)
        + c[2] * np.cross(np.cross(p52, s2), s1)
    )
    if np.all(np.abs(c) < tol) or np.linalg.norm(force) < tol * max(np.linalg.norm(p52), 1e-300):
        raise DegenerateSystem("4s0-1sinf system gives no reciprocal direction")
    s45 = np.cross(s4, s5)
    den = np.dot(s3, s45)
    if abs(den) < tol:
        raise DegenerateSystem("universal joint axes make the moment scale indeterminate")
    # third row of the reciprocity system fixes the moment magnitude
    k = -np.dot(screws[1].linear, force) / den
    return force, k * s45


def rrs_wrenches(state: GeometryState, limb: int, idx=None) -> tuple[Screw6, Screw6]:
    """Actuation and constraint wrenches of RRS limb 1 or 3 about O'."""
    if limb not in (1, 3):
        raise ValueError("RRS limbs are 1 and 3")
    take = _pick(state, idx)
    l2 = take(state.extra["l2"])[limb - 1]
    a_s = -take(state.a)[limb - 1]
    active = Screw6(np.cross(l2, a_s), l2)
    constraint = Screw6(np.cross(EY, a_s), EY.copy())
    return active, constraint


def rrru_wrenches(state: GeometryState, idx=None) -> tuple[Screw6, Screw6, float]:
    take = _pick(state, idx)
    l22 = take(state.extra["l2"])[1]
    s45 = np.cross(take(state.extra["s42"]), take(state.extra["s52"]))
    k = float(take(state.extra["k"]))
    if not np.isfinite(k):
        raise SingularUJoint("universal-joint denominator vanishes")
    return Screw6(k * s45, l22), Screw6(np.zeros(3), EX.copy()), k
