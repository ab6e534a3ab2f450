"""Finite-difference oracles used to check the analytic Jacobians."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from parawork.homojac import build_jdh
from parawork.screwcore import Ordering, Screw6

DEFAULT_H = 1e-6


class BranchFlip(RuntimeError):
    """Inverse kinematics changed branch (or failed) between difference samples."""


@dataclass(frozen=True)
class PoseTrajectory:
    """Cubic path t -> (z, psi, theta) on t in [0, 1].

    ``coeffs`` has shape (3, 4); row r holds c0..c3 of coordinate r.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (3, 4) or not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be a finite (3, 4) array")
        object.__setattr__(self, "coeffs", c)

    def pose(self, t):
        t = np.asarray(t, dtype=float)
        powers = np.stack([np.ones_like(t), t, t * t, t * t * t], axis=-1)
        z, psi, theta = (powers @ self.coeffs.T).T if powers.ndim > 1 else self.coeffs @ powers
        return z, psi, theta

    def rate(self, t):
        t = float(t)
        d = np.array([0.0, 1.0, 2.0 * t, 3.0 * t * t])
        return self.coeffs @ d

    @classmethod
    def constant(cls, z, psi, theta) -> "PoseTrajectory":
        c = np.zeros((3, 4))
        c[:, 0] = (z, psi, theta)
        return cls(c)


def _solve(mech, traj: PoseTrajectory, t: float):
    z, psi, theta = traj.pose(t)
    state = mech.solve(z, psi, theta, strict=False)
    if not bool(state.valid):
        raise BranchFlip(f"pose at t={t} is unreachable")
    return state


def _so3_log(r) -> np.ndarray:
    """Rotation vector of a rotation matrix (angle below pi)."""
    cos = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    ang = np.arccos(cos)
    vee = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]]) / 2.0
    if ang < 1e-8:
        return vee
    return vee * (ang / np.sin(ang))


def _central(fn, t: float, h: float, richardson: bool):
    d1 = (fn(t + h) - fn(t - h)) / (2.0 * h)
    if not richardson:
        return d1
    h2 = h / 2.0
    d2 = (fn(t + h2) - fn(t - h2)) / (2.0 * h2)
    return (4.0 * d2 - d1) / 3.0


def fd_twist(mech, traj: PoseTrajectory, t: float, h: float = DEFAULT_H, richardson: bool = False) -> Screw6:
    """Plate twist at t from central differences, tagged linear-first ([v; omega])."""
    sp, sm = _solve(mech, traj, t + h), _solve(mech, traj, t - h)
    v = (sp.p - sm.p) / (2.0 * h)
    w = _so3_log(sp.R @ sm.R.T) / (2.0 * h)
    if richardson:
        h2 = h / 2.0
        sp2, sm2 = _solve(mech, traj, t + h2), _solve(mech, traj, t - h2)
        v = (4.0 * (sp2.p - sm2.p) / (2.0 * h2) - v) / 3.0
        w = (4.0 * _so3_log(sp2.R @ sm2.R.T) / (2.0 * h2) - w) / 3.0
    return Screw6(w, v, Ordering.LINEAR_FIRST)


def fd_joint_rates(mech, traj: PoseTrajectory, t: float, h: float = DEFAULT_H,
                   richardson: bool = False, jump_tol: float = 1e-2) -> np.ndarray:
    """Actuated joint rates from central differences of the IK solution."""
    scale = getattr(mech, "length_scale", 1.0) if mech.kind == "prs3" else 1.0

    def q(tt):
        return np.asarray(_solve(mech, traj, tt).q, dtype=float)

    q0 = q(t)
    for s in (t - h, t + h):
        if np.max(np.abs(q(s) - q0)) > jump_tol * scale:
            raise BranchFlip(f"joint values jump near t={t}")
    return _central(q, t, h, richardson)


def fd_point_velocity(mech, traj: PoseTrajectory, t: float, h: float = DEFAULT_H,
                      point_index: int = 0, richardson: bool = False) -> np.ndarray:
    """Velocity of the plate-fixed material point that coincides with point i at t."""
    s0 = _solve(mech, traj, t)
    body = s0.R.T @ mech.points(s0)[point_index]

    def x(tt):
        s = _solve(mech, traj, tt)
        return s.p + s.R @ body

    return _central(x, t, h, richardson)


def analytic_rates(mech, traj: PoseTrajectory, t: float, h: float = DEFAULT_H):
    """(Gt @ twist_fd, J_dh @ qdot_fd, bundle) at t, for comparison with the oracles."""
    state = _solve(mech, traj, t)
    bundle = build_jdh(state, mech, strict=True)
    twist = fd_twist(mech, traj, t, h).as_array()
    qdot = fd_joint_rates(mech, traj, t, h)
    return bundle.Gt @ twist, bundle.J_dh @ qdot, bundle


def random_poses(mech, count: int, rng: np.random.Generator, z_frac=(0.35, 0.85), tilt: float = 0.35,
                 k_cap: float = 1e6, max_tries: int = 50):
    """Random reachable, non-singular poses (z, psi, theta) arrays of length ``count``.

    Heights are drawn as fractions of the mechanism's z range and tilts
    uniformly in [-tilt, tilt]; candidates with cond(J_dh) above ``k_cap``
    are redrawn.
    """
    zs, ps, ts = [], [], []
    have = 0
    for _ in range(max_tries):
        n = 4 * count
        z = rng.uniform(*z_frac, n) * mech.z_max
        psi = rng.uniform(-tilt, tilt, n)
        theta = rng.uniform(-tilt, tilt, n)
        b = build_jdh(mech.solve(z, psi, theta), mech)
        good = np.isfinite(b.cond) & (b.cond < k_cap)
        zs.append(z[good]), ps.append(psi[good]), ts.append(theta[good])
        have += int(good.sum())
        if have >= count:
            break
    if have < count:
        raise RuntimeError("could not find enough reachable poses")
    return tuple(np.concatenate(a)[:count] for a in (zs, ps, ts))


def random_trajectory(mech, rng: np.random.Generator, z_frac=(0.4, 0.8), tilt: float = 0.3,
                      amp: float = 0.08, k_cap: float = 1e4, samples: int = 21) -> PoseTrajectory:
    """Random cubic path that stays reachable and away from singularities at sampled t."""
    zs = mech.z_max
    for _ in range(200):
        c = np.zeros((3, 4))
        c[0, 0] = rng.uniform(*z_frac) * zs
        c[1:, 0] = rng.uniform(-tilt, tilt, 2)
        c[0, 1:] = rng.uniform(-amp, amp, 3) * zs
        c[1:, 1:] = rng.uniform(-amp, amp, (2, 3))
        traj = PoseTrajectory(c)
        z, psi, theta = traj.pose(np.linspace(0.0, 1.0, samples))
        b = build_jdh(mech.solve(z, psi, theta), mech)
        if np.all(np.isfinite(b.cond) & (b.cond < k_cap)):
            return traj
    raise RuntimeError("could not place a feasible trajectory")
