"""Self-check suite: analytic Jacobians against identities and numerical oracles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from parawork.homojac import build_jdh
from parawork.mechanisms import (
    joint_screws,
    reciprocal_4s0_1sinf,
    reciprocal_5s0,
    rrru_wrenches,
)
from parawork.screwcore import invert6, nullspace_small
from parawork.verify import (
    fd_joint_rates,
    fd_point_velocity,
    fd_twist,
    random_poses,
    random_trajectory,
)

SUITE_SEED = 20240611


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _bundle(mech, poses):
    return build_jdh(mech.solve(*poses), mech)


def check_inverse_identity(mech, poses, tol=1e-9) -> CheckResult:
    b = _bundle(mech, poses)
    res = np.abs(b.Gt @ invert6(b.Gt) - np.eye(6)).sum(axis=-1).max()
    return CheckResult("inverse identity Gt J = I", bool(res < tol), f"max inf-norm residual {res:.2e}")


def check_constraint_compat(mech, poses, rng, tol=1e-9) -> CheckResult:
    b = _bundle(mech, poses)
    qd = rng.standard_normal((b.J_a.shape[0], 3))
    tw = np.einsum("nij,nj->ni", b.J_a, qd)
    res = np.abs(np.einsum("nij,nj->ni", b.Gt[:, 3:], tw)).max()
    return CheckResult("constraint rows annihilate J_a qdot", bool(res < tol), f"max residual {res:.2e}")


def check_scale_invariance(mech, poses, tol=1e-8) -> CheckResult:
    base = _bundle(mech, poses)
    worst = 0.0
    for lam in (1e-3, 1e3):
        scaled = mech.scaled(lam)
        z = poses[0] * lam
        b = build_jdh(scaled.solve(z, poses[1], poses[2]), scaled)
        worst = max(worst, float(np.max(np.abs(b.cond / base.cond - 1.0))))
    return CheckResult("cond(J_dh) invariant under length scaling", bool(worst < tol), f"max rel change {worst:.2e}")


def check_fd_oracles(mech, rng, n_traj=5, tol=1e-6) -> CheckResult:
    worst_q = worst_v = worst_c = 0.0
    for _ in range(n_traj):
        traj = random_trajectory(mech, rng)
        t = float(rng.uniform(0.2, 0.8))
        state = mech.solve(*traj.pose(t), strict=True)
        b = build_jdh(state, mech, strict=True)
        twist = fd_twist(mech, traj, t).as_array()
        qd = fd_joint_rates(mech, traj, t)
        pred = b.Gt[:3] @ twist
        worst_q = max(worst_q, np.abs(pred - qd).max() / max(np.abs(qd).max(), 1e-300))
        worst_c = max(worst_c, np.abs(b.Gt[3:] @ twist).max() / max(np.abs(twist).max(), 1e-300))
        vz = np.array([fd_point_velocity(mech, traj, t, point_index=i)[2] for i in range(3)])
        worst_v = max(worst_v, np.abs(b.J_dh @ qd - vz).max() / max(np.abs(vz).max(), 1e-300))
    ok = worst_q < tol and worst_v < tol and worst_c < tol
    return CheckResult(
        "finite-difference oracles",
        bool(ok),
        f"joint rates {worst_q:.1e}, point velocities {worst_v:.1e}, constraint residual {worst_c:.1e}",
    )


def _nullspace_direction(screws):
    rows = [np.concatenate([s.angular, s.linear]) for s in screws]
    basis = nullspace_small(np.array(rows))
    if len(basis) != 1:
        return None
    return basis[0]


def _parallel(u, v) -> float:
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return float(np.linalg.norm(np.cross(u, v)))


def reciprocal_errors(mech, state, i: int) -> tuple[float, float]:
    """(direction error, relative k error) of the closed forms against the nullspace oracle."""
    worst_dir = 0.0
    for limb in (1, 3):
        js = joint_screws(state, limb, idx=i)
        x = _nullspace_direction(js)
        worst_dir = max(worst_dir, _parallel(reciprocal_5s0(js), x[3:]))
    js = joint_screws(state, 2, idx=i)
    force, moment = reciprocal_4s0_1sinf(js[1:], js[0].angular)
    rows = [np.concatenate([s.angular, s.linear]) for s in js[1:]]
    rows.append(np.concatenate([np.zeros(3), js[0].angular]))
    basis = nullspace_small(np.array(rows))
    x = basis[0]
    worst_dir = max(worst_dir, _parallel(force, x[3:]))
    _, _, k = rrru_wrenches(state, idx=i)
    l22 = state.extra["l2"][i, 1]
    lam = np.dot(x[3:], l22) / np.dot(l22, l22)
    s45 = np.cross(state.extra["s42"][i], state.extra["s52"][i])
    k_ns = np.dot(x[:3] / lam, s45) / np.dot(s45, s45)
    k_cf = np.dot(moment, s45) / np.dot(s45, s45) * (np.dot(l22, l22) / np.dot(force, l22))
    rel = max(abs(k - k_ns), abs(k_cf - k_ns)) / max(abs(k_ns), 1e-300)
    return worst_dir, rel


def check_reciprocal(mech, poses, tol=1e-9) -> CheckResult:
    if mech.kind != "tmech":
        return CheckResult("reciprocal screw closed forms", True, "not applicable to this mechanism")
    state = mech.solve(*poses)
    worst_dir = worst_k = 0.0
    for i in range(len(poses[0])):
        d, k = reciprocal_errors(mech, state, i)
        worst_dir, worst_k = max(worst_dir, d), max(worst_k, k)
    ok = worst_dir < tol and worst_k < tol
    return CheckResult("reciprocal screw closed forms", bool(ok),
                       f"max direction error {worst_dir:.1e}, max rel k error {worst_k:.1e}")


def singular_pose(mech):
    """An untilted pose known to be singular: straight knees or link normal to rail."""
    if mech.kind == "tmech":
        return mech.z_max, 0.0, 0.0
    p = mech.params
    z = (p.l - (p.r_a - p.r_b) * np.sin(p.gamma)) / np.cos(p.gamma)
    return z, 0.0, 0.0


def check_singular_flagged(mech) -> CheckResult:
    """The singular pose must show cond = inf or a collapsed det(J_dh).

    When every limb hits the singularity at once (untilted symmetric pose) the
    columns of J_dh shrink together and cond can stay moderate, so the
    determinant, compared with a nearby regular pose, is checked as well.
    """
    pose = singular_pose(mech)
    b = build_jdh(mech.solve(*pose), mech)
    ref = build_jdh(mech.solve(0.8 * pose[0], 0.0, 0.0), mech)
    cond = float(b.cond)
    ratio = abs(float(b.det)) / abs(float(ref.det)) if np.isfinite(b.det) else 0.0
    flagged = not np.isfinite(cond) or cond > 1e8 or ratio < 1e-6
    return CheckResult("singular pose flagged", bool(flagged),
                       f"cond {cond:.3g}, det ratio {ratio:.2e} at z={pose[0]:.6g}")


def run_checks(mech, n_poses: int = 200, n_traj: int = 5, seed: int = SUITE_SEED) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    poses = random_poses(mech, n_poses, rng)
    out = [
        check_inverse_identity(mech, poses),
        check_constraint_compat(mech, poses, rng),
        check_scale_invariance(mech, poses),
        check_fd_oracles(mech, rng, n_traj),
        check_reciprocal(mech, tuple(p[: min(n_poses, 50)] for p in poses)),
    ]
    if mech.kind == "tmech" or mech.params.gamma < np.pi / 2:
        out.append(check_singular_flagged(mech))
    return out
