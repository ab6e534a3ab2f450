"""Small fixed-size linear algebra and screw utilities.

Everything here works on plain numpy arrays. Functions that make sense on a
stack of matrices (``skew``, ``det3``, ``cond2``, ``invert6``, ``block_invert``)
accept arbitrary leading batch dimensions so the workspace search can push a
whole grid of poses through one call.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SINGULAR_REL_TOL = 1e-12
SIGMA_FLOOR = 1e-300


class SingularMatrix(ArithmeticError):
    """Raised when a constraint-embedded inverse Jacobian cannot be inverted."""


class SingularBlock(SingularMatrix):
    """Raised by :func:`block_invert` when the leading 3x3 block is singular."""


class Ordering(enum.Enum):
    ANGULAR_FIRST = "angular_first"
    LINEAR_FIRST = "linear_first"


@dataclass(frozen=True)
class Screw6:
    """Six-vector split into an angular and a linear block.

    For twists the blocks are (omega, v). For wrenches the block named
    ``angular`` holds the moment, i.e. the part that pairs with omega, so that
    the power pairing is the plain dot product of equally ordered arrays.
    """

    angular: np.ndarray
    linear: np.ndarray
    ordering: Ordering = Ordering.ANGULAR_FIRST

    def __post_init__(self):
        object.__setattr__(self, "angular", np.asarray(self.angular, dtype=float))
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float))

    @classmethod
    def from_array(cls, vec, ordering: Ordering) -> "Screw6":
        vec = np.asarray(vec, dtype=float)
        first, second = vec[..., :3], vec[..., 3:]
        if ordering is Ordering.ANGULAR_FIRST:
            return cls(first, second, ordering)
        return cls(second, first, ordering)

    def as_array(self) -> np.ndarray:
        if self.ordering is Ordering.ANGULAR_FIRST:
            return np.concatenate([self.angular, self.linear], axis=-1)
        return np.concatenate([self.linear, self.angular], axis=-1)


def reorder(t: Screw6, target: Ordering) -> Screw6:
    """Return ``t`` tagged with ``target``; the stored array swaps halves when the tag changes."""
    return Screw6(t.angular, t.linear, target)


def swap_halves(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    return np.concatenate([vec[..., 3:], vec[..., :3]], axis=-1)


def pairing(w: Screw6, t: Screw6) -> np.ndarray:
    """Power pairing <w, t> = moment . omega + force . v."""
    return np.sum(w.angular * t.angular, axis=-1) + np.sum(w.linear * t.linear, axis=-1)


def skew(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    x, y, z = a[..., 0], a[..., 1], a[..., 2]
    o = np.zeros_like(x)
    return np.stack(
        [
            np.stack([o, -z, y], axis=-1),
            np.stack([z, o, -x], axis=-1),
            np.stack([-y, x, o], axis=-1),
        ],
        axis=-2,
    )


def det3(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def inv3(m) -> tuple[np.ndarray, np.ndarray]:
    """Adjugate inverse of (...,3,3) matrices; returns (inverse, determinant)."""
    m = np.asarray(m, dtype=float)
    c0 = np.cross(m[..., 1, :], m[..., 2, :])
    c1 = np.cross(m[..., 2, :], m[..., 0, :])
    c2 = np.cross(m[..., 0, :], m[..., 1, :])
    det = np.sum(m[..., 0, :] * c0, axis=-1)
    adj = np.stack([c0, c1, c2], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return adj / det[..., None, None], det


def _inf_norm(m) -> np.ndarray:
    return np.max(np.sum(np.abs(m), axis=-1), axis=-1)


def _singular_mask(m, det) -> np.ndarray:
    n = m.shape[-1]
    scale = _inf_norm(m) ** n
    return ~np.isfinite(det) | (np.abs(det) <= SINGULAR_REL_TOL * scale)


def equilibrate(m, sweeps: int = 8) -> np.ndarray:
    """Two-sided diagonal (Ruiz) scaling driving every row and column max towards 1.

    Rows and columns of Gt carry different units, so a determinant test on
    the raw matrix would depend on the length unit; on the equilibrated
    matrix it does not.
    """
    a = np.array(m, dtype=float)
    for _ in range(sweeps):
        r = np.max(np.abs(a), axis=-1, keepdims=True)
        c = np.max(np.abs(a), axis=-2, keepdims=True)
        r = np.where(r > 0, r, 1.0)
        c = np.where(c > 0, c, 1.0)
        a = a / np.sqrt(r) / np.sqrt(c)
    return a


def invert6(gt, strict: bool = True) -> np.ndarray:
    """Invert one or many 6x6 constraint-embedded inverse Jacobians.

    Singularity is judged on ``|det(E)| <= 1e-12 * ||E||_inf**6`` where E is
    the row/column equilibrated Gt. With ``strict=False`` singular entries
    come back filled with NaN instead of raising.
    """
    gt = np.asarray(gt, dtype=float)
    finite = np.all(np.isfinite(gt), axis=(-2, -1))
    safe = np.where(finite[..., None, None], gt, np.eye(6))
    eq = equilibrate(safe)
    bad = _singular_mask(eq, np.linalg.det(eq)) | ~finite
    if np.any(bad):
        if strict:
            raise SingularMatrix("inverse Jacobian is singular (motion/constraint singularity)")
        safe = np.where(bad[..., None, None], np.eye(6), safe)
    out = np.linalg.inv(safe)
    if np.any(bad):
        out = np.where(bad[..., None, None], np.nan, out)
    return out


def actuated_blocks(gt) -> tuple[np.ndarray, np.ndarray]:
    """Upper (J_a1) and lower (J_a2) 3x3 blocks of the actuated columns of Gt^-1.

    Uses the partitioned inverse with G_av (the upper-left block) as pivot, so
    the unit structure of each block is visible: for rotary actuators J_a1
    carries length and J_a2 is dimensionless.
    """
    gt = np.asarray(gt, dtype=float)
    gav, gaw = gt[..., :3, :3], gt[..., :3, 3:]
    gcv, gcw = gt[..., 3:, :3], gt[..., 3:, 3:]
    gav_inv, det = inv3(gav)
    if np.any(_singular_mask(gav, det)):
        raise SingularBlock("leading 3x3 block G_av is singular")
    schur = gcw - gcv @ gav_inv @ gaw
    schur_inv, sdet = inv3(schur)
    if np.any(_singular_mask(schur, sdet)):
        raise SingularMatrix("Schur complement is singular")
    j_a2 = -schur_inv @ gcv @ gav_inv
    j_a1 = gav_inv - gav_inv @ gaw @ j_a2
    return j_a1, j_a2


def block_invert(gt) -> np.ndarray:
    """Full 6x6 inverse through the 2x2 block formula (independent of LAPACK inv)."""
    gt = np.asarray(gt, dtype=float)
    gav, gaw = gt[..., :3, :3], gt[..., :3, 3:]
    gcv = gt[..., 3:, :3]
    j_a1, j_a2 = actuated_blocks(gt)
    gav_inv, _ = inv3(gav)
    schur_inv, _ = inv3(gt[..., 3:, 3:] - gcv @ gav_inv @ gaw)
    j_c1 = -gav_inv @ gaw @ schur_inv
    top = np.concatenate([j_a1, j_c1], axis=-1)
    bottom = np.concatenate([j_a2, schur_inv], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _cond2_2x2(m):
    a = np.swapaxes(m, -1, -2) @ m
    tr = a[..., 0, 0] + a[..., 1, 1]
    det = (m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]) ** 2
    lam_max = 0.5 * (tr + np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0)))
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_min = det / lam_max
    return lam_max, lam_min


def _cond2_3x3(m):
    a = np.swapaxes(m, -1, -2) @ m
    tr = a[..., 0, 0] + a[..., 1, 1] + a[..., 2, 2]
    q = tr / 3.0
    p1 = a[..., 0, 1] ** 2 + a[..., 0, 2] ** 2 + a[..., 1, 2] ** 2
    p2 = (a[..., 0, 0] - q) ** 2 + (a[..., 1, 1] - q) ** 2 + (a[..., 2, 2] - q) ** 2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = (a - q[..., None, None] * np.eye(3)) / p[..., None, None]
        r = np.clip(det3(b) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lam_max = np.where(p > 0, q + 2.0 * p * np.cos(phi), q)
    # the two small eigenvalues from their sum and product; det(A) = det(M)^2 is
    # taken from M directly so lam_min keeps full relative accuracy
    det_a = det3(m) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        prod = det_a / lam_max
        s = tr - lam_max
        lam_mid = 0.5 * (s + np.sqrt(np.maximum(s * s - 4.0 * prod, 0.0)))
        lam_min = np.where(lam_mid > 0, prod / lam_mid, 0.0)
    return lam_max, lam_min


def cond2(m) -> np.ndarray:
    """2-norm condition number of (...,f,f) matrices, f in {2, 3}.

    Works from the eigenvalues of M^T M in closed form. Singular or
    non-finite inputs give +inf.
    """
    m = np.asarray(m, dtype=float)
    f = m.shape[-1]
    if m.shape[-2] != f or f not in (2, 3):
        raise ValueError(f"cond2 expects 2x2 or 3x3 matrices, got {m.shape[-2:]}")
    finite = np.all(np.isfinite(m), axis=(-2, -1))
    safe = np.where(finite[..., None, None], m, np.eye(f))
    lam_max, lam_min = _cond2_2x2(safe) if f == 2 else _cond2_3x3(safe)
    sig_min = np.sqrt(np.maximum(lam_min, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.sqrt(lam_max) / sig_min
    k = np.where((sig_min < SIGMA_FLOOR) | ~finite, np.inf, np.maximum(k, 1.0))
    return k if k.ndim else float(k)


def nullspace_small(a, rel_tol: float = 1e-10) -> list[np.ndarray]:
    """Orthonormal basis of the right nullspace of a small (m x 6) matrix.

    Reduced row echelon form with partial pivoting and pivot tolerance
    ``rel_tol * ||A||_inf``, followed by Gram-Schmidt on the free-column
    vectors.
    """
    a = np.array(a, dtype=float, ndmin=2)
    rows, cols = a.shape
    tol = rel_tol * max(_inf_norm(a), 1e-300)
    r = a.copy()
    pivots = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        k = row + int(np.argmax(np.abs(r[row:, col])))
        if abs(r[k, col]) <= tol:
            r[row:, col] = 0.0
            continue
        r[[row, k]] = r[[k, row]]
        r[row] /= r[row, col]
        for i in range(rows):
            if i != row:
                r[i] -= r[i, col] * r[row]
        pivots.append(col)
        row += 1
    free = [c for c in range(cols) if c not in pivots]
    raw = []
    for fcol in free:
        v = np.zeros(cols)
        v[fcol] = 1.0
        for i, pcol in enumerate(pivots):
            v[pcol] = -r[i, fcol]
        raw.append(v)
    basis: list[np.ndarray] = []
    for v in raw:
        for _ in range(2):
            for u in basis:
                v = v - (u @ v) * u
        basis.append(v / np.linalg.norm(v))
    return basis
