"""Condition-number-gated workspace: radial boundary search and volume.

For every height z_i and meridian direction eps_j the tilt (psi, theta) =
alpha (cos eps, sin eps) is marched outward from the untilted pose. A probe
that violates the gate halves the step; the search on that meridian ends when
the step drops to ``th_boundary`` and the last accepted tilt is recorded.

All meridians of all slices are advanced together as independent lanes, which
keeps the per-probe work inside a handful of batched numpy calls.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from parawork.homojac import cond_det


@dataclass(frozen=True)
class GridConfig:
    z0: float
    zf: float
    n: int
    m: int
    k_max: float
    th_boundary: float = 1e-4
    boundary_mode: str = "cond"
    det_tol: float = 1e-9
    normalize_z: bool = False
    # hard cap on the tilt magnitude so the det-mode march always terminates
    alpha_max: float = math.pi / 2

    def __post_init__(self):
        if not (np.isfinite(self.z0) and np.isfinite(self.zf) and self.zf > self.z0):
            raise ValueError("need finite z0 < zf")
        if int(self.n) != self.n or int(self.m) != self.m or self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive integers")
        if not self.th_boundary > 0:
            raise ValueError("th_boundary must be positive")
        if self.boundary_mode not in ("cond", "det"):
            raise ValueError(f"boundary_mode must be 'cond' or 'det', got {self.boundary_mode!r}")
        if not (self.k_max >= 1 or self.k_max == math.inf):
            raise ValueError("k_max must be >= 1 or inf")
        if not self.det_tol > 0:
            raise ValueError("det_tol must be positive")
        if not self.alpha_max > 0:
            raise ValueError("alpha_max must be positive")

    @property
    def dz(self) -> float:
        return (self.zf - self.z0) / self.n

    @property
    def d_eps(self) -> float:
        return 2.0 * math.pi / self.m

    def z_grid(self) -> np.ndarray:
        return self.z0 + np.arange(self.n + 1) * self.dz

    def eps_grid(self) -> np.ndarray:
        return np.arange(self.m + 1) * self.d_eps

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["k_max"] == math.inf:
            d["k_max"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GridConfig":
        d = dict(d)
        if d.get("k_max") in ("inf", "Infinity"):
            d["k_max"] = math.inf
        return cls(**d)


@dataclass
class WorkspaceBoundary:
    config: GridConfig
    z: np.ndarray            # grid coordinate per slice (normalized when normalize_z)
    z_phys: np.ndarray
    eps: np.ndarray
    psi: np.ndarray          # (n+1, m+1)
    theta: np.ndarray
    cond: np.ndarray         # gate value at the recorded pose
    det: np.ndarray
    evaluations: int = 0
    slice_volume: np.ndarray = field(default=None)
    total_volume: float = field(default=None)

    def __post_init__(self):
        if self.total_volume is None:
            self.slice_volume, self.total_volume = _volume_parts(self)

    @property
    def radius(self) -> np.ndarray:
        return np.sqrt(self.psi ** 2 + self.theta ** 2)


def _volume_parts(b: WorkspaceBoundary) -> tuple[np.ndarray, float]:
    cfg = b.config
    half = cfg.d_eps / 2.0
    dz = cfg.dz
    radius = np.sqrt(b.psi ** 2 + b.theta ** 2)
    slices = np.zeros(radius.shape[0])
    total = 0.0
    for i in range(radius.shape[0]):
        acc = 0.0
        for j in range(radius.shape[1]):
            term = half * float(radius[i, j]) * dz
            acc += term
            total += term
        slices[i] = acc
    return slices, total


def volume(b: WorkspaceBoundary) -> float:
    """Sector-sum volume, accumulated in (i, j) lexicographic order."""
    return _volume_parts(b)[1]


def _gate(mech, cfg: GridConfig, z, alpha, eps, ref_det=None):
    psi = alpha * np.cos(eps)
    theta = alpha * np.sin(eps)
    k, d = cond_det(mech, z, psi, theta)
    if cfg.boundary_mode == "cond":
        ok = k < cfg.k_max
    else:
        finite = np.isfinite(d)
        ok = finite & (np.abs(d) >= cfg.det_tol * ref_det)
    ok &= alpha <= cfg.alpha_max
    return ok, k, d


def _search_slices(mech, cfg: GridConfig, rows: np.ndarray):
    """Boundary search for the given slice indices; returns per-lane arrays."""
    eps_g = cfg.eps_grid()
    z_grid = cfg.z_grid()
    scale = mech.z_max if cfg.normalize_z else 1.0
    ii, jj = np.meshgrid(rows, np.arange(cfg.m + 1), indexing="ij")
    z = (z_grid[ii] * scale).ravel()
    eps = eps_g[jj].ravel()
    n_lanes = z.size
    d_alpha0 = cfg.d_eps
    evals = 0

    alpha = np.zeros(n_lanes)
    step = np.full(n_lanes, d_alpha0)
    k0, d0 = cond_det(mech, z, np.zeros(n_lanes), np.zeros(n_lanes))
    evals += n_lanes
    ref_det = None
    if cfg.boundary_mode == "cond":
        active = k0 < cfg.k_max
    else:
        # per-slice det scale from the untilted pose and the first ring of probes
        k1, d1 = cond_det(mech, z, d_alpha0 * np.cos(eps), d_alpha0 * np.sin(eps))
        evals += n_lanes
        both = np.abs(np.stack([d0, d1], axis=-1).reshape(len(rows), -1))
        both = np.where(np.isfinite(both), both, np.nan)
        with np.errstate(all="ignore"):
            med = np.nanmedian(np.where(np.all(np.isnan(both), axis=1, keepdims=True), 0.0, both), axis=1)
        ref_det = np.repeat(med, cfg.m + 1)
        active = np.isfinite(d0) & (np.abs(d0) >= cfg.det_tol * ref_det) & (ref_det > 0)
    cond_at = k0.copy()
    det_at = d0.copy()

    while np.any(active):
        idx = np.nonzero(active)[0]
        probe = alpha[idx] + step[idx]
        ok, k, d = _gate(
            mech, cfg, z[idx], probe, eps[idx],
            None if ref_det is None else ref_det[idx],
        )
        evals += idx.size
        acc = idx[ok]
        alpha[acc] = probe[ok]
        cond_at[acc] = k[ok]
        det_at[acc] = d[ok]
        rej = idx[~ok]
        step[rej] /= 2.0
        active[rej[step[rej] <= cfg.th_boundary]] = False

    shape = (len(rows), cfg.m + 1)
    return (
        (alpha * np.cos(eps)).reshape(shape),
        (alpha * np.sin(eps)).reshape(shape),
        cond_at.reshape(shape),
        det_at.reshape(shape),
        evals,
    )


def boundary_search(mech, cfg: GridConfig, jobs: int | None = 1) -> WorkspaceBoundary:
    """Run the radial boundary search over the full (z, eps) grid.

    ``jobs`` > 1 splits the height slices over worker processes; every lane
    is computed independently, so the result does not depend on ``jobs``.
    ``jobs=None`` uses all available cores.
    """
    if jobs is None:
        jobs = os.cpu_count() or 1
    rows = np.arange(cfg.n + 1)
    if jobs <= 1 or cfg.n + 1 < 2:
        parts = [_search_slices(mech, cfg, rows)]
    else:
        chunks = [c for c in np.array_split(rows, min(jobs, cfg.n + 1)) if c.size]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_search_slices, [mech] * len(chunks), [cfg] * len(chunks), chunks))
    psi = np.concatenate([p[0] for p in parts])
    theta = np.concatenate([p[1] for p in parts])
    cond = np.concatenate([p[2] for p in parts])
    det = np.concatenate([p[3] for p in parts])
    evals = sum(p[4] for p in parts)
    z = cfg.z_grid()
    scale = mech.z_max if cfg.normalize_z else 1.0
    return WorkspaceBoundary(cfg, z, z * scale, cfg.eps_grid(), psi, theta, cond, det, evals)
