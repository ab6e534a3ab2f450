"""Bound-constrained coordinate pattern search for workspace-volume maximization."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from parawork.workspace import GridConfig, boundary_search

PRS3_BOUNDS = ((0.1, 1.0), (0.1, 1.0), (0.0, np.pi / 2))
TMECH_BOUNDS = tuple((0.01, 10.0) for _ in range(7))
RRS_GROUP = (0, 1, 6)
RRRU_GROUP = (2, 3, 4, 5)


@dataclass(frozen=True)
class OptConfig:
    rho0: tuple
    bounds: tuple
    mesh0: float = 1.0
    mesh_tol: float = 1e-3
    expand: float = 2.0
    contract: float = 0.5
    max_evals: int = 2000
    cache: bool = True

    def __post_init__(self):
        rho0 = tuple(float(v) for v in self.rho0)
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "bounds", bounds)
        if len(rho0) != len(bounds):
            raise ValueError("rho0 and bounds differ in length")
        for v, (lo, hi) in zip(rho0, bounds):
            if not lo <= v <= hi:
                raise ValueError(f"rho0 entry {v} outside [{lo}, {hi}]")
        if not 0 < self.contract < 1 < self.expand:
            raise ValueError("need 0 < contract < 1 < expand")
        if not (self.mesh0 > 0 and self.mesh_tol > 0):
            raise ValueError("mesh sizes must be positive")
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")


@dataclass
class OptResult:
    rho_opt: np.ndarray
    V_opt: float
    evaluations: int
    iterations: int
    trace: list = field(default_factory=list)   # (iteration, evals, mesh, rho, V)
    stop_reason: str = "mesh"
    stages: list = field(default_factory=list)
    V_verify: float | None = None


class CachedObjective:
    """Counts unique evaluations; repeated points are served from the cache."""

    def __init__(self, fn: Callable, enabled: bool = True):
        self.fn = fn
        self.enabled = enabled
        self.store: dict = {}
        self.evaluations = 0

    def __call__(self, x) -> float:
        key = tuple(float(v) for v in x)
        if self.enabled and key in self.store:
            return self.store[key]
        val = float(self.fn(np.array(key)))
        self.evaluations += 1
        if self.enabled:
            self.store[key] = val
        return val


def pattern_search(objective, cfg: OptConfig) -> OptResult:
    """Maximize ``objective`` over the bound box by compass polling.

    Polls +e1, -e1, +e2, ... at the current mesh size, moves to the first
    strictly better point and expands the mesh, otherwise contracts it.
    ``objective`` may be a :class:`CachedObjective` shared between runs; the
    evaluation count reported is the number of fresh evaluations made here.
    """
    f = objective if isinstance(objective, CachedObjective) else CachedObjective(objective, cfg.cache)
    start = f.evaluations
    lo = np.array([b[0] for b in cfg.bounds])
    hi = np.array([b[1] for b in cfg.bounds])
    x = np.clip(np.array(cfg.rho0), lo, hi)
    fx = f(x)
    mesh = cfg.mesh0
    it = 0
    trace = [(0, f.evaluations - start, mesh, x.copy(), fx)]
    reason = "mesh"
    dim = x.size
    while mesh >= cfg.mesh_tol:
        it += 1
        moved = False
        for d in range(2 * dim):
            step = np.zeros(dim)
            step[d // 2] = mesh if d % 2 == 0 else -mesh
            y = np.clip(x + step, lo, hi)
            if np.array_equal(y, x):
                continue
            key = tuple(float(v) for v in y)
            if f.evaluations - start >= cfg.max_evals and not (f.enabled and key in f.store):
                reason = "budget"
                break
            fy = f(y)
            if fy > fx:
                x, fx, moved = y, fy, True
                break
        mesh = mesh * cfg.expand if moved else mesh * cfg.contract
        trace.append((it, f.evaluations - start, mesh, x.copy(), fx))
        if reason == "budget":
            break
    return OptResult(x, fx, f.evaluations - start, it, trace, reason)


def volume_objective(mech, grid: GridConfig, jobs: int | None = 1) -> Callable:
    """rho -> workspace volume of ``mech`` with its design replaced by rho.

    Parameter sets that cannot be built, or have no workspace, score 0.
    """
    def fn(rho) -> float:
        try:
            candidate = mech.with_design(rho)
        except ValueError:
            return 0.0
        return float(boundary_search(candidate, grid, jobs=jobs).total_volume)
    return fn


def _coarse(grid: GridConfig, coarse_nm: int | None) -> GridConfig:
    if not coarse_nm:
        return grid
    return replace(grid, n=coarse_nm, m=coarse_nm)


def optimize_full(mech, opt: OptConfig, grid: GridConfig, jobs: int | None = 1,
                  coarse_nm: int | None = None, objective: CachedObjective | None = None) -> OptResult:
    """Search all design coordinates at once; optionally search coarse, verify fine."""
    f = objective or CachedObjective(volume_objective(mech, _coarse(grid, coarse_nm), jobs), opt.cache)
    res = pattern_search(f, opt)
    if coarse_nm:
        res.V_verify = volume_objective(mech, grid, jobs)(res.rho_opt)
    return res


class _Subspace(CachedObjective):
    """Objective on a coordinate subset, sharing the parent's cache and counter."""

    def __init__(self, parent: CachedObjective, base: np.ndarray, idx: tuple):
        self.parent = parent
        self.base = np.array(base, dtype=float)
        self.idx = list(idx)
        self.enabled = parent.enabled

    def _full(self, x) -> tuple:
        y = self.base.copy()
        y[self.idx] = x
        return tuple(float(v) for v in y)

    @property
    def evaluations(self) -> int:
        return self.parent.evaluations

    @property
    def store(self):
        return _KeyView(self)

    def __call__(self, x) -> float:
        return self.parent(np.array(self._full(x)))


class _KeyView:
    def __init__(self, sub: _Subspace):
        self.sub = sub

    def __contains__(self, key) -> bool:
        return self.sub._full(key) in self.sub.parent.store


def optimize_decoupled(mech, opt: OptConfig, grid: GridConfig, stage3: bool = False,
                       jobs: int | None = 1, coarse_nm: int | None = None,
                       groups: tuple = (RRS_GROUP, RRRU_GROUP)) -> OptResult:
    """Optimize parameter groups one after the other, then optionally all together.

    Stages share one evaluation cache, so the reported total counts each
    distinct design once.
    """
    f = CachedObjective(volume_objective(mech, _coarse(grid, coarse_nm), jobs), opt.cache)
    x = np.array(opt.rho0)
    stages = []
    trace = []
    total_it = 0
    for g in groups:
        before = f.evaluations
        sub_cfg = replace(
            opt,
            rho0=tuple(x[list(g)]),
            bounds=tuple(opt.bounds[i] for i in g),
            max_evals=max(1, opt.max_evals - f.evaluations),
        )
        inner = _Subspace(f, x.copy(), g)
        r = pattern_search(inner, sub_cfg)
        x[list(g)] = r.rho_opt
        r.rho_opt = x.copy()
        r.evaluations = f.evaluations - before
        stages.append(r)
        trace.extend((total_it + t[0], before + t[1], t[2], _embed(x, g, t[3]), t[4]) for t in r.trace)
        total_it += r.iterations
    if stage3:
        before = f.evaluations
        r = pattern_search(f, replace(opt, rho0=tuple(x), max_evals=max(1, opt.max_evals - f.evaluations)))
        r.evaluations = f.evaluations - before
        stages.append(r)
        trace.extend((total_it + t[0], before + t[1], t[2], t[3], t[4]) for t in r.trace)
        total_it += r.iterations
        x = r.rho_opt.copy()
    best = stages[-1]
    res = OptResult(x, best.V_opt, f.evaluations, total_it, trace, best.stop_reason, stages)
    if coarse_nm:
        res.V_verify = volume_objective(mech, grid, jobs)(x)
    return res


def _embed(x_final, idx, sub):
    # trace rows from a stage show the full vector with the stage's coordinates
    x = np.array(x_final, dtype=float)
    x[list(idx)] = sub
    return x
