import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parawork import optimize
from parawork.mechanisms import Prs3, Prs3Params, TMechanism
from parawork.optimize import (
    PRS3_BOUNDS,
    TMECH_BOUNDS,
    CachedObjective,
    OptConfig,
    optimize_decoupled,
    optimize_full,
    pattern_search,
    volume_objective,
)
from parawork.workspace import GridConfig


def accepted_monotone(trace):
    vals = [row[4] for row in trace]
    return all(a <= b for a, b in zip(vals, vals[1:]))


class TestPatternSearch:
    def test_1d(self):
        res = pattern_search(lambda x: -(x[0] - 0.3) ** 2, OptConfig((0.0,), ((0.0, 1.0),)))
        assert res.rho_opt[0] == pytest.approx(0.3, abs=1e-3)
        assert res.stop_reason == "mesh"

    def test_7d_from_corner(self):
        c = np.array([0.3, 7.2, 2.5, 0.05, 9.9, 4.4, 1.0])
        cfg = OptConfig((0.01,) * 7, TMECH_BOUNDS, mesh0=1.0, mesh_tol=1e-4, max_evals=20000)
        res = pattern_search(lambda x: -np.sum((x - c) ** 2), cfg)
        assert np.abs(res.rho_opt - c).max() < 1e-3
        assert accepted_monotone(res.trace)

    @settings(max_examples=30)
    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.lists(st.floats(0.1, 0.9), min_size=3, max_size=3))
    def test_bounds_and_monotone(self, shift, start):
        lo, hi = np.zeros(3), np.ones(3)
        cfg = OptConfig(tuple(start), tuple(zip(lo, hi)), mesh0=0.25, mesh_tol=1e-3)
        res = pattern_search(lambda x: -np.sum((x - np.array(shift)) ** 2), cfg)
        assert np.all(res.rho_opt >= lo) and np.all(res.rho_opt <= hi)
        assert accepted_monotone(res.trace)
        for row in res.trace:
            assert np.all(row[3] >= lo) and np.all(row[3] <= hi)

    def test_budget(self):
        res = pattern_search(lambda x: -np.sum(x ** 2), OptConfig((1.0, 1.0), ((-5, 5), (-5, 5)), max_evals=5))
        assert res.stop_reason == "budget" and res.evaluations <= 5

    def test_cache_counts_unique(self):
        calls = []

        def f(x):
            calls.append(tuple(x))
            return -abs(x[0] - 0.37)

        cached = CachedObjective(f)
        res = pattern_search(cached, OptConfig((0.0,), ((0.0, 1.0),), mesh_tol=1e-2))
        assert res.evaluations == len(calls) == len(set(calls))
        plain = CachedObjective(f, enabled=False)
        calls.clear()
        res2 = pattern_search(plain, OptConfig((0.0,), ((0.0, 1.0),), mesh_tol=1e-2, cache=False))
        assert res2.evaluations == len(calls) >= res.evaluations
        assert np.array_equal(res.rho_opt, res2.rho_opt)

    def test_deterministic(self):
        cfg = OptConfig((0.2, 0.8), ((0, 1), (0, 1)), mesh0=0.3)
        f = lambda x: np.sin(5 * x[0]) * np.cos(3 * x[1])  # noqa: E731
        a, b = pattern_search(f, cfg), pattern_search(f, cfg)
        assert [r[4] for r in a.trace] == [r[4] for r in b.trace]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OptConfig((2.0,), ((0.0, 1.0),))
        with pytest.raises(ValueError):
            OptConfig((0.5,), ((0.0, 1.0),), expand=0.5)


class TestVolumeObjective:
    def test_invalid_design_scores_zero(self):
        f = volume_objective(Prs3(Prs3Params(0.4, 0.4, 0.0)), GridConfig(0.001, 1.0, 2, 4, 6.0))
        assert f(np.array([0.4, 0.4, 3.0])) == 0.0
        assert f(np.array([0.4, 0.4, 0.0])) > 0.0

    def test_matches_direct(self):
        grid = GridConfig(0.0, 1.0, 3, 4, 2.0, normalize_z=True)
        m = TMechanism.from_rho((1.0,) * 7)
        v = volume_objective(m, grid)(np.array([1.2] * 7))
        from parawork.workspace import boundary_search
        assert v == boundary_search(TMechanism.from_rho((1.2,) * 7), grid).total_volume


class TestDecoupled:
    def test_separable_objective(self, monkeypatch):
        # a separable concave objective: decoupled stages land on the joint optimum
        c = np.array([2.0, 1.7, 2.2, 1.9, 1.5, 0.8, 3.0])

        def fake(mech, grid, jobs=1):
            return lambda rho: float(-np.sum((np.asarray(rho) - c) ** 2))

        monkeypatch.setattr(optimize, "volume_objective", fake)
        m = TMechanism.from_rho((1.0,) * 7)
        grid = GridConfig(0.0, 1.0, 2, 2, 2.0, normalize_z=True)
        cfg = OptConfig((1.0,) * 7, TMECH_BOUNDS, mesh0=0.5, mesh_tol=1e-4)
        full = optimize_full(m, cfg, grid)
        dec = optimize_decoupled(m, cfg, grid)
        dec3 = optimize_decoupled(m, cfg, grid, stage3=True)
        assert np.abs(full.rho_opt - c).max() < 1e-3
        assert np.abs(dec.rho_opt - c).max() < 1e-3
        assert np.abs(dec3.rho_opt - c).max() < 1e-3
        assert dec.evaluations < full.evaluations
        assert len(dec.stages) == 2 and len(dec3.stages) == 3
        assert dec.evaluations == sum(s.evaluations for s in dec.stages)
        evs = [row[1] for row in dec3.trace]
        assert evs == sorted(evs)
        assert accepted_monotone(dec3.trace)

    def test_stage_one_moves_group_only(self):
        m = TMechanism.from_rho((1.0,) * 7)
        grid = GridConfig(0.0, 1.0, 2, 4, 2.0, normalize_z=True)
        cfg = OptConfig((1.0,) * 7, TMECH_BOUNDS, mesh0=0.5, mesh_tol=0.2)
        res = optimize_decoupled(m, cfg, grid)
        s1 = res.stages[0].rho_opt
        assert np.array_equal(s1[[2, 3, 4, 5]], np.ones(4))
        assert res.V_opt >= res.stages[0].V_opt

    def test_coarse_then_verify(self):
        m = Prs3(Prs3Params(0.4, 0.4, 0.0))
        grid = GridConfig(0.001, 1.0, 6, 6, 6.0)
        cfg = OptConfig((0.4, 0.4, 0.0), PRS3_BOUNDS, mesh0=0.2, mesh_tol=0.05)
        res = optimize_full(m, cfg, grid, coarse_nm=3)
        assert res.V_verify == volume_objective(m, grid)(res.rho_opt)
