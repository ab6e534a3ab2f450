"""Compare full-set and grouped design search for the T-mechanism on a coarse grid.

Run: python demos/decoupled_design.py   (about two minutes on one core)
"""
from parawork import GridConfig, OptConfig, TMechanism
from parawork.optimize import TMECH_BOUNDS, optimize_decoupled, optimize_full

mech = TMechanism.from_rho((1.0,) * 7)
grid = GridConfig(0.0, 1.0, 10, 10, 2.0, normalize_z=True)
cfg = OptConfig((1.0,) * 7, TMECH_BOUNDS, mesh0=0.5, mesh_tol=1e-2)

full = optimize_full(mech, cfg, grid)
print(f"full set : V = {full.V_opt:.4f} after {full.evaluations} evaluations, rho = {full.rho_opt.round(3)}")

grouped = optimize_decoupled(mech, cfg, grid, stage3=True)
for name, stage in zip(("limbs 1+3", "limb 2", "all"), grouped.stages):
    print(f"{name:>9}: V = {stage.V_opt:.4f}, {stage.evaluations} new evaluations")
print(f"grouped  : V = {grouped.V_opt:.4f} after {grouped.evaluations} evaluations, rho = {grouped.rho_opt.round(3)}")
