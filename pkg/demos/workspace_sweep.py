"""Dexterous workspace volume of both mechanisms as k_max grows.

Run: python demos/workspace_sweep.py
"""
from parawork import GridConfig, Prs3, Prs3Params, TMechanism, boundary_search

prs = Prs3(Prs3Params(0.62, 1.0, 0.0))
tm = TMechanism.from_rho((2.0092, 1.7207, 2.2441, 1.9355, 1.5, 0.8398, 3.0))

print(f"{'k_max':>8} {'3-PRS':>10} {'T-mech':>10}")
for k in (1.5, 2.0, 4.0, 6.0, 20.0):
    v_prs = boundary_search(prs, GridConfig(0.001, 1.0, 40, 40, k)).total_volume
    v_tm = boundary_search(tm, GridConfig(0.0, 1.0, 40, 40, k, normalize_z=True)).total_volume
    print(f"{k:>8} {v_prs:>10.4f} {v_tm:>10.4f}")

det = GridConfig(0.0, 1.0, 40, 40, float("inf"), boundary_mode="det", normalize_z=True)
print(f"{'det':>8} {'':>10} {boundary_search(tm, det).total_volume:>10.4f}")

b = boundary_search(tm, GridConfig(0.0, 1.0, 10, 12, 2.0, normalize_z=True))
print("\nboundary radius per slice (T-mech, k_max = 2):")
for z, r in zip(b.z, b.radius.mean(axis=1)):
    print(f"  z' = {z:.1f}  mean sqrt(psi^2 + theta^2) = {r:.3f} rad")
