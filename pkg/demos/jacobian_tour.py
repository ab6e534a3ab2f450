"""Walk through the homogeneous Jacobian of the T-mechanism at one pose.

Run: python demos/jacobian_tour.py
"""
import numpy as np

from parawork import TMechanism, build_jdh

np.set_printoptions(precision=4, suppress=True)

mech = TMechanism.from_rho((2.0092, 1.7207, 2.2441, 1.9355, 1.5, 0.8398, 3.0))
z, psi, theta = 0.6 * mech.z_max, 0.2, -0.1
state = mech.solve(z, psi, theta, strict=True)
bundle = build_jdh(state, mech, strict=True)

print(f"pose: z = {z:.2f} mm, psi = {psi} rad, theta = {theta} rad")
print("Gt (rows 1-3 actuation, 4-6 constraints):")
print(bundle.Gt)
print("J_a, actuated columns of Gt^-1 (top block in mm/rad, bottom unit-free):")
print(bundle.J_a)
print("J_dh, every entry in mm/rad:")
print(bundle.J_dh)
print(f"cond(J_dh) = {bundle.cond:.6f}")

# the same mechanism built in metres gives the same condition number
metres = mech.scaled(1e-3)
b_m = build_jdh(metres.solve(z * 1e-3, psi, theta), metres)
print(f"in metres: cond(J_dh) = {b_m.cond:.6f}, entries scale by {b_m.J_dh[0, 0] / bundle.J_dh[0, 0]:.1e}")
