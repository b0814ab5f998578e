"""Integrating the Neumann flow on T*S^2.

A particle on the unit sphere under the potential 1/2 <q, A q>, with
A = diag(1, 2, 2).  We start from a generic point, integrate with bare RATTLE
and with the fourth-order composition, and compare how well each keeps the
energy and the constraints.
"""

import numpy as np

from neumann import PotentialSpec, hamiltonian, integrate, project_to_manifold

pot = PotentialSpec([1.0, 2.0, 2.0], confluent=True)

# any (q, p) in R^3 x R^3 is pulled onto |q| = 1, <q, p> = 0
x0 = project_to_manifold([0.3, 0.8, 0.5], [0.2, -0.1, 0.4])
H0 = hamiltonian(x0, pot)
print(f"start q = {np.round(x0.q, 4)}, p = {np.round(x0.p, 4)}, H = {H0:.6f}")

for order in (2, 4):
    traj = integrate(x0, pot, h=1e-3, t_end=20.0, order=order)
    H = 0.5 * (np.sum(traj.p**2, axis=1) + traj.q**2 @ pot.eigenvalues)
    norm, tan = traj.constraint_residuals()
    print(f"order {order}: {len(traj) - 1} steps, max |H - H0| / H0 = {np.max(np.abs(H - H0)) / H0:.1e}, "
          f"constraint residual {max(norm.max(), tan.max()):.1e}")

# the circle q = (0, cos t, sin t) is an exact solution with period 2 pi
circle = integrate(project_to_manifold([0, 1, 0], [0, 0, 1]), pot, h=1e-3, t_end=2 * np.pi)
print("return error after one period:", np.abs(circle.q[-1] - circle.q[0]).max())
