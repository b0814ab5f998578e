"""Reduction by the rotation symmetry.

Rotating the doubled eigenplane leaves H unchanged.  Fixing K = k and
quotienting by the rotation gives a Neumann system on one sphere less, plus
a centrifugal barrier k^2 / r^2.  With every eigenvalue doubled the quotient
is a Rosochatius system.
"""

import numpy as np

from neumann import (
    PotentialSpec,
    full_rosochatius_reduce,
    hamiltonian,
    integrate,
    project_to_manifold,
    random_phase_point,
    reduce,
    reduced_flow,
    reduced_hamiltonian,
    rosochatius_potential,
)

pot = PotentialSpec([1.0, 2.0, 2.0], confluent=True)
x0 = project_to_manifold([0.3, 0.8, 0.5], [0.2, -0.1, 0.4])
rp0 = reduce(x0, pot)
print(f"reduced point: q_hat = {np.round(rp0.q_hat, 4)}, p_hat = {np.round(rp0.p_hat, 4)}, "
      f"k = {rp0.k:.4f}, phi = {rp0.phi:.4f}")
print("H upstairs - H_r downstairs:", hamiltonian(x0, pot) - reduced_hamiltonian(rp0, pot))

# integrate both systems and compare after reducing the upstairs trajectory
up = integrate(x0, pot, h=1e-3, t_end=10.0)
down = reduced_flow(rp0, pot, h=1e-3, t_end=10.0)
gap = max(np.abs(reduce(up.point(i), pot).q_hat - down.q[i]).max() for i in range(0, len(up), 100))
print(f"largest distance between the two reduced trajectories: {gap:.1e}")

# all eigenvalues doubled: A = diag(1, 1, 3, 3)
rng = np.random.default_rng(3)
x = random_phase_point(rng, 4)
r, p_r, k = full_rosochatius_reduce(x, [1.0, 1.0, 3.0, 3.0])
upstairs = 0.5 * (x.p @ x.p + np.array([1.0, 1.0, 3.0, 3.0]) @ x.q**2)
print("Rosochatius energy gap:", upstairs - (0.5 * p_r @ p_r + rosochatius_potential(r, [1.0, 3.0], k)))
