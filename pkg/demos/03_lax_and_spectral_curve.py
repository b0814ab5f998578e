"""Lax pair and spectral curve.

L(lam) = A lam^2 + (q ^ p) lam - q q^T evolves by dL/dt = [M, L], so
det(L(lam) - mu) is constant along the flow.  Its zero set becomes the curve
y^2 = Q(x) prod(a_i - x) with Q built from the integrals.  In the confluent
case the curve has a double point over x = a_n: a node when K != 0 and a
cusp when K = 0.
"""

import numpy as np
from numpy.polynomial import polynomial as P

from neumann import (
    IntegralVector,
    PotentialSpec,
    confluent_integrals,
    eigen_curve_check,
    integrate,
    lax_residual,
    project_to_manifold,
    q_from_integrals,
    spectral_poly,
)
from neumann.lax import isospectral_drift

pot = PotentialSpec([1.0, 2.0, 2.0], confluent=True)
x0 = project_to_manifold([0.3, 0.8, 0.5], [0.2, -0.1, 0.4])

print("Lax residual at lam = 0.8 + 0.5i:", lax_residual(x0, pot, 0.8 + 0.5j))
print("same with the opposite wedge   :", lax_residual(x0, pot, 0.8 + 0.5j, broken_wedge=True))

traj = integrate(x0, pot, h=1e-3, t_end=5.0)
tables = [spectral_poly(traj.point(i), pot) for i in range(0, len(traj), 500)]
print(f"spectral polynomial drift over t = 5: {isospectral_drift(tables):.1e}")

iv = confluent_integrals(x0, pot)
sd = q_from_integrals(iv, pot)
print("Q(x) coefficients (ascending):", np.round(sd.q_coeffs, 6))
print("curve check at lam = 1.3:", eigen_curve_check(x0, pot, 1.3))
a = pot.eigenvalues
print("Q(a_n) =", P.polyval(a[-1], sd.q_coeffs), " -K^2 (a_1 - a_n) =", -iv.K**2 * (a[0] - a[-1]))
print("genus of the normalized curve:", sd.genus_normalized, " arithmetic genus:", sd.genus_arith_singular)

for k in (0.5, 1e-8, 0.0):
    print(f"K = {k:g}: singularity is a {q_from_integrals(IntegralVector(iv.F, k), pot).sing_type}")
