"""First integrals of the confluent system.

With a_n = a_{n+1} the Uhlenbeck integrals F_n, F_{n+1} blow up; their sum and
the angular momentum K in the doubled eigenplane take over.  Here we check the
two linear relations, the vanishing Poisson brackets, and watch the generic
family approach the confluent one as the two eigenvalues merge.
"""

import numpy as np

from neumann import (
    PotentialSpec,
    confluent_integrals,
    confluent_limit_check,
    hamiltonian,
    integral_gradients,
    poisson_bracket,
    random_phase_point,
)

rng = np.random.default_rng(1)
pot = PotentialSpec([0.7, 1.9, 3.2, 3.2], confluent=True)
x = random_phase_point(rng, pot.dim)

iv = confluent_integrals(x, pot)
a = pot.eigenvalues[:-1]
print("F =", np.round(iv.F, 6), " K =", round(iv.K, 6))
print("sum F - 1          =", iv.F.sum() - 1)
print("sum aF + K^2 - 2H  =", a @ iv.F + iv.K**2 - 2 * hamiltonian(x, pot))

grads = integral_gradients(x, pot)
names = [f"F{i + 1}" for i in range(pot.n)] + ["K", "H"]
worst = max(abs(poisson_bracket(u, v)) for u in grads for v in grads)
print(f"largest bracket among {', '.join(names)}: {worst:.1e}")

# split a_n by delta: delta/2 (F_n - F_{n+1}) -> K^2 with an O(delta) gap
for delta in (1e-2, 1e-3, 1e-4, 1e-5):
    lim = confluent_limit_check(x, pot, delta)
    print(f"delta = {delta:.0e}: lhs = {lim.limit_lhs:.10f}, K^2 = {lim.limit_rhs:.10f}, gap = {lim.gap:.2e}")
