"""Reduction of the circle symmetry of the confluent Neumann system.

Rotations in the ``(q_n, q_{n+1})`` plane preserve the confluent potential.
In cylindrical coordinates ``(q_1, .., q_{n-1}, r cos(phi), r sin(phi))`` the
energy becomes the reduced Hamiltonian on ``T*S^(n-1)``::

    H_r = 1/2 ( |p_hat|^2 + k^2 / r^2 + sum_i a_i q_hat_i^2 )

i.e. a Neumann system on one dimension less, plus a centrifugal term.  With
every eigenvalue doubled, the same construction in each eigenplane yields the
Rosochatius system.

Only the regular stratum ``r > 0`` is handled; the reduced coordinate ``r``
is always taken positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    DEFAULT_CTOL,
    PhasePoint,
    PotentialSpec,
    Trajectory,
    _check_dims,
    constraint_residuals,
    flow,
)
from .errors import ConstraintError, DomainError, FixedPointSetError, SingularPotentialError, StructuralError
from .integrals import _require_confluent, angular_momentum


@dataclass(frozen=True)
class ReducedPoint:
    """Point of ``T*S^(n-1)`` with momentum value ``k`` and fiber angle ``phi``."""

    q_hat: np.ndarray
    p_hat: np.ndarray
    k: float
    phi: float = 0.0
    ctol: float = field(default=DEFAULT_CTOL, compare=False)

    def __post_init__(self):
        q = np.array(self.q_hat, dtype=float).reshape(-1)
        p = np.array(self.p_hat, dtype=float).reshape(-1)
        if q.shape != p.shape:
            raise StructuralError("q_hat and p_hat differ in length")
        object.__setattr__(self, "q_hat", q)
        object.__setattr__(self, "p_hat", p)
        norm_res, tan_res = constraint_residuals(q, p)
        if norm_res > self.ctol or tan_res > self.ctol:
            raise ConstraintError(f"reduced point off T*S^(n-1): {norm_res:.3e}, {tan_res:.3e}")
        if not q[-1] > 0:
            raise FixedPointSetError(f"reduced radius must be positive, got r={q[-1]}")

    @property
    def r(self) -> float:
        return float(self.q_hat[-1])


def reduce(pt: PhasePoint, pot: PotentialSpec) -> ReducedPoint:
    """Cylindrical coordinates of ``pt``; the rotation angle goes to ``phi``."""
    _check_dims(pt, pot)
    _require_confluent(pot)
    q, p = pt.q, pt.p
    x, y = q[-2], q[-1]
    r2 = x * x + y * y
    ctol = pt.ctol if pt.ctol is not None else DEFAULT_CTOL
    if r2 <= ctol:
        raise FixedPointSetError(f"r^2 = {r2:.3e} <= {ctol:g}: point on the fixed set of the rotation")
    r = math.sqrt(r2)
    p_r = (x * p[-2] + y * p[-1]) / r
    phi = math.atan2(y, x) % (2 * math.pi)
    return ReducedPoint(
        q_hat=np.append(q[:-2], r),
        p_hat=np.append(p[:-2], p_r),
        k=angular_momentum(pt),
        phi=phi,
        ctol=max(ctol, DEFAULT_CTOL),
    )


def lift(rp: ReducedPoint) -> PhasePoint:
    """Inverse of :func:`reduce` using the stored angle."""
    r, p_r = rp.r, rp.p_hat[-1]
    c, s = math.cos(rp.phi), math.sin(rp.phi)
    q = np.append(rp.q_hat[:-1], [r * c, r * s])
    # radial part along (c, s), angular part k/r along (-s, c)
    p = np.append(rp.p_hat[:-1], [p_r * c - rp.k / r * s, p_r * s + rp.k / r * c])
    return PhasePoint(q, p, ctol=rp.ctol)


def _reduced_eigenvalues(pot: PotentialSpec) -> np.ndarray:
    return pot.eigenvalues[:-1]


def reduced_hamiltonian(rp: ReducedPoint, pot: PotentialSpec) -> float:
    _require_confluent(pot)
    a_hat = _reduced_eigenvalues(pot)
    if rp.q_hat.size != a_hat.size:
        raise StructuralError(f"reduced point has dimension {rp.q_hat.size}, expected {a_hat.size}")
    r = rp.r
    if r == 0:
        raise SingularPotentialError("centrifugal term diverges at r = 0")
    q, p = rp.q_hat, rp.p_hat
    return 0.5 * (float(p @ p) + rp.k**2 / r**2 + float(a_hat @ (q * q)))


def reduced_flow(rp: ReducedPoint, pot: PotentialSpec, h: float, t_end: float, order: int = 4) -> Trajectory:
    """Integrate the reduced system on ``T*S^(n-1)``.

    The last coordinate is ``r``; the centrifugal barrier keeps it away from
    zero when ``k != 0``.
    """
    _require_confluent(pot)
    a_hat = _reduced_eigenvalues(pot)
    k2 = rp.k**2

    def force(q):
        f = -a_hat * q
        f[-1] += k2 / q[-1] ** 3
        return f

    return flow(rp.q_hat, rp.p_hat, force, h, t_end, order)


def rosochatius_potential(q, a, k) -> float:
    """``1/2 sum (a_i q_i^2 + k_i^2 / q_i^2)``."""
    q = np.asarray(q, dtype=float)
    a = np.asarray(a, dtype=float)
    k = np.asarray(k, dtype=float)
    if not (q.shape == a.shape == k.shape):
        raise StructuralError("q, a and k must have the same length")
    active = k != 0
    if np.any(q[active] == 0):
        raise SingularPotentialError("q_i = 0 where k_i != 0")
    rational = np.zeros_like(q)
    rational[active] = k[active] ** 2 / q[active] ** 2
    return 0.5 * float(np.sum(a * q * q + rational))


def rosochatius_hamiltonian(q_hat, p_hat, a, k) -> float:
    p_hat = np.asarray(p_hat, dtype=float)
    return 0.5 * float(p_hat @ p_hat) + rosochatius_potential(q_hat, a, k)


def doubled_pairs(eigenvalues) -> np.ndarray:
    """Distinct values ``a_i`` of ``diag(a_1, a_1, ..., a_{n+1}, a_{n+1})``."""
    e = np.asarray(eigenvalues, dtype=float)
    if e.size % 2 or e.size < 2:
        raise StructuralError("doubled spectrum needs an even number of eigenvalues")
    a = e[0::2]
    if np.any(e[1::2] != a):
        raise DomainError(f"eigenvalues are not pairwise doubled: {e}")
    if np.any(a <= 0):
        raise DomainError("eigenvalues must be positive")
    return a


def full_rosochatius_reduce(pt: PhasePoint, eigenvalues, ctol: float = DEFAULT_CTOL):
    """Reduce by rotations in every eigenplane of a doubled spectrum.

    Returns ``(q_hat, p_hat, k)``: radii, radial momenta and per-plane angular
    momenta.  ``(q_hat, p_hat)`` lies on ``T*S^n`` and the energy upstairs is
    ``rosochatius_hamiltonian(q_hat, p_hat, a, k)``.
    """
    doubled_pairs(eigenvalues)
    if pt.dim != len(eigenvalues):
        raise StructuralError("point and spectrum differ in dimension")
    q = pt.q.reshape(-1, 2)
    p = pt.p.reshape(-1, 2)
    r2 = np.sum(q * q, axis=1)
    if np.any(r2 <= ctol):
        raise FixedPointSetError(f"some eigenplane radius vanishes: r^2 = {r2}")
    r = np.sqrt(r2)
    p_r = np.sum(q * p, axis=1) / r
    k = q[:, 0] * p[:, 1] - q[:, 1] * p[:, 0]
    return r, p_r, k
