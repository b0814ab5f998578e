"""First integrals of the generic and confluent Neumann systems.

Every ``F`` below has the shape::

    F(q, p) = sum_k alpha_k q_k^2 + 1/2 sum_{i,j} W_ij L_ij^2,   L = q p^T - p q^T

with a symmetric weight matrix ``W``.  The gradient then has the closed
form ``dF/dq = 2 alpha*q + 2 (W*L) p`` and ``dF/dp = -2 (W*L) q``, so all
integrals share one evaluator.

Denominators are ``a_i - a_j`` (``F_i`` gets ``+L_ij^2 / (a_i - a_j)``).  This
is the sign for which ``sum F_i = 1`` and ``sum a_i F_i + K^2 = 2H`` both hold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import PhasePoint, PotentialSpec, _check_dims, hamiltonian
from .errors import DomainError


@dataclass(frozen=True)
class IntegralVector:
    F: np.ndarray
    K: float


@dataclass(frozen=True)
class GradientPair:
    """Ambient gradient of a function on ``R^(n+1) x R^(n+1)``."""

    dF_dq: np.ndarray
    dF_dp: np.ndarray


@dataclass(frozen=True)
class ConfluentLimit:
    limit_lhs: float
    limit_rhs: float
    gap: float
    # |F_i^g - F_i| for i < n, and |F_n^g + F_{n+1}^g - F_n|
    continuity_gaps: np.ndarray


def _momenta(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.outer(q, p) - np.outer(p, q)


def _inv_diff(a: np.ndarray) -> np.ndarray:
    """``1 / (a_i - a_j)`` with zeros wherever ``a_i == a_j``."""
    diff = a[:, None] - a[None, :]
    out = np.zeros_like(diff)
    np.divide(1.0, diff, out=out, where=diff != 0)
    return out


def _generic_weights(a: np.ndarray):
    """``(alpha, W)`` for each Uhlenbeck integral ``F_i^g``."""
    inv = _inv_diff(a)
    dim = a.size
    out = []
    for i in range(dim):
        alpha = np.zeros(dim)
        alpha[i] = 1.0
        w = np.zeros((dim, dim))
        w[i, :] = inv[i, :]
        w[:, i] = inv[i, :]
        out.append((alpha, w))
    return out


def _confluent_weights(a: np.ndarray):
    """``(alpha, W)`` for ``F_1, ..., F_n`` of the confluent system."""
    dim = a.size
    n = dim - 1
    weights = _generic_weights(a)[: n - 1]
    alpha = np.zeros(dim)
    alpha[n - 1 :] = 1.0
    w = np.zeros((dim, dim))
    for j in range(n - 1):
        c = 1.0 / (a[n - 1] - a[j])
        w[j, n - 1] = w[n - 1, j] = c
        w[j, n] = w[n, j] = c
    weights.append((alpha, w))
    return weights


def _evaluate(q, p, weights) -> np.ndarray:
    L2 = _momenta(q, p) ** 2
    q2 = q * q
    return np.array([alpha @ q2 + 0.5 * np.sum(w * L2) for alpha, w in weights])


def _gradient(q, p, alpha, w) -> GradientPair:
    WL = w * _momenta(q, p)
    return GradientPair(dF_dq=2.0 * alpha * q + 2.0 * WL @ p, dF_dp=-2.0 * WL @ q)


def _require_confluent(pot: PotentialSpec):
    if not pot.confluent:
        raise DomainError("operation needs a confluent potential (a[n] == a[n+1])")


def uhlenbeck_generic(pt: PhasePoint, pot: PotentialSpec) -> np.ndarray:
    """Uhlenbeck integrals ``F_1^g .. F_{n+1}^g`` for a simple spectrum."""
    _check_dims(pt, pot)
    a = pot.eigenvalues
    if np.unique(a).size != a.size:
        raise DomainError("repeated eigenvalues: use confluent_integrals")
    return _evaluate(pt.q, pt.p, _generic_weights(a))


def angular_momentum(pt: PhasePoint) -> float:
    """Angular momentum ``K`` in the plane of the last two coordinates."""
    q, p = pt.q, pt.p
    return float(q[-2] * p[-1] - q[-1] * p[-2])


def confluent_integrals(pt: PhasePoint, pot: PotentialSpec) -> IntegralVector:
    _check_dims(pt, pot)
    _require_confluent(pot)
    F = _evaluate(pt.q, pt.p, _confluent_weights(pot.eigenvalues))
    return IntegralVector(F=F, K=angular_momentum(pt))


def energy_momentum(pt: PhasePoint, pot: PotentialSpec) -> np.ndarray:
    """Energy-momentum map ``(F_1, ..., F_{n-1}, K)``."""
    iv = confluent_integrals(pt, pot)
    return np.append(iv.F[:-1], iv.K)


def integral_gradients(pt: PhasePoint, pot: PotentialSpec) -> list[GradientPair]:
    """Analytic gradients of ``F_1, ..., F_n, K, H`` in that order."""
    _check_dims(pt, pot)
    _require_confluent(pot)
    q, p, a = pt.q, pt.p, pot.eigenvalues
    grads = [_gradient(q, p, alpha, w) for alpha, w in _confluent_weights(a)]
    dK_dq = np.zeros_like(q)
    dK_dp = np.zeros_like(p)
    dK_dq[-2], dK_dq[-1] = p[-1], -p[-2]
    dK_dp[-2], dK_dp[-1] = -q[-1], q[-2]
    grads.append(GradientPair(dK_dq, dK_dp))
    grads.append(GradientPair(a * q, p.copy()))
    return grads


def poisson_bracket(g1: GradientPair, g2: GradientPair) -> float:
    """Canonical bracket ``sum(df/dq dg/dp - df/dp dg/dq)``."""
    return float(g1.dF_dq @ g2.dF_dp - g1.dF_dp @ g2.dF_dq)


def relation_residuals(pt: PhasePoint, pot: PotentialSpec) -> tuple[float, float]:
    """``(|sum F - 1|, |sum a_i F_i + K^2 - 2H|)``."""
    iv = confluent_integrals(pt, pot)
    a = pot.eigenvalues[:-1]
    return abs(iv.F.sum() - 1.0), abs(a @ iv.F + iv.K**2 - 2.0 * hamiltonian(pt, pot))


def confluent_limit_check(pt: PhasePoint, pot_base: PotentialSpec, delta: float) -> ConfluentLimit:
    """Compare ``delta/2 (F_n^g - F_{n+1}^g)`` on ``diag(.., a_n + delta, a_n)`` with ``K^2``.

    The gap closes linearly in ``delta``.
    """
    _check_dims(pt, pot_base)
    _require_confluent(pot_base)
    if delta == 0:
        raise DomainError("delta must be nonzero")
    a = np.array(pot_base.eigenvalues)
    a[-2] += delta
    if np.unique(a).size != a.size:
        raise DomainError(f"perturbed spectrum {a} is not simple")
    Fg = _evaluate(pt.q, pt.p, _generic_weights(a))
    conf = confluent_integrals(pt, pot_base)
    # delta * (F_n^g - F_{n+1}^g) with the 1/delta pole cancelled by hand;
    # the naive difference of two O(1/delta) numbers loses ~eps/delta
    q, L2 = pt.q, _momenta(pt.q, pt.p) ** 2
    inv = _inv_diff(a)
    scaled = delta * (q[-2] ** 2 - q[-1] ** 2 + inv[-2, :-2] @ L2[-2, :-2] - inv[-1, :-2] @ L2[-1, :-2])
    lhs = 0.5 * (scaled + 2.0 * L2[-2, -1])
    rhs = conf.K**2
    cont = np.append(np.abs(Fg[:-2] - conf.F[:-1]), abs(Fg[-2] + Fg[-1] - conf.F[-1]))
    return ConfluentLimit(limit_lhs=float(lhs), limit_rhs=float(rhs), gap=float(abs(lhs - rhs)), continuity_gaps=cont)
