"""Phase space, potential and constrained flow of the Neumann system.

A particle on the unit sphere ``S^n`` in ``R^(n+1)`` moves under the
quadratic potential ``V(q) = 1/2 <q, A q>`` with ``A = diag(a)``.  In
ambient coordinates the equations of motion read::

    dq/dt = p
    dp/dt = -A q + eps q,      eps = <q, A q> - |p|^2

where the multiplier ``eps`` keeps both ``|q| = 1`` and ``<q, p> = 0``.

Trajectories are computed with RATTLE (constrained Stormer-Verlet) for the
single holonomic constraint ``g(q) = (|q|^2 - 1) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import ConstraintError, DomainError, IntegrationError, StructuralError

DEFAULT_CTOL = 1e-12

# Yoshida triple-jump weights: three symmetric second-order steps give order 4.
_YOSHIDA_OUTER = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_INNER = 1.0 - 2.0 * _YOSHIDA_OUTER


@dataclass(frozen=True)
class PotentialSpec:
    """Diagonal potential matrix ``A = diag(eigenvalues)``.

    In the confluent case only the last two eigenvalues coincide; pass them
    both, e.g. ``PotentialSpec([1, 2, 2], confluent=True)``.
    """

    eigenvalues: np.ndarray
    confluent: bool = False

    def __post_init__(self):
        a = np.array(self.eigenvalues, dtype=float).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "eigenvalues", a)
        if a.size < 2:
            raise StructuralError("need at least two eigenvalues")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise DomainError(f"eigenvalues must be finite and positive, got {a}")
        distinct = a[:-1] if self.confluent else a
        if self.confluent and a[-1] != a[-2]:
            raise DomainError("confluent potential needs a[n] == a[n+1] exactly")
        if np.unique(distinct).size != distinct.size:
            raise DomainError(f"eigenvalues must be pairwise distinct: {distinct}")

    @classmethod
    def from_eigenvalues(cls, eigenvalues: Sequence[float]) -> "PotentialSpec":
        """Build a spec, detecting confluency from a repeated last value."""
        a = np.asarray(eigenvalues, dtype=float)
        return cls(a, confluent=bool(a.size >= 2 and a[-1] == a[-2]))

    @property
    def dim(self) -> int:
        """Ambient dimension ``n + 1``."""
        return self.eigenvalues.size

    @property
    def n(self) -> int:
        """Number of degrees of freedom."""
        return self.eigenvalues.size - 1


@dataclass(frozen=True)
class PhasePoint:
    """Point ``(q, p)`` of ``T*S^n`` in ambient coordinates."""

    q: np.ndarray
    p: np.ndarray
    ctol: float = field(default=DEFAULT_CTOL, compare=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if q.shape != p.shape:
            raise StructuralError(f"q and p differ in length: {q.size} vs {p.size}")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        if self.ctol is not None:
            norm_res, tan_res = constraint_residuals(q, p)
            if norm_res > self.ctol or tan_res > self.ctol:
                raise ConstraintError(
                    f"point off T*S^n: ||q|^2-1|={norm_res:.3e}, |<q,p>|={tan_res:.3e}, ctol={self.ctol:g}"
                )

    @classmethod
    def unchecked(cls, q, p) -> "PhasePoint":
        """Ambient point with no constraint check (finite-difference probes)."""
        return cls(q, p, ctol=None)

    @property
    def dim(self) -> int:
        return self.q.size


@dataclass(frozen=True)
class Tangent:
    """Value of the constrained vector field at a point."""

    dq: np.ndarray
    dp: np.ndarray
    epsilon: float


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution; row ``i`` is the state at ``t[i]``."""

    h: float
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    @property
    def samples(self) -> Iterator[tuple[float, PhasePoint]]:
        for i in range(self.t.size):
            yield float(self.t[i]), PhasePoint.unchecked(self.q[i], self.p[i])

    def point(self, i: int) -> PhasePoint:
        return PhasePoint.unchecked(self.q[i], self.p[i])

    def constraint_residuals(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-sample ``| |q|^2 - 1 |`` and ``|<q, p>|``."""
        norm = np.abs(np.einsum("ij,ij->i", self.q, self.q) - 1.0)
        tan = np.abs(np.einsum("ij,ij->i", self.q, self.p))
        return norm, tan


def constraint_residuals(q: np.ndarray, p: np.ndarray) -> tuple[float, float]:
    return abs(float(q @ q) - 1.0), abs(float(q @ p))


def _check_dims(pt: PhasePoint, pot: PotentialSpec):
    if pt.dim != pot.dim:
        raise StructuralError(f"phase point has dimension {pt.dim}, potential {pot.dim}")


def hamiltonian(pt: PhasePoint, pot: PotentialSpec) -> float:
    """Energy ``(|p|^2 + <q, A q>) / 2``."""
    _check_dims(pt, pot)
    q, p, a = pt.q, pt.p, pot.eigenvalues
    return 0.5 * (float(p @ p) + float(a @ (q * q)))


def multiplier(q: np.ndarray, p: np.ndarray, a: np.ndarray) -> float:
    return float(a @ (q * q)) - float(p @ p)


def vector_field(pt: PhasePoint, pot: PotentialSpec) -> Tangent:
    _check_dims(pt, pot)
    q, p, a = pt.q, pt.p, pot.eigenvalues
    eps = multiplier(q, p, a)
    return Tangent(dq=p.copy(), dp=-a * q + eps * q, epsilon=eps)


def project_to_manifold(q_raw, p_raw, ctol: float = DEFAULT_CTOL) -> PhasePoint:
    """Orthogonal projection of raw vectors onto ``T*S^n``."""
    q_raw = np.asarray(q_raw, dtype=float)
    p_raw = np.asarray(p_raw, dtype=float)
    if q_raw.shape != p_raw.shape:
        raise StructuralError("q_raw and p_raw differ in shape")
    norm = np.linalg.norm(q_raw)
    if not norm > 0:
        raise DomainError("cannot project q = 0 onto the sphere")
    q = q_raw / norm
    p = p_raw - (q @ p_raw) * q
    return PhasePoint(q, p, ctol=ctol)


def random_phase_point(rng: np.random.Generator, dim: int, momentum_scale: float = 1.0) -> PhasePoint:
    """Gaussian sample projected onto ``T*S^(dim-1)``."""
    q = rng.standard_normal(dim)
    p = momentum_scale * rng.standard_normal(dim)
    return project_to_manifold(q, p)


def rattle_core(
    q: np.ndarray,
    p: np.ndarray,
    force: Callable[[np.ndarray], np.ndarray],
    h: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One RATTLE step on ``T*S`` for an arbitrary force ``-grad V``.

    The position multiplier solves ``|q_tilde + c q|^2 = 1``, a scalar
    quadratic; the root of smaller magnitude is taken so the step is
    continuous as ``h -> 0``.  The momentum multiplier is the orthogonal
    projection onto ``<q1, p1> = 0``.
    """
    # work with the displacement so that v below never divides a rounded
    # difference q1 - q by h
    step = h * (p + 0.5 * h * force(q))
    q_tilde = q + step
    qq = float(q @ q)
    b = float(q_tilde @ q)
    c0 = float(q_tilde @ q_tilde) - 1.0
    disc = b * b - qq * c0
    if disc < 0.0 or b == 0.0:
        raise IntegrationError(
            f"position multiplier has no real root (h={h:g}, discriminant={disc:.3e}); reduce the step"
        )
    c = -c0 / (b + math.copysign(math.sqrt(disc), b))
    dq = step + c * q
    q1 = q + dq
    v = dq / h + 0.5 * h * force(q1)
    p1 = v - (float(q1 @ v) / float(q1 @ q1)) * q1
    return q1, p1


def _composed_step(q, p, force, h, order):
    if order == 2:
        return rattle_core(q, p, force, h)
    q, p = rattle_core(q, p, force, _YOSHIDA_OUTER * h)
    q, p = rattle_core(q, p, force, _YOSHIDA_INNER * h)
    return rattle_core(q, p, force, _YOSHIDA_OUTER * h)


def _neumann_force(a: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    return lambda q: -a * q


def rattle_step(pt: PhasePoint, pot: PotentialSpec, h: float) -> PhasePoint:
    """Second-order symmetric symplectic step of size ``h``.

    Negative ``h`` steps backwards in time; ``rattle_step(rattle_step(x, h), -h)``
    returns ``x`` up to rounding.
    """
    _check_dims(pt, pot)
    if h == 0 or not math.isfinite(h):
        raise DomainError(f"step size must be finite and nonzero, got {h}")
    q1, p1 = rattle_core(pt.q, pt.p, _neumann_force(pot.eigenvalues), h)
    return PhasePoint(q1, p1, ctol=pt.ctol)


def step_count(h: float, t_end: float) -> int:
    if not (h > 0 and t_end > 0):
        raise DomainError(f"need h > 0 and t_end > 0, got h={h}, t_end={t_end}")
    return max(1, math.ceil(t_end / h - 1e-9))


def flow(
    q0: np.ndarray,
    p0: np.ndarray,
    force: Callable[[np.ndarray], np.ndarray],
    h: float,
    t_end: float,
    order: int = 4,
) -> Trajectory:
    """Integrate ``T*S`` dynamics for a general force, landing on ``t_end``.

    The effective step is ``t_end / ceil(t_end / h)``, never larger than ``h``.
    """
    if order not in (2, 4):
        raise DomainError(f"order must be 2 or 4, got {order}")
    steps = step_count(h, t_end)
    h_eff = t_end / steps
    dim = q0.size
    qs = np.empty((steps + 1, dim))
    ps = np.empty((steps + 1, dim))
    qs[0], ps[0] = q0, p0
    q, p = np.array(q0, dtype=float), np.array(p0, dtype=float)
    for i in range(1, steps + 1):
        q, p = _composed_step(q, p, force, h_eff, order)
        qs[i], ps[i] = q, p
    t = h_eff * np.arange(steps + 1)
    t[-1] = t_end
    return Trajectory(h=h_eff, t=t, q=qs, p=ps)


def integrate(pt: PhasePoint, pot: PotentialSpec, h: float, t_end: float, order: int = 4) -> Trajectory:
    """Trajectory of ``ceil(t_end / h)`` steps starting at ``pt``.

    ``order=2`` uses bare RATTLE steps; ``order=4`` (default) composes three
    of them per step, which keeps every structural property of RATTLE and
    lowers the energy error from ``O(h^2)`` to ``O(h^4)``.
    """
    _check_dims(pt, pot)
    traj = flow(pt.q, pt.p, _neumann_force(pot.eigenvalues), h, t_end, order)
    tol = max(pt.ctol if pt.ctol is not None else DEFAULT_CTOL, DEFAULT_CTOL)
    norm, tan = traj.constraint_residuals()
    if norm.max() > tol or tan.max() > tol:
        raise IntegrationError(f"constraint drift {max(norm.max(), tan.max()):.3e} exceeds {tol:g}")
    return traj
