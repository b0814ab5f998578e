"""Lax pair, spectral polynomial and hyperelliptic curve of the confluent system.

``L(lam) = A lam^2 + (q ^ p) lam - q (x) q`` and ``M(lam) = A lam + q ^ p``
with the wedge convention ``u ^ v = v (x) u - u (x) v``.  Under this
convention ``dL/dt = [M, L]`` holds identically along the flow; the opposite
wedge gives the transposed Lax matrix and fails the identity by a sign.

Substituting ``x = mu / lam^2`` in ``det(L(lam) - mu) = 0`` gives the curve
``Q(x) = lam^2 prod(a_i - x)`` with::

    Q(x) = prod_j (a_j - x) * ( F_n / (a_n - x) - K^2 / (a_n - x)^2
                                + sum_{i<n} F_i / (a_i - x) )

The ``-K^2`` sign is the one compatible with ``det(L - mu)`` for the
integrals of :mod:`neumann.integrals`; in particular ``Q(a_n) =
-K^2 prod_{j<n} (a_j - a_n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P

from .dynamics import PhasePoint, PotentialSpec, _check_dims, vector_field
from .errors import DomainError, NumericalError, StructuralError
from .integrals import IntegralVector, _require_confluent, confluent_integrals

CLUSTER_TOL = 1e-8
RANK_TOL = 1e-8
ROOT_SEPARATION_TOL = 1e-6


def wedge(u: np.ndarray, v: np.ndarray, broken: bool = False) -> np.ndarray:
    """``v (x) u - u (x) v``; ``broken=True`` flips it (negative control)."""
    w = np.outer(v, u) - np.outer(u, v)
    return -w if broken else w


@dataclass(frozen=True)
class LaxData:
    """Coefficients of ``L(lam) = A2 lam^2 + A1 lam + A0``."""

    A2: np.ndarray
    A1: np.ndarray
    A0: np.ndarray

    @classmethod
    def at(cls, pt: PhasePoint, pot: PotentialSpec, broken_wedge: bool = False) -> "LaxData":
        _check_dims(pt, pot)
        return cls(
            A2=np.diag(pot.eigenvalues),
            A1=wedge(pt.q, pt.p, broken_wedge),
            A0=-np.outer(pt.q, pt.q),
        )

    def L(self, lam: complex) -> np.ndarray:
        return self.A2 * lam**2 + self.A1 * lam + self.A0

    def M(self, lam: complex) -> np.ndarray:
        return self.A2 * lam + self.A1

    @property
    def rotation_block(self) -> np.ndarray:
        """Lower-right 2x2 block of ``A1``; equals ``[[0, -K], [K, 0]]``."""
        return self.A1[-2:, -2:]


def lax_matrix(pt: PhasePoint, pot: PotentialSpec, lam: complex) -> np.ndarray:
    return LaxData.at(pt, pot).L(lam)


def lax_m(pt: PhasePoint, pot: PotentialSpec, lam: complex) -> np.ndarray:
    return LaxData.at(pt, pot).M(lam)


def lax_residual(pt: PhasePoint, pot: PotentialSpec, lam: complex, broken_wedge: bool = False) -> float:
    """Max-norm of ``dL/dt - [M, L]`` with ``dL/dt`` from the chain rule."""
    data = LaxData.at(pt, pot, broken_wedge)
    tan = vector_field(pt, pot)
    q = pt.q
    dA1 = wedge(tan.dq, pt.p, broken_wedge) + wedge(q, tan.dp, broken_wedge)
    dA0 = -(np.outer(tan.dq, q) + np.outer(q, tan.dq))
    dL = dA1 * lam + dA0
    L, M = data.L(lam), data.M(lam)
    return float(np.max(np.abs(dL - (M @ L - L @ M))))


def _charpoly_det(matrix: np.ndarray) -> np.ndarray:
    """Coefficients ``c_k`` (ascending) of ``det(matrix - mu I)``."""
    dim = matrix.shape[0]
    monic = np.poly(matrix)  # det(mu I - matrix), descending
    return (-1) ** dim * monic[::-1]


def spectral_poly(pt: PhasePoint, pot: PotentialSpec, holdout_tol: float = 1e-8) -> np.ndarray:
    """Coefficient table ``c[i, k]`` of ``det(L(lam) - mu) = sum c_ik lam^i mu^k``.

    Each ``mu``-coefficient is a polynomial of degree ``2(n+1)`` in ``lam``;
    it is sampled at Chebyshev nodes, interpolated, and checked against a
    direct determinant at a holdout ``(lam, mu)``.
    """
    data = LaxData.at(pt, pot)
    dim = pot.dim
    deg = 2 * dim
    # lam ~ 1/sqrt(a) balances the A lam^2 and q q^T terms
    scale = 1.0 / np.sqrt(np.min(pot.eigenvalues))
    nodes = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    samples = np.array([_charpoly_det(data.L(scale * t)) for t in nodes])
    cheb = C.chebfit(nodes, samples, deg)
    mono = np.zeros((deg + 1, dim + 1))
    for k in range(dim + 1):
        col = C.cheb2poly(cheb[:, k])  # trims trailing zeros
        mono[: col.size, k] = col
    table = mono / scale ** np.arange(deg + 1)[:, None]
    table = np.real_if_close(table)

    lam_h, mu_h = 0.613 * scale, 0.37 * float(np.max(pot.eigenvalues))
    direct = np.linalg.det(data.L(lam_h) - mu_h * np.eye(dim))
    interp = P.polyval2d(lam_h, mu_h, table)
    ref = max(abs(direct), np.max(np.abs(samples)))
    if abs(interp - direct) > holdout_tol * ref:
        raise NumericalError(
            f"spectral polynomial interpolation failed holdout: |{interp:.6g} - {direct:.6g}| > {holdout_tol:g} * {ref:.3g}"
        )
    return table


def isospectral_drift(tables: list[np.ndarray]) -> float:
    """Largest relative change of a spectral-polynomial coefficient.

    Coefficients that vanish at the first sample (odd powers of ``lam``) are
    measured relative to the largest coefficient instead.
    """
    ref = tables[0]
    scale = np.max(np.abs(ref))
    denom = np.where(np.abs(ref) > 1e-10 * scale, np.abs(ref), scale)
    return float(max(np.max(np.abs(t - ref) / denom) for t in tables[1:])) if len(tables) > 1 else 0.0


def evaluate_spectral_poly(table: np.ndarray, lam: complex, mu: complex) -> complex:
    return P.polyval2d(lam, mu, table)


@dataclass(frozen=True)
class SpectralData:
    """Curve data; polynomial coefficients are ascending in ``x``."""

    q_coeffs: np.ndarray
    full_curve: np.ndarray
    normalized_curve: np.ndarray
    genus_normalized: int
    genus_arith_singular: int
    smooth: bool
    sing_type: str  # "node" | "cusp"


def _linear_product(roots) -> np.ndarray:
    """Ascending coefficients of ``prod (r - x)``."""
    out = np.array([1.0])
    for r in roots:
        out = P.polymul(out, [r, -1.0])
    return out


def hyperelliptic_genus(degree: int) -> int:
    return (degree - 1) // 2


def has_double_root(coeffs: np.ndarray, tol: float = ROOT_SEPARATION_TOL) -> bool:
    """True when some computed root also (nearly) annihilates the derivative.

    Root separation alone is unreliable: rounding splits a root of
    multiplicity m by ~eps^(1/m), while ``|f'|`` there shrinks to ~eps^((m-1)/m).
    ``|f'(r)|`` is measured against the magnitude of its own terms at ``r``.
    """
    coeffs = P.polytrim(np.asarray(coeffs, dtype=float), 0.0)
    if coeffs.size < 3:
        return False
    roots = P.polyroots(coeffs)
    deriv = P.polyder(coeffs)
    size = P.polyval(np.abs(roots), np.abs(deriv))
    return bool(np.any(np.abs(P.polyval(roots, deriv)) <= tol * size))


def _exact_linear_product(roots: list[Fraction]) -> list[Fraction]:
    out = [Fraction(1)]
    for r in roots:
        nxt = [Fraction(0)] * (len(out) + 1)
        for k, c in enumerate(out):
            nxt[k] += r * c
            nxt[k + 1] -= c
        out = nxt
    return out


def curve_polynomial(F: np.ndarray, K: float, a: np.ndarray) -> np.ndarray:
    """Ascending coefficients of ``Q(x)`` for integrals ``F_1..F_n`` and ``K``.

    The expansion is carried out exactly in rationals from the float inputs
    and rounded once.  Near-coincident eigenvalues make the ``F_i`` large with
    cancelling contributions, and a float expansion loses several digits
    there (seen directly in ``Q(a_n)``).
    """
    F = np.asarray(F, dtype=float)
    a = np.asarray(a, dtype=float)
    n = F.size
    if a.size != n + 1:
        raise StructuralError(f"need {n + 1} eigenvalues for {n} integrals, got {a.size}")
    fa = [Fraction(float(x)) for x in a[:n]]
    fF = [Fraction(float(x)) for x in F]
    k2 = Fraction(float(K)) ** 2
    an = fa[n - 1]
    Q = [Fraction(0)] * (n + 1)
    base = _exact_linear_product(fa[: n - 1])
    for k, c in enumerate(_exact_linear_product(fa[: n - 1] + [an])):
        Q[k] += fF[n - 1] * c
    for k, c in enumerate(base):
        Q[k] -= k2 * c
    for i in range(n - 1):
        others = _exact_linear_product(fa[:i] + fa[i + 1 : n - 1] + [an, an])
        for k, c in enumerate(others):
            Q[k] += fF[i] * c
    return np.array([float(c) for c in Q])


def q_from_integrals(iv: IntegralVector, pot: PotentialSpec, k_tol: float = 0.0) -> SpectralData:
    _require_confluent(pot)
    a = pot.eigenvalues
    n = pot.n
    if iv.F.size != n:
        raise StructuralError(f"expected {n} integrals, got {iv.F.size}")
    Q = curve_polynomial(iv.F, iv.K, a)
    full = P.polymul(Q, _linear_product(a))
    normalized = P.polymul(Q, _linear_product(a[: n - 1]))
    return SpectralData(
        q_coeffs=Q,
        full_curve=full,
        normalized_curve=normalized,
        genus_normalized=hyperelliptic_genus(2 * n - 1),
        genus_arith_singular=hyperelliptic_genus(2 * n + 1),
        smooth=not has_double_root(normalized),
        sing_type="cusp" if abs(iv.K) <= k_tol else "node",
    )


def node_identity_residual(pt: PhasePoint, pot: PotentialSpec) -> float:
    """``|Q(a_n) + K^2 prod_{j<n} (a_j - a_n)|``; zero on the curve."""
    iv = confluent_integrals(pt, pot)
    a = pot.eigenvalues
    Q = curve_polynomial(iv.F, iv.K, a)
    an = a[-1]
    return abs(P.polyval(an, Q) + iv.K**2 * np.prod(a[:-2] - an))


def eigen_curve_check(pt: PhasePoint, pot: PotentialSpec, lam: complex) -> float:
    """Max over eigenvalues ``mu`` of ``L(lam)`` of ``|Q(x) - lam^2 prod(a_i - x)|``, ``x = mu/lam^2``."""
    if lam == 0:
        raise DomainError("lam must be nonzero")
    iv = confluent_integrals(pt, pot)
    Q = curve_polynomial(iv.F, iv.K, pot.eigenvalues)
    try:
        mus = np.linalg.eigvals(lax_matrix(pt, pot, lam))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solver failed at lam={lam}") from exc
    x = mus / lam**2
    rhs = lam**2 * np.prod(pot.eigenvalues[None, :] - x[:, None], axis=1)
    return float(np.max(np.abs(P.polyval(x, Q) - rhs)))


def eigenspace_dims(matrix: np.ndarray, cluster_tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL):
    """``[(eigenvalue, geometric multiplicity), ...]`` with eigenvalues clustered."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise StructuralError("eigenspace_dims needs a square matrix")
    dim = matrix.shape[0]
    eig = np.linalg.eigvals(matrix)
    eig = eig[np.lexsort((eig.imag, eig.real))]
    clusters: list[list[complex]] = []
    for mu in eig:
        if clusters and abs(mu - np.mean(clusters[-1])) <= cluster_tol * max(1.0, abs(mu)):
            clusters[-1].append(mu)
        else:
            clusters.append([mu])
    norm = max(np.linalg.norm(matrix, 2), 1e-300)
    out = []
    for cl in clusters:
        mu = complex(np.mean(cl))
        sv = np.linalg.svd(matrix - mu * np.eye(dim), compute_uv=False)
        mult = int(np.sum(sv <= rank_tol * norm))
        value = mu.real if mu.imag == 0 else mu
        out.append((value, max(mult, 1)))
    return out


def is_regular(matrix: np.ndarray) -> bool:
    """All eigenspaces one-dimensional."""
    return all(m == 1 for _, m in eigenspace_dims(matrix))
