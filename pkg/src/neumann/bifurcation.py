"""Singular values of the energy-momentum map ``(F_1, ..., F_{n-1}, K)``.

A value is regular exactly when the normalized curve
``w^2 = Q(x) prod_{i<n} (a_i - x)`` is smooth.  That fails on

* ``F_i = 0`` for ``i < n`` (then ``Q(a_i) = 0``),
* the zero set of the discriminant of ``Q``,
* the focus-focus thread ``K = 0, 2H = a_i``.

For two degrees of freedom the map is drawn in the ``(K, 2H)`` plane, where
``2H = a_1 f_1 + a_2 (1 - f_1) + K^2`` fixes ``f_1``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .dynamics import PotentialSpec
from .errors import DomainError, StructuralError
from .integrals import _require_confluent
from .lax import curve_polynomial

DEFAULT_H_TOL = 1e-9

F_I_ZERO = "F_I_ZERO({})"
DISCRIMINANT_ZERO = "DISCRIMINANT_ZERO"
FOCUS_THREAD = "FOCUS_THREAD({})"


def sylvester_matrix(f, g) -> np.ndarray:
    """Sylvester matrix of two polynomials given by ascending coefficients."""
    f = np.asarray(f)[::-1]
    g = np.asarray(g)[::-1]
    m, n = f.size - 1, g.size - 1
    S = np.zeros((m + n, m + n), dtype=np.result_type(f, g, float))
    for i in range(n):
        S[i, i : i + m + 1] = f
    for i in range(m):
        S[n + i, i : i + n + 1] = g
    return S


def discriminant(coeffs) -> float:
    """Discriminant from ``Res(f, f') / a_d``; coefficients ascending.

    ``discriminant([3, -4, 1])`` is ``b^2 - 4ac = 4``.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size < 2:
        raise DomainError("discriminant needs degree >= 1")
    lead = c[-1]
    if lead == 0:
        raise DomainError("leading coefficient is zero")
    d = c.size - 1
    if d == 1:
        return 1.0
    res = np.linalg.det(sylvester_matrix(c, P.polyder(c)))
    return float((-1) ** (d * (d - 1) // 2) * res / lead)


def _batch_discriminant(coeffs: np.ndarray) -> np.ndarray:
    """Discriminants of many polynomials of one degree, rows ascending."""
    d = coeffs.shape[-1] - 1
    if d == 1:
        return np.ones(coeffs.shape[0])
    desc = coeffs[:, ::-1]
    der = (desc[:, :-1] * np.arange(d, 0, -1))
    size = 2 * d - 1
    S = np.zeros((coeffs.shape[0], size, size))
    for i in range(d - 1):
        S[:, i, i : i + d + 1] = desc
    for i in range(d):
        S[:, d - 1 + i, i : i + d] = der
    return (-1) ** (d * (d - 1) // 2) * np.linalg.det(S) / desc[:, 0]


def discriminant_scale(coeffs: np.ndarray) -> np.ndarray:
    """``max|c|^(2d-2)``: the discriminant is homogeneous of that degree."""
    coeffs = np.atleast_2d(coeffs)
    d = coeffs.shape[-1] - 1
    return np.max(np.abs(coeffs), axis=-1) ** (2 * d - 2)


@dataclass(frozen=True)
class EMValue:
    """Value ``(f_1, ..., f_{n-1}, k)`` of the energy-momentum map."""

    f: np.ndarray
    k: float

    def __post_init__(self):
        object.__setattr__(self, "f", np.atleast_1d(np.asarray(self.f, dtype=float)))

    @property
    def f_n(self) -> float:
        return 1.0 - float(self.f.sum())

    @property
    def all_f(self) -> np.ndarray:
        return np.append(self.f, self.f_n)

    def two_h(self, pot: PotentialSpec) -> float:
        return float(pot.eigenvalues[:-1] @ self.all_f + self.k**2)


@dataclass(frozen=True)
class Classification:
    regular: bool
    reasons: frozenset = field(default_factory=frozenset)


def _basis(a: np.ndarray):
    """``Q = sum_i F_i B_i - K^2 B_K``; returns ``(B, B_K)`` as coefficient rows."""
    n = a.size - 1
    B = np.array([curve_polynomial(np.eye(n)[i], 0.0, a) for i in range(n)])
    BK = -curve_polynomial(np.zeros(n), 1.0, a)
    return B, BK


def _classify_arrays(f_all: np.ndarray, k: np.ndarray, a: np.ndarray, h_tol: float):
    """Vectorized classification; ``f_all`` has shape ``(m, n)``."""
    n = a.size - 1
    B, BK = _basis(a)
    Q = f_all @ B + np.outer(-(k**2), BK)
    disc = _batch_discriminant(Q)
    disc_zero = np.abs(disc) <= h_tol * discriminant_scale(Q)
    two_h = f_all @ a[:-1] + k**2
    f_zero = np.abs(f_all[:, : n - 1]) <= h_tol
    thread = (np.abs(k) <= h_tol)[:, None] & (np.abs(two_h[:, None] - a[None, :-1]) <= h_tol)
    return disc, disc_zero, f_zero, thread


def _reasons(disc_zero, f_zero, thread) -> frozenset:
    out = [F_I_ZERO.format(i + 1) for i in np.flatnonzero(f_zero)]
    if disc_zero:
        out.append(DISCRIMINANT_ZERO)
    out.extend(FOCUS_THREAD.format(i + 1) for i in np.flatnonzero(thread))
    return frozenset(out)


def classify_value(em: EMValue, pot: PotentialSpec, h_tol: float = DEFAULT_H_TOL) -> Classification:
    _require_confluent(pot)
    if em.f.size != pot.n - 1:
        raise StructuralError(f"expected {pot.n - 1} values f_i, got {em.f.size}")
    _, disc_zero, f_zero, thread = _classify_arrays(
        em.all_f[None, :], np.array([em.k]), pot.eigenvalues, h_tol
    )
    reasons = _reasons(disc_zero[0], f_zero[0], thread[0])
    return Classification(regular=not reasons, reasons=reasons)


def image_lower_bound(k, a1: float, a2: float):
    """Smallest ``2H`` reachable at angular momentum ``k`` (two degrees of freedom).

    Minimizes ``a1 + k^2/s + (a2 - a1) s`` over ``s = r^2 in (0, 1]``.
    """
    k = np.abs(np.asarray(k, dtype=float))
    d = a2 - a1
    out = a2 + k**2
    if d > 0:
        inner = k < math.sqrt(d)
        out = np.where(inner, a1 + 2.0 * k * math.sqrt(d), out)
    return np.where(k == 0, min(a1, a2), out)


def axis_nodes(spec) -> np.ndarray:
    lo, hi, count = spec
    count = int(count)
    if count < 0:
        raise DomainError("axis count must be non-negative")
    return np.linspace(float(lo), float(hi), count)


def _threads() -> int:
    raw = os.environ.get("NEUMANN_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    return value if value > 0 else (os.cpu_count() or 1)


@dataclass
class ScanGrid:
    """Classification of a ``(K, 2H)`` grid; arrays are indexed ``[row(2H), col(K)]``."""

    k: np.ndarray
    two_h: np.ndarray
    f1: np.ndarray
    discriminant: np.ndarray
    regular: np.ndarray
    realizable: np.ndarray
    reasons: list
    eigenvalues: np.ndarray
    loci: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.two_h.size, self.k.size

    @property
    def cell_count(self) -> int:
        return self.regular.size

    @property
    def fixed_point_images(self) -> list[tuple[float, float]]:
        return [(0.0, float(a)) for a in np.unique(self.eigenvalues)]

    def rows(self):
        """Row-major ``(k, 2h, regular, realizable, reasons)`` tuples."""
        for i, th in enumerate(self.two_h):
            for j, kv in enumerate(self.k):
                yield float(kv), float(th), bool(self.regular[i, j]), bool(self.realizable[i, j]), self.reasons[i][j]


def _scan_rows(a, k_nodes, rows, h_tol):
    a1, a2 = a[0], a[1]
    KK, HH = np.meshgrid(k_nodes, rows)
    k = KK.ravel()
    two_h = HH.ravel()
    f1 = (two_h - a2 - k**2) / (a1 - a2)
    f_all = np.column_stack([f1, 1.0 - f1])
    disc, disc_zero, f_zero, thread = _classify_arrays(f_all, k, a, h_tol)
    reasons = [_reasons(disc_zero[m], f_zero[m], thread[m]) for m in range(k.size)]
    return f1, disc, reasons


def scan(pot: PotentialSpec, k_axis, h2_axis, h_tol: float = DEFAULT_H_TOL, trace: bool = True) -> ScanGrid:
    """Classify every node of a ``(K, 2H)`` grid for two degrees of freedom."""
    _require_confluent(pot)
    if pot.n != 2:
        raise DomainError(f"the (K, 2H) diagram needs n = 2, got n = {pot.n}")
    a = pot.eigenvalues
    if a[0] == a[1]:
        raise DomainError("a_1 == a_2: the (K, 2H) plane does not determine f_1")
    k_nodes = axis_nodes(k_axis)
    h_nodes = axis_nodes(h2_axis)
    shape = (h_nodes.size, k_nodes.size)
    f1 = np.zeros(shape)
    disc = np.zeros(shape)
    reasons: list = [[] for _ in range(shape[0])]
    if f1.size:
        chunks = [c for c in np.array_split(np.arange(shape[0]), min(shape[0], 4 * _threads())) if c.size]
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            results = pool.map(lambda rows: _scan_rows(a, k_nodes, h_nodes[rows], h_tol), chunks)
            for rows, (cf1, cdisc, creasons) in zip(chunks, results):
                f1[rows] = cf1.reshape(rows.size, -1)
                disc[rows] = cdisc.reshape(rows.size, -1)
                for m, i in enumerate(rows):
                    reasons[i] = creasons[m * k_nodes.size : (m + 1) * k_nodes.size]
    regular = np.array([[not r for r in row] for row in reasons], dtype=bool).reshape(shape)
    bound = image_lower_bound(k_nodes, a[0], a[1])
    realizable = h_nodes[:, None] >= bound[None, :] - 1e-12 * max(1.0, float(np.max(a)))
    grid = ScanGrid(
        k=k_nodes,
        two_h=h_nodes,
        f1=f1,
        discriminant=disc,
        regular=regular,
        realizable=realizable,
        reasons=reasons,
        eigenvalues=np.array(a),
    )
    if trace and k_nodes.size >= 2 and h_nodes.size >= 2:
        grid.loci = singular_loci(pot, (k_nodes[0], k_nodes[-1]), (h_nodes[0], h_nodes[-1]))
    return grid


def scan_values(pot: PotentialSpec, f_axes, k_axis, h_tol: float = DEFAULT_H_TOL):
    """Classify a product grid over ``(f_1, ..., f_{n-1}, k)`` for any ``n``.

    Returns ``(nodes, regular, reasons)`` with ``regular`` shaped like the grid.
    """
    _require_confluent(pot)
    if len(f_axes) != pot.n - 1:
        raise StructuralError(f"need {pot.n - 1} f-axes, got {len(f_axes)}")
    nodes = [axis_nodes(ax) for ax in f_axes] + [axis_nodes(k_axis)]
    shape = tuple(x.size for x in nodes)
    mesh = np.meshgrid(*nodes, indexing="ij")
    f = np.column_stack([m.ravel() for m in mesh[:-1]]) if mesh[:-1] else np.zeros((mesh[-1].size, 0))
    k = mesh[-1].ravel()
    f_all = np.column_stack([f, 1.0 - f.sum(axis=1)])
    if k.size == 0:
        return nodes, np.zeros(shape, dtype=bool), []
    _, disc_zero, f_zero, thread = _classify_arrays(f_all, k, pot.eigenvalues, h_tol)
    reasons = [_reasons(disc_zero[m], f_zero[m], thread[m]) for m in range(k.size)]
    regular = np.array([not r for r in reasons]).reshape(shape)
    return nodes, regular, reasons


def singular_loci(pot: PotentialSpec, k_range, h2_range, resolution: int = 401) -> dict:
    """Polylines of ``{f_1 = 0}`` and ``{disc Q = 0}`` inside the image.

    Each entry maps a locus name to a list of ``(m, 2)`` arrays of
    ``(K, 2H)`` vertices.
    """
    import contourpy

    a = pot.eigenvalues
    k = np.linspace(k_range[0], k_range[1], resolution)
    h = np.linspace(h2_range[0], h2_range[1], resolution)
    KK, HH = np.meshgrid(k, h)
    f1 = (HH - a[1] - KK**2) / (a[0] - a[1])
    B, BK = _basis(a)
    f_all = np.column_stack([f1.ravel(), 1.0 - f1.ravel()])
    Q = f_all @ B + np.outer(-(KK.ravel() ** 2), BK)
    disc = (_batch_discriminant(Q) / discriminant_scale(Q)).reshape(KK.shape)
    slack = 0.5 * (h[1] - h[0])
    loci = {}
    for name, field_ in (("F_1=0", f1), ("disc=0", disc)):
        lines = contourpy.contour_generator(k, h, field_).lines(0.0)
        pieces = []
        for line in lines:
            inside = line[:, 1] >= image_lower_bound(line[:, 0], a[0], a[1]) - slack
            for run in _true_runs(inside):
                if run.stop - run.start >= 2:
                    pieces.append(np.asarray(line[run]))
        loci[name] = pieces
    return loci


def _true_runs(mask: np.ndarray):
    idx = np.flatnonzero(np.diff(np.concatenate([[0], mask.astype(int), [0]])))
    return [slice(s, e) for s, e in zip(idx[0::2], idx[1::2])]
