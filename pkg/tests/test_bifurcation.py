import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P
from scipy.optimize import least_squares

from conftest import random_confluent, tangent_basis
from neumann import (
    DomainError,
    EMValue,
    IntegralVector,
    PotentialSpec,
    classify_value,
    confluent_integrals,
    discriminant,
    energy_momentum,
    integral_gradients,
    integrate,
    project_to_manifold,
    q_from_integrals,
    random_phase_point,
    scan,
    scan_values,
)
from neumann.bifurcation import DISCRIMINANT_ZERO, image_lower_bound, sylvester_matrix
from neumann.lax import has_double_root


# --- discriminant ------------------------------------------------------------

def test_discriminant_examples():
    assert discriminant([3.0, -4.0, 1.0]) == pytest.approx(4.0, rel=1e-14)
    assert discriminant([4.0, -4.0, 1.0]) == pytest.approx(0.0, abs=1e-13)
    with pytest.raises(DomainError):
        discriminant([1.0, 2.0, 0.0])
    with pytest.raises(DomainError):
        discriminant([1.0])


def test_sylvester_shape():
    S = sylvester_matrix([1.0, 2.0, 3.0], [4.0, 5.0])
    assert S.shape == (3, 3)
    np.testing.assert_array_equal(S, [[3, 2, 1], [5, 4, 0], [0, 5, 4]])


coef = st.floats(-5, 5, allow_nan=False).filter(lambda v: abs(v) > 1e-3)


@settings(max_examples=200, deadline=None)
@given(st.tuples(coef, coef, coef))
def test_quadratic_closed_form(abc):
    a, b, c = abc
    assert discriminant([c, b, a]) == pytest.approx(b * b - 4 * a * c, rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.tuples(coef, coef, coef, coef))
def test_cubic_closed_form(abcd):
    a, b, c, d = abcd
    closed = b * b * c * c - 4 * a * c**3 - 4 * b**3 * d - 27 * a * a * d * d + 18 * a * b * c * d
    scale = max(abs(x) for x in abcd) ** 4
    assert abs(discriminant([d, c, b, a]) - closed) <= 1e-9 * max(abs(closed), scale * 1e-3)


def test_discriminant_from_roots(rng):
    # disc = a_d^(2d-2) prod_{i<j} (r_i - r_j)^2
    for d in (2, 3, 4, 5):
        roots = rng.uniform(-2, 2, d)
        lead = rng.uniform(0.5, 2)
        c = lead * P.polyfromroots(roots)
        expected = lead ** (2 * d - 2) * np.prod([(roots[i] - roots[j]) ** 2 for i in range(d) for j in range(i + 1, d)])
        assert discriminant(c) == pytest.approx(expected, rel=1e-9)


# --- classification ----------------------------------------------------------

def test_classify_examples(pot122):
    c = classify_value(EMValue([1.0], 0.0), pot122)
    assert not c.regular
    assert DISCRIMINANT_ZERO in c.reasons
    c = classify_value(EMValue([0.0], 1.0), pot122)
    assert not c.regular and "F_I_ZERO(1)" in c.reasons
    c = classify_value(EMValue([0.5], 0.3), pot122)
    assert c.regular and c.reasons == frozenset()


def test_classify_example_discriminant(pot122):
    # f = 0.5, k = 0.3: Q = -0.09 (1 - x) + 0.5 (2 - x)^2 + 0.5 (1 - x)(2 - x)
    Q = q_from_integrals(IntegralVector(np.array([0.5, 0.5]), 0.3), pot122).q_coeffs
    np.testing.assert_allclose(Q, [2.91, -3.41, 1.0])
    assert discriminant(Q) == pytest.approx(3.41**2 - 4 * 2.91, rel=1e-12)


def test_regular_iff_no_reasons(rng):
    for n in (2, 3):
        pot = random_confluent(rng, n)
        for _ in range(200):
            c = classify_value(EMValue(rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1)), pot)
            assert c.regular == (not c.reasons)


def test_focus_thread_all_indices(pot211):
    c = classify_value(EMValue([1.0], 0.0), pot211)  # 2H = a_1 = 2
    assert "FOCUS_THREAD(1)" in c.reasons
    c = classify_value(EMValue([0.0], 0.0), pot211)  # 2H = a_2 = 1
    assert "FOCUS_THREAD(2)" in c.reasons


def test_f_n_zero_not_flagged(pot211):
    # F_2 = 0 with K != 0 stays regular, see the rank evidence below
    c = classify_value(EMValue([1.0], 0.5), pot211)
    assert c.regular


def find_point(pot, target, rng, tries=20):
    """Constrained point with energy-momentum value ``target`` (least squares)."""
    dim = pot.dim

    def resid(z):
        x = project_to_manifold(z[:dim], z[dim:], ctol=1e-9)
        return energy_momentum(x, pot) - target

    best = None
    for _ in range(tries):
        sol = least_squares(resid, rng.standard_normal(2 * dim), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or sol.cost < best.cost:
            best = sol
        if np.max(np.abs(sol.fun)) <= 1e-10:
            break
    return project_to_manifold(best.x[:dim], best.x[dim:], ctol=1e-9), float(np.max(np.abs(best.fun)))


def test_f_n_zero_rank_full(rng, pot211):
    x, res = find_point(pot211, np.array([1.0, 0.5]), rng)
    assert res <= 1e-9
    g = integral_gradients(x, pot211)
    jac = np.array([np.append(gi.dF_dq, gi.dF_dp) for gi in (g[0], g[2])]) @ tangent_basis(x)
    assert np.linalg.svd(jac, compute_uv=False).min() > 1e-3


def test_classification_constant_along_trajectory(pot122):
    x0 = project_to_manifold([0.3, 0.8, 0.5], [0.2, -0.1, 0.4])
    traj = integrate(x0, pot122, 1e-3, 5.0)
    ref = classify_value(EMValue(energy_momentum(x0, pot122)[:-1], confluent_integrals(x0, pot122).K), pot122)
    assert ref.regular
    for i in range(0, len(traj), 250):
        x = traj.point(i)
        iv = confluent_integrals(x, pot122)
        assert classify_value(EMValue(iv.F[:-1], iv.K), pot122) == ref


def test_regular_implies_smooth(rng):
    for n in (2, 3):
        pot = random_confluent(rng, n)
        for _ in range(300):
            f = rng.uniform(-1, 1, n - 1)
            k = rng.uniform(-1, 1)
            if classify_value(EMValue(f, k), pot).regular:
                sd = q_from_integrals(IntegralVector(np.append(f, 1 - f.sum()), k), pot)
                assert sd.smooth and not has_double_root(sd.normalized_curve)


def test_node_cusp_along_k(pot122):
    F = np.array([0.3, 0.7])
    types = [q_from_integrals(IntegralVector(F, k), pot122).sing_type for k in np.linspace(-1, 1, 201)]
    assert types[100] == "cusp"
    assert all(t == "node" for i, t in enumerate(types) if i != 100)


# --- scan --------------------------------------------------------------------

def test_scan_shape_and_markers(pot122):
    grid = scan(pot122, (-2, 2, 200), (0, 5, 200))
    assert grid.shape == (200, 200) and grid.cell_count == 40_000
    assert grid.fixed_point_images == [(0.0, 1.0), (0.0, 2.0)]
    assert {"F_1=0", "disc=0"} <= set(grid.loci)
    rows = list(grid.rows())
    assert len(rows) == 40_000
    assert rows[0][:2] == (-2.0, 0.0) and rows[1][:2] == (grid.k[1], 0.0)


def test_scan_structure_122(pot122):
    grid = scan(pot122, (-2, 2, 81), (0, 5, 81))
    # below the image nothing is realizable; well inside, values are regular
    assert not grid.realizable[grid.two_h < 1.0 - 1e-9].any()
    i = np.argmin(np.abs(grid.two_h - 2.5))
    j = np.argmin(np.abs(grid.k - 0.3))
    assert grid.regular[i, j] and grid.realizable[i, j]
    # the singular lines of the picture
    for k in (0.2, 0.5, 0.9):
        assert not classify_value(EMValue([(1 + 2 * k - 2 - k * k) / (1 - 2)], k), pot122).regular  # 2H = 1 + 2k
        assert not classify_value(EMValue([0.0], k), pot122).regular  # 2H = 2 + k^2


def test_isolated_focus_point(pot211):
    dk, dh = 4 / 199, 5 / 199
    a1, a2 = 2.0, 1.0

    def cls(k, two_h):
        f1 = (two_h - a2 - k * k) / (a1 - a2)
        return classify_value(EMValue([f1], k), pot211)

    assert not cls(0.0, 2.0).regular
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                assert cls(dj * dk, 2.0 + di * dh).regular


def test_scan_211_regular_near_point(pot211):
    grid = scan(pot211, (-2, 2, 200), (0, 5, 200))
    assert grid.fixed_point_images == [(0.0, 1.0), (0.0, 2.0)]
    i = np.argmin(np.abs(grid.two_h - 2.0))
    j = np.argmin(np.abs(grid.k))
    assert grid.regular[i - 1 : i + 2, j - 1 : j + 2].all()


def test_scan_refinement(pot122):
    coarse = scan(pot122, (-2, 2, 41), (0, 5, 41), trace=False)
    fine = scan(pot122, (-2, 2, 81), (0, 5, 81), trace=False)
    np.testing.assert_array_equal(fine.k[::2], coarse.k)
    sub = fine.regular[::2, ::2]
    assert not (~coarse.regular & sub).any()
    np.testing.assert_array_equal(sub, coarse.regular)


def test_scan_realization_oracle(pot122, rng):
    grid = scan(pot122, (-2, 2, 60), (0, 5, 60), trace=False)
    ok = np.argwhere(grid.regular & grid.realizable)
    picks = ok[rng.choice(len(ok), 10, replace=False)]
    for i, j in picks:
        target = np.array([grid.f1[i, j], grid.k[j]])
        x, res = find_point(pot122, target, rng)
        assert res <= 1e-6
        assert abs(2 * (0.5 * (x.p @ x.p + pot122.eigenvalues @ x.q**2)) - grid.two_h[i]) <= 1e-6


def test_image_lower_bound_is_attained(rng):
    # sampled points never go below the bound, and the bound is approached
    for a1, a2 in ((1.0, 2.0), (2.0, 1.0)):
        pot = PotentialSpec([a1, a2, a2], confluent=True)
        for _ in range(500):
            x = random_phase_point(rng, 3, momentum_scale=rng.uniform(0, 2))
            K = confluent_integrals(x, pot).K
            two_h = x.p @ x.p + pot.eigenvalues @ x.q**2
            assert two_h >= image_lower_bound(K, a1, a2) - 1e-12


def test_scan_empty(pot122):
    grid = scan(pot122, (-2, 2, 0), (0, 5, 200))
    assert grid.cell_count == 0 and list(grid.rows()) == []


def test_scan_errors():
    with pytest.raises(DomainError):
        scan(PotentialSpec([1.0, 2.0, 3.0, 3.0], confluent=True), (-1, 1, 5), (0, 1, 5))
    with pytest.raises(DomainError):
        PotentialSpec([2.0, 2.0, 2.0], confluent=True)


def test_scan_deterministic_threads(pot122, monkeypatch):
    monkeypatch.setenv("NEUMANN_THREADS", "1")
    one = scan(pot122, (-2, 2, 50), (0, 5, 50), trace=False)
    monkeypatch.setenv("NEUMANN_THREADS", "7")
    many = scan(pot122, (-2, 2, 50), (0, 5, 50), trace=False)
    assert list(one.rows()) == list(many.rows())


def test_scan_values_general_n(rng):
    pot = PotentialSpec([1.0, 2.0, 3.0, 3.0], confluent=True)
    nodes, regular, reasons = scan_values(pot, [(-0.5, 1, 7), (-0.5, 1, 5)], (-1, 1, 4))
    assert regular.shape == (7, 5, 4) and len(reasons) == 140
    m = 0
    for f1 in nodes[0]:
        for f2 in nodes[1]:
            for k in nodes[2]:
                assert classify_value(EMValue([f1, f2], k), pot).reasons == reasons[m]
                m += 1
