import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puccimax import (
    NonSymmetric,
    PucciParams,
    UnsupportedDimension,
    eigenvalues_sym,
    jacobi_eigensystem,
    pucci_plus,
    pucci_plus_degenerate,
    sup_over_bases_bruteforce,
    symmetrize,
)

P2 = PucciParams(lam=1.0, Lam=2.0, dim=2)
P3 = PucciParams(lam=1.0, Lam=2.0, dim=3)


def random_sym(rng, n):
    a = rng.uniform(-1.0, 1.0, size=(n, n))
    return 0.5 * (a + a.T)


# --- eigenvalues ---


def test_eigenvalues_diagonal():
    assert np.allclose(eigenvalues_sym(np.diag([3.0, 1.0])), [1.0, 3.0], atol=1e-14)


def test_eigenvalues_offdiag():
    # characteristic polynomial t^2 - 1 = 0 by hand
    vals = eigenvalues_sym(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(vals, [-1.0, 1.0], atol=1e-14)


def test_eigenvalues_zero_matrix():
    assert np.allclose(eigenvalues_sym(np.zeros((3, 3))), [0.0, 0.0, 0.0])


def test_eigenpair_residual():
    rng = np.random.default_rng(42)
    for n in (2, 3, 4):
        for _ in range(20):
            a = random_sym(rng, n)
            vals, vecs = jacobi_eigensystem(a)
            norm = np.linalg.norm(a)
            for j in range(n):
                res = np.linalg.norm(a @ vecs[:, j] - vals[j] * vecs[:, j])
                assert res <= 1e-10 * (1.0 + norm)
            assert np.all(np.diff(vals) >= -1e-14)


def test_non_symmetric_rejected():
    with pytest.raises(NonSymmetric):
        symmetrize(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NonSymmetric):
        pucci_plus(P2, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_symmetrize_tolerates_roundoff():
    a = np.array([[1.0, 0.5 + 1e-14], [0.5, 2.0]])
    s = symmetrize(a)
    assert np.allclose(s, s.T)


# --- pucci_plus ---


def test_pucci_plus_examples():
    assert pucci_plus(P2, np.diag([1.0, 1.0])) == pytest.approx(4.0, abs=1e-12)
    assert pucci_plus(P2, np.diag([1.0, -1.0])) == pytest.approx(1.0, abs=1e-12)
    assert pucci_plus(P3, np.diag([2.0, 0.0, -3.0])) == pytest.approx(1.0, abs=1e-12)


def test_pucci_plus_degenerate_examples():
    assert pucci_plus_degenerate(2.0, np.diag([1.0, -1.0])) == pytest.approx(2.0, abs=1e-12)
    assert pucci_plus_degenerate(3.0, np.diag([1.0, 1.0])) == pytest.approx(6.0, abs=1e-12)
    assert pucci_plus_degenerate(1.0, np.diag([-1.0, -2.0])) == pytest.approx(0.0, abs=1e-12)


def test_rotation_invariance():
    rng = np.random.default_rng(7)
    for _ in range(25):
        a = random_sym(rng, 2)
        q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
        assert pucci_plus(P2, q.T @ a @ q) == pytest.approx(pucci_plus(P2, a), abs=1e-10)


def test_monotonicity():
    rng = np.random.default_rng(8)
    for _ in range(25):
        a = random_sym(rng, 2)
        c = rng.normal(size=(2, 2))
        b = a + c @ c.T  # positive semidefinite bump
        assert pucci_plus(P2, a) <= pucci_plus(P2, b) + 1e-10


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    st.floats(0.0, 3.0),
)
def test_positive_homogeneity(entries, t):
    a = np.array([[entries[0], entries[2]], [entries[2], entries[1]]])
    assert pucci_plus(P2, t * a) == pytest.approx(t * pucci_plus(P2, a), abs=1e-9 * (1 + abs(t)))


def test_lam_equal_Lam_is_scaled_trace():
    p = PucciParams(lam=1.5, Lam=1.5, dim=3)
    rng = np.random.default_rng(9)
    for _ in range(10):
        a = random_sym(rng, 3)
        assert pucci_plus(p, a) == pytest.approx(1.5 * np.trace(a), abs=1e-10)


# --- brute-force oracle ---


def test_bruteforce_diag_matches():
    got = sup_over_bases_bruteforce(P2, np.diag([1.0, -1.0]), 1e-3)
    assert got == pytest.approx(1.0, abs=1e-4)


def test_bruteforce_isotropic_exact():
    # objective is constant over bases for multiples of the identity
    got = sup_over_bases_bruteforce(P2, np.eye(2), 0.3)
    assert got == pytest.approx(4.0, abs=1e-12)


def test_bruteforce_random_2d():
    rng = np.random.default_rng(10)
    for _ in range(10):
        a = random_sym(rng, 2)
        exact = pucci_plus(P2, a)
        got = sup_over_bases_bruteforce(P2, a, 1e-3)
        assert abs(got - exact) <= 1e-4 * (1.0 + abs(exact))


def test_bruteforce_3d_matches_literal_grid():
    # independent route: literally enumerate the Givens triple grid
    def literal(params, a, step):
        def givens(p, q, t):
            g = np.eye(3)
            g[p, p] = g[q, q] = math.cos(t)
            g[p, q] = -math.sin(t)
            g[q, p] = math.sin(t)
            return g

        grid = np.arange(0.0, math.pi, step)
        best = -np.inf
        for t1 in grid:
            for t2 in grid:
                for t3 in grid:
                    rot = givens(0, 1, t1) @ givens(0, 2, t2) @ givens(0, 1, t3)
                    q = np.einsum("ji,jk,ki->i", rot, a, rot)
                    best = max(best, float(np.maximum(params.lam * q, params.Lam * q).sum()))
        return best

    rng = np.random.default_rng(11)
    for _ in range(3):
        a = random_sym(rng, 3)
        step = 0.35
        assert sup_over_bases_bruteforce(P3, a, step) == pytest.approx(
            literal(P3, a, step), abs=1e-10
        )


def test_bruteforce_3d_close_to_eigen_route():
    rng = np.random.default_rng(12)
    for _ in range(3):
        a = random_sym(rng, 3)
        exact = pucci_plus(P3, a)
        got = sup_over_bases_bruteforce(P3, a, 2e-2)
        assert abs(got - exact) <= 1e-3 * (1.0 + abs(exact))


def test_bruteforce_dim_guard():
    with pytest.raises(UnsupportedDimension):
        sup_over_bases_bruteforce(PucciParams(1.0, 2.0, 4), np.eye(4), 0.1)
    with pytest.raises(ValueError):
        sup_over_bases_bruteforce(P2, np.eye(2), 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        PucciParams(lam=-1.0, Lam=2.0, dim=2)
    with pytest.raises(ValueError):
        PucciParams(lam=3.0, Lam=2.0, dim=2)
    with pytest.raises(ValueError):
        PucciParams(lam=0.0, Lam=0.0, dim=2)
    degenerate = PucciParams(lam=0.0, Lam=2.0, dim=2)
    assert degenerate.min_step_scale == pytest.approx(math.sqrt(2.0))
