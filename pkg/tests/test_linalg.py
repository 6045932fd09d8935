"""Tests for the matrix kernel: pseudoinverses, projectors, exponential.

The matrix exponential is checked against an independent high-order Taylor
oracle (and scipy) rather than against the implementation's own series.
"""

import numpy as np
import pytest
import scipy.linalg

from realize.errors import RankDeficientError, RankMismatchError
from realize.linalg import (
    generalized_inverse,
    independent_columns,
    matrix_exponential,
    normal_form_transform,
    numeric_rank,
    projectors_from_input,
    projectors_from_output,
    pseudoinverse_tall,
    pseudoinverse_wide,
)


def expm_taylor(M, terms=80):
    """Independent oracle: plain truncated Taylor series, no scaling."""
    n = M.shape[0]
    acc = np.eye(n)
    term = np.eye(n)
    for k in range(1, terms + 1):
        term = term @ M / k
        acc = acc + term
    return acc


def random_tall(rng, n, p):
    while True:
        B = rng.standard_normal((n, p))
        if numeric_rank(B) == p and np.linalg.cond(B) < 1e6:
            return B


def test_numeric_rank_basics():
    assert numeric_rank(np.zeros((3, 3))) == 0
    assert numeric_rank(np.eye(4)) == 4
    assert numeric_rank(np.diag([1.0, 1e-8, 1e-14])) == 2
    # relative tolerance: scaling the matrix must not change the rank
    assert numeric_rank(1e12 * np.diag([1.0, 1e-8, 1e-14])) == 2
    assert numeric_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1


def test_numeric_rank_tol_override():
    M = np.diag([1.0, 1e-5])
    assert numeric_rank(M) == 2
    assert numeric_rank(M, tol=1e-4) == 1


def test_pseudoinverse_tall_frozen_example():
    B = np.array([[0.0], [2.0]])
    Bp = pseudoinverse_tall(B)
    assert Bp.shape == (1, 2)
    assert np.allclose(Bp, [[0.0, 0.5]], atol=1e-15)


def test_pseudoinverse_tall_left_inverse():
    B = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    Bp = pseudoinverse_tall(B)
    assert np.max(np.abs(Bp @ B - np.eye(2))) <= 1e-12


def test_pseudoinverse_tall_rejects_rank_deficient():
    B = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficientError):
        pseudoinverse_tall(B)


def test_pseudoinverse_tall_ill_conditioned():
    # condition number 1e7 squares to 1e14 in the Gram matrix; the left
    # inverse must stay usable anyway
    B = np.array([[1.0, 0.0], [0.0, 1e-7], [0.0, 0.0]])
    Bp = pseudoinverse_tall(B)
    assert np.max(np.abs(Bp @ B - np.eye(2))) <= 1e-6


def test_pseudoinverse_wide_frozen_example():
    C = np.array([[1.0, 0.0, -3.0, 0.0]])
    Cp = pseudoinverse_wide(C)
    assert Cp.shape == (4, 1)
    assert np.allclose(Cp, np.array([[0.1], [0.0], [-0.3], [0.0]]), atol=1e-15)
    assert abs((C @ Cp)[0, 0] - 1.0) <= 1e-15


def test_pseudoinverse_wide_rejects_rank_deficient():
    C = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    with pytest.raises(RankDeficientError):
        pseudoinverse_wide(C)


def test_penrose_identities_random():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        p = int(rng.integers(1, n + 1))
        B = random_tall(rng, n, p)
        Bp = pseudoinverse_tall(B)
        for lhs, rhs in (
            (B @ Bp @ B, B),
            (Bp @ B @ Bp, Bp),
            ((B @ Bp).T, B @ Bp),
            ((Bp @ B).T, Bp @ B),
        ):
            assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_penrose_identities_wide_random():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, n + 1))
        C = random_tall(rng, n, m).T
        Cp = pseudoinverse_wide(C)
        for lhs, rhs in (
            (C @ Cp @ C, C),
            (Cp @ C @ Cp, Cp),
            ((C @ Cp).T, C @ Cp),
            ((Cp @ C).T, Cp @ C),
        ):
            assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_projectors_from_input_frozen_example():
    B = np.array([[0.0], [2.0]])
    P, Q = projectors_from_input(B)
    assert np.allclose(P, np.diag([0.0, 1.0]), atol=1e-15)
    assert np.allclose(Q, np.diag([1.0, 0.0]), atol=1e-15)


def test_projector_identities_random():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        p = int(rng.integers(1, n + 1))
        B = random_tall(rng, n, p)
        P, Q = projectors_from_input(B)
        tol = 1e-10
        assert np.max(np.abs(P @ P - P)) <= tol
        assert np.max(np.abs(Q @ Q - Q)) <= tol
        assert np.max(np.abs(P @ Q)) <= tol
        assert np.max(np.abs(P + Q - np.eye(n))) <= tol
        assert np.max(np.abs(P - P.T)) <= tol
        assert np.max(np.abs(Q - Q.T)) <= tol
        assert np.max(np.abs(P @ B - B)) <= tol * max(1.0, np.max(np.abs(B)))
        assert np.max(np.abs(Q @ B)) <= tol * max(1.0, np.max(np.abs(B)))
        assert numeric_rank(P, scale=1.0) == p
        assert numeric_rank(Q, scale=1.0) == n - p


def test_projectors_from_output_frozen_example():
    C = np.array([[1.0, -3.0]])
    M, N = projectors_from_output(C)
    assert np.allclose(M, np.array([[0.1, -0.3], [-0.3, 0.9]]), atol=1e-15)
    assert np.allclose(N, np.eye(2) - np.array([[0.1, -0.3], [-0.3, 0.9]]), atol=1e-15)
    # M C^T = C^T and N C^T = 0
    assert np.max(np.abs(M @ C.T - C.T)) <= 1e-14
    assert np.max(np.abs(N @ C.T)) <= 1e-14


def test_generalized_inverse_frozen_example():
    B = np.array([[0.0], [1.0]])
    K = np.array([[1.0, 1.0]])
    Bg = generalized_inverse(B, K)
    assert np.allclose(Bg, [[1.0, 1.0]], atol=1e-15)
    # choosing K = B^+ recovers the pseudoinverse
    Bp = pseudoinverse_tall(B)
    assert np.allclose(generalized_inverse(B, Bp), Bp, atol=1e-14)


def test_generalized_inverse_is_left_inverse():
    rng = np.random.default_rng(10)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        p = int(rng.integers(1, n))
        B = random_tall(rng, n, p)
        K = rng.standard_normal((p, n))
        if numeric_rank(K @ B) < p:
            continue
        Bg = generalized_inverse(B, K)
        assert np.max(np.abs(Bg @ B - np.eye(p))) <= 1e-9


def test_generalized_inverse_rank_error():
    B = np.array([[0.0], [1.0]])
    K = np.array([[1.0, 0.0]])  # K B = 0
    with pytest.raises(RankDeficientError):
        generalized_inverse(B, K)


def test_independent_columns_selectors():
    Q = np.diag([1.0, 0.0])
    Qh = independent_columns(Q, 1)
    assert Qh.shape == (2, 1)
    assert np.allclose(Qh[:, 0], [1.0, 0.0])
    P = np.diag([0.0, 1.0])
    Ph = independent_columns(P, 1)
    assert np.allclose(Ph[:, 0], [0.0, 1.0])


def test_independent_columns_rank_mismatch():
    with pytest.raises(RankMismatchError):
        independent_columns(np.diag([1.0, 0.0]), 2)
    with pytest.raises(RankMismatchError):
        independent_columns(np.eye(2), 1)


def test_independent_columns_span():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(2, 8))
        p = int(rng.integers(1, n + 1))
        B = random_tall(rng, n, p)
        P, _ = projectors_from_input(B)
        Ph = independent_columns(P, p)
        # selected columns span range(P): projecting them back changes nothing
        assert np.max(np.abs(P @ Ph - Ph)) <= 1e-10
        assert numeric_rank(Ph) == p


def test_independent_columns_zero_width():
    out = independent_columns(np.zeros((3, 3)), 0)
    assert out.shape == (3, 0)


def test_normal_form_transform_frozen_example():
    P = np.diag([0.0, 1.0])
    Q = np.diag([1.0, 0.0])
    T = normal_form_transform(P, Q)
    assert np.allclose(T, np.array([[0.0, 1.0], [1.0, 0.0]]), atol=1e-15)


def test_normal_form_transform_block_structure():
    rng = np.random.default_rng(12)
    for _ in range(25):
        n = int(rng.integers(2, 8))
        p = int(rng.integers(1, n + 1))
        B = random_tall(rng, n, p)
        P, Q = projectors_from_input(B)
        T = normal_form_transform(P, Q)
        D = np.linalg.solve(T, P @ T)
        expected = np.zeros((n, n))
        expected[:p, :p] = np.eye(p)
        assert np.max(np.abs(D - expected)) <= 1e-9


def test_matrix_exponential_trivial():
    assert np.allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3), atol=1e-15)
    D = matrix_exponential(np.diag([1.0, -2.0]))
    assert np.allclose(D, np.diag([np.e, np.exp(-2.0)]), rtol=1e-14)


def test_matrix_exponential_vs_taylor_oracle():
    rng = np.random.default_rng(13)
    for _ in range(25):
        M = rng.uniform(-1.0, 1.0, size=(3, 3))
        E = matrix_exponential(M)
        assert np.max(np.abs(E - expm_taylor(M))) <= 1e-10


def test_matrix_exponential_vs_scipy_large_norm():
    rng = np.random.default_rng(14)
    M = rng.standard_normal((5, 5))
    M *= 100.0 / np.linalg.norm(M, np.inf)
    E = matrix_exponential(M)
    ref = scipy.linalg.expm(M)
    assert np.max(np.abs(E - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_matrix_exponential_group_property():
    rng = np.random.default_rng(15)
    M = rng.standard_normal((4, 4))
    E1 = matrix_exponential(M)
    E2 = matrix_exponential(2.0 * M)
    assert np.max(np.abs(E1 @ E1 - E2)) <= 1e-10 * np.max(np.abs(E2))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        numeric_rank(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        pseudoinverse_tall(np.array([[np.inf], [1.0]]))
