import numpy as np
import pytest

from newtonflow import linalg
from newtonflow.linalg import (
    LuFactors,
    SingularError,
    det,
    inverse_norm,
    lu_decompose,
    operator_norm,
    solve,
    solve_dense,
    spectral_extremes,
)
from newtonflow.maps import builtin


def _well_conditioned(rng, n, cond=1e3):
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.logspace(0.0, -np.log10(cond), n)
    return q1 @ np.diag(s) @ q2


def _reconstruct(factors: LuFactors, a):
    n = factors.dim
    lo = np.tril(factors.lu, -1) + np.eye(n)
    up = np.triu(factors.lu)
    pa = np.asarray(a, dtype=float)[factors.permutation()]
    return pa, lo @ up


def _charpoly_sigma_min(a):
    """Brute-force sigma_min for n <= 3: roots of the characteristic
    polynomial of A^T A, assembled by hand (independent of any SVD code)."""
    b = np.asarray(a, dtype=float)
    b = b.T @ b
    n = b.shape[0]
    if n == 1:
        coeffs = [1.0, -b[0, 0]]
    elif n == 2:
        coeffs = [1.0, -(b[0, 0] + b[1, 1]), b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]]
    elif n == 3:
        tr = b[0, 0] + b[1, 1] + b[2, 2]
        m01 = b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]
        m02 = b[0, 0] * b[2, 2] - b[0, 2] * b[2, 0]
        m12 = b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1]
        d = (
            b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
            - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
            + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
        )
        coeffs = [1.0, -tr, m01 + m02 + m12, -d]
    else:
        raise ValueError("brute force limited to n <= 3")
    roots = np.roots(coeffs)
    return float(np.sqrt(max(np.min(roots.real), 0.0)))


def test_identity_factors_trivially():
    f = lu_decompose(np.eye(3))
    np.testing.assert_array_equal(f.lu, np.eye(3))
    assert f.sign == 1.0
    assert det(f) == 1.0
    assert sorted(f.permutation().tolist()) == [0, 1, 2]


def test_permutation_matrix_pivots():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    f = lu_decompose(a)
    assert f.sign == -1.0
    assert det(f) == -1.0
    pa, lu = _reconstruct(f, a)
    np.testing.assert_allclose(pa, lu, atol=1e-15)


def test_planar_oracle_jacobian_at_origin_is_identity():
    m = builtin("zampieri-ex5")
    j = m.jacobian((0.0, 0.0))
    np.testing.assert_allclose(j, np.eye(2), atol=1e-15)
    f = lu_decompose(j)
    np.testing.assert_allclose(f.lu, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(solve(f, (1.0, 0.0)), (1.0, 0.0), atol=1e-15)


def test_solve_identity_returns_rhs():
    f = lu_decompose(np.eye(4))
    b = np.array([1.0, -2.0, 3.0, 0.5])
    np.testing.assert_array_equal(solve(f, b), b)


def test_solve_recovers_constructed_solution():
    rng = np.random.default_rng(7)
    a = _well_conditioned(rng, 5)
    x0 = rng.standard_normal(5)
    b = a @ x0
    x = solve(lu_decompose(a), b)
    assert np.linalg.norm(x - x0) <= 1e-10 * np.linalg.norm(x0)


def test_solve_dimension_mismatch():
    f = lu_decompose(np.eye(3))
    with pytest.raises(ValueError):
        solve(f, np.ones(2))


def test_inverse_norm_identity_and_diagonal():
    assert inverse_norm(np.eye(3)) == pytest.approx(1.0)
    assert inverse_norm(np.diag([2.0, 0.5])) == pytest.approx(2.0)


def test_inverse_norm_arctan_derivative():
    # d/dx arctan = 1/(1+x^2); at x=3 the inverse derivative is 10
    x = 3.0
    a = np.array([[1.0 / (1.0 + x * x)]])
    assert inverse_norm(a) == pytest.approx(10.0, rel=1e-12)


def test_det_examples():
    assert det(lu_decompose(np.diag([2.0, 3.0]))) == pytest.approx(6.0)
    m = builtin("zampieri-ex5")
    rng = np.random.default_rng(3)
    for _ in range(50):
        xi, eta = rng.uniform(-3, 3, size=2)
        j = m.jacobian((xi, eta))
        expected = np.exp(2 * xi) / (1 + eta * eta)
        brute = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
        assert det(lu_decompose(j)) == pytest.approx(expected, rel=1e-12)
        assert brute == pytest.approx(expected, rel=1e-12)


def test_reconstruction_property():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        a = _well_conditioned(rng, n)
        f = lu_decompose(a)
        pa, lu = _reconstruct(f, a)
        norm_a = np.abs(a).sum(axis=1).max()
        assert np.abs(pa - lu).sum(axis=1).max() <= 1e-12 * norm_a


def test_solve_matvec_round_trip_at_cond_1e6():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        a = _well_conditioned(rng, n, cond=1e6)
        x = rng.standard_normal(n)
        got = solve(lu_decompose(a), a @ x)
        assert np.linalg.norm(got - x) <= 1e-9 * np.linalg.norm(x)


def test_inverse_norm_against_charpoly_oracle():
    rng = np.random.default_rng(5)
    for _ in range(300):
        n = int(rng.integers(1, 4))
        a = _well_conditioned(rng, n, cond=100.0)
        sigma_min = _charpoly_sigma_min(a)
        assert inverse_norm(a) * sigma_min == pytest.approx(1.0, rel=1e-7)


def test_inverse_norm_lower_bound():
    rng = np.random.default_rng(6)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        a = _well_conditioned(rng, n, cond=1e4)
        assert inverse_norm(a) >= 1.0 / operator_norm(a) - 1e-12


def test_singular_matrix_raises_with_column():
    with pytest.raises(SingularError) as ei:
        lu_decompose(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert ei.value.column == 1
    with pytest.raises(SingularError):
        lu_decompose(np.zeros((3, 3)))
    with pytest.raises(SingularError):
        inverse_norm(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_non_finite_input_rejected():
    with pytest.raises(ValueError):
        lu_decompose(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        lu_decompose(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_spectral_extremes_small_dims_match_svd():
    rng = np.random.default_rng(9)
    for n in (1, 2, 3, 5):
        for _ in range(50):
            a = rng.standard_normal((n, n))
            smax, smin = spectral_extremes(a)
            s = np.linalg.svd(a, compute_uv=False)
            assert smax == pytest.approx(float(s[0]), rel=1e-10, abs=1e-12)
            assert smin == pytest.approx(float(s[-1]), rel=1e-8, abs=1e-12)


def test_solve_dense_matches_two_step_path():
    rng = np.random.default_rng(13)
    for n in (1, 2, 4):
        a = _well_conditioned(rng, n)
        b = rng.standard_normal(n)
        np.testing.assert_allclose(solve_dense(a, b), solve(lu_decompose(a), b), rtol=1e-14)
