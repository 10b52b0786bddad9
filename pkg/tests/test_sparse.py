import numpy as np
import pytest

from timegrit import sparse
from timegrit.eddy import assemble_mass, assemble_stiffness
from timegrit.materials import linear_materials


def dense_gauss_solve(a, b):
    """Independent dense oracle: Gaussian elimination with partial pivoting."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = a.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            raise ZeroDivisionError("singular")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        for i in range(k + 1, n):
            f = a[i, k] / a[k, k]
            a[i, k:] -= f * a[k, k:]
            b[i] -= f * b[k]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - a[i, i + 1:] @ x[i + 1:]) / a[i, i]
    return x


def test_spmv_identity():
    a = sparse.from_dense(np.eye(4))
    x = np.array([1.0, -2.0, 3.0, 0.5])
    np.testing.assert_array_equal(sparse.spmv(a, x), x)


def test_spmv_zero_matrix():
    a = sparse.from_dense(np.zeros((3, 3)))
    np.testing.assert_array_equal(sparse.spmv(a, np.ones(3)), np.zeros(3))


def test_spmv_against_dense(rng):
    dense = rng.normal(size=(3, 3))
    a = sparse.from_dense(dense)
    x = rng.normal(size=3)
    np.testing.assert_allclose(sparse.spmv(a, x), dense @ x, rtol=0, atol=1e-15)


def test_spmv_dimension_mismatch():
    a = sparse.from_dense(np.eye(3))
    with pytest.raises(ValueError):
        sparse.spmv(a, np.ones(4))


def test_csr_indices_sorted_unique():
    a = sparse.from_coo(3, [0, 0, 1, 2, 0], [2, 0, 1, 2, 2], [1.0, 2.0, 3.0, 4.0, 5.0])
    for i in range(3):
        cols = a.column_indices[a.row_offsets[i]:a.row_offsets[i + 1]]
        assert np.all(np.diff(cols) > 0)
    assert a.csr[0, 2] == 6.0  # duplicates summed


def test_factorize_diagonal():
    a = sparse.from_dense(np.diag([2.0, 4.0, 8.0]))
    f = sparse.factorize(a)
    np.testing.assert_allclose(sparse.solve(f, np.array([2.0, 4.0, 8.0])), np.ones(3))


def test_factorize_zero_matrix_singular():
    a = sparse.from_coo(3, [0], [0], [0.0])
    with pytest.raises(sparse.SingularMatrixError):
        sparse.factorize(a)


def test_solve_zero_rhs():
    a = sparse.from_dense(np.diag([1.0, 2.0]))
    f = sparse.factorize(a)
    np.testing.assert_array_equal(sparse.solve(f, np.zeros(2)), np.zeros(2))


def test_solve_constructed_rhs(rng):
    dense = rng.normal(size=(20, 20)) + 20.0 * np.eye(20)
    a = sparse.from_dense(dense)
    f = sparse.factorize(a)
    b = sparse.spmv(a, np.ones(20))
    x = sparse.solve(f, b)
    np.testing.assert_allclose(x, np.ones(20), rtol=1e-10)


def test_solve_matches_dense_oracle(rng):
    dense = rng.normal(size=(50, 50)) + 50.0 * np.eye(50)
    a = sparse.from_dense(dense)
    b = rng.normal(size=50)
    x = sparse.solve(sparse.factorize(a), b)
    x_ref = dense_gauss_solve(dense, b)
    np.testing.assert_allclose(x, x_ref, rtol=1e-10, atol=1e-12)


def test_solve_dimension_mismatch():
    f = sparse.factorize(sparse.from_dense(np.eye(3)))
    with pytest.raises(ValueError):
        sparse.solve(f, np.ones(2))


def test_assembled_system_symmetric_positive_definite(desk_mesh):
    mats = linear_materials()
    dt = 0.2 / 2048
    a = (assemble_mass(desk_mesh, mats).csr / dt
         + assemble_stiffness(desk_mesh, mats).csr).tocsr()
    free = np.setdiff1d(np.arange(desk_mesh.num_nodes), desk_mesh.boundary_nodes)
    a_red = a[free][:, free].toarray()
    scale = np.max(np.abs(a_red))
    assert np.max(np.abs(a_red - a_red.T)) <= 1e-12 * scale
    # positive definite: all Cholesky pivots positive
    np.linalg.cholesky(a_red)


def test_assembled_system_roundtrip_residual(desk_mesh, rng):
    mats = linear_materials()
    dt = 0.2 / 2048
    full = (assemble_mass(desk_mesh, mats).csr / dt
            + assemble_stiffness(desk_mesh, mats).csr).tocsr()
    free = np.setdiff1d(np.arange(desk_mesh.num_nodes), desk_mesh.boundary_nodes)
    a = sparse.SparseMatrix(full[free][:, free])
    f = sparse.factorize(a)
    x = rng.normal(size=a.dimension)
    b = sparse.spmv(a, x)
    x_back = sparse.solve(f, b)
    assert np.linalg.norm(a.csr @ x_back - b) <= 1e-10 * np.linalg.norm(b)


def test_matrix_market_roundtrip(tmp_path, rng):
    dense = np.triu(rng.normal(size=(5, 5)))
    a = sparse.from_dense(dense)
    path = tmp_path / "matrix.mtx"
    sparse.write_matrix_market(a, path)
    b = sparse.read_matrix_market(path)
    np.testing.assert_allclose(b.to_dense(), dense, rtol=0, atol=1e-15)
