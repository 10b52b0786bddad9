"""Compressed-row sparse matrices and a direct factorization solver.

Thin layer over scipy.sparse: storage stays CSR with sorted, duplicate-free
column indices, and factorizations use the SuperLU direct solver.  All
per-time-step spatial systems in this package go through this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse
import scipy.sparse.linalg


class SingularMatrixError(RuntimeError):
    """Factorization hit a numerically singular pivot."""

    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


@dataclass(frozen=True)
class SparseMatrix:
    """Square sparse matrix in compressed-row storage."""

    csr: scipy.sparse.csr_matrix

    def __post_init__(self):
        mat = self.csr
        if mat.shape[0] != mat.shape[1]:
            raise ValueError(f"matrix must be square, got shape {mat.shape}")
        mat.sum_duplicates()
        mat.sort_indices()

    @property
    def dimension(self) -> int:
        return self.csr.shape[0]

    @property
    def row_offsets(self) -> np.ndarray:
        return self.csr.indptr

    @property
    def column_indices(self) -> np.ndarray:
        return self.csr.indices

    @property
    def values(self) -> np.ndarray:
        return self.csr.data

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def max_asymmetry(self) -> float:
        diff = self.csr - self.csr.T
        return float(np.max(np.abs(diff.toarray()))) if diff.nnz else 0.0


def from_coo(dimension: int, rows, cols, vals) -> SparseMatrix:
    """Assemble from triplets; duplicate entries are summed."""
    mat = scipy.sparse.coo_matrix(
        (np.asarray(vals, dtype=float), (rows, cols)),
        shape=(dimension, dimension)).tocsr()
    return SparseMatrix(mat)


def from_dense(a: np.ndarray) -> SparseMatrix:
    return SparseMatrix(scipy.sparse.csr_matrix(np.asarray(a, dtype=float)))


def spmv(a: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product."""
    x = np.asarray(x, dtype=float)
    if x.shape != (a.dimension,):
        raise ValueError(f"vector shape {x.shape} does not match dimension {a.dimension}")
    return a.csr @ x


@dataclass(frozen=True)
class Factorization:
    """Opaque factored form permitting repeated solves."""

    dimension: int
    lu: object


def factorize(a: SparseMatrix) -> Factorization:
    """Direct LU factorization; raises SingularMatrixError on singular pivots."""
    zero_diag = np.flatnonzero(a.csr.diagonal() == 0.0)
    try:
        lu = scipy.sparse.linalg.splu(a.csr.tocsc())
    except RuntimeError as exc:
        pivot = int(zero_diag[0]) if zero_diag.size else None
        raise SingularMatrixError(f"factorization failed: {exc}", pivot_index=pivot) from exc
    u_diag = lu.U.diagonal()
    bad = np.flatnonzero(u_diag == 0.0)
    if bad.size:
        raise SingularMatrixError(
            f"numerically singular pivot at index {int(bad[0])}", pivot_index=int(bad[0]))
    return Factorization(dimension=a.dimension, lu=lu)


def solve(f: Factorization, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for the factored matrix."""
    b = np.asarray(b, dtype=float)
    if b.shape != (f.dimension,):
        raise ValueError(f"rhs shape {b.shape} does not match dimension {f.dimension}")
    return f.lu.solve(b)


def write_matrix_market(a: SparseMatrix, path) -> None:
    """Export in MatrixMarket coordinate text format (debugging aid)."""
    scipy.io.mmwrite(str(path), a.csr.tocoo())


def read_matrix_market(path) -> SparseMatrix:
    return SparseMatrix(scipy.sparse.csr_matrix(scipy.io.mmread(str(path))))
