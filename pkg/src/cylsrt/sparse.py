"""Immutable compressed-sparse-column matrices.

The storage is the classic CSC triple (column pointers, row indices,
values).  Forward application accumulates column-by-column; the adjoint
runs a row gather over the same arrays via the transpose view, so no
transposed copy is kept unless :func:`transpose` is called explicitly.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, ValidationError


@dataclass(frozen=True)
class SparseOperator:
    """CSC matrix with non-negative arc-length weights (units: length).

    Invariants enforced at construction: monotone column pointers,
    strictly increasing row indices within each column (duplicates must
    have been summed), finite non-negative values.
    """

    n_rows: int
    n_cols: int
    column_pointers: np.ndarray
    row_indices: np.ndarray
    values: np.ndarray
    description: str = ""

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValidationError(f"matrix dimensions must be positive, got "
                                  f"{self.n_rows}x{self.n_cols}")
        ptr = np.ascontiguousarray(self.column_pointers, dtype=np.int64)
        idx = np.ascontiguousarray(self.row_indices, dtype=np.int64)
        val = np.ascontiguousarray(self.values, dtype=np.float64)
        if ptr.ndim != 1 or ptr.size != self.n_cols + 1:
            raise ValidationError(f"column_pointers must have length n_cols+1="
                                  f"{self.n_cols + 1}, got {ptr.size}")
        if ptr[0] != 0 or ptr[-1] != idx.size or np.any(np.diff(ptr) < 0):
            raise ValidationError("column_pointers must rise monotonically from 0 to nnz")
        if idx.size != val.size:
            raise ValidationError("row_indices and values must have equal length")
        if idx.size:
            if idx.min() < 0 or idx.max() >= self.n_rows:
                raise ValidationError("row index outside [0, n_rows)")
            if idx.size > 1:
                # pairs crossing a column boundary are exempt from ordering
                crossing = np.zeros(idx.size - 1, dtype=bool)
                starts = ptr[1:-1]
                starts = starts[(starts > 0) & (starts < idx.size)]
                crossing[starts - 1] = True
                d = np.diff(idx)
                if np.any(d[~crossing] <= 0):
                    raise ValidationError("row indices must increase strictly "
                                          "within each column")
        if not np.all(np.isfinite(val)):
            raise ValidationError("matrix values must be finite")
        if val.size and val.min() < 0:
            raise ValidationError("matrix values must be non-negative")
        object.__setattr__(self, "column_pointers", ptr)
        object.__setattr__(self, "row_indices", idx)
        object.__setattr__(self, "values", val)

    @property
    def nnz(self) -> int:
        return self.values.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @cached_property
    def _csc(self) -> sp.csc_matrix:
        m = sp.csc_matrix((self.values, self.row_indices, self.column_pointers),
                          shape=self.shape)
        m.has_canonical_format = True
        return m

    def _check_cols(self, x: np.ndarray):
        if x.shape[0] != self.n_cols:
            raise DimensionError(f"operand has {x.shape[0]} entries, "
                                 f"matrix has {self.n_cols} columns")

    def _check_rows(self, y: np.ndarray):
        if y.shape[0] != self.n_rows:
            raise DimensionError(f"operand has {y.shape[0]} entries, "
                                 f"matrix has {self.n_rows} rows")

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        self._check_cols(x)
        return self._csc @ x

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        """Apply the transpose (row gather on the CSC arrays, no copy)."""
        y = np.asarray(y, dtype=np.float64)
        self._check_rows(y)
        return self._csc.T @ y

    def matmat(self, other: np.ndarray) -> np.ndarray:
        other = np.asarray(other, dtype=np.float64)
        self._check_cols(other)
        return self._csc @ other

    def rmatmat(self, other: np.ndarray) -> np.ndarray:
        other = np.asarray(other, dtype=np.float64)
        self._check_rows(other)
        return self._csc.T @ other

    def toarray(self) -> np.ndarray:
        return self._csc.toarray()

    def row_sums(self) -> np.ndarray:
        return np.asarray(self._csc.sum(axis=1)).ravel()

    def max_entries_per_row(self) -> int:
        if self.nnz == 0:
            return 0
        return int(np.bincount(self.row_indices, minlength=self.n_rows).max())


def from_triplets(n_rows: int, n_cols: int, rows: np.ndarray, cols: np.ndarray,
                  vals: np.ndarray, description: str = "") -> SparseOperator:
    """Compress COO triplets: duplicates summed, rows sorted per column."""
    coo = sp.coo_matrix((vals, (rows, cols)), shape=(n_rows, n_cols))
    csc = coo.tocsc()
    csc.sum_duplicates()
    csc.sort_indices()
    return SparseOperator(n_rows, n_cols,
                          csc.indptr.astype(np.int64),
                          csc.indices.astype(np.int64),
                          np.asarray(csc.data, dtype=np.float64),
                          description)


_TRANSPOSE_TAG = " [transposed]"


def transpose(op: SparseOperator) -> SparseOperator:
    """Exact structural transpose (a permutation; no arithmetic), stored in
    canonical CSC order so that transposing twice is bit-identical."""
    t = op._csc.transpose().tocsc()
    t.sort_indices()
    if op.description.endswith(_TRANSPOSE_TAG):
        desc = op.description[:-len(_TRANSPOSE_TAG)]
    else:
        desc = op.description + _TRANSPOSE_TAG
    return SparseOperator(op.n_cols, op.n_rows,
                          t.indptr.astype(np.int64),
                          t.indices.astype(np.int64),
                          np.asarray(t.data, dtype=np.float64),
                          desc)
