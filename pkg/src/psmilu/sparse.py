"""Compressed sparse containers: triplets, CRS, CCS and a small dense matrix.

Indices are 0-based throughout.  Within each row of a CRS matrix the column
indices are strictly ascending (and symmetrically for CCS); every constructor
and conversion below preserves or establishes that ordering.
"""

import numpy as np

from .errors import StructureError

INT = np.int64
REAL = np.float64


class TripletList:
    """Unordered (row, col, value) entries; duplicates allowed until conversion.

    Parameters
    ----------
    n_rows, n_cols : int
        Matrix dimensions.
    rows, cols, vals : array_like, optional
        Initial entries.
    """

    def __init__(self, n_rows, n_cols, rows=(), cols=(), vals=()):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.rows = np.asarray(rows, dtype=INT)
        self.cols = np.asarray(cols, dtype=INT)
        self.vals = np.asarray(vals, dtype=REAL)
        if not (self.rows.shape == self.cols.shape == self.vals.shape):
            raise StructureError("triplet arrays must have equal length")

    def __len__(self):
        return self.rows.size

    def append(self, i, j, v):
        self.rows = np.append(self.rows, INT(i))
        self.cols = np.append(self.cols, INT(j))
        self.vals = np.append(self.vals, REAL(v))

    def entries(self):
        """Iterate over (row, col, value) tuples."""
        for i, j, v in zip(self.rows, self.cols, self.vals):
            yield int(i), int(j), float(v)


class CRS:
    """Compressed row storage with strictly ascending column indices per row."""

    def __init__(self, n_rows, n_cols, row_start, col_ind, val, check=True):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.row_start = np.ascontiguousarray(row_start, dtype=INT)
        self.col_ind = np.ascontiguousarray(col_ind, dtype=INT)
        self.val = np.ascontiguousarray(val, dtype=REAL)
        if check:
            self._check()

    def _check(self):
        rs = self.row_start
        if rs.size != self.n_rows + 1 or rs[0] != 0:
            raise StructureError("bad row_start array")
        if np.any(np.diff(rs) < 0):
            raise StructureError("row_start must be nondecreasing")
        if rs[-1] != self.col_ind.size or self.col_ind.size != self.val.size:
            raise StructureError("index/value array length mismatch")
        if self.col_ind.size:
            if self.col_ind.min() < 0 or self.col_ind.max() >= self.n_cols:
                raise StructureError("column index out of range")
        for i in range(self.n_rows):
            seg = self.col_ind[rs[i]:rs[i + 1]]
            if seg.size > 1 and np.any(np.diff(seg) <= 0):
                raise StructureError(f"row {i} not strictly ascending")

    @property
    def nnz(self):
        return int(self.row_start[-1])

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def row(self, i):
        """Return (col_ind, val) views of row ``i``."""
        a, b = self.row_start[i], self.row_start[i + 1]
        return self.col_ind[a:b], self.val[a:b]

    def row_nnz(self):
        return np.diff(self.row_start)

    def col_nnz(self):
        return np.bincount(self.col_ind, minlength=self.n_cols).astype(INT)

    def diagonal(self):
        """Dense vector of diagonal entries (zeros where absent)."""
        d = np.zeros(min(self.n_rows, self.n_cols), dtype=REAL)
        for i in range(d.size):
            cols, vals = self.row(i)
            k = np.searchsorted(cols, i)
            if k < cols.size and cols[k] == i:
                d[i] = vals[k]
        return d

    def matvec(self, x):
        x = np.asarray(x, dtype=REAL)
        if x.shape != (self.n_cols,):
            raise StructureError("matvec dimension mismatch")
        contrib = self.val * x[self.col_ind]
        rows = np.repeat(np.arange(self.n_rows, dtype=INT), self.row_nnz())
        return np.bincount(rows, weights=contrib, minlength=self.n_rows)

    def scale(self, s, t):
        """Return diag(s) @ A @ diag(t) with the same pattern."""
        s = np.asarray(s, dtype=REAL)
        t = np.asarray(t, dtype=REAL)
        rows = np.repeat(np.arange(self.n_rows, dtype=INT), self.row_nnz())
        val = s[rows] * self.val * t[self.col_ind]
        return CRS(self.n_rows, self.n_cols, self.row_start.copy(),
                   self.col_ind.copy(), val, check=False)

    def transpose(self):
        """Return A^T as CRS (equivalently, reinterpret as the CCS of A)."""
        c = crs_to_ccs(self)
        return CRS(self.n_cols, self.n_rows, c.col_start, c.row_ind, c.val,
                   check=False)

    def to_dense(self):
        d = np.zeros((self.n_rows, self.n_cols), dtype=REAL)
        rows = np.repeat(np.arange(self.n_rows, dtype=INT), self.row_nnz())
        d[rows, self.col_ind] = self.val
        return d

    def permuted(self, p, q):
        """Return A[p, q], i.e. entry (i, j) of the result is A[p[i], q[j]]."""
        p = np.asarray(p, dtype=INT)
        q = np.asarray(q, dtype=INT)
        q_inv = invert_permutation(q)
        rows = np.repeat(np.arange(self.n_rows, dtype=INT), self.row_nnz())
        p_inv = invert_permutation(p)
        new_rows = p_inv[rows]
        new_cols = q_inv[self.col_ind]
        order = np.lexsort((new_cols, new_rows))
        ptr = np.zeros(self.n_rows + 1, dtype=INT)
        np.cumsum(np.bincount(new_rows, minlength=self.n_rows), out=ptr[1:])
        return CRS(self.n_rows, self.n_cols, ptr, new_cols[order],
                   self.val[order], check=False)


class CCS:
    """Compressed column storage, the column-major mirror of :class:`CRS`."""

    def __init__(self, n_rows, n_cols, col_start, row_ind, val, check=True):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.col_start = np.ascontiguousarray(col_start, dtype=INT)
        self.row_ind = np.ascontiguousarray(row_ind, dtype=INT)
        self.val = np.ascontiguousarray(val, dtype=REAL)
        if check:
            # Reuse the CRS validator on the transposed role.
            CRS(self.n_cols, self.n_rows, self.col_start, self.row_ind,
                self.val)

    @property
    def nnz(self):
        return int(self.col_start[-1])

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def col(self, j):
        a, b = self.col_start[j], self.col_start[j + 1]
        return self.row_ind[a:b], self.val[a:b]

    def to_dense(self):
        d = np.zeros((self.n_rows, self.n_cols), dtype=REAL)
        cols = np.repeat(np.arange(self.n_cols, dtype=INT),
                         np.diff(self.col_start))
        d[self.row_ind, cols] = self.val
        return d


class DenseMatrix:
    """Thin named wrapper over a row-major ndarray (trailing dense block)."""

    def __init__(self, values):
        self.values = np.ascontiguousarray(values, dtype=REAL)
        if self.values.ndim != 2:
            raise StructureError("DenseMatrix requires a 2-d array")
        self.n_rows, self.n_cols = self.values.shape

    @property
    def shape(self):
        return self.values.shape


def invert_permutation(p):
    p = np.asarray(p, dtype=INT)
    inv = np.empty_like(p)
    inv[p] = np.arange(p.size, dtype=INT)
    return inv


def crs_from_triplets(t, keep_zeros=False):
    """Convert triplets to CRS, summing duplicates.

    Entries whose summed value is exactly zero are dropped unless
    ``keep_zeros`` is set.
    """
    if len(t) == 0:
        ptr = np.zeros(t.n_rows + 1, dtype=INT)
        return CRS(t.n_rows, t.n_cols, ptr, [], [], check=False)
    if t.rows.min() < 0 or t.rows.max() >= t.n_rows:
        raise StructureError("triplet row index out of range")
    if t.cols.min() < 0 or t.cols.max() >= t.n_cols:
        raise StructureError("triplet column index out of range")
    order = np.lexsort((t.cols, t.rows))
    rows, cols, vals = t.rows[order], t.cols[order], t.vals[order]
    # Sum runs of identical (row, col).
    new_run = np.empty(rows.size, dtype=bool)
    new_run[0] = True
    new_run[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    run_id = np.cumsum(new_run) - 1
    summed = np.bincount(run_id, weights=vals)
    rows = rows[new_run]
    cols = cols[new_run]
    if not keep_zeros:
        keep = summed != 0.0
        rows, cols, summed = rows[keep], cols[keep], summed[keep]
    ptr = np.zeros(t.n_rows + 1, dtype=INT)
    np.cumsum(np.bincount(rows, minlength=t.n_rows), out=ptr[1:])
    return CRS(t.n_rows, t.n_cols, ptr, cols, summed, check=False)


def crs_to_ccs(a):
    """Column-major copy of ``a``; values are moved, never recomputed."""
    rows = np.repeat(np.arange(a.n_rows, dtype=INT), a.row_nnz())
    order = np.lexsort((rows, a.col_ind))
    ptr = np.zeros(a.n_cols + 1, dtype=INT)
    np.cumsum(np.bincount(a.col_ind, minlength=a.n_cols), out=ptr[1:])
    return CCS(a.n_rows, a.n_cols, ptr, rows[order], a.val[order], check=False)


def ccs_to_crs(c):
    """Inverse of :func:`crs_to_ccs`; the round trip is the identity."""
    cols = np.repeat(np.arange(c.n_cols, dtype=INT), np.diff(c.col_start))
    order = np.lexsort((cols, c.row_ind))
    ptr = np.zeros(c.n_rows + 1, dtype=INT)
    np.cumsum(np.bincount(c.row_ind, minlength=c.n_rows), out=ptr[1:])
    return CRS(c.n_rows, c.n_cols, ptr, cols[order], c.val[order], check=False)


def crs_from_dense(d, tol=0.0):
    d = np.asarray(d, dtype=REAL)
    t = TripletList(d.shape[0], d.shape[1])
    mask = np.abs(d) > tol
    t.rows, t.cols = (x.astype(INT) for x in np.nonzero(mask))
    t.vals = d[mask]
    return crs_from_triplets(t, keep_zeros=False)


def crs_identity(n):
    return CRS(n, n, np.arange(n + 1, dtype=INT), np.arange(n, dtype=INT),
               np.ones(n, dtype=REAL), check=False)
