"""Dense LU with partial pivoting for the trailing block of the recursion."""

import numpy as np

from .errors import StructureError
from .sparse import REAL, DenseMatrix


class DenseLU:
    """P A = L U with row pivoting by maximum magnitude.

    The factors are packed LAPACK-style (unit lower below the diagonal of
    ``lu``, upper on and above); ``perm`` maps factored row -> input row.
    A size-0 matrix factors trivially and solves as the identity on empty
    vectors.
    """

    def __init__(self, a):
        if isinstance(a, DenseMatrix):
            a = a.values
        A = np.array(a, dtype=REAL)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise StructureError("square matrix required")
        n = A.shape[0]
        perm = np.arange(n, dtype=np.int64)
        for k in range(n):
            piv = k + int(np.argmax(np.abs(A[k:, k])))
            if A[piv, k] == 0.0:
                raise StructureError(f"singular dense block (column {k})")
            if piv != k:
                A[[k, piv], :] = A[[piv, k], :]
                perm[[k, piv]] = perm[[piv, k]]
            A[k + 1:, k] /= A[k, k]
            A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
        self.lu = A
        self.perm = perm
        self.n = n

    @property
    def L(self):
        L = np.tril(self.lu, -1)
        np.fill_diagonal(L, 1.0)
        return L

    @property
    def U(self):
        return np.triu(self.lu)

    @property
    def P(self):
        P = np.zeros((self.n, self.n), dtype=REAL)
        P[np.arange(self.n), self.perm] = 1.0
        return P

    def solve(self, b):
        b = np.asarray(b, dtype=REAL)
        if b.shape != (self.n,):
            raise StructureError("solve dimension mismatch")
        x = b[self.perm].copy()
        lu = self.lu
        for i in range(self.n):
            x[i] -= lu[i, :i] @ x[:i]
        for i in range(self.n - 1, -1, -1):
            x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
        return x


def dense_lu_pivot(d):
    """Factor a :class:`DenseMatrix` (or array) with partial pivoting."""
    return DenseLU(d)
