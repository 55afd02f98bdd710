"""Dense brute-force references used by the test suite.

Everything here favors clarity over speed (naive O(n^3) linear algebra,
size-capped) and is independent of the sparse factorization path except
for deliberately shared *decision* semantics: the LDU reference applies
the same pivot thresholds, the same greedy sign choice and the same
floating-point operation order as the sparse kernel, so that with dropping
disabled the two produce entrywise-identical factors.
"""

import numpy as np

from .errors import StructureError
from .sparse import REAL, DenseMatrix


def _as_array(a):
    if isinstance(a, DenseMatrix):
        return np.array(a.values, dtype=REAL)
    return np.array(a, dtype=REAL)


def dense_ldu_reference(a, m, sym, tau_d, tau_kappa):
    """Exact LDU (or LDL^T) with diagonal pivoting and no dropping.

    Parameters
    ----------
    a : array_like or DenseMatrix
        Square matrix (the scaled, permuted level input).
    m : int
        Leading-block size to factor.
    sym : bool
        Whether the leading m-by-m block is symmetric.
    tau_d, tau_kappa : float
        Inverse-diagonal and inverse-norm pivot thresholds.

    Returns
    -------
    L : (n, m_final) ndarray with unit diagonal in the top block
    d : (m_final,) ndarray of pivots
    U : (m_final, n) ndarray with unit diagonal in the left block
    p, q : position-to-original permutations after pivoting
    m_final : accepted leading-block size
    """
    A = _as_array(a)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise StructureError("square matrix required")
    if n > 200:
        raise StructureError("oracle is capped at n <= 200")
    m = int(m)
    p = np.arange(n, dtype=np.int64)
    q = np.arange(n, dtype=np.int64)
    L = np.zeros((n, n), dtype=REAL)
    U = np.zeros((n, n), dtype=REAL)
    xL = np.zeros(n, dtype=REAL)
    xU = np.zeros(n, dtype=REAL)
    d = np.array([A[p[i], q[i]] for i in range(n)], dtype=REAL)

    k = 0
    exhausted = False
    while k < m and not exhausted:
        dv = d[k]
        pivot = (dv == 0.0) or (abs(dv) * tau_d < 1.0)
        while True:
            if pivot:
                while m - 1 > k:
                    dm = d[m - 1]
                    if dm == 0.0 or abs(dm) * tau_d < 1.0:
                        m -= 1
                    else:
                        break
                if m - 1 == k:
                    m = k
                    exhausted = True
                    break
                r = m - 1
                L[[k, r], :k] = L[[r, k], :k]
                U[:k, [k, r]] = U[:k, [r, k]]
                p[k], p[r] = p[r], p[k]
                q[k], q[r] = q[r], q[k]
                d[k], d[r] = d[r], d[k]
                m -= 1

            lhat = np.zeros(n, dtype=REAL)
            lhat[k + 1:] = A[p[k + 1:], q[k]]
            for j in range(k):
                ujk = U[j, k]
                if ujk != 0.0:
                    w = d[j] * ujk
                    col = L[k + 1:, j]
                    mask = col != 0.0
                    lhat[k + 1:][mask] -= w * col[mask]
            uhat = np.zeros(n, dtype=REAL)
            lo = m if sym else k + 1
            uhat[lo:] = A[p[k], q[lo:]]
            for j in range(k):
                lkj = L[k, j]
                if lkj != 0.0:
                    w = d[j] * lkj
                    row = U[j, lo:]
                    mask = row != 0.0
                    uhat[lo:][mask] -= w * row[mask]

            sL = 0.0
            for j in range(k):
                v = L[k, j]
                if v != 0.0:
                    sL += v * xL[j]
            cLk = 1.0 if sL <= 0.0 else -1.0
            xLk = cLk - sL
            kapL = abs(xLk)
            if sym:
                kapU = kapL
                xUk = xLk
            else:
                sU = 0.0
                for j in range(k):
                    v = U[j, k]
                    if v != 0.0:
                        sU += v * xU[j]
                cUk = 1.0 if sU <= 0.0 else -1.0
                xUk = cUk - sU
                kapU = abs(xUk)

            pivot = (kapL > tau_kappa) or (kapU > tau_kappa)
            if pivot:
                continue

            xL[k] = xLk
            xU[k] = xUk
            dk = d[k]
            lhat[k + 1:] /= dk
            uhat[lo:] /= dk
            if sym:
                for i in range(k + 1, m):
                    v = lhat[i]
                    if v != 0.0:
                        tmp = dk * v
                        d[i] -= tmp * v
            else:
                for i in range(k + 1, m):
                    lvi = lhat[i]
                    uvi = uhat[i]
                    if lvi != 0.0 and uvi != 0.0:
                        tmp = dk * lvi
                        d[i] -= tmp * uvi
            L[k + 1:, k] = lhat[k + 1:]
            if sym:
                U[k, k + 1:m] = lhat[k + 1:m]
                U[k, m:] = uhat[m:]
            else:
                U[k, k + 1:] = uhat[k + 1:]
            break

        if exhausted:
            break
        k += 1

    m_final = m
    Lo = L[:, :m_final].copy()
    Uo = U[:m_final, :].copy()
    for i in range(m_final):
        Lo[i, i] = 1.0
        Uo[i, i] = 1.0
    return Lo, d[:m_final].copy(), Uo, p, q, m_final


def dense_inf_norm_inverse(t):
    """Exact infinity norm of the inverse of a triangular matrix."""
    T = _as_array(t)
    n = T.shape[0]
    if n > 200:
        raise StructureError("oracle is capped at n <= 200")
    if np.any(np.diag(T) == 0.0):
        raise StructureError("singular triangular matrix")
    Tinv = np.linalg.solve(T, np.eye(n))
    return float(np.abs(Tinv).sum(axis=1).max())


def dense_schur_exact(Bh, Eh, Fh, Ch):
    """Exact Schur complement C - E B^{-1} F of the 2x2 block layout."""
    Bh = _as_array(Bh)
    return _as_array(Ch) - _as_array(Eh) @ np.linalg.solve(Bh, _as_array(Fh))


def dense_schur_t_version(Bh, Eh, Fh, Ch, L_B, U_B, L_E, U_F, d_B=None):
    """Dropout-compensated Schur complement computed densely.

    Evaluates L_E L_B^{-1} B U_B^{-1} U_F - E U_B^{-1} U_F - L_E L_B^{-1} F
    + C over explicit dense blocks.  ``d_B`` is accepted for interface
    symmetry with the hybrid formula but is not used.
    """
    Bh, Eh, Fh, Ch = (_as_array(x) for x in (Bh, Eh, Fh, Ch))
    L_B, U_B, L_E, U_F = (_as_array(x) for x in (L_B, U_B, L_E, U_F))
    G_E = np.linalg.solve(L_B.T, L_E.T).T      # L_E L_B^{-1}
    G_F = np.linalg.solve(U_B, U_F)            # U_B^{-1} U_F
    return G_E @ Bh @ G_F - Eh @ G_F - G_E @ Fh + Ch
