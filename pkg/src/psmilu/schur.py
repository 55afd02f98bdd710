"""Schur complement assembly: sparse plain version and dense hybrid update."""

import numpy as np

from . import kernels
from .sparse import CRS, INT, REAL, DenseMatrix


def compute_schur_s(c, l_e, d_b, u_f):
    """Plain Schur complement C - L_E diag(d_B) U_F, row by row, no dropping.

    All blocks are position-indexed: ``c`` is the trailing block of the
    scaled permuted level matrix, ``l_e``/``u_f`` the bordering factors.
    Exact zeros produced by cancellation are pruned from the result.
    """
    n_c = c.n_rows
    m = l_e.n_cols
    acc = np.zeros(n_c, dtype=REAL)
    occupied = np.zeros(n_c, dtype=bool)
    ptr = np.zeros(n_c + 1, dtype=INT)
    cols_out = []
    vals_out = []
    for r in range(n_c):
        cidx, cval = c.row(r)
        acc[cidx] = cval
        occupied[cidx] = True
        touched = list(cidx)
        eidx, eval_ = l_e.row(r)
        for j, lv in zip(eidx, eval_):
            w = d_b[j] * lv
            fidx, fval = u_f.row(j)
            if fidx.size:
                fresh = fidx[~occupied[fidx]]
                occupied[fresh] = True
                touched.extend(fresh)
                acc[fidx] -= w * fval
        touched = np.asarray(sorted(touched), dtype=INT)
        keep = acc[touched] != 0.0
        kept = touched[keep]
        cols_out.append(kept)
        vals_out.append(acc[kept].copy())
        ptr[r + 1] = ptr[r] + kept.size
        acc[touched] = 0.0
        occupied[touched] = False
    cols = np.concatenate(cols_out) if cols_out else np.empty(0, dtype=INT)
    vals = np.concatenate(vals_out) if vals_out else np.empty(0, dtype=REAL)
    return CRS(n_c, n_c, ptr, cols, vals, check=False)


def _spmm_dense(a, x):
    """CRS (m x k) times dense (k x r) without densifying ``a``."""
    out = np.zeros((a.n_rows, x.shape[1]), dtype=REAL)
    rows = np.repeat(np.arange(a.n_rows, dtype=INT), a.row_nnz())
    np.add.at(out, rows, a.val[:, None] * x[a.col_ind])
    return out


def compute_schur_h(s_c, b_hat, l_b, d_b, u_b, l_e, u_f, variant="hybrid"):
    """Dense hybrid Schur complement for a small trailing block.

    ``variant="hybrid"`` evaluates C - 2 L_E D U_F + G_E B G_F with
    G_E = L_E L_B^{-1} and G_F = U_B^{-1} U_F, as an update of the plain
    complement: H = S - L_E D U_F + G_E B G_F.  One sparse triangular solve
    per row of L_E and per column of U_F; no m-by-m dense intermediate.

    ``variant="alg1"`` instead adds G_E (B - D) G_F to S, kept for
    comparison experiments.
    """
    kern = kernels.get_backend()
    n_c = s_c.n_rows
    m = l_b.n_rows
    if n_c == 0:
        return DenseMatrix(np.zeros((0, 0), dtype=REAL))
    H = s_c.to_dense()
    if m == 0 or l_e.nnz == 0 or u_f.nnz == 0:
        return DenseMatrix(H)

    # G_E^T: solve L_B^T x = (L_E row)^T; the CCS of L_B is the CSR of L_B^T
    G_E = l_e.to_dense()
    for r in range(n_c):
        kern.solve_unit_upper_csr(l_b.col_start, l_b.row_ind, l_b.val,
                                  G_E[r])
    G_F = u_f.to_dense()
    for cidx in range(n_c):
        col = np.ascontiguousarray(G_F[:, cidx])
        kern.solve_unit_upper_csr(u_b.row_start, u_b.col_ind, u_b.val, col)
        G_F[:, cidx] = col

    if variant == "hybrid":
        ldu = _spmm_dense(l_e, d_b[:, None] * u_f.to_dense())
        return DenseMatrix(H - ldu + G_E @ _spmm_dense(b_hat, G_F))
    if variant == "alg1":
        BG = _spmm_dense(b_hat, G_F)
        return DenseMatrix(H + G_E @ (BG - d_b[:, None] * G_F))
    raise ValueError(f"unknown variant {variant!r}")
