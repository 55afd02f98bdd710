"""One factorization level: kernel invocation and factor block splitting."""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import StructureError
from .sparse import CCS, CRS, INT, REAL, crs_to_ccs, invert_permutation


@dataclass
class FactorResult:
    """Output of one incomplete-LDU level.

    ``L_B``/``U_B`` are the unit triangular factors of the accepted leading
    block (CCS and CRS respectively), ``L_E``/``U_F`` the bordering factor
    blocks, all indexed by final positions.  ``raw`` keeps the kernel's
    combined augmented arrays for tests that compare backends bit for bit.
    """

    L_B: CCS
    d_B: np.ndarray
    U_B: CRS
    L_E: CRS
    U_F: CRS
    p: np.ndarray
    q: np.ndarray
    m: int
    counters: dict
    acc_d: np.ndarray
    acc_kappa_L: np.ndarray
    acc_kappa_U: np.ndarray
    n_swaps: int
    n_deferred: int
    raw: dict = field(repr=False, default=None)

    @property
    def update_flops(self):
        c = self.counters
        return c["update_L"] + c["update_U_B"] + c["update_U_F"]


def _split_L(colstart, rowind, val, m, n):
    """Split the combined n x m lower factor into L_B (CCS) and L_E (CRS)."""
    cols = np.repeat(np.arange(m, dtype=INT), np.diff(colstart))
    top = rowind < m
    # top block: rows are a sorted prefix of each column, order preserved
    b_ptr = np.zeros(m + 1, dtype=INT)
    np.cumsum(np.bincount(cols[top], minlength=m), out=b_ptr[1:])
    L_B = CCS(m, m, b_ptr, rowind[top], val[top], check=False)
    er = rowind[~top] - m
    ec = cols[~top]
    ev = val[~top]
    order = np.lexsort((ec, er))
    e_ptr = np.zeros(n - m + 1, dtype=INT)
    np.cumsum(np.bincount(er, minlength=n - m), out=e_ptr[1:])
    L_E = CRS(n - m, m, e_ptr, ec[order], ev[order], check=False)
    return L_B, L_E


def _split_U(rowstart, colind, val, m, n):
    """Split the combined m x n upper factor into U_B and U_F (both CRS)."""
    rows = np.repeat(np.arange(m, dtype=INT), np.diff(rowstart))
    left = colind < m
    b_ptr = np.zeros(m + 1, dtype=INT)
    np.cumsum(np.bincount(rows[left], minlength=m), out=b_ptr[1:])
    U_B = CRS(m, m, b_ptr, colind[left], val[left], check=False)
    f_ptr = np.zeros(m + 1, dtype=INT)
    np.cumsum(np.bincount(rows[~left], minlength=m), out=f_ptr[1:])
    U_F = CRS(m, n - m, f_ptr, colind[~left] - m, val[~left], check=False)
    return U_B, U_F


def iludp_factor(a, p=None, q=None, m=None, sym=False, opts=None,
                 kernel=None):
    """Incomplete LDU of one level with diagonal pivoting and dropping.

    Parameters
    ----------
    a : CRS
        Scaled level matrix in its own index space (not yet permuted).
    p, q : permutations, optional
        Initial position-to-index maps from preprocessing (default identity).
    m : int, optional
        Leading-block size to factor (default ``a.n_rows``).
    sym : bool
        Whether the leading block of ``a[p, q]`` is symmetric; enables the
        LDL^T fast path whose U_B is exactly ``L_B^T``.
    opts : Options, optional
        Thresholds and fill caps; defaults are the standard control values.
    kernel : {"cython", "python", None}
        Kernel backend override, mostly for benchmarks and tests.
    """
    from .multilevel import Options

    if a.n_rows != a.n_cols:
        raise StructureError("square matrix required")
    n = a.n_rows
    opts = opts if opts is not None else Options()
    m0 = n if m is None else int(m)
    p = np.arange(n, dtype=INT) if p is None else np.array(p, dtype=INT)
    q = np.arange(n, dtype=INT) if q is None else np.array(q, dtype=INT)

    ac = crs_to_ccs(a)
    tri = n * (n + 1) // 2 + n
    cap_L = int(min(opts.alpha_L * a.nnz + n + 16, tri)) + 1
    cap_U = int(min(opts.alpha_U * a.nnz + n + 16, tri)) + 1

    kern = kernels.get_backend(kernel)
    out = kern.factor_level(
        n, m0, bool(sym),
        a.row_start, a.col_ind, a.val,
        ac.col_start, ac.row_ind, ac.val,
        p, q,
        float(opts.tau_L), float(opts.tau_U),
        float(opts.tau_d), float(opts.tau_kappa),
        float(opts.alpha_L), float(opts.alpha_U),
        cap_L, cap_U)

    m_f = int(out["m"])
    L_B, L_E = _split_L(out["L_colstart"], out["L_rowind"], out["L_val"],
                        m_f, n)
    U_B, U_F = _split_U(out["U_rowstart"], out["U_colind"], out["U_val"],
                        m_f, n)
    d_B = out["d"][out["p"][:m_f]].copy()
    counters = dict(zip(kernels.COUNTER_NAMES,
                        (int(x) for x in out["counters"])))
    return FactorResult(
        L_B=L_B, d_B=d_B, U_B=U_B, L_E=L_E, U_F=U_F,
        p=out["p"], q=out["q"], m=m_f, counters=counters,
        acc_d=out["acc_d"], acc_kappa_L=out["acc_kappa_L"],
        acc_kappa_U=out["acc_kappa_U"], n_swaps=int(out["n_swaps"]),
        n_deferred=m0 - m_f, raw=out)


def extract_block(a, row_pos, q_inv, col_lo, col_hi):
    """CRS block a[row_pos, cols with position in [col_lo, col_hi)].

    ``row_pos`` lists original row indices (one per output row); columns are
    selected by their position under ``q_inv`` and shifted by ``col_lo``.
    """
    n_out_rows = len(row_pos)
    ptr = np.zeros(n_out_rows + 1, dtype=INT)
    cols_out = []
    vals_out = []
    for i, r in enumerate(row_pos):
        cidx, cval = a.row(r)
        pos = q_inv[cidx]
        keep = (pos >= col_lo) & (pos < col_hi)
        cp = pos[keep] - col_lo
        order = np.argsort(cp, kind="stable")
        cols_out.append(cp[order])
        vals_out.append(cval[keep][order])
        ptr[i + 1] = ptr[i] + cp.size
    cols = np.concatenate(cols_out) if cols_out else np.empty(0, dtype=INT)
    vals = np.concatenate(vals_out) if vals_out else np.empty(0, dtype=REAL)
    return CRS(n_out_rows, col_hi - col_lo, ptr, cols, vals, check=False)
