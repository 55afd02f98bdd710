"""Per-level preprocessing: scaling, diagonal matching, reordering, deferral.

The pipeline reproduces the two properties the factorization relies on --
diagonal entries of magnitude close to one and off-diagonals of magnitude
at most one -- using iterative max-magnitude equilibration and a greedy
maximum-magnitude transversal.  Dense rows/columns and weak diagonals are
pushed past the leading block so they are handled at the next level, and
the block is reordered by reverse Cuthill-McKee to limit fill.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import StructureError
from .sparse import CRS, INT, REAL, crs_to_ccs, invert_permutation

DENSE_ROW_FACTOR = 10.0     # nnz threshold, in multiples of the mean
DIAG_DEFER_TOL = 1e-2       # scaled diagonals below this defer to next level


@dataclass
class PreprocessResult:
    p: np.ndarray          # position -> original row
    q: np.ndarray          # position -> original column
    s: np.ndarray          # row scaling (original index space)
    t: np.ndarray          # column scaling
    m: int                 # leading-block size after deferrals


def equilibrate(a, symmetric=False, max_sweeps=64):
    """Scale so every row and column of diag(s) A diag(t) has max <= 1.

    The nonsymmetric sweep converges in one pass; the symmetric variant
    (which forces ``s == t``) divides by the square root of the row max and
    iterates.  Raises on structurally empty rows or columns.
    """
    n_rows, n_cols = a.shape
    rnnz = a.row_nnz()
    cnnz = a.col_nnz()
    if np.any(rnnz == 0) or np.any(cnnz == 0):
        raise StructureError("structurally singular: empty row or column")
    rows = np.repeat(np.arange(n_rows, dtype=INT), rnnz)
    cols = a.col_ind
    absval = np.abs(a.val)
    s = np.ones(n_rows, dtype=REAL)
    t = np.ones(n_cols, dtype=REAL)
    if symmetric:
        for _ in range(max_sweeps):
            scaled = s[rows] * absval * s[cols]
            rmax = np.zeros(n_rows, dtype=REAL)
            np.maximum.at(rmax, rows, scaled)
            if np.any(rmax == 0.0):
                raise StructureError("numerically empty row")
            if np.all(np.abs(rmax - 1.0) < 1e-14):
                break
            s /= np.sqrt(rmax)
        return s, s.copy()
    for _ in range(max_sweeps):
        scaled = absval * t[cols]
        rmax = np.zeros(n_rows, dtype=REAL)
        np.maximum.at(rmax, rows, scaled)
        if np.any(rmax == 0.0):
            raise StructureError("numerically empty row")
        s = 1.0 / rmax
        scaled = s[rows] * absval
        cmax = np.zeros(n_cols, dtype=REAL)
        np.maximum.at(cmax, cols, scaled)
        if np.any(cmax == 0.0):
            raise StructureError("numerically empty column")
        t = 1.0 / cmax
        scaled = s[rows] * absval * t[cols]
        rchk = np.zeros(n_rows, dtype=REAL)
        np.maximum.at(rchk, rows, scaled)
        if np.all(np.abs(rchk - 1.0) < 1e-14):
            break
    return s, t


def greedy_diag_match(a):
    """Column permutation putting large entries on the diagonal.

    A greedy pass claims, per row in order, the largest-magnitude free
    column (ties to the smaller index); rows left without a column try one
    single-step augmenting exchange.  Returns ``(q, unmatched)`` where
    ``A[:, q]`` has a nonzero diagonal except on the reported rows.
    """
    n = a.n_rows
    owner = np.full(n, -1, dtype=INT)        # column -> row
    match = np.full(n, -1, dtype=INT)        # row -> column
    order_cache = {}

    def ranked_cols(r):
        if r not in order_cache:
            cidx, cval = a.row(r)
            key = np.lexsort((cidx, -np.abs(cval)))
            order_cache[r] = (cidx[key], cval[key])
        return order_cache[r]

    for r in range(n):
        cidx, cval = ranked_cols(r)
        for c, v in zip(cidx, cval):
            if v != 0.0 and owner[c] == -1:
                owner[c] = r
                match[r] = c
                break
    unmatched = []
    for r in range(n):
        if match[r] != -1:
            continue
        done = False
        cidx, _ = ranked_cols(r)
        for c in cidx:
            r2 = owner[c]
            if r2 == -1:
                continue
            c2idx, c2val = ranked_cols(int(r2))
            for c2, v2 in zip(c2idx, c2val):
                if v2 != 0.0 and owner[c2] == -1:
                    owner[c2] = r2
                    match[r2] = c2
                    owner[c] = r
                    match[r] = c
                    done = True
                    break
            if done:
                break
        if not done:
            unmatched.append(r)
    free = sorted(set(range(n)) - set(int(c) for c in match if c != -1))
    fi = 0
    for r in unmatched:
        match[r] = free[fi]
        fi += 1
    return match, unmatched


_REORDER_STRATEGIES = {}


def register_reorder(name, fn):
    """Plug in a fill-reducing ordering: fn(pattern CRS) -> permutation."""
    _REORDER_STRATEGIES[name] = fn


def _rcm(pattern):
    n = pattern.n_rows
    if pattern.nnz == 0:
        return np.arange(n, dtype=INT)
    g = sp.csr_matrix(
        (np.ones(pattern.nnz), pattern.col_ind, pattern.row_start),
        shape=(n, n))
    g = g + g.T
    return np.asarray(reverse_cuthill_mckee(g.tocsr(), symmetric_mode=True),
                      dtype=INT)


register_reorder("rcm", _rcm)
register_reorder("natural", lambda pattern: np.arange(pattern.n_rows,
                                                      dtype=INT))


def symmetric_reorder(pattern, strategy="rcm"):
    """Symmetric fill-reducing permutation of the symmetrized pattern."""
    return _REORDER_STRATEGIES[strategy](pattern)


def defer_special_rows(a, m, diag, dense_factor=DENSE_ROW_FACTOR,
                       diag_tol=DIAG_DEFER_TOL):
    """Move dense lines and weak diagonals of the leading block past ``m``.

    ``diag`` holds the current scaled diagonal values per position.  Returns
    a position permutation ``sigma`` (new <- old) and the reduced ``m``;
    dense lines go to the very end of the matrix, weak diagonals directly
    after the shrunken block.
    """
    n = a.n_rows
    rnnz = a.row_nnz()
    cnnz = a.col_nnz()
    avg = a.nnz / max(n, 1)
    lead = np.arange(m)
    dense = (rnnz[:m] > dense_factor * avg) | (cnnz[:m] > dense_factor * avg)
    weak = (~dense) & (np.abs(diag[:m]) < diag_tol)
    kept = lead[~dense & ~weak]
    sigma = np.concatenate([kept, lead[weak], np.arange(m, n, dtype=INT),
                            lead[dense]]).astype(INT)
    return sigma, int(kept.size)


def _submatrix(a, keep):
    """Rows and columns of ``a`` restricted to positions in ``keep``."""
    n_sub = keep.size
    lookup = np.full(a.n_cols, -1, dtype=INT)
    lookup[keep] = np.arange(n_sub, dtype=INT)
    ptr = np.zeros(n_sub + 1, dtype=INT)
    cols_out = []
    vals_out = []
    for i, r in enumerate(keep):
        cidx, cval = a.row(r)
        loc = lookup[cidx]
        sel = loc >= 0
        cols_out.append(loc[sel])
        vals_out.append(cval[sel])
        ptr[i + 1] = ptr[i] + int(sel.sum())
    cols = np.concatenate(cols_out) if cols_out else np.empty(0, dtype=INT)
    vals = np.concatenate(vals_out) if vals_out else np.empty(0, dtype=REAL)
    return CRS(n_sub, n_sub, ptr, cols, vals, check=False)


def preprocess_level(a, m0, level=1, reorder="rcm",
                     dense_factor=DENSE_ROW_FACTOR, diag_tol=DIAG_DEFER_TOL):
    """Full preprocessing of one level; see module docstring.

    ``m0 > 0`` with ``level == 1`` takes the symmetric path: the leading
    block is equilibrated with equal row/column scalings, no matching is
    needed, and the reordering is applied symmetrically inside the block.
    Otherwise the whole matrix is scaled and greedily matched.
    """
    n = a.n_rows
    sym = m0 > 0 and level == 1
    meff = m0 if sym else n

    rnnz = a.row_nnz()
    cnnz = a.col_nnz()
    avg = a.nnz / max(n, 1)
    lead = np.arange(meff, dtype=INT)
    dense_mask = ((rnnz[:meff] > dense_factor * avg)
                  | (cnnz[:meff] > dense_factor * avg))
    dense_pos = lead[dense_mask]
    kept = lead[~dense_mask]

    # positions whose leading-submatrix row or column is structurally empty
    # cannot be scaled or factored; defer them with the weak diagonals
    empty_pos = []
    while kept.size:
        sub = _submatrix(a, kept)
        r0 = sub.row_nnz() == 0
        c0 = sub.col_nnz() == 0
        bad = r0 | c0
        if not bad.any():
            break
        empty_pos.extend(kept[bad].tolist())
        kept = kept[~bad]

    s = np.ones(n, dtype=REAL)
    t = np.ones(n, dtype=REAL)
    q_local = np.arange(n, dtype=INT)
    unmatched = []
    if kept.size:
        sub = _submatrix(a, kept)
        s_sub, t_sub = equilibrate(sub, symmetric=sym)
        s[kept] = s_sub
        t[kept] = t_sub
        if not sym:
            scaled = sub.scale(s_sub, t_sub)
            match, unmatched_local = greedy_diag_match(scaled)
            q_local[kept] = kept[match]
            unmatched = [int(kept[r]) for r in unmatched_local]

    # normalize the rows/columns outside the block to unit max magnitude so
    # the bordering blocks do not dwarf the equilibrated leading block (the
    # symmetric pair s == t is only kept within the block)
    outside = np.setdiff1d(np.arange(n, dtype=INT), kept)
    if outside.size and a.nnz:
        rows_x = np.repeat(np.arange(n, dtype=INT), a.row_nnz())
        absval = np.abs(a.val)
        rmax = np.zeros(n, dtype=REAL)
        np.maximum.at(rmax, rows_x, absval * t[a.col_ind])
        sel = rmax[outside] > 0.0
        s[outside[sel]] = 1.0 / rmax[outside[sel]]
        cmax = np.zeros(n, dtype=REAL)
        np.maximum.at(cmax, a.col_ind, s[rows_x] * absval)
        sel = cmax[outside] > 0.0
        t[outside[sel]] = 1.0 / cmax[outside[sel]]

    # scaled diagonal per position of the (implicitly) matched matrix
    diag = np.zeros(n, dtype=REAL)
    for i in kept:
        r = int(i)
        c = int(q_local[i])
        cidx, cval = a.row(r)
        k = np.searchsorted(cidx, c)
        if k < cidx.size and cidx[k] == c:
            diag[i] = s[r] * cval[k] * t[c]
    weak_mask = np.abs(diag[kept]) < diag_tol
    weak_pos = kept[weak_mask].tolist()
    kept = kept[~weak_mask]

    # reorder the surviving block symmetrically
    if kept.size:
        sub = _submatrix(a, kept)
        perm = symmetric_reorder(sub, strategy=reorder)
        kept = kept[perm]

    trailing = (sorted(set(weak_pos + empty_pos + unmatched))
                + list(range(meff, n))
                + sorted(int(x) for x in dense_pos))
    # an unmatched row that landed on a usable diagonal stays in the block
    seen = set(kept.tolist())
    tail = []
    for x in trailing:
        if x not in seen:
            seen.add(x)
            tail.append(x)
    p = np.concatenate([kept, np.asarray(tail, dtype=INT)]).astype(INT)
    q = q_local[p]
    return PreprocessResult(p=p, q=q, s=s, t=t, m=int(kept.size))
