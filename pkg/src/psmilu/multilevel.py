"""Multilevel driver: preprocess, factor, form the Schur complement, recurse.

Each level stores enough to apply its part of the preconditioner: the unit
triangular factors of the accepted block, the pivots, the scaled permuted
bordering blocks E and F, scalings and permutations.  The recursion bottoms
out in a dense LU once the Schur complement is small or nearly dense, with
the hybrid (dropping-compensated) complement used for constant-size blocks.

The preconditioner application follows the block inverse

    M^{-1} = [B~^{-1} b1 - B~^{-1} F y2 ; y2],
    y2 = S~^{-1} (b2 - E B~^{-1} b1),

wrapped in the level's scalings and permutations so callers only ever see
the original index space.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dense import DenseLU
from .errors import SingularFactorError, StructureError
from .factor import extract_block, iludp_factor
from .preprocess import preprocess_level
from .schur import compute_schur_h, compute_schur_s
from .sparse import CCS, CRS, INT, REAL, invert_permutation

MAX_LEVELS = 64


@dataclass
class Options:
    """Control parameters of the factorization with their default values."""

    tau_L: float = 0.01        # inverse-based drop threshold for L
    tau_U: float = 0.01        # inverse-based drop threshold for U
    tau_d: float = 10.0        # bound on |1/d_k|
    tau_kappa: float = 100.0   # bound on the inverse-norm estimates
    alpha_L: float = 4.0       # fill growth per column of L
    alpha_U: float = 4.0       # fill growth per row of U
    rho: float = 0.25          # Schur density triggering the dense switch
    c_d: float = 1.0           # size factor of the dense switch (c_d N^{1/3})
    c_h: int = 10              # max Schur size for the hybrid complement
    N: int = 0                 # reference size; 0 means size of the input

    def validate(self):
        if min(self.tau_L, self.tau_U, self.tau_d, self.tau_kappa) < 0:
            raise ValueError("thresholds must be nonnegative")
        if min(self.alpha_L, self.alpha_U) < 1:
            raise ValueError("fill factors must be at least 1")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        return self


@dataclass
class PrecLevel:
    """One level of the multilevel factorization (see module docstring)."""

    m: int
    n: int
    L_B: CCS
    d_B: np.ndarray
    U_B: CRS
    E: CRS
    F: CRS
    s: np.ndarray
    t: np.ndarray
    p: np.ndarray
    q_inv: np.ndarray
    last_level_lu: DenseLU = None
    stats: dict = field(default_factory=dict)


@dataclass
class MultilevelPrec:
    levels: list

    @property
    def n(self):
        return self.levels[0].n

    def nnz_factors(self):
        """Stored preconditioner entries: strict L and U parts, pivots, and
        the dense trailing block (unit diagonals are implicit)."""
        total = 0
        for lev in self.levels:
            total += lev.L_B.nnz + lev.U_B.nnz + lev.E.nnz + lev.F.nnz
            total += lev.m
            if lev.last_level_lu is not None:
                total += lev.last_level_lu.n ** 2
        return total

    def fill_ratio(self, nnz_input):
        return self.nnz_factors() / max(nnz_input, 1)

    def pivots_per_level(self):
        return [lev.stats.get("pivots", 0) for lev in self.levels]

    def total_counters(self):
        out = dict.fromkeys(kernels.COUNTER_NAMES, 0)
        for lev in self.levels:
            for k, v in lev.stats.get("counters", {}).items():
                out[k] += v
        return out


def _factor_one_level(a, m0, level, opts, kernel, reorder):
    pre = preprocess_level(a, m0, level=level, reorder=reorder)
    a_scaled = a.scale(pre.s, pre.t)
    sym = level == 1 and m0 > 0 and pre.m > 0
    res = iludp_factor(a_scaled, pre.p, pre.q, pre.m, sym, opts,
                       kernel=kernel)
    return pre, a_scaled, sym, res


def psmilu_factor(a, m0=0, opts=None, kernel=None, reorder="rcm"):
    """Multilevel incomplete LDU factorization of ``a``.

    Parameters
    ----------
    a : CRS
        Square input matrix.
    m0 : int
        Size of the leading symmetric block (0 for fully nonsymmetric,
        ``a.n_rows`` for fully symmetric).
    opts : Options, optional
    kernel : backend override for the factor loop.
    reorder : fill-reducing ordering strategy name.

    Returns
    -------
    MultilevelPrec
    """
    if a.n_rows != a.n_cols:
        raise StructureError("square matrix required")
    if not 0 <= m0 <= a.n_rows:
        raise StructureError("m0 out of range")
    opts = (opts or Options()).validate()
    if opts.N <= 0:
        opts.N = a.n_rows
    levels = []
    _factor_recursive(a, m0, 1, opts, levels, kernel, reorder)
    return MultilevelPrec(levels)


def _factor_recursive(a, m0, level, opts, levels, kernel, reorder):
    if level > MAX_LEVELS:
        raise SingularFactorError(level, "recursion exceeded MAX_LEVELS")
    n = a.n_rows
    pre, a_scaled, sym, res = _factor_one_level(a, m0, level, opts, kernel,
                                                reorder)
    m = res.m
    p, q = res.p, res.q
    q_inv = invert_permutation(q)
    E = extract_block(a_scaled, p[m:], q_inv, 0, m)
    F = extract_block(a_scaled, p[:m], q_inv, m, n)
    C = extract_block(a_scaled, p[m:], q_inv, m, n)
    S = compute_schur_s(C, res.L_E, res.d_B, res.U_F)

    lev = PrecLevel(m=m, n=n, L_B=res.L_B, d_B=res.d_B, U_B=res.U_B,
                    E=E, F=F, s=pre.s, t=pre.t, p=p, q_inv=q_inv)
    lev.stats = {
        "level": level,
        "sym": sym,
        "m_pre": pre.m,
        "pivots": pre.m - m,
        "n_swaps": res.n_swaps,
        "counters": res.counters,
        "schur_size": n - m,
        "schur_nnz": S.nnz,
    }
    levels.append(lev)

    n_c = n - m
    if n_c == 0:
        lev.last_level_lu = DenseLU(np.zeros((0, 0)))
        return
    dense_switch = (S.nnz >= opts.rho * n_c * n_c
                    or n_c <= opts.c_d * opts.N ** (1.0 / 3.0))
    if dense_switch:
        if n_c < opts.c_h:
            B_hat = extract_block(a_scaled, p[:m], q_inv, 0, m)
            trailing = compute_schur_h(S, B_hat, res.L_B, res.d_B, res.U_B,
                                       res.L_E, res.U_F).values
            lev.stats["hybrid_schur"] = True
        else:
            trailing = S.to_dense()
            lev.stats["hybrid_schur"] = False
        try:
            lev.last_level_lu = DenseLU(trailing)
        except StructureError as exc:
            raise SingularFactorError(level, str(exc)) from exc
        return
    _factor_recursive(S, 0, level + 1, opts, levels, kernel, reorder)


def _apply_block_inverse(lev, x, kern):
    """x <- U_B^{-1} diag(d_B)^{-1} L_B^{-1} x, in place."""
    kern.solve_unit_lower_ccs(lev.L_B.col_start, lev.L_B.row_ind,
                              lev.L_B.val, x)
    x /= lev.d_B
    kern.solve_unit_upper_csr(lev.U_B.row_start, lev.U_B.col_ind,
                              lev.U_B.val, x)
    return x


def psmilu_solve(prec, b, level=0):
    """Apply the multilevel preconditioner: y = M~^{-1} b.

    Scalings and permutations are internal; ``b`` and the result live in
    the original index space of the (level's) input matrix.
    """
    kern = kernels.get_backend()
    lev = prec.levels[level]
    b = np.asarray(b, dtype=REAL)
    if b.shape != (lev.n,):
        raise StructureError("right-hand side length mismatch")
    m = lev.m
    bh = lev.s[lev.p] * b[lev.p]
    t1 = _apply_block_inverse(lev, bh[:m].copy(), kern)
    z = bh[m:] - lev.E.matvec(t1)
    if lev.last_level_lu is not None:
        y2 = lev.last_level_lu.solve(z)
    else:
        y2 = psmilu_solve(prec, z, level + 1)
    y1 = _apply_block_inverse(lev, bh[:m] - lev.F.matvec(y2), kern)
    yh = np.concatenate([y1, y2])
    return lev.t * yh[lev.q_inv]


# ---------------------------------------------------------------------------
# serialization: a versioned container of per-level arrays (numpy npz)

_FORMAT_VERSION = 1


def save_prec(path, prec):
    """Write a :class:`MultilevelPrec` to a binary container.

    The container is an npz archive with a ``version`` scalar, a level
    count, and per-level arrays under ``lv{i}_*`` keys (CCS/CRS pointer,
    index and value arrays of L_B, U_B, E, F; the vectors d_B, s, t, p,
    q_inv; and the packed dense LU of the final level).
    """
    data = {"version": np.asarray([_FORMAT_VERSION]),
            "n_levels": np.asarray([len(prec.levels)])}
    for i, lev in enumerate(prec.levels):
        pref = f"lv{i}_"
        data[pref + "shape"] = np.asarray([lev.m, lev.n], dtype=INT)
        data[pref + "LB_ptr"] = lev.L_B.col_start
        data[pref + "LB_ind"] = lev.L_B.row_ind
        data[pref + "LB_val"] = lev.L_B.val
        data[pref + "UB_ptr"] = lev.U_B.row_start
        data[pref + "UB_ind"] = lev.U_B.col_ind
        data[pref + "UB_val"] = lev.U_B.val
        data[pref + "E_ptr"] = lev.E.row_start
        data[pref + "E_ind"] = lev.E.col_ind
        data[pref + "E_val"] = lev.E.val
        data[pref + "F_ptr"] = lev.F.row_start
        data[pref + "F_ind"] = lev.F.col_ind
        data[pref + "F_val"] = lev.F.val
        data[pref + "dB"] = lev.d_B
        data[pref + "s"] = lev.s
        data[pref + "t"] = lev.t
        data[pref + "p"] = lev.p
        data[pref + "qinv"] = lev.q_inv
        if lev.last_level_lu is not None:
            data[pref + "lu"] = lev.last_level_lu.lu
            data[pref + "lu_perm"] = lev.last_level_lu.perm
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **data)


def load_prec(path):
    with np.load(path) as data:
        version = int(data["version"][0])
        if version != _FORMAT_VERSION:
            raise StructureError(f"unsupported container version {version}")
        levels = []
        for i in range(int(data["n_levels"][0])):
            pref = f"lv{i}_"
            m, n = (int(x) for x in data[pref + "shape"])
            lev = PrecLevel(
                m=m, n=n,
                L_B=CCS(m, m, data[pref + "LB_ptr"], data[pref + "LB_ind"],
                        data[pref + "LB_val"], check=False),
                d_B=data[pref + "dB"],
                U_B=CRS(m, m, data[pref + "UB_ptr"],
                        data[pref + "UB_ind"], data[pref + "UB_val"],
                        check=False),
                E=CRS(n - m, m, data[pref + "E_ptr"], data[pref + "E_ind"],
                      data[pref + "E_val"], check=False),
                F=CRS(m, n - m, data[pref + "F_ptr"], data[pref + "F_ind"],
                      data[pref + "F_val"], check=False),
                s=data[pref + "s"], t=data[pref + "t"],
                p=data[pref + "p"], q_inv=data[pref + "qinv"])
            if pref + "lu" in data:
                lu = DenseLU.__new__(DenseLU)
                lu.lu = data[pref + "lu"]
                lu.perm = data[pref + "lu_perm"]
                lu.n = lu.lu.shape[0]
                lev.last_level_lu = lu
            levels.append(lev)
    return MultilevelPrec(levels)
