"""Pure-Python factorization kernel; the reference for the compiled twin.

This module implements one level of the incomplete LDU (or LDL^T on a
symmetric leading block) with diagonal pivoting, incremental inverse-norm
estimation, inverse-based dropping and per-line fill caps, operating on raw
numpy arrays.  ``psmilu._kernel_cy`` reimplements the same loops in Cython
with an identical floating-point operation order, so the two backends
produce bit-identical factors; tests rely on that.

Conventions
-----------
* The level input is the scaled matrix in its own (original) index space,
  given both as CSR and CSC.  ``p``/``q`` map positions to original
  row/column indices and are updated in place by pivoting.
* ``d`` is indexed by original row (``d[p[i]]`` is the running diagonal of
  position ``i``), so interchanges never move diagonal data.
* The factors are built in augmented compressed form: L column-major with
  linked row lists, U row-major with linked column lists.  Stored minor
  indices are positions and stay sorted ascending within each major line.
* Raw Crout accumulators are computed first, divided by the accepted pivot,
  used to pre-update ``d``, thresholded, capped, and only then appended.
"""

import numpy as np

INT = np.int64
REAL = np.float64

# flop counter slots
C_UPDATE_L = 0
C_UPDATE_U_B = 1
C_UPDATE_U_F = 2
C_UPDATE_D = 3
C_ESTIMATOR = 4
C_DIV = 5
C_DROP_SCAN = 6
C_SWAP_MOVES = 7
N_COUNTERS = 8

COUNTER_NAMES = ("update_L", "update_U_B", "update_U_F", "update_d",
                 "estimator", "div", "drop_scan", "swap_moves")


def _select_keep(idx, vals, budget):
    """Largest-magnitude selection with deterministic ties.

    Keeps at most ``budget`` indices from ``idx``, ranked by descending
    ``|vals[i]|`` with ties broken by smaller index, returned ascending.
    The fallback uses a full sort; the compiled kernel selects in O(n).
    The kept *set* is identical either way.
    """
    if len(idx) <= budget:
        out = sorted(idx)
        return out
    ranked = sorted(idx, key=lambda i: (-abs(vals[i]), i))
    return sorted(ranked[:budget])


def factor_level(n, m0, sym,
                 ar_ptr, ar_ind, ar_val,
                 ac_ptr, ac_ind, ac_val,
                 p, q,
                 tau_L, tau_U, tau_d, tau_kappa,
                 alpha_L, alpha_U,
                 cap_L, cap_U):
    """Run the pivoting Crout loop; see module docstring for conventions.

    Returns a dict with the trimmed factor arrays, final permutations,
    leading-block size, running diagonal, flop counters and per-accepted-step
    diagnostics (pivot magnitude and inverse-norm estimates).
    """
    m = int(m0)
    p = np.asarray(p, dtype=INT)
    q = np.asarray(q, dtype=INT)
    p_inv = np.empty(n, dtype=INT)
    q_inv = np.empty(n, dtype=INT)
    p_inv[p] = np.arange(n, dtype=INT)
    q_inv[q] = np.arange(n, dtype=INT)

    d = np.zeros(n, dtype=REAL)
    for i in range(n):
        r = p[i]
        c = q[i]
        a, b = ar_ptr[r], ar_ptr[r + 1]
        s = a + np.searchsorted(ar_ind[a:b], c)
        if s < b and ar_ind[s] == c:
            d[r] = ar_val[s]

    # L: augmented column-major storage (positions as row indices)
    L_colstart = np.zeros(n + 1, dtype=INT)
    L_rowind = np.empty(cap_L, dtype=INT)
    L_val = np.empty(cap_L, dtype=REAL)
    L_augcol = np.empty(cap_L, dtype=INT)
    L_next = np.empty(cap_L, dtype=INT)
    L_valpos = np.empty(cap_L, dtype=INT)
    L_slotnode = np.empty(cap_L, dtype=INT)
    L_head = np.full(n, -1, dtype=INT)
    L_tail = np.full(n, -1, dtype=INT)
    L_start = np.zeros(n, dtype=INT)

    # U: mirrored row-major storage (positions as column indices)
    U_rowstart = np.zeros(n + 1, dtype=INT)
    U_colind = np.empty(cap_U, dtype=INT)
    U_val = np.empty(cap_U, dtype=REAL)
    U_augrow = np.empty(cap_U, dtype=INT)
    U_next = np.empty(cap_U, dtype=INT)
    U_valpos = np.empty(cap_U, dtype=INT)
    U_slotnode = np.empty(cap_U, dtype=INT)
    U_head = np.full(n, -1, dtype=INT)
    U_tail = np.full(n, -1, dtype=INT)
    U_start = np.zeros(n, dtype=INT)

    # estimator state
    xL = np.zeros(n, dtype=REAL)
    cL = np.zeros(n, dtype=REAL)
    xU = np.zeros(n, dtype=REAL)
    cU = np.zeros(n, dtype=REAL)

    # sparse accumulators with stamp-based occupancy
    lv = np.zeros(n, dtype=REAL)
    lmark = np.full(n, -1, dtype=INT)
    lidx = np.zeros(n, dtype=INT)
    uv = np.zeros(n, dtype=REAL)
    umark = np.full(n, -1, dtype=INT)
    uidx = np.zeros(n, dtype=INT)

    counters = np.zeros(N_COUNTERS, dtype=INT)
    acc_d = []
    acc_kL = []
    acc_kU = []
    n_swaps = 0
    stamp = 0

    def swap_L_rows(k, r):
        # Interchange row positions k < r of L across columns < k.
        cols_k = {}
        node = L_head[k]
        while node != -1:
            cols_k[int(L_augcol[node])] = node
            node = L_next[node]
        cols_r = {}
        node = L_head[r]
        while node != -1:
            cols_r[int(L_augcol[node])] = node
            node = L_next[node]
        for j in set(cols_k) | set(cols_r):
            lo = L_start[j]
            hi = L_colstart[j + 1]
            in_k = j in cols_k
            in_r = j in cols_r
            if in_k and in_r:
                sk = lo  # first slot with row >= k is k itself
                s = sk + 1
                while L_rowind[s] < r:
                    s += 1
                L_val[sk], L_val[s] = L_val[s], L_val[sk]
                nk, nr = cols_k[j], cols_r[j]
                L_valpos[nk] = s
                L_valpos[nr] = sk
                L_slotnode[sk] = nr
                L_slotnode[s] = nk
                counters[C_SWAP_MOVES] += 4
            elif in_k:
                sk = lo
                v = L_val[sk]
                s = sk + 1
                while s < hi and L_rowind[s] < r:
                    L_rowind[s - 1] = L_rowind[s]
                    L_val[s - 1] = L_val[s]
                    moved = L_slotnode[s]
                    L_valpos[moved] = s - 1
                    L_slotnode[s - 1] = moved
                    counters[C_SWAP_MOVES] += 2
                    s += 1
                L_rowind[s - 1] = r
                L_val[s - 1] = v
                nk = cols_k[j]
                L_valpos[nk] = s - 1
                L_slotnode[s - 1] = nk
                counters[C_SWAP_MOVES] += 2
            else:
                s = lo
                while L_rowind[s] < r:
                    s += 1
                v = L_val[s]
                while s > lo:
                    L_rowind[s] = L_rowind[s - 1]
                    L_val[s] = L_val[s - 1]
                    moved = L_slotnode[s - 1]
                    L_valpos[moved] = s
                    L_slotnode[s] = moved
                    counters[C_SWAP_MOVES] += 2
                    s -= 1
                L_rowind[lo] = k
                L_val[lo] = v
                nr = cols_r[j]
                L_valpos[nr] = lo
                L_slotnode[lo] = nr
                counters[C_SWAP_MOVES] += 2
        L_head[k], L_head[r] = L_head[r], L_head[k]
        L_tail[k], L_tail[r] = L_tail[r], L_tail[k]
        counters[C_SWAP_MOVES] += 2

    def swap_U_cols(k, r):
        rows_k = {}
        node = U_head[k]
        while node != -1:
            rows_k[int(U_augrow[node])] = node
            node = U_next[node]
        rows_r = {}
        node = U_head[r]
        while node != -1:
            rows_r[int(U_augrow[node])] = node
            node = U_next[node]
        for j in set(rows_k) | set(rows_r):
            lo = U_start[j]
            hi = U_rowstart[j + 1]
            in_k = j in rows_k
            in_r = j in rows_r
            if in_k and in_r:
                sk = lo
                s = sk + 1
                while U_colind[s] < r:
                    s += 1
                U_val[sk], U_val[s] = U_val[s], U_val[sk]
                nk, nr = rows_k[j], rows_r[j]
                U_valpos[nk] = s
                U_valpos[nr] = sk
                U_slotnode[sk] = nr
                U_slotnode[s] = nk
                counters[C_SWAP_MOVES] += 4
            elif in_k:
                sk = lo
                v = U_val[sk]
                s = sk + 1
                while s < hi and U_colind[s] < r:
                    U_colind[s - 1] = U_colind[s]
                    U_val[s - 1] = U_val[s]
                    moved = U_slotnode[s]
                    U_valpos[moved] = s - 1
                    U_slotnode[s - 1] = moved
                    counters[C_SWAP_MOVES] += 2
                    s += 1
                U_colind[s - 1] = r
                U_val[s - 1] = v
                nk = rows_k[j]
                U_valpos[nk] = s - 1
                U_slotnode[s - 1] = nk
                counters[C_SWAP_MOVES] += 2
            else:
                s = lo
                while U_colind[s] < r:
                    s += 1
                v = U_val[s]
                while s > lo:
                    U_colind[s] = U_colind[s - 1]
                    U_val[s] = U_val[s - 1]
                    moved = U_slotnode[s - 1]
                    U_valpos[moved] = s
                    U_slotnode[s] = moved
                    counters[C_SWAP_MOVES] += 2
                    s -= 1
                U_colind[lo] = k
                U_val[lo] = v
                nr = rows_r[j]
                U_valpos[nr] = lo
                U_slotnode[lo] = nr
                counters[C_SWAP_MOVES] += 2
        U_head[k], U_head[r] = U_head[r], U_head[k]
        U_tail[k], U_tail[r] = U_tail[r], U_tail[k]
        counters[C_SWAP_MOVES] += 2

    def append_L(k, rows, vals):
        start = L_colstart[k]
        for t, (i, v) in enumerate(zip(rows, vals)):
            s = start + t
            L_rowind[s] = i
            L_val[s] = v
            L_augcol[s] = k
            L_next[s] = -1
            L_valpos[s] = s
            L_slotnode[s] = s
            if L_tail[i] == -1:
                L_head[i] = s
            else:
                L_next[L_tail[i]] = s
            L_tail[i] = s
        L_colstart[k + 1] = start + len(rows)
        L_start[k] = start

    def append_U(k, cols, vals):
        start = U_rowstart[k]
        for t, (j, v) in enumerate(zip(cols, vals)):
            s = start + t
            U_colind[s] = j
            U_val[s] = v
            U_augrow[s] = k
            U_next[s] = -1
            U_valpos[s] = s
            U_slotnode[s] = s
            if U_tail[j] == -1:
                U_head[j] = s
            else:
                U_next[U_tail[j]] = s
            U_tail[j] = s
        U_rowstart[k + 1] = start + len(cols)
        U_start[k] = start

    k = 0
    exhausted = False
    while k < m and not exhausted:
        if k > 0:
            # L_start[j]/U_start[j] track the first slot at or past line k;
            # only columns present on line k-1 need advancing.
            node = L_head[k - 1]
            while node != -1:
                j = L_augcol[node]
                s = L_start[j]
                if s < L_colstart[j + 1] and L_rowind[s] == k - 1:
                    L_start[j] = s + 1
                node = L_next[node]
            node = U_head[k - 1]
            while node != -1:
                j = U_augrow[node]
                s = U_start[j]
                if s < U_rowstart[j + 1] and U_colind[s] == k - 1:
                    U_start[j] = s + 1
                node = U_next[node]

        dv = d[p[k]]
        pivot = (dv == 0.0) or (abs(dv) * tau_d < 1.0)
        while True:
            if pivot:
                # Walk the boundary down past trailing bad diagonals, then
                # either swap in the boundary row or give up on this level.
                while m - 1 > k:
                    dm = d[p[m - 1]]
                    if dm == 0.0 or abs(dm) * tau_d < 1.0:
                        m -= 1
                    else:
                        break
                if m - 1 == k:
                    m = k
                    exhausted = True
                    break
                r = m - 1
                swap_L_rows(k, r)
                swap_U_cols(k, r)
                p[k], p[r] = p[r], p[k]
                p_inv[p[k]] = k
                p_inv[p[r]] = r
                q[k], q[r] = q[r], q[k]
                q_inv[q[k]] = k
                q_inv[q[r]] = r
                m -= 1
                n_swaps += 1

            stamp += 1
            # column update: lhat = A[p(k+1:n), q(k)] - L D U(:,k)
            lcount = 0
            c = q[k]
            a, b = ac_ptr[c], ac_ptr[c + 1]
            for s in range(a, b):
                i = p_inv[ac_ind[s]]
                if i > k:
                    lv[i] = ac_val[s]
                    lmark[i] = stamp
                    lidx[lcount] = i
                    lcount += 1
            node = U_head[k]
            while node != -1:
                j = U_augrow[node]
                w = d[p[j]] * U_val[U_valpos[node]]
                s = L_start[j]
                e = L_colstart[j + 1]
                if s < e and L_rowind[s] == k:
                    s += 1
                while s < e:
                    i = L_rowind[s]
                    v = w * L_val[s]
                    if lmark[i] == stamp:
                        lv[i] -= v
                    else:
                        lv[i] = -v
                        lmark[i] = stamp
                        lidx[lcount] = i
                        lcount += 1
                    counters[C_UPDATE_L] += 2
                    s += 1
                node = U_next[node]

            # row update: uhat = A[p(k), q(k+1:n)] - L(k,:) D U
            # (symmetric path computes only the trailing span past m)
            ucount = 0
            r_orig = p[k]
            a, b = ar_ptr[r_orig], ar_ptr[r_orig + 1]
            lim = m if sym else k + 1
            for s in range(a, b):
                j = q_inv[ar_ind[s]]
                if j >= lim:
                    uv[j] = ar_val[s]
                    umark[j] = stamp
                    uidx[ucount] = j
                    ucount += 1
            node = L_head[k]
            while node != -1:
                j = L_augcol[node]
                w = d[p[j]] * L_val[L_valpos[node]]
                a0 = U_start[j]
                e = U_rowstart[j + 1]
                if sym:
                    s = a0 + int(np.searchsorted(U_colind[a0:e], m))
                else:
                    s = a0
                    if s < e and U_colind[s] == k:
                        s += 1
                while s < e:
                    jj = U_colind[s]
                    v = w * U_val[s]
                    if umark[jj] == stamp:
                        uv[jj] -= v
                    else:
                        uv[jj] = -v
                        umark[jj] = stamp
                        uidx[ucount] = jj
                        ucount += 1
                    if jj < m:
                        counters[C_UPDATE_U_B] += 2
                    else:
                        counters[C_UPDATE_U_F] += 2
                    s += 1
                node = L_next[node]

            # greedy incremental estimate of ||L_k^-1||_inf (and U side)
            sL = 0.0
            node = L_head[k]
            while node != -1:
                j = L_augcol[node]
                sL += L_val[L_valpos[node]] * xL[j]
                counters[C_ESTIMATOR] += 2
                node = L_next[node]
            cLk = 1.0 if sL <= 0.0 else -1.0
            xLk = cLk - sL
            kapL = abs(xLk)
            if sym:
                kapU = kapL
                xUk = xLk
                cUk = cLk
            else:
                sU = 0.0
                node = U_head[k]
                while node != -1:
                    j = U_augrow[node]
                    sU += U_val[U_valpos[node]] * xU[j]
                    counters[C_ESTIMATOR] += 2
                    node = U_next[node]
                cUk = 1.0 if sU <= 0.0 else -1.0
                xUk = cUk - sU
                kapU = abs(xUk)

            pivot = (kapL > tau_kappa) or (kapU > tau_kappa)
            if pivot:
                continue

            xL[k] = xLk
            cL[k] = cLk
            xU[k] = xUk
            cU[k] = cUk
            dk = d[p[k]]
            acc_d.append(dk)
            acc_kL.append(kapL)
            acc_kU.append(kapU)

            for t in range(lcount):
                i = lidx[t]
                lv[i] = lv[i] / dk
                counters[C_DIV] += 1
            for t in range(ucount):
                j = uidx[t]
                uv[j] = uv[j] / dk
                counters[C_DIV] += 1

            # pre-update the remaining block diagonal before any dropping
            if sym:
                for t in range(lcount):
                    i = lidx[t]
                    if i < m:
                        v = lv[i]
                        if v != 0.0:
                            tmp = dk * v
                            d[p[i]] -= tmp * v
                            counters[C_UPDATE_D] += 3
            else:
                for t in range(lcount):
                    i = lidx[t]
                    if i < m and umark[i] == stamp:
                        lvi = lv[i]
                        uvi = uv[i]
                        if lvi != 0.0 and uvi != 0.0:
                            tmp = dk * lvi
                            d[p[i]] -= tmp * uvi
                            counters[C_UPDATE_D] += 3

            # inverse-based thresholding, then fill caps
            if sym:
                survB = []
                survE = []
                for t in range(lcount):
                    i = lidx[t]
                    counters[C_DROP_SCAN] += 1
                    if abs(lv[i]) * kapL > tau_L:
                        (survB if i < m else survE).append(int(i))
                survF = []
                for t in range(ucount):
                    j = uidx[t]
                    counters[C_DROP_SCAN] += 1
                    if abs(uv[j]) * kapU > tau_U:
                        survF.append(int(j))
                cB = 0
                cE = 0
                for s in range(ac_ptr[c], ac_ptr[c + 1]):
                    if p_inv[ac_ind[s]] < m:
                        cB += 1
                    else:
                        cE += 1
                rB = 0
                rF = 0
                for s in range(ar_ptr[r_orig], ar_ptr[r_orig + 1]):
                    if q_inv[ar_ind[s]] < m:
                        rB += 1
                    else:
                        rF += 1
                # per-span caps: the shared block span obeys both caps so
                # that U_B stays exactly the transpose of L_B, and the
                # bordering spans are limited by their own nonzero counts
                nB = min(int(alpha_L * cB), int(alpha_U * rB))
                keptB = _select_keep(survB, lv, nB)
                keptE = _select_keep(survE, lv, int(alpha_L * cE))
                keptF = _select_keep(survF, uv, int(alpha_U * rF))
                lrows = sorted(keptB + keptE)
                append_L(k, lrows, [lv[i] for i in lrows])
                ucols = keptB + keptF
                append_U(k, ucols, [lv[i] for i in keptB]
                         + [uv[j] for j in keptF])
            else:
                survL = []
                for t in range(lcount):
                    i = lidx[t]
                    counters[C_DROP_SCAN] += 1
                    if abs(lv[i]) * kapL > tau_L:
                        survL.append(int(i))
                survU = []
                for t in range(ucount):
                    j = uidx[t]
                    counters[C_DROP_SCAN] += 1
                    if abs(uv[j]) * kapU > tau_U:
                        survU.append(int(j))
                nL = int(alpha_L * (ac_ptr[c + 1] - ac_ptr[c]))
                nU = int(alpha_U * (ar_ptr[r_orig + 1] - ar_ptr[r_orig]))
                keptL = _select_keep(survL, lv, nL)
                keptU = _select_keep(survU, uv, nU)
                append_L(k, keptL, [lv[i] for i in keptL])
                append_U(k, keptU, [uv[j] for j in keptU])
            break

        if exhausted:
            break
        k += 1

    m_final = m
    nnz_L = int(L_colstart[m_final])
    nnz_U = int(U_rowstart[m_final])
    return {
        "L_colstart": L_colstart[:m_final + 1].copy(),
        "L_rowind": L_rowind[:nnz_L].copy(),
        "L_val": L_val[:nnz_L].copy(),
        "U_rowstart": U_rowstart[:m_final + 1].copy(),
        "U_colind": U_colind[:nnz_U].copy(),
        "U_val": U_val[:nnz_U].copy(),
        "d": d,
        "p": p,
        "q": q,
        "m": m_final,
        "counters": counters,
        "acc_d": np.asarray(acc_d, dtype=REAL),
        "acc_kappa_L": np.asarray(acc_kL, dtype=REAL),
        "acc_kappa_U": np.asarray(acc_kU, dtype=REAL),
        "n_swaps": n_swaps,
    }


def solve_unit_lower_ccs(col_start, row_ind, val, x):
    """In-place forward substitution with a unit lower factor in CCS."""
    m = col_start.shape[0] - 1
    for j in range(m):
        xj = x[j]
        if xj != 0.0:
            for s in range(col_start[j], col_start[j + 1]):
                x[row_ind[s]] -= val[s] * xj


def solve_unit_upper_csr(row_start, col_ind, val, x):
    """In-place backward substitution with a unit upper factor in CSR."""
    m = row_start.shape[0] - 1
    for i in range(m - 1, -1, -1):
        acc = x[i]
        for s in range(row_start[i], row_start[i + 1]):
            acc -= val[s] * x[col_ind[s]]
        x[i] = acc
