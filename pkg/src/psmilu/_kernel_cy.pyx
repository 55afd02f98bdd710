# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled factorization kernel; semantics mirror ``_kernel_py`` exactly.

Every floating-point expression is shaped the same as in the pure-Python
kernel (same association, same accumulation order), so the two backends
produce bit-identical factors.  Keep the two files in sync; the test suite
asserts equality on a randomized corpus.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

INT = np.int64
REAL = np.float64

cdef enum:
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

ctypedef cnp.int64_t I64
ctypedef cnp.float64_t F64


cdef inline bint _ranks_before(double aa, I64 ia, double ab, I64 ib) nogil:
    # descending magnitude, ties to the smaller index
    if aa != ab:
        return aa > ab
    return ia < ib


cdef void _sort_idx(I64* idx, Py_ssize_t lo, Py_ssize_t hi) nogil:
    # ascending quicksort with insertion sort under 16 elements
    cdef Py_ssize_t i, j
    cdef I64 v, piv
    cdef Py_ssize_t l, r, mid
    while hi - lo > 16:
        mid = lo + (hi - lo) // 2
        piv = idx[mid]
        l = lo
        r = hi - 1
        while l <= r:
            while idx[l] < piv:
                l += 1
            while idx[r] > piv:
                r -= 1
            if l <= r:
                v = idx[l]; idx[l] = idx[r]; idx[r] = v
                l += 1
                r -= 1
        if r - lo < hi - l:
            _sort_idx(idx, lo, r + 1)
            lo = l
        else:
            _sort_idx(idx, l, hi)
            hi = r + 1
    for i in range(lo + 1, hi):
        v = idx[i]
        j = i
        while j > lo and idx[j - 1] > v:
            idx[j] = idx[j - 1]
            j -= 1
        idx[j] = v


cdef Py_ssize_t _select_keep_c(I64* idx, Py_ssize_t count, F64* vals,
                               Py_ssize_t budget) nogil:
    """Keep the ``budget`` largest-magnitude entries of idx (ties to the
    smaller index) via quickselect, then sort the kept prefix ascending.
    Returns the kept count."""
    cdef Py_ssize_t lo, hi, l, r, mid, keep
    cdef I64 tv, piv_i
    cdef double piv_a
    if budget <= 0:
        return 0
    if count > budget:
        lo = 0
        hi = count
        keep = budget
        while hi - lo > 1:
            mid = lo + (hi - lo) // 2
            piv_i = idx[mid]
            piv_a = fabs(vals[piv_i])
            l = lo
            r = hi - 1
            while l <= r:
                while _ranks_before(fabs(vals[idx[l]]), idx[l], piv_a, piv_i):
                    l += 1
                while _ranks_before(piv_a, piv_i, fabs(vals[idx[r]]), idx[r]):
                    r -= 1
                if l <= r:
                    tv = idx[l]; idx[l] = idx[r]; idx[r] = tv
                    l += 1
                    r -= 1
            if keep <= r:
                hi = r + 1
            elif keep >= l:
                lo = l
            else:
                break
        count = budget
    _sort_idx(idx, 0, count)
    return count


def factor_level(Py_ssize_t n, Py_ssize_t m0, bint sym,
                 I64[::1] ar_ptr, I64[::1] ar_ind, F64[::1] ar_val,
                 I64[::1] ac_ptr, I64[::1] ac_ind, F64[::1] ac_val,
                 p_in, q_in,
                 double tau_L, double tau_U, double tau_d, double tau_kappa,
                 double alpha_L, double alpha_U,
                 Py_ssize_t cap_L, Py_ssize_t cap_U):
    """Compiled twin of ``_kernel_py.factor_level``; same contract."""
    cdef Py_ssize_t m = m0
    p_arr = np.asarray(p_in, dtype=INT)
    q_arr = np.asarray(q_in, dtype=INT)
    cdef I64[::1] p = p_arr
    cdef I64[::1] q = q_arr
    p_inv_arr = np.empty(n, dtype=INT)
    q_inv_arr = np.empty(n, dtype=INT)
    cdef I64[::1] p_inv = p_inv_arr
    cdef I64[::1] q_inv = q_inv_arr
    cdef Py_ssize_t i, j, k, s, e, a, b, t, r, lo, hi, sk, si, moved
    for i in range(n):
        p_inv[p[i]] = i
        q_inv[q[i]] = i

    d_arr = np.zeros(n, dtype=REAL)
    cdef F64[::1] d = d_arr
    cdef I64 rr, cc
    for i in range(n):
        rr = p[i]
        cc = q[i]
        a = ar_ptr[rr]
        b = ar_ptr[rr + 1]
        while a < b:
            s = a + (b - a) // 2
            if ar_ind[s] < cc:
                a = s + 1
            else:
                b = s
        if a < ar_ptr[rr + 1] and ar_ind[a] == cc:
            d[rr] = ar_val[a]

    L_colstart_arr = np.zeros(n + 1, dtype=INT)
    L_rowind_arr = np.empty(cap_L, dtype=INT)
    L_val_arr = np.empty(cap_L, dtype=REAL)
    L_augcol_arr = np.empty(cap_L, dtype=INT)
    L_next_arr = np.empty(cap_L, dtype=INT)
    L_valpos_arr = np.empty(cap_L, dtype=INT)
    L_slotnode_arr = np.empty(cap_L, dtype=INT)
    L_head_arr = np.full(n, -1, dtype=INT)
    L_tail_arr = np.full(n, -1, dtype=INT)
    L_start_arr = np.zeros(n, dtype=INT)
    cdef I64[::1] L_colstart = L_colstart_arr
    cdef I64[::1] L_rowind = L_rowind_arr
    cdef F64[::1] L_val = L_val_arr
    cdef I64[::1] L_augcol = L_augcol_arr
    cdef I64[::1] L_next = L_next_arr
    cdef I64[::1] L_valpos = L_valpos_arr
    cdef I64[::1] L_slotnode = L_slotnode_arr
    cdef I64[::1] L_head = L_head_arr
    cdef I64[::1] L_tail = L_tail_arr
    cdef I64[::1] L_start = L_start_arr

    U_rowstart_arr = np.zeros(n + 1, dtype=INT)
    U_colind_arr = np.empty(cap_U, dtype=INT)
    U_val_arr = np.empty(cap_U, dtype=REAL)
    U_augrow_arr = np.empty(cap_U, dtype=INT)
    U_next_arr = np.empty(cap_U, dtype=INT)
    U_valpos_arr = np.empty(cap_U, dtype=INT)
    U_slotnode_arr = np.empty(cap_U, dtype=INT)
    U_head_arr = np.full(n, -1, dtype=INT)
    U_tail_arr = np.full(n, -1, dtype=INT)
    U_start_arr = np.zeros(n, dtype=INT)
    cdef I64[::1] U_rowstart = U_rowstart_arr
    cdef I64[::1] U_colind = U_colind_arr
    cdef F64[::1] U_val = U_val_arr
    cdef I64[::1] U_augrow = U_augrow_arr
    cdef I64[::1] U_next = U_next_arr
    cdef I64[::1] U_valpos = U_valpos_arr
    cdef I64[::1] U_slotnode = U_slotnode_arr
    cdef I64[::1] U_head = U_head_arr
    cdef I64[::1] U_tail = U_tail_arr
    cdef I64[::1] U_start = U_start_arr

    xL_arr = np.zeros(n, dtype=REAL)
    cL_arr = np.zeros(n, dtype=REAL)
    xU_arr = np.zeros(n, dtype=REAL)
    cU_arr = np.zeros(n, dtype=REAL)
    cdef F64[::1] xL = xL_arr
    cdef F64[::1] cL = cL_arr
    cdef F64[::1] xU = xU_arr
    cdef F64[::1] cU = cU_arr

    lv_arr = np.zeros(n, dtype=REAL)
    lmark_arr = np.full(n, -1, dtype=INT)
    lidx_arr = np.zeros(n, dtype=INT)
    uv_arr = np.zeros(n, dtype=REAL)
    umark_arr = np.full(n, -1, dtype=INT)
    uidx_arr = np.zeros(n, dtype=INT)
    cdef F64[::1] lv = lv_arr
    cdef I64[::1] lmark = lmark_arr
    cdef I64[::1] lidx = lidx_arr
    cdef F64[::1] uv = uv_arr
    cdef I64[::1] umark = umark_arr
    cdef I64[::1] uidx = uidx_arr

    surv_arr = np.zeros(2 * n + 2, dtype=INT)
    cdef I64[::1] surv = surv_arr

    counters_arr = np.zeros(N_COUNTERS, dtype=INT)
    cdef I64[::1] counters = counters_arr
    acc_d_arr = np.zeros(n, dtype=REAL)
    acc_kL_arr = np.zeros(n, dtype=REAL)
    acc_kU_arr = np.zeros(n, dtype=REAL)
    cdef F64[::1] acc_d = acc_d_arr
    cdef F64[::1] acc_kL = acc_kL_arr
    cdef F64[::1] acc_kU = acc_kU_arr

    cdef Py_ssize_t n_swaps = 0
    cdef I64 stamp = 0
    cdef bint exhausted = False, pivot
    cdef Py_ssize_t node, lcount, ucount, start, lim
    cdef double dv, dm, w, v, sL, sU, cLk, cUk, xLk, xUk, kapL, kapU, dk
    cdef double tmp, lvi, uvi
    cdef Py_ssize_t cB, cE, rB, rF, nB, nsB, nsE, nsF, keptB, keptE, keptF
    cdef Py_ssize_t r_orig, c_orig, jj

    k = 0
    while k < m and not exhausted:
        if k > 0:
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
        pivot = (dv == 0.0) or (fabs(dv) * tau_d < 1.0)
        while True:
            if pivot:
                while m - 1 > k:
                    dm = d[p[m - 1]]
                    if dm == 0.0 or fabs(dm) * tau_d < 1.0:
                        m -= 1
                    else:
                        break
                if m - 1 == k:
                    m = k
                    exhausted = True
                    break
                r = m - 1
                # ---- swap row positions k and r of L across columns < k
                node = L_head[k]
                while node != -1:
                    j = L_augcol[node]
                    lo = L_start[j]
                    hi = L_colstart[j + 1]
                    # find whether row r is present in column j
                    sk = lo
                    si = -1
                    s = sk + 1
                    while s < hi and L_rowind[s] < r:
                        s += 1
                    if s < hi and L_rowind[s] == r:
                        si = s
                    if si >= 0:
                        # both rows present: swap values, relink nodes
                        v = L_val[sk]
                        L_val[sk] = L_val[si]
                        L_val[si] = v
                        moved = L_slotnode[sk]
                        jj = L_slotnode[si]
                        L_valpos[moved] = si
                        L_valpos[jj] = sk
                        L_slotnode[sk] = jj
                        L_slotnode[si] = moved
                        counters[C_SWAP_MOVES] += 4
                    else:
                        # only row k present: shift (k, r) segment up
                        v = L_val[sk]
                        moved = L_slotnode[sk]
                        s = sk + 1
                        while s < hi and L_rowind[s] < r:
                            L_rowind[s - 1] = L_rowind[s]
                            L_val[s - 1] = L_val[s]
                            jj = L_slotnode[s]
                            L_valpos[jj] = s - 1
                            L_slotnode[s - 1] = jj
                            counters[C_SWAP_MOVES] += 2
                            s += 1
                        L_rowind[s - 1] = r
                        L_val[s - 1] = v
                        L_valpos[moved] = s - 1
                        L_slotnode[s - 1] = moved
                        counters[C_SWAP_MOVES] += 2
                    node = L_next[node]
                node = L_head[r]
                while node != -1:
                    j = L_augcol[node]
                    lo = L_start[j]
                    hi = L_colstart[j + 1]
                    if lo < hi and L_rowind[lo] == k:
                        node = L_next[node]
                        continue  # handled above as the both-present case
                    si = lo
                    while L_rowind[si] < r:
                        si += 1
                    v = L_val[si]
                    moved = L_slotnode[si]
                    s = si
                    while s > lo:
                        L_rowind[s] = L_rowind[s - 1]
                        L_val[s] = L_val[s - 1]
                        jj = L_slotnode[s - 1]
                        L_valpos[jj] = s
                        L_slotnode[s] = jj
                        counters[C_SWAP_MOVES] += 2
                        s -= 1
                    L_rowind[lo] = k
                    L_val[lo] = v
                    L_valpos[moved] = lo
                    L_slotnode[lo] = moved
                    counters[C_SWAP_MOVES] += 2
                    node = L_next[node]
                node = L_head[k]
                L_head[k] = L_head[r]
                L_head[r] = node
                node = L_tail[k]
                L_tail[k] = L_tail[r]
                L_tail[r] = node
                counters[C_SWAP_MOVES] += 2
                # ---- swap column positions k and r of U across rows < k
                node = U_head[k]
                while node != -1:
                    j = U_augrow[node]
                    lo = U_start[j]
                    hi = U_rowstart[j + 1]
                    sk = lo
                    si = -1
                    s = sk + 1
                    while s < hi and U_colind[s] < r:
                        s += 1
                    if s < hi and U_colind[s] == r:
                        si = s
                    if si >= 0:
                        v = U_val[sk]
                        U_val[sk] = U_val[si]
                        U_val[si] = v
                        moved = U_slotnode[sk]
                        jj = U_slotnode[si]
                        U_valpos[moved] = si
                        U_valpos[jj] = sk
                        U_slotnode[sk] = jj
                        U_slotnode[si] = moved
                        counters[C_SWAP_MOVES] += 4
                    else:
                        v = U_val[sk]
                        moved = U_slotnode[sk]
                        s = sk + 1
                        while s < hi and U_colind[s] < r:
                            U_colind[s - 1] = U_colind[s]
                            U_val[s - 1] = U_val[s]
                            jj = U_slotnode[s]
                            U_valpos[jj] = s - 1
                            U_slotnode[s - 1] = jj
                            counters[C_SWAP_MOVES] += 2
                            s += 1
                        U_colind[s - 1] = r
                        U_val[s - 1] = v
                        U_valpos[moved] = s - 1
                        U_slotnode[s - 1] = moved
                        counters[C_SWAP_MOVES] += 2
                    node = U_next[node]
                node = U_head[r]
                while node != -1:
                    j = U_augrow[node]
                    lo = U_start[j]
                    hi = U_rowstart[j + 1]
                    if lo < hi and U_colind[lo] == k:
                        node = U_next[node]
                        continue
                    si = lo
                    while U_colind[si] < r:
                        si += 1
                    v = U_val[si]
                    moved = U_slotnode[si]
                    s = si
                    while s > lo:
                        U_colind[s] = U_colind[s - 1]
                        U_val[s] = U_val[s - 1]
                        jj = U_slotnode[s - 1]
                        U_valpos[jj] = s
                        U_slotnode[s] = jj
                        counters[C_SWAP_MOVES] += 2
                        s -= 1
                    U_colind[lo] = k
                    U_val[lo] = v
                    U_valpos[moved] = lo
                    U_slotnode[lo] = moved
                    counters[C_SWAP_MOVES] += 2
                    node = U_next[node]
                node = U_head[k]
                U_head[k] = U_head[r]
                U_head[r] = node
                node = U_tail[k]
                U_tail[k] = U_tail[r]
                U_tail[r] = node
                counters[C_SWAP_MOVES] += 2

                rr = p[k]
                p[k] = p[r]
                p[r] = rr
                p_inv[p[k]] = k
                p_inv[p[r]] = r
                rr = q[k]
                q[k] = q[r]
                q[r] = rr
                q_inv[q[k]] = k
                q_inv[q[r]] = r
                m -= 1
                n_swaps += 1

            stamp += 1
            # ---- column update
            lcount = 0
            c_orig = q[k]
            a = ac_ptr[c_orig]
            b = ac_ptr[c_orig + 1]
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

            # ---- row update
            ucount = 0
            r_orig = p[k]
            a = ar_ptr[r_orig]
            b = ar_ptr[r_orig + 1]
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
                a = U_start[j]
                e = U_rowstart[j + 1]
                if sym:
                    # lower bound for the first column position >= m
                    b = e
                    while a < b:
                        s = a + (b - a) // 2
                        if U_colind[s] < m:
                            a = s + 1
                        else:
                            b = s
                    s = a
                else:
                    s = a
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

            # ---- inverse-norm estimates
            sL = 0.0
            node = L_head[k]
            while node != -1:
                j = L_augcol[node]
                sL += L_val[L_valpos[node]] * xL[j]
                counters[C_ESTIMATOR] += 2
                node = L_next[node]
            cLk = 1.0 if sL <= 0.0 else -1.0
            xLk = cLk - sL
            kapL = fabs(xLk)
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
                kapU = fabs(xUk)

            pivot = (kapL > tau_kappa) or (kapU > tau_kappa)
            if pivot:
                continue

            xL[k] = xLk
            cL[k] = cLk
            xU[k] = xUk
            cU[k] = cUk
            dk = d[p[k]]
            acc_d[k] = dk
            acc_kL[k] = kapL
            acc_kU[k] = kapU

            for t in range(lcount):
                i = lidx[t]
                lv[i] = lv[i] / dk
                counters[C_DIV] += 1
            for t in range(ucount):
                j = uidx[t]
                uv[j] = uv[j] / dk
                counters[C_DIV] += 1

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

            # ---- dropping and appends
            if sym:
                nsB = 0
                nsE = n
                for t in range(lcount):
                    i = lidx[t]
                    counters[C_DROP_SCAN] += 1
                    if fabs(lv[i]) * kapL > tau_L:
                        if i < m:
                            surv[nsB] = i
                            nsB += 1
                        else:
                            surv[nsE] = i
                            nsE += 1
                nsF = 0
                for t in range(ucount):
                    j = uidx[t]
                    counters[C_DROP_SCAN] += 1
                    if fabs(uv[j]) * kapU > tau_U:
                        uidx[nsF] = j
                        nsF += 1
                cB = 0
                cE = 0
                for s in range(ac_ptr[c_orig], ac_ptr[c_orig + 1]):
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
                nB = <Py_ssize_t>min(alpha_L * cB, alpha_U * rB)
                keptB = _select_keep_c(&surv[0], nsB, &lv[0], nB)
                keptE = _select_keep_c(&surv[n], nsE - n, &lv[0],
                                       <Py_ssize_t>(alpha_L * cE))
                keptF = _select_keep_c(&uidx[0], nsF, &uv[0],
                                       <Py_ssize_t>(alpha_U * rF))
                # append L column k: block survivors then trailing span
                start = L_colstart[k]
                if start + keptB + keptE > cap_L:
                    raise RuntimeError("L capacity exceeded")
                for t in range(keptB):
                    i = surv[t]
                    s = start + t
                    L_rowind[s] = i
                    L_val[s] = lv[i]
                    L_augcol[s] = k
                    L_next[s] = -1
                    L_valpos[s] = s
                    L_slotnode[s] = s
                    if L_tail[i] == -1:
                        L_head[i] = s
                    else:
                        L_next[L_tail[i]] = s
                    L_tail[i] = s
                start += keptB
                for t in range(keptE):
                    i = surv[n + t]
                    s = start + t
                    L_rowind[s] = i
                    L_val[s] = lv[i]
                    L_augcol[s] = k
                    L_next[s] = -1
                    L_valpos[s] = s
                    L_slotnode[s] = s
                    if L_tail[i] == -1:
                        L_head[i] = s
                    else:
                        L_next[L_tail[i]] = s
                    L_tail[i] = s
                L_colstart[k + 1] = start + keptE
                L_start[k] = L_colstart[k]
                # append U row k: shared block values then the F span
                start = U_rowstart[k]
                if start + keptB + keptF > cap_U:
                    raise RuntimeError("U capacity exceeded")
                for t in range(keptB):
                    j = surv[t]
                    s = start + t
                    U_colind[s] = j
                    U_val[s] = lv[j]
                    U_augrow[s] = k
                    U_next[s] = -1
                    U_valpos[s] = s
                    U_slotnode[s] = s
                    if U_tail[j] == -1:
                        U_head[j] = s
                    else:
                        U_next[U_tail[j]] = s
                    U_tail[j] = s
                start += keptB
                for t in range(keptF):
                    j = uidx[t]
                    s = start + t
                    U_colind[s] = j
                    U_val[s] = uv[j]
                    U_augrow[s] = k
                    U_next[s] = -1
                    U_valpos[s] = s
                    U_slotnode[s] = s
                    if U_tail[j] == -1:
                        U_head[j] = s
                    else:
                        U_next[U_tail[j]] = s
                    U_tail[j] = s
                U_rowstart[k + 1] = start + keptF
                U_start[k] = U_rowstart[k]
            else:
                nsB = 0
                for t in range(lcount):
                    i = lidx[t]
                    counters[C_DROP_SCAN] += 1
                    if fabs(lv[i]) * kapL > tau_L:
                        surv[nsB] = i
                        nsB += 1
                nsF = 0
                for t in range(ucount):
                    j = uidx[t]
                    counters[C_DROP_SCAN] += 1
                    if fabs(uv[j]) * kapU > tau_U:
                        uidx[nsF] = j
                        nsF += 1
                cB = ac_ptr[c_orig + 1] - ac_ptr[c_orig]
                rB = ar_ptr[r_orig + 1] - ar_ptr[r_orig]
                keptB = _select_keep_c(&surv[0], nsB, &lv[0],
                                       <Py_ssize_t>(alpha_L * cB))
                keptF = _select_keep_c(&uidx[0], nsF, &uv[0],
                                       <Py_ssize_t>(alpha_U * rB))
                start = L_colstart[k]
                if start + keptB > cap_L:
                    raise RuntimeError("L capacity exceeded")
                for t in range(keptB):
                    i = surv[t]
                    s = start + t
                    L_rowind[s] = i
                    L_val[s] = lv[i]
                    L_augcol[s] = k
                    L_next[s] = -1
                    L_valpos[s] = s
                    L_slotnode[s] = s
                    if L_tail[i] == -1:
                        L_head[i] = s
                    else:
                        L_next[L_tail[i]] = s
                    L_tail[i] = s
                L_colstart[k + 1] = start + keptB
                L_start[k] = L_colstart[k]
                start = U_rowstart[k]
                if start + keptF > cap_U:
                    raise RuntimeError("U capacity exceeded")
                for t in range(keptF):
                    j = uidx[t]
                    s = start + t
                    U_colind[s] = j
                    U_val[s] = uv[j]
                    U_augrow[s] = k
                    U_next[s] = -1
                    U_valpos[s] = s
                    U_slotnode[s] = s
                    if U_tail[j] == -1:
                        U_head[j] = s
                    else:
                        U_next[U_tail[j]] = s
                    U_tail[j] = s
                U_rowstart[k + 1] = start + keptF
                U_start[k] = U_rowstart[k]
            break

        if exhausted:
            break
        k += 1

    cdef Py_ssize_t m_final = m
    nnz_L = int(L_colstart_arr[m_final])
    nnz_U = int(U_rowstart_arr[m_final])
    return {
        "L_colstart": L_colstart_arr[:m_final + 1].copy(),
        "L_rowind": L_rowind_arr[:nnz_L].copy(),
        "L_val": L_val_arr[:nnz_L].copy(),
        "U_rowstart": U_rowstart_arr[:m_final + 1].copy(),
        "U_colind": U_colind_arr[:nnz_U].copy(),
        "U_val": U_val_arr[:nnz_U].copy(),
        "d": d_arr,
        "p": p_arr,
        "q": q_arr,
        "m": m_final,
        "counters": counters_arr,
        "acc_d": acc_d_arr[:m_final].copy(),
        "acc_kappa_L": acc_kL_arr[:m_final].copy(),
        "acc_kappa_U": acc_kU_arr[:m_final].copy(),
        "n_swaps": n_swaps,
    }


def solve_unit_lower_ccs(I64[::1] col_start, I64[::1] row_ind,
                         F64[::1] val, F64[::1] x):
    """In-place forward substitution with a unit lower factor in CCS."""
    cdef Py_ssize_t m = col_start.shape[0] - 1
    cdef Py_ssize_t j, s
    cdef double xj
    for j in range(m):
        xj = x[j]
        if xj != 0.0:
            for s in range(col_start[j], col_start[j + 1]):
                x[row_ind[s]] -= val[s] * xj


def solve_unit_upper_csr(I64[::1] row_start, I64[::1] col_ind,
                         F64[::1] val, F64[::1] x):
    """In-place backward substitution with a unit upper factor in CSR."""
    cdef Py_ssize_t m = row_start.shape[0] - 1
    cdef Py_ssize_t i, s
    cdef double acc
    for i in range(m - 1, -1, -1):
        acc = x[i]
        for s in range(row_start[i], row_start[i + 1]):
            acc -= val[s] * x[col_ind[s]]
        x[i] = acc
