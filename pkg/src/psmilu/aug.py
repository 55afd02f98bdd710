"""Augmented compressed sparse storage for the triangular factors.

The store is a compressed major-axis format (CCS when majors are columns)
whose minor indices are kept sorted, augmented with a linked list per minor
line so the matrix can also be traversed along the minor axis in amortized
constant time per nonzero.  Interchanging two minor lines costs time linear
in the nonzeros of the touched major segments, which is what makes diagonal
pivoting affordable inside a Crout factorization.

``AugCCS`` instantiates the store with columns as the major axis (used for
the lower factor); ``AugCRS`` is the same code over the transposed role
(used for the upper factor).
"""

import numpy as np

from .errors import StructureError
from .sparse import INT, REAL


class AugStore:
    """Array-level augmented storage; see module docstring.

    Arrays
    ------
    major_start : major pointer array (``col_start`` for a column-major L)
    minor_ind, val : compressed minor indices / values, sorted per major
    aug_major : major index of each linked-list node
    aug_next : next node within the same minor line (-1 terminates)
    head, tail : first/last node of each minor line (-1 when empty)
    val_pos : node -> slot in ``minor_ind``/``val``
    slot_node : slot -> node (inverse of ``val_pos``)

    Node ids are allocated densely at append time, equal to the slot the
    entry first occupied; interchanges move slot contents but never nodes.
    ``ops`` counts elementary data movements (slot writes, node relinks) so
    tests can compare interchange cost against the analytic bound.
    """

    def __init__(self, n_major, n_minor, capacity=0):
        self.n_major = int(n_major)
        self.n_minor = int(n_minor)
        cap = max(int(capacity), 4)
        self.major_start = np.zeros(self.n_major + 1, dtype=INT)
        self.minor_ind = np.empty(cap, dtype=INT)
        self.val = np.empty(cap, dtype=REAL)
        self.aug_major = np.empty(cap, dtype=INT)
        self.aug_next = np.empty(cap, dtype=INT)
        self.val_pos = np.empty(cap, dtype=INT)
        self.slot_node = np.empty(cap, dtype=INT)
        self.head = np.full(self.n_minor, -1, dtype=INT)
        self.tail = np.full(self.n_minor, -1, dtype=INT)
        self.n_filled = 0
        self.ops = 0

    @property
    def nnz(self):
        return int(self.major_start[self.n_filled])

    def _grow(self, need):
        cap = self.minor_ind.size
        while cap < need:
            cap *= 2
        for name in ("minor_ind", "aug_major", "aug_next", "val_pos",
                     "slot_node"):
            arr = np.empty(cap, dtype=INT)
            old = getattr(self, name)
            arr[:old.size] = old
            setattr(self, name, arr)
        v = np.empty(cap, dtype=REAL)
        v[:self.val.size] = self.val
        self.val = v

    def append_major(self, k, minors, values):
        """Append major line ``k`` with sorted minor indices all > ``k``."""
        if k != self.n_filled:
            raise StructureError("major lines must be appended in order")
        minors = np.asarray(minors, dtype=INT)
        values = np.asarray(values, dtype=REAL)
        if minors.size:
            if np.any(np.diff(minors) <= 0):
                raise StructureError("minor indices must be strictly ascending")
            if minors[0] <= k or minors[-1] >= self.n_minor:
                raise StructureError("minor index out of range for unit factor")
        start = self.major_start[k]
        end = start + minors.size
        if end > self.minor_ind.size:
            self._grow(end)
        self.minor_ind[start:end] = minors
        self.val[start:end] = values
        for s in range(start, end):
            node = s
            self.aug_major[node] = k
            self.aug_next[node] = -1
            self.val_pos[node] = s
            self.slot_node[s] = node
            mi = self.minor_ind[s]
            if self.tail[mi] == -1:
                self.head[mi] = node
            else:
                self.aug_next[self.tail[mi]] = node
            self.tail[mi] = node
            self.ops += 1
        self.major_start[k + 1] = end
        self.n_filled = k + 1

    def major_line(self, j):
        a, b = self.major_start[j], self.major_start[j + 1]
        return self.minor_ind[a:b], self.val[a:b]

    def minor_line(self, i):
        """Iterate (major, value) along minor line ``i`` via the links."""
        node = self.head[i]
        while node != -1:
            yield int(self.aug_major[node]), float(self.val[self.val_pos[node]])
            node = self.aug_next[node]

    def minor_majors(self, i):
        """Major indices present on minor line ``i`` (ascending)."""
        return [mj for mj, _ in self.minor_line(i)]

    def swap_minor(self, k, i):
        """Interchange minor lines ``k`` and ``i`` (k < i <= filled region)."""
        if not k < i:
            raise StructureError("swap requires k < i")
        if self.n_filled > k:
            raise StructureError("swap only valid while majors 0..k-1 filled")
        cols_k = {}
        node = self.head[k]
        while node != -1:
            cols_k[int(self.aug_major[node])] = node
            node = self.aug_next[node]
        cols_i = {}
        node = self.head[i]
        while node != -1:
            cols_i[int(self.aug_major[node])] = node
            node = self.aug_next[node]
        for j in sorted(set(cols_k) | set(cols_i)):
            a, b = self.major_start[j], self.major_start[j + 1]
            seg = self.minor_ind[a:b]
            in_k = j in cols_k
            in_i = j in cols_i
            if in_k and in_i:
                sk = a + int(np.searchsorted(seg, k))
                si = a + int(np.searchsorted(seg, i))
                nk, ni = cols_k[j], cols_i[j]
                self.val[sk], self.val[si] = self.val[si], self.val[sk]
                self.val_pos[nk] = si
                self.val_pos[ni] = sk
                self.slot_node[sk] = ni
                self.slot_node[si] = nk
                self.ops += 4
            elif in_k:
                sk = a + int(np.searchsorted(seg, k))
                hi = a + int(np.searchsorted(seg, i))  # first slot with minor > i
                v = self.val[sk]
                for s in range(sk + 1, hi):
                    self.minor_ind[s - 1] = self.minor_ind[s]
                    self.val[s - 1] = self.val[s]
                    moved = self.slot_node[s]
                    self.val_pos[moved] = s - 1
                    self.slot_node[s - 1] = moved
                    self.ops += 2
                self.minor_ind[hi - 1] = i
                self.val[hi - 1] = v
                nk = cols_k[j]
                self.val_pos[nk] = hi - 1
                self.slot_node[hi - 1] = nk
                self.ops += 2
            else:
                si = a + int(np.searchsorted(seg, i))
                lo = a + int(np.searchsorted(seg, k))  # first slot with minor >= k
                v = self.val[si]
                for s in range(si - 1, lo - 1, -1):
                    self.minor_ind[s + 1] = self.minor_ind[s]
                    self.val[s + 1] = self.val[s]
                    moved = self.slot_node[s]
                    self.val_pos[moved] = s + 1
                    self.slot_node[s + 1] = moved
                    self.ops += 2
                self.minor_ind[lo] = k
                self.val[lo] = v
                ni = cols_i[j]
                self.val_pos[ni] = lo
                self.slot_node[lo] = ni
                self.ops += 2
        ik, ii = self.head[k], self.head[i]
        self.head[k], self.head[i] = ii, ik
        tk, ti = self.tail[k], self.tail[i]
        self.tail[k], self.tail[i] = ti, tk
        self.ops += 2

    def to_dense(self):
        """Densify as an (n_minor, n_major) array from the compressed side."""
        d = np.zeros((self.n_minor, self.n_major), dtype=REAL)
        for j in range(self.n_filled):
            a, b = self.major_start[j], self.major_start[j + 1]
            d[self.minor_ind[a:b], j] = self.val[a:b]
        return d

    def check(self):
        """Validate every structural invariant; raises on violation."""
        nnz = self.nnz
        for j in range(self.n_filled):
            a, b = self.major_start[j], self.major_start[j + 1]
            seg = self.minor_ind[a:b]
            if seg.size > 1 and np.any(np.diff(seg) <= 0):
                raise StructureError(f"major line {j} not sorted")
        seen = np.zeros(nnz, dtype=bool)
        count = 0
        for i in range(self.n_minor):
            node = self.head[i]
            last = -1
            while node != -1:
                s = int(self.val_pos[node])
                if self.minor_ind[s] != i:
                    raise StructureError("node points at a slot of another line")
                if self.slot_node[s] != node:
                    raise StructureError("slot_node/val_pos out of sync")
                mj = int(self.aug_major[node])
                if not (0 <= mj < self.n_filled):
                    raise StructureError("node major out of range")
                if not (self.major_start[mj] <= s < self.major_start[mj + 1]):
                    raise StructureError("node slot outside its major line")
                if mj <= last:
                    raise StructureError("minor line not in ascending major order")
                last = mj
                if seen[s]:
                    raise StructureError("slot linked twice")
                seen[s] = True
                count += 1
                if node == self.tail[i] and self.aug_next[node] != -1:
                    raise StructureError("tail not terminal")
                node = int(self.aug_next[node])
        if count != nnz:
            raise StructureError("linked lists do not cover all nonzeros")


class AugCCS:
    """Column-major augmented storage for a unit lower factor L."""

    def __init__(self, n_rows, n_cols, capacity=0):
        self._s = AugStore(n_cols, n_rows, capacity)
        self.n_rows = n_rows
        self.n_cols = n_cols

    @property
    def nnz(self):
        return self._s.nnz

    @property
    def ops(self):
        return self._s.ops

    def append_column(self, k, rows, vals):
        self._s.append_major(k, rows, vals)

    def swap_rows(self, k, i):
        self._s.swap_minor(k, i)

    def row_iter(self, i):
        return self._s.minor_line(i)

    def col(self, j):
        return self._s.major_line(j)

    def to_dense(self):
        return self._s.to_dense()

    def check(self):
        self._s.check()


class AugCRS:
    """Row-major augmented storage for a unit upper factor U."""

    def __init__(self, n_rows, n_cols, capacity=0):
        self._s = AugStore(n_rows, n_cols, capacity)
        self.n_rows = n_rows
        self.n_cols = n_cols

    @property
    def nnz(self):
        return self._s.nnz

    @property
    def ops(self):
        return self._s.ops

    def append_row(self, k, cols, vals):
        self._s.append_major(k, cols, vals)

    def swap_cols(self, k, i):
        self._s.swap_minor(k, i)

    def col_iter(self, j):
        return self._s.minor_line(j)

    def row(self, i):
        return self._s.major_line(i)

    def to_dense(self):
        return self._s.to_dense().T

    def check(self):
        self._s.check()
