"""Benchmark problem generators.

Finite-difference Poisson systems on the unit square/cube with the analytic
solutions exp(x+y) and exp(x+y+z): centered differences in the interior,
one-sided differences on the Neumann (top) boundary, Dirichlet rows kept in
the system as identity rows.  Interior rows come first in the node ordering
(lexicographic), then Neumann rows, then Dirichlet rows, so the leading
block is symmetric and the trailing Dirichlet block is the identity.

Stencil values are integers times (side - 1)^2, so the interior block is
symmetric to the last bit for any grid size.
"""

from dataclasses import dataclass

import numpy as np

from .sparse import CRS, REAL, TripletList, crs_from_triplets


@dataclass
class PoissonSystem:
    a: CRS
    b: np.ndarray
    m: int                  # size of the symmetric interior block
    exact: np.ndarray       # analytic solution at the nodes
    dims: tuple
    h: float


def fdm_poisson_2d(nx, ny, neumann_top=True):
    """5-point Poisson system on an nx-by-ny grid of the unit square.

    ``neumann_top`` replaces the Dirichlet condition on the y = 1 edge
    (corners excluded) with a first-order one-sided normal derivative,
    which makes the system predominantly symmetric rather than symmetric.
    """
    if nx < 3 or ny < 3:
        raise ValueError("need at least a 3x3 grid")
    hx = 1.0 / (nx - 1)
    hy = 1.0 / (ny - 1)
    wx = float((nx - 1) ** 2)   # 1/hx^2, exact in floating point
    wy = float((ny - 1) ** 2)

    def node(i, j):
        return i, j

    interior = [(i, j) for j in range(1, ny - 1) for i in range(1, nx - 1)]
    if neumann_top:
        neumann = [(i, ny - 1) for i in range(1, nx - 1)]
    else:
        neumann = []
    dirichlet = [nd for j in (0, ny - 1) for nd in
                 ((i, j) for i in range(nx))
                 if nd not in set(neumann)]
    dirichlet += [(i2, j) for j in range(1, ny - 1) for i2 in (0, nx - 1)]
    order = interior + neumann + dirichlet
    index = {nd: k for k, nd in enumerate(order)}
    n = len(order)
    m = len(interior)

    u = lambda x, y: np.exp(x + y)
    f = lambda x, y: -2.0 * np.exp(x + y)      # -laplace(u)
    dudy = lambda x, y: np.exp(x + y)

    t = TripletList(n, n)
    rows, cols, vals = [], [], []
    b = np.zeros(n, dtype=REAL)
    for (i, j) in interior:
        r = index[(i, j)]
        rows.append(r); cols.append(r); vals.append(2.0 * wx + 2.0 * wy)
        for (ii, jj, w) in ((i - 1, j, wx), (i + 1, j, wx),
                            (i, j - 1, wy), (i, j + 1, wy)):
            rows.append(r); cols.append(index[(ii, jj)]); vals.append(-w)
        b[r] = f(i * hx, j * hy)
    for (i, j) in neumann:
        r = index[(i, j)]
        # du/dn = du/dy at y=1, one-sided: (u(x,1) - u(x,1-hy)) / hy
        rows.append(r); cols.append(r); vals.append(float(ny - 1))
        rows.append(r); cols.append(index[(i, j - 1)])
        vals.append(-float(ny - 1))
        b[r] = dudy(i * hx, 1.0)
    for (i, j) in dirichlet:
        r = index[(i, j)]
        rows.append(r); cols.append(r); vals.append(1.0)
        b[r] = u(i * hx, j * hy)
    t.rows = np.asarray(rows); t.cols = np.asarray(cols)
    t.vals = np.asarray(vals, dtype=REAL)
    a = crs_from_triplets(t)
    exact = np.array([u(i * hx, j * hy) for (i, j) in order], dtype=REAL)
    return PoissonSystem(a=a, b=b, m=m, exact=exact, dims=(nx, ny), h=hx)


def fdm_poisson_3d(nx, ny, nz, neumann_top=True):
    """7-point Poisson system on an nx-by-ny-by-nz grid of the unit cube.

    The Neumann face is z = 1 (face interior only); everything else is
    Dirichlet, retained as identity rows after the interior block.
    """
    if min(nx, ny, nz) < 3:
        raise ValueError("need at least a 3x3x3 grid")
    hx, hy, hz = 1.0 / (nx - 1), 1.0 / (ny - 1), 1.0 / (nz - 1)
    wx = float((nx - 1) ** 2)
    wy = float((ny - 1) ** 2)
    wz = float((nz - 1) ** 2)

    interior = [(i, j, k) for k in range(1, nz - 1)
                for j in range(1, ny - 1) for i in range(1, nx - 1)]
    if neumann_top:
        neumann = [(i, j, nz - 1) for j in range(1, ny - 1)
                   for i in range(1, nx - 1)]
    else:
        neumann = []
    neumann_set = set(neumann)
    dirichlet = [(i, j, k) for k in range(nz) for j in range(ny)
                 for i in range(nx)
                 if (i in (0, nx - 1) or j in (0, ny - 1) or k in (0, nz - 1))
                 and (i, j, k) not in neumann_set]
    order = interior + neumann + dirichlet
    index = {nd: r for r, nd in enumerate(order)}
    n = len(order)
    m = len(interior)

    u = lambda x, y, z: np.exp(x + y + z)
    f = lambda x, y, z: -3.0 * np.exp(x + y + z)
    dudz = lambda x, y, z: np.exp(x + y + z)

    rows, cols, vals = [], [], []
    b = np.zeros(n, dtype=REAL)
    for (i, j, k) in interior:
        r = index[(i, j, k)]
        rows.append(r); cols.append(r)
        vals.append(2.0 * wx + 2.0 * wy + 2.0 * wz)
        for (ii, jj, kk, w) in ((i - 1, j, k, wx), (i + 1, j, k, wx),
                                (i, j - 1, k, wy), (i, j + 1, k, wy),
                                (i, j, k - 1, wz), (i, j, k + 1, wz)):
            rows.append(r); cols.append(index[(ii, jj, kk)]); vals.append(-w)
        b[r] = f(i * hx, j * hy, k * hz)
    for (i, j, k) in neumann:
        r = index[(i, j, k)]
        rows.append(r); cols.append(r); vals.append(float(nz - 1))
        rows.append(r); cols.append(index[(i, j, k - 1)])
        vals.append(-float(nz - 1))
        b[r] = dudz(i * hx, j * hy, 1.0)
    for (i, j, k) in dirichlet:
        r = index[(i, j, k)]
        rows.append(r); cols.append(r); vals.append(1.0)
        b[r] = u(i * hx, j * hy, k * hz)
    t = TripletList(n, n, rows, cols, vals)
    a = crs_from_triplets(t)
    exact = np.array([u(i * hx, j * hy, k * hz) for (i, j, k) in order],
                     dtype=REAL)
    return PoissonSystem(a=a, b=b, m=m, exact=exact, dims=(nx, ny, nz), h=hx)


def random_test_matrix(n, density, kind="nonsymmetric", seed=0):
    """Seeded random matrices for property tests.

    Kinds: ``spd`` (sparse M^T M plus n I), ``symmetric-indefinite``
    (symmetrized sparse with +-n diagonal), ``nonsymmetric`` (diagonally
    dominant sparse), and ``zero-diag-sym`` (symmetric indefinite with at
    least one exact zero diagonal entry, to exercise pivoting).
    """
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density
    vals = rng.uniform(-1.0, 1.0, size=(n, n)) * mask
    if kind == "spd":
        dense = vals.T @ vals + n * np.eye(n)
    elif kind == "symmetric-indefinite":
        dense = vals + vals.T
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        dense[np.arange(n), np.arange(n)] = signs * n
    elif kind == "nonsymmetric":
        dense = vals.copy()
        dom = np.abs(vals).sum(axis=1) + 1.0
        dense[np.arange(n), np.arange(n)] = dom
    elif kind == "zero-diag-sym":
        dense = vals + vals.T
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        dense[np.arange(n), np.arange(n)] = signs * n
        n_zero = max(1, n // 8)
        zero_at = rng.choice(n, size=n_zero, replace=False)
        dense[zero_at, zero_at] = 0.0
    else:
        raise ValueError(f"unknown kind {kind!r}")
    from .sparse import crs_from_dense
    return crs_from_dense(dense)
