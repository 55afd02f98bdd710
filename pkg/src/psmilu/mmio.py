"""Matrix Market exchange format, coordinate and (for vectors) array flavors.

Only real-valued general/symmetric coordinate matrices are supported.
Symmetric files are expanded on read: every stored off-diagonal entry
produces its mirrored twin.
"""

import numpy as np

from .errors import MatrixMarketError
from .sparse import CRS, REAL, TripletList

_BANNER = "%%MatrixMarket"


def _parse_banner(line, lineno):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0] != _BANNER:
        raise MatrixMarketError("bad banner, expected "
                                "'%%MatrixMarket matrix coordinate real "
                                "<general|symmetric>'", lineno)
    _, obj, fmt, field, symm = parts
    if obj.lower() != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", lineno)
    if field.lower() != "real":
        raise MatrixMarketError(f"unsupported field {field!r}", lineno)
    if symm.lower() not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symm!r}", lineno)
    return fmt.lower(), symm.lower()


def mm_read(path):
    """Read a coordinate file into a :class:`TripletList` (0-based)."""
    with open(path, "r") as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    fmt, symm = _parse_banner(lines[0], 1)
    if fmt != "coordinate":
        raise MatrixMarketError(f"expected coordinate format, got {fmt!r}", 1)
    it = ((no, ln) for no, ln in enumerate(lines[1:], start=2)
          if ln.strip() and not ln.lstrip().startswith("%"))
    try:
        lineno, size_line = next(it)
    except StopIteration:
        raise MatrixMarketError("missing size line", len(lines)) from None
    parts = size_line.split()
    if len(parts) != 3:
        raise MatrixMarketError("size line must be 'nrows ncols nnz'", lineno)
    try:
        n_rows, n_cols, nnz = (int(p) for p in parts)
    except ValueError:
        raise MatrixMarketError("non-integer size entry", lineno) from None
    rows, cols, vals = [], [], []
    count = 0
    for lineno, ln in it:
        parts = ln.split()
        if len(parts) != 3:
            raise MatrixMarketError("entry must be 'i j value'", lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError("malformed entry", lineno) from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise MatrixMarketError("index out of declared range", lineno)
        count += 1
        if count > nnz:
            raise MatrixMarketError(
                f"more than the declared {nnz} entries", lineno)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if symm == "symmetric" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)
    if count != nnz:
        raise MatrixMarketError(
            f"declared {nnz} entries but found {count}", len(lines))
    return TripletList(n_rows, n_cols, rows, cols, vals)


def mm_write(path, a):
    """Write a :class:`CRS` matrix as coordinate/real/general (1-based)."""
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{a.n_rows} {a.n_cols} {a.nnz}\n")
        for i in range(a.n_rows):
            cols, vals = a.row(i)
            for j, v in zip(cols, vals):
                fh.write(f"{i + 1} {j + 1} {v:.17g}\n")


def mm_read_vector(path):
    """Read an array-format file holding a single column."""
    with open(path, "r") as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    fmt, _ = _parse_banner(lines[0], 1)
    if fmt != "array":
        raise MatrixMarketError(f"expected array format, got {fmt!r}", 1)
    it = ((no, ln) for no, ln in enumerate(lines[1:], start=2)
          if ln.strip() and not ln.lstrip().startswith("%"))
    lineno, size_line = next(it)
    parts = size_line.split()
    if len(parts) != 2 or parts[1] != "1":
        raise MatrixMarketError("expected 'n 1' size line", lineno)
    n = int(parts[0])
    vals = []
    for lineno, ln in it:
        try:
            vals.append(float(ln))
        except ValueError:
            raise MatrixMarketError("malformed value", lineno) from None
    if len(vals) != n:
        raise MatrixMarketError(
            f"declared {n} values but found {len(vals)}", len(lines))
    return np.asarray(vals, dtype=REAL)


def mm_write_vector(path, x):
    x = np.asarray(x, dtype=REAL)
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write(f"{x.size} 1\n")
        for v in x:
            fh.write(f"{v:.17g}\n")
