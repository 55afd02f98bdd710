"""Command-line front end: generate, factor, solve, benchmark.

Exit codes: 0 success, 2 usage error, 3 factorization failure,
4 solver non-convergence.  The PSMILU_SEED environment variable overrides
the default random seed of ``gen`` and ``bench``.
"""

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import kernels
from .errors import MatrixMarketError, PsmiluError, SingularFactorError
from .krylov import gmres_right
from .mmio import mm_read, mm_read_vector, mm_write, mm_write_vector
from .multilevel import (Options, load_prec, psmilu_factor, psmilu_solve,
                         save_prec)
from .problems import fdm_poisson_2d, fdm_poisson_3d, random_test_matrix
from .sparse import crs_from_triplets

STATS_SCHEMA = "psmilu-stats/1"
SOLVE_SCHEMA = "psmilu-solve/1"
GEN_SCHEMA = "psmilu-gen/1"

BENCH_COLUMNS = ["kind", "side", "n", "nnz", "kernel", "levels",
                 "fill_ratio", "level1_update_flops", "total_update_flops",
                 "factor_seconds", "gmres_iters_1e6", "gmres_iters_1e12",
                 "solve_seconds"]


def _default_seed(args_seed):
    if args_seed is not None:
        return args_seed
    return int(os.environ.get("PSMILU_SEED", "0"))


def _sidecar(path):
    stem = path[:-4] if path.endswith(".mtx") else path
    return stem + ".meta.json", stem + ".rhs.mtx"


def _opts_from_args(args):
    return Options(tau_L=args.tau_l, tau_U=args.tau_u, tau_d=args.tau_d,
                   tau_kappa=args.tau_kappa, alpha_L=args.alpha_l,
                   alpha_U=args.alpha_u, rho=args.rho, c_d=args.c_d,
                   c_h=args.c_h).validate()


def _add_factor_flags(p):
    p.add_argument("--tau-l", type=float, default=0.01)
    p.add_argument("--tau-u", type=float, default=0.01)
    p.add_argument("--tau-d", type=float, default=10.0)
    p.add_argument("--tau-kappa", type=float, default=100.0)
    p.add_argument("--alpha-l", type=float, default=4.0)
    p.add_argument("--alpha-u", type=float, default=4.0)
    p.add_argument("--rho", type=float, default=0.25)
    p.add_argument("--c-d", type=float, default=1.0)
    p.add_argument("--c-h", type=int, default=10)
    p.add_argument("--sym-block", type=int, default=None,
                   help="leading symmetric block size m0 "
                        "(default: from the .meta.json sidecar, else 0)")
    p.add_argument("--kernel", choices=["auto", "python", "cython"],
                   default="auto")


def cmd_gen(args):
    seed = _default_seed(args.seed)
    if args.kind == "fdm2d":
        if args.nx < 3 or args.ny < 3:
            raise UsageError("fdm2d needs --nx and --ny of at least 3")
        sys_ = fdm_poisson_2d(args.nx, args.ny,
                              neumann_top=not args.all_dirichlet)
        dims = [args.nx, args.ny]
    elif args.kind == "fdm3d":
        if min(args.nx, args.ny, args.nz) < 3:
            raise UsageError("fdm3d needs --nx/--ny/--nz of at least 3")
        sys_ = fdm_poisson_3d(args.nx, args.ny, args.nz,
                              neumann_top=not args.all_dirichlet)
        dims = [args.nx, args.ny, args.nz]
    else:
        a = random_test_matrix(args.n, args.density, kind=args.matrix_kind,
                               seed=seed)
        rng = np.random.default_rng(seed + 1)
        b = rng.standard_normal(a.n_rows)

        class _R:
            pass

        sys_ = _R()
        sys_.a, sys_.b, sys_.m, sys_.h = a, b, 0, 0.0
        dims = [args.n]
    mm_write(args.out, sys_.a)
    meta_path, rhs_path = _sidecar(args.out)
    mm_write_vector(rhs_path, sys_.b)
    meta = {"schema": GEN_SCHEMA, "kind": args.kind, "m": int(sys_.m),
            "dims": dims, "h": float(sys_.h), "n": sys_.a.n_rows,
            "nnz": sys_.a.nnz, "rhs": os.path.basename(rhs_path),
            "seed": seed}
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    return 0


def _load_system(path):
    a = crs_from_triplets(mm_read(path))
    meta_path, rhs_path = _sidecar(path)
    meta = None
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            meta = json.load(fh)
    return a, meta, rhs_path


def _factor_stats(a, prec, kernel_name):
    lev1 = prec.levels[0].stats
    upd = lambda c: c["update_L"] + c["update_U_B"] + c["update_U_F"]
    lev1_update = upd(lev1["counters"])
    total = prec.total_counters()
    dense_size = 0
    for lev in prec.levels:
        if lev.last_level_lu is not None:
            dense_size = lev.last_level_lu.n
    return {
        "schema": STATS_SCHEMA,
        "n": prec.n,
        "nnz": a.nnz,
        "levels": len(prec.levels),
        "fill_ratio": prec.fill_ratio(a.nnz),
        "pivots_per_level": prec.pivots_per_level(),
        "m_per_level": [lev.m for lev in prec.levels],
        "dense_block_size": dense_size,
        "level1_update_flops": lev1_update,
        "update_flops_sym_path": lev1_update if lev1["sym"] else None,
        "update_flops_nonsym_path": None if lev1["sym"] else lev1_update,
        "total_update_flops": upd(total),
        "total_flops": int(sum(total.values())),
        "kernel": kernel_name,
    }


def cmd_factor(args):
    a, meta, _ = _load_system(args.matrix)
    m0 = args.sym_block
    if m0 is None:
        m0 = meta["m"] if meta else 0
    opts = _opts_from_args(args)
    kernel = None if args.kernel == "auto" else args.kernel
    try:
        prec = psmilu_factor(a, m0=m0, opts=opts, kernel=kernel)
    except SingularFactorError as exc:
        print(f"factorization failed: {exc}", file=sys.stderr)
        return 3
    if args.out:
        save_prec(args.out, prec)
    stats = _factor_stats(a, prec,
                          kernel or kernels.active_backend())
    text = json.dumps(stats, indent=1)
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_solve(args):
    a, meta, default_rhs = _load_system(args.matrix)
    rhs_path = args.rhs or default_rhs
    if not os.path.exists(rhs_path):
        raise UsageError(f"right-hand side file {rhs_path!r} not found")
    b = mm_read_vector(rhs_path)
    if b.size != a.n_rows:
        raise UsageError(f"right-hand side length {b.size} does not match "
                         f"matrix size {a.n_rows}")
    if args.prec:
        prec = load_prec(args.prec)
    else:
        m0 = meta["m"] if meta else 0
        try:
            prec = psmilu_factor(a, m0=m0)
        except SingularFactorError as exc:
            print(f"factorization failed: {exc}", file=sys.stderr)
            return 3
    report = gmres_right(a, b, m_inv=lambda v: psmilu_solve(prec, v),
                         restart=args.restart, rtol=args.rtol,
                         maxit=args.maxit)
    if args.out:
        mm_write_vector(args.out, report.x)
    payload = {
        "schema": SOLVE_SCHEMA,
        "converged": bool(report.converged),
        "iterations": report.iterations,
        "restarts": report.restarts,
        "final_relres": report.final_relres,
        "iters_rtol_1e6": report.iterations_to(1e-6),
        "iters_rtol_1e12": report.iterations_to(1e-12),
    }
    text = json.dumps(payload, indent=1)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if report.converged else 4


def _bench_one(kind, side, kernel_name, args):
    if kind == "fdm2d":
        sys_ = fdm_poisson_2d(side, side)
    else:
        sys_ = fdm_poisson_3d(side, side, side)
    a = sys_.a
    t0 = time.perf_counter()
    prec = psmilu_factor(a, m0=sys_.m,
                         kernel=None if kernel_name == "auto"
                         else kernel_name)
    t_factor = time.perf_counter() - t0
    row = {
        "kind": kind, "side": side, "n": a.n_rows, "nnz": a.nnz,
        "kernel": (kernel_name if kernel_name != "auto"
                   else kernels.active_backend()),
        "levels": len(prec.levels),
        "fill_ratio": round(prec.fill_ratio(a.nnz), 6),
    }
    lev1 = prec.levels[0].stats["counters"]
    row["level1_update_flops"] = (lev1["update_L"] + lev1["update_U_B"]
                                  + lev1["update_U_F"])
    total = prec.total_counters()
    row["total_update_flops"] = (total["update_L"] + total["update_U_B"]
                                 + total["update_U_F"])
    row["factor_seconds"] = round(t_factor, 6)
    if args.solve:
        t0 = time.perf_counter()
        rep = gmres_right(a, sys_.b, m_inv=lambda v: psmilu_solve(prec, v),
                          restart=args.restart, rtol=args.rtol,
                          maxit=args.maxit)
        row["solve_seconds"] = round(time.perf_counter() - t0, 6)
        row["gmres_iters_1e6"] = rep.iterations_to(1e-6)
        row["gmres_iters_1e12"] = rep.iterations_to(1e-12)
    else:
        row["solve_seconds"] = None
        row["gmres_iters_1e6"] = None
        row["gmres_iters_1e12"] = None
    return row


def cmd_bench(args):
    sides = [int(s) for s in args.sides.split(",") if s]
    if not sides:
        raise UsageError("--sides must list at least one grid side")
    if args.kernel == "both":
        kernels_to_run = kernels.available_backends()
    else:
        kernels_to_run = [args.kernel]
    rows = []
    for side in sides:
        for kern in kernels_to_run:
            rows.append(_bench_one(args.kind, side, kern, args))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


class UsageError(PsmiluError):
    pass


def build_parser():
    parser = argparse.ArgumentParser(
        prog="psmilu",
        description="Multilevel incomplete LDU preconditioning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a benchmark linear system")
    g.add_argument("--kind", choices=["fdm2d", "fdm3d", "random"],
                   required=True)
    g.add_argument("--nx", type=int, default=9)
    g.add_argument("--ny", type=int, default=9)
    g.add_argument("--nz", type=int, default=9)
    g.add_argument("--all-dirichlet", action="store_true",
                   help="drop the Neumann top edge/face")
    g.add_argument("--n", type=int, default=50, help="size of random kind")
    g.add_argument("--density", type=float, default=0.1)
    g.add_argument("--matrix-kind", default="nonsymmetric",
                   choices=["spd", "symmetric-indefinite", "nonsymmetric",
                            "zero-diag-sym"])
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("factor", help="factor a system and save the "
                                      "preconditioner")
    f.add_argument("matrix")
    f.add_argument("--out", default=None,
                   help="preconditioner container path (.npz)")
    f.add_argument("--stats", default=None, help="stats JSON path")
    _add_factor_flags(f)
    f.set_defaults(func=cmd_factor)

    s = sub.add_parser("solve", help="solve with GMRES + preconditioner")
    s.add_argument("matrix")
    s.add_argument("--prec", default=None,
                   help="saved preconditioner (default: factor in-process)")
    s.add_argument("--rhs", default=None)
    s.add_argument("--restart", type=int, default=30)
    s.add_argument("--rtol", type=float, default=1e-12)
    s.add_argument("--maxit", type=int, default=2000)
    s.add_argument("--out", default=None, help="solution vector path")
    s.add_argument("--report", default=None, help="report JSON path")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="factor/solve a size series, emit CSV")
    b.add_argument("--kind", choices=["fdm2d", "fdm3d"], default="fdm2d")
    b.add_argument("--sides", default="33,65")
    b.add_argument("--kernel", choices=["auto", "python", "cython", "both"],
                   default="auto")
    b.add_argument("--no-solve", dest="solve", action="store_false")
    b.add_argument("--restart", type=int, default=30)
    b.add_argument("--rtol", type=float, default=1e-12)
    b.add_argument("--maxit", type=int, default=2000)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(2, f"error: {exc}\n")
    except MatrixMarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PsmiluError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
