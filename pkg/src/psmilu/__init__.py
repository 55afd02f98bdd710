"""Multilevel incomplete LDU preconditioning for predominantly symmetric
sparse linear systems, with a GMRES driver and benchmark generators."""

from .aug import AugCCS, AugCRS
from .dense import DenseLU, dense_lu_pivot
from .errors import (MatrixMarketError, PsmiluError, SingularFactorError,
                     StructureError)
from .factor import FactorResult, iludp_factor
from .kernels import active_backend, available_backends
from .krylov import SolveReport, gmres_right
from .mmio import mm_read, mm_read_vector, mm_write, mm_write_vector
from .multilevel import (MultilevelPrec, Options, PrecLevel, load_prec,
                         psmilu_factor, psmilu_solve, save_prec)
from .preprocess import (PreprocessResult, defer_special_rows, equilibrate,
                         greedy_diag_match, preprocess_level,
                         symmetric_reorder)
from .problems import (PoissonSystem, fdm_poisson_2d, fdm_poisson_3d,
                       random_test_matrix)
from .schur import compute_schur_h, compute_schur_s
from .sparse import (CCS, CRS, DenseMatrix, TripletList, ccs_to_crs,
                     crs_from_dense, crs_from_triplets, crs_identity,
                     crs_to_ccs)

__version__ = "0.1.0"

__all__ = [
    "AugCCS", "AugCRS", "CCS", "CRS", "DenseLU", "DenseMatrix",
    "FactorResult", "MatrixMarketError", "MultilevelPrec", "Options",
    "PoissonSystem", "PrecLevel", "PreprocessResult", "PsmiluError",
    "SingularFactorError", "SolveReport", "StructureError", "TripletList",
    "active_backend", "available_backends", "ccs_to_crs", "compute_schur_h",
    "compute_schur_s", "crs_from_dense", "crs_from_triplets", "crs_identity",
    "crs_to_ccs", "defer_special_rows", "dense_lu_pivot", "equilibrate",
    "fdm_poisson_2d", "fdm_poisson_3d", "gmres_right", "greedy_diag_match",
    "iludp_factor", "load_prec", "mm_read", "mm_read_vector", "mm_write",
    "mm_write_vector", "preprocess_level", "psmilu_factor", "psmilu_solve",
    "random_test_matrix", "save_prec", "symmetric_reorder",
]
