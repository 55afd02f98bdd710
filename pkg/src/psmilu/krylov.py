"""Restarted GMRES with right preconditioning.

Arnoldi by modified Gram-Schmidt, least squares by Givens rotations.
Convergence is judged on the rotation-estimated residual inside a cycle
and confirmed on the true residual at restart boundaries, so a reported
success always reflects ||b - A x|| / ||b|| <= rtol.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import StructureError
from .sparse import REAL

HAPPY_BREAKDOWN = 1e-14


@dataclass
class SolveReport:
    x: np.ndarray
    iterations: int
    restarts: int
    residual_history: list = field(repr=False)
    converged: bool = False
    final_relres: float = np.inf
    breakdown: bool = False

    def iterations_to(self, rtol):
        """First inner iteration whose estimated relative residual met
        ``rtol``; None if never reached."""
        for i, r in enumerate(self.residual_history):
            if r <= rtol:
                return i + 1
        return None


def _as_operator(a):
    if callable(a):
        return a
    if hasattr(a, "matvec"):
        return a.matvec
    arr = np.asarray(a, dtype=REAL)
    return lambda x: arr @ x


def gmres_right(a, b, m_inv=None, restart=30, rtol=1e-12, maxit=2000):
    """Solve A x = b with GMRES(restart) and right preconditioner M^{-1}.

    Parameters
    ----------
    a : CRS, ndarray or callable
        The operator.
    b : ndarray
        Right-hand side.
    m_inv : callable, optional
        Applies the preconditioner inverse (identity if omitted).
    restart : int
        Inner iterations per cycle.
    rtol : float
        Relative residual target on ||b - A x|| / ||b||.
    maxit : int
        Total inner iteration budget.

    Returns
    -------
    SolveReport
    """
    A = _as_operator(a)
    b = np.asarray(b, dtype=REAL)
    n = b.size
    if restart < 1:
        raise StructureError("restart must be at least 1")
    M = m_inv if m_inv is not None else (lambda x: x)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return SolveReport(x=np.zeros(n), iterations=0, restarts=0,
                           residual_history=[], converged=True,
                           final_relres=0.0)
    x = np.zeros(n, dtype=REAL)
    history = []
    total_it = 0
    restarts = 0
    breakdown = False

    while total_it < maxit:
        r = b - A(x)
        beta = float(np.linalg.norm(r))
        relres = beta / bnorm
        if relres <= rtol:
            return SolveReport(x=x, iterations=total_it, restarts=restarts,
                               residual_history=history, converged=True,
                               final_relres=relres, breakdown=breakdown)
        k_max = min(restart, maxit - total_it)
        V = np.zeros((k_max + 1, n), dtype=REAL)
        Z = np.zeros((k_max, n), dtype=REAL)
        H = np.zeros((k_max + 1, k_max), dtype=REAL)
        cs = np.zeros(k_max, dtype=REAL)
        sn = np.zeros(k_max, dtype=REAL)
        g = np.zeros(k_max + 1, dtype=REAL)
        V[0] = r / beta
        g[0] = beta
        k_used = 0
        for k in range(k_max):
            Z[k] = M(V[k])
            w = A(Z[k])
            for i in range(k + 1):
                H[i, k] = float(V[i] @ w)
                w -= H[i, k] * V[i]
            hk = float(np.linalg.norm(w))
            H[k + 1, k] = hk
            happy = hk <= HAPPY_BREAKDOWN * bnorm
            if not happy:
                V[k + 1] = w / hk
            for i in range(k):
                tmp = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = tmp
            denom = np.hypot(H[k, k], H[k + 1, k])
            cs[k] = H[k, k] / denom
            sn[k] = H[k + 1, k] / denom
            H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            total_it += 1
            k_used = k + 1
            history.append(abs(g[k + 1]) / bnorm)
            if abs(g[k + 1]) / bnorm <= rtol or happy:
                if happy and abs(g[k + 1]) / bnorm > rtol:
                    breakdown = True
                break
        y = np.zeros(k_used, dtype=REAL)
        for i in range(k_used - 1, -1, -1):
            y[i] = (g[i] - H[i, i + 1:k_used] @ y[i + 1:k_used]) / H[i, i]
        x = x + Z[:k_used].T @ y
        restarts += 1
        if breakdown:
            break

    r = b - A(x)
    relres = float(np.linalg.norm(r)) / bnorm
    return SolveReport(x=x, iterations=total_it, restarts=restarts,
                       residual_history=history,
                       converged=relres <= rtol, final_relres=relres,
                       breakdown=breakdown)
