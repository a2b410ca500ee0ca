"""Unperturbed problem ``x' = B x + g``, ``l x = alpha``: solvability and generalized Green operator.

With ``b = alpha - l int_0^. Phi g`` the problem is solvable iff the cokernel
projection ``P_N(Q*) b`` vanishes. The solutions are
``U(t) P_N(Q) c + G[g, alpha](t)`` where the generalized Green operator selects
the constant ``Q^+ b``; when the condition fails the same formula gives the
least-squares quasisolution.
"""

from dataclasses import dataclass

import numpy as np

from .boundary import apply_functional, assemble_Q, boundary_defect
from .errors import NotSolvable
from .evolution import TrajectoryTable, convolve, sample_forcing
from .linops import conull_projector, null_projector, pseudoinverse, svd_decompose

# Q is assembled from RK4 samples, so a resonant Q is only zero to O(h^4);
# the cut sits well above that and well below genuine singular values.
Q_RANK_TOL = 1e-8

CLASSICAL_UNIQUE = "classical_unique"
SOLVABLE_FAMILY = "solvable_family"
QUASISOLUTION = "quasisolution"


@dataclass(frozen=True)
class QAnalysis:
    Q: np.ndarray
    bundle: object
    Q_pinv: np.ndarray
    P_kernel: np.ndarray
    P_cokernel: np.ndarray

    @property
    def kernel_dim(self):
        return self.bundle.kernel_dim

    @property
    def cokernel_dim(self):
        return self.bundle.cokernel_dim


@dataclass(frozen=True)
class SolvabilityReport:
    classification: str
    defect_norm: float
    kernel_dim: int
    cokernel_dim: int
    tol_used: float

    @property
    def solvable(self):
        return self.classification != QUASISOLUTION

    def as_dict(self):
        return {
            "classification": self.classification,
            "defect_norm": self.defect_norm,
            "kernel_dim": self.kernel_dim,
            "cokernel_dim": self.cokernel_dim,
            "tol_used": self.tol_used,
        }


def analyze_Q(Q, rank_tol=Q_RANK_TOL, scale=None):
    S = svd_decompose(Q, rank_tol=rank_tol, scale=scale)
    return QAnalysis(S.matrix, S, pseudoinverse(S), null_projector(S), conull_projector(S))


def analyze_problem(prob, rank_tol=Q_RANK_TOL):
    """Assemble Q for ``prob`` and analyze it against the size of its summands."""
    return analyze_Q(assemble_Q(prob.form, prob.table), rank_tol, prob.form.scale(prob.table))


def default_tol(alpha, b):
    return 1e-6 * (1.0 + np.linalg.norm(alpha) + np.linalg.norm(b))


def classify_solvability(qa, b, tol=None, alpha=None):
    b = np.asarray(b, dtype=float)
    if tol is None:
        tol = default_tol(np.zeros(1) if alpha is None else alpha, b)
    defect = float(np.linalg.norm(qa.P_cokernel @ b))
    if defect > tol:
        cls = QUASISOLUTION
    elif qa.kernel_dim == 0:
        cls = CLASSICAL_UNIQUE
    else:
        cls = SOLVABLE_FAMILY
    return SolvabilityReport(cls, defect, qa.kernel_dim, qa.cokernel_dim, float(tol))


def green_states(prob, qa, h, beta):
    """Node samples of ``G[h, beta]`` and the boundary defect ``beta - l int Phi h``.

    ``h`` may be vector- or operator-valued (``(m+1, 2n)`` or ``(m+1, 2n, p)``);
    ``beta`` then has shape ``(k,)`` or ``(k, p)``.
    """
    conv = convolve(prob.table, h)
    defect = beta - apply_functional(prob.form, conv)
    return conv + prob.table.U @ (qa.Q_pinv @ defect), defect


def green_apply(prob, qa, g=None, alpha=None):
    """``G[g, alpha](t) = int_0^t Phi g + U(t) Q^+ (alpha - l int_0^. Phi g)``."""
    g = prob.g_nodes() if g is None else sample_forcing(prob.table, g)
    alpha = prob.alpha if alpha is None else np.asarray(alpha, dtype=float)
    states, _ = green_states(prob, qa, g, alpha)
    return TrajectoryTable(prob.grid, states)


def solve_family(prob, qa, c_free, tol=None):
    """Member ``U(t) P_N(Q) c_free + G[g, alpha](t)`` of the solution family."""
    b = boundary_defect(prob)
    report = classify_solvability(qa, b, tol, prob.alpha)
    if not report.solvable:
        raise NotSolvable(f"cokernel defect {report.defect_norm:.3e} exceeds tol {report.tol_used:.3e}")
    base = green_apply(prob, qa)
    free = prob.table.U @ (qa.P_kernel @ np.asarray(c_free, dtype=float))
    return TrajectoryTable(prob.grid, base.states + free)


def quasisolve(prob, qa):
    """Minimal-norm representative and its boundary residual ``||alpha - l x||``."""
    traj = green_apply(prob, qa)
    residual = float(np.linalg.norm(prob.alpha - apply_functional(prob.form, traj)))
    return traj, residual
