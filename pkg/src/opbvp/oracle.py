"""Direct solver for the perturbed problem, independent of the series recursion.

Propagates the evolution operator of ``B + eps B1`` itself and solves the
perturbed boundary equation ``Q_eps c = b_eps`` with the pseudoinverse.
"""

import numpy as np

from .evolution import TrajectoryTable, convolve, propagate_evolution
from .linear_bvp import CLASSICAL_UNIQUE, QUASISOLUTION, SOLVABLE_FAMILY, SolvabilityReport
from .linops import conull_projector, pseudoinverse, svd_decompose

RANK_TOL = 1e-8


def direct_solve(prob, epsilon, rank_tol=RANK_TOL, tol=None):
    """Minimal-norm solution (or quasisolution) at ``epsilon`` with its classification."""
    phase = prob.phase.perturbed(epsilon)
    grid = prob.grid
    tab = propagate_evolution(phase, grid)
    Q = sum(M @ tab.U[idx] for idx, M in prob.form.points)
    scale = sum(np.linalg.norm(M, 2) * np.linalg.norm(tab.U[idx], 2) for idx, M in prob.form.points)
    S = svd_decompose(Q, rank_tol=rank_tol, scale=scale)
    conv = convolve(tab, phase.g_at(grid.nodes))
    b = prob.alpha - sum(M @ conv[idx] for idx, M in prob.form.points)
    states = conv + tab.U @ (pseudoinverse(S) @ b)

    if tol is None:
        tol = 1e-6 * (1.0 + np.linalg.norm(prob.alpha) + np.linalg.norm(b))
    defect = float(np.linalg.norm(conull_projector(S) @ b))
    if defect > tol:
        cls = QUASISOLUTION
    elif S.kernel_dim == 0:
        cls = CLASSICAL_UNIQUE
    else:
        cls = SOLVABLE_FAMILY
    report = SolvabilityReport(cls, defect, S.kernel_dim, S.cokernel_dim, float(tol))
    return TrajectoryTable(grid, states), report
