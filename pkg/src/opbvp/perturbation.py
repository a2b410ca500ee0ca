"""Laurent and Taylor series for ``x' = B x + g + eps B1 x``, ``l x = alpha``.

The solution is sought as ``x(t, eps) = sum_{i>=s} eps^i x_i(t)`` with
``s = -1`` when the unperturbed problem is unsolvable (Laurent branch) and
``s = 0`` when it is solvable (Taylor branch). Equating powers of ``eps``
gives a hierarchy of linear problems with the same operator Q; the free
kernel constant of each order is fixed by the solvability condition of the
next one, which is an equation with the operator

    B0 = P_N(Q*) l int_0^. Phi(., tau) B1(tau) U(tau) dtau P_N(Q).

If ``P_N(B0*) P_N(Q*) = 0`` every order is solvable and the series carries a
family parametrized by ``P_N(B0) c_rho``. Each coefficient splits as

    x_i = xbar_i + Xbar_i P_N(B0) c_rho,
    xbar_i = U P_N(Q) cbar_i + F_{i-1},    F_{i-1} = G[B1 xbar_{i-1} (+ g), 0 (alpha)],
    Xbar_i = U P_N(Q) D_i + K_{i-1},       K_{i-1} = G[B1 Xbar_{i-1} P_N(B0), 0],
    cbar_i = B0^+ P_N(Q*) (b [i = -1] - l int Phi B1 F_{i-1}),
    D_i    = I - B0^+ P_N(Q*) l int Phi B1 K_{i-1} P_N(Q),

where ``g`` and ``alpha`` enter only the order-0 problem.
"""

import warnings
from dataclasses import dataclass
from typing import List

import numpy as np

from .boundary import apply_functional, boundary_defect
from .errors import BifurcationConditionFailed, BranchMismatch, NotSolvableAtOrder
from .evolution import TrajectoryTable, convolve
from .linear_bvp import Q_RANK_TOL, QUASISOLUTION, classify_solvability, green_states
from .linops import conull_projector, intersection_dim, null_projector, pseudoinverse, svd_decompose
from .errors import DivergenceWarning

LAURENT = "laurent"
TAYLOR = "taylor"
AUTO = "auto"
BIFURCATION_TOL = 1e-6
EARLY_STOP = 1e-14
NOISE_FLOOR = 1e-10


@dataclass(frozen=True)
class B0Analysis:
    B0: np.ndarray
    bundle: object
    B0_pinv: np.ndarray
    P_kernel_B0: np.ndarray
    P_cokernel_B0: np.ndarray
    bifurcation_norm: float
    rho: int
    W: np.ndarray  # l int Phi B1 U, before projection

    def as_dict(self):
        return {
            "B0": self.B0.tolist(),
            "rank": self.bundle.numeric_rank,
            "singular_values": self.bundle.singular_values.tolist(),
            "bifurcation_norm": self.bifurcation_norm,
            "rho": self.rho,
        }


@dataclass(frozen=True)
class SeriesSolution:
    """Truncated series; list entry ``j`` holds the coefficient of ``eps^(start + j)``."""

    branch: str
    start: int
    order: int
    xbar: List[TrajectoryTable]
    Xbar: List[np.ndarray]
    cbar: List[np.ndarray]
    D: List[np.ndarray]
    P_family: np.ndarray
    c_rho: np.ndarray
    rho: int
    term_norms: List[float]

    @property
    def indices(self):
        return list(range(self.start, self.start + len(self.xbar)))

    @property
    def grid(self):
        return self.xbar[0].grid

    def coefficient(self, i, c_rho=None):
        """States of ``x_i = xbar_i + Xbar_i P_N(B0) c_rho``."""
        j = i - self.start
        c = self.c_rho if c_rho is None else np.asarray(c_rho, dtype=float)
        return self.xbar[j].states + self.Xbar[j] @ (self.P_family @ c)


def _lambda(prob, h):
    """``l int_0^. Phi h`` for a vector- or operator-valued forcing ``h``."""
    return apply_functional(prob.form, convolve(prob.table, h))


def assemble_B0(prob, qa, rank_tol=Q_RANK_TOL):
    B1 = prob.phase.B1_at(prob.grid.nodes)
    W = _lambda(prob, B1 @ prob.table.U)
    B0 = qa.P_cokernel @ W @ qa.P_kernel
    B0 = qa.P_cokernel @ B0 @ qa.P_kernel
    S = svd_decompose(B0, rank_tol=rank_tol, scale=np.linalg.norm(W, 2))
    P_ker = null_projector(S)
    P_coker = conull_projector(S)
    bif = float(np.linalg.norm(P_coker @ qa.P_cokernel, 2))
    rho = intersection_dim(P_ker, qa.P_kernel)
    return B0Analysis(S.matrix, S, pseudoinverse(S), P_ker, P_coker, bif, rho, W)


def check_bifurcation(b0a, tol=BIFURCATION_TOL):
    return b0a.bifurcation_norm <= tol, b0a.rho


def _order_tol(tol, beta, defect):
    if tol is not None:
        return tol
    return 1e-6 * (1.0 + np.linalg.norm(beta) + np.linalg.norm(defect))


def series_solve(prob, qa, b0a, branch=AUTO, order=8, c_rho=None, tol=None, bifurcation_tol=BIFURCATION_TOL):
    """Run the coefficient recursion up to ``eps^order``.

    ``branch`` is ``"laurent"``, ``"taylor"`` or ``"auto"`` (chosen from the
    solvability classification). Raises BifurcationConditionFailed when the
    projector condition fails and NotSolvableAtOrder when a coefficient
    problem has a solvability defect above tolerance.
    """
    b = boundary_defect(prob)
    report = classify_solvability(qa, b, tol, prob.alpha)
    unsolvable = report.classification == QUASISOLUTION
    if branch == AUTO:
        branch = LAURENT if unsolvable else TAYLOR
    if branch == LAURENT and not unsolvable:
        raise BranchMismatch("Laurent branch needs an unsolvable unperturbed problem")
    if branch == TAYLOR and unsolvable:
        raise BranchMismatch(
            f"Taylor branch needs a solvable unperturbed problem (defect {report.defect_norm:.3e})"
        )
    if branch not in (LAURENT, TAYLOR):
        raise ValueError(f"unknown branch {branch!r}")
    holds, rho = check_bifurcation(b0a, bifurcation_tol)
    if not holds:
        raise BifurcationConditionFailed(
            f"||P_N(B0*) P_N(Q*)|| = {b0a.bifurcation_norm:.3e} exceeds {bifurcation_tol:.1e}"
        )

    start = -1 if branch == LAURENT else 0
    tab = prob.table
    U = tab.U
    d = tab.dim
    k = prob.form.target_dim
    P_N, P_cok = qa.P_kernel, qa.P_cokernel
    B0p, P_fam = b0a.B0_pinv, b0a.P_kernel_B0
    P_coB0 = b0a.P_cokernel_B0
    B1 = prob.phase.B1_at(prob.grid.nodes)
    g = prob.g_nodes()
    c = np.zeros(d) if c_rho is None else np.asarray(c_rho, dtype=float)
    I = np.eye(d)

    xbar, Xbar, cbar, Ds, norms = [], [], [], [], []
    for i in range(start, order + 1):
        # particular parts F_{i-1}, K_{i-1} of the order-i problem
        if i == start:
            if start == 0:
                F, defect = green_states(prob, qa, g, prob.alpha)
                beta = prob.alpha
            else:
                F, defect, beta = np.zeros((tab.grid.m + 1, d)), np.zeros(k), np.zeros(k)
            K = np.zeros((tab.grid.m + 1, d, d))
        else:
            h = B1 @ xbar[-1].states[..., None]
            h = h[..., 0]
            beta = np.zeros(k)
            if i == 0:
                h = h + g
                beta = prob.alpha
            F, defect = green_states(prob, qa, h, beta)
            Kin = B1 @ (Xbar[-1] @ P_fam)
            K, defK = green_states(prob, qa, Kin, np.zeros((k, d)))
            dK = float(np.linalg.norm(P_cok @ defK))
            if dK > _order_tol(tol, 0.0, defK):
                raise NotSolvableAtOrder(i, dK, _order_tol(tol, 0.0, defK))
        dF = float(np.linalg.norm(P_cok @ defect))
        if dF > _order_tol(tol, beta, defect):
            raise NotSolvableAtOrder(i, dF, _order_tol(tol, beta, defect))

        # kernel constants fixed by solvability of order i + 1
        r = -P_cok @ _lambda(prob, (B1 @ F[..., None])[..., 0])
        if i == -1:
            r = r + P_cok @ b
        dr = float(np.linalg.norm(P_coB0 @ r))
        if dr > _order_tol(tol, 0.0, r):
            raise NotSolvableAtOrder(i + 1, dr, _order_tol(tol, 0.0, r))
        cb = B0p @ r
        RK = P_cok @ _lambda(prob, B1 @ K)
        D = I - B0p @ RK @ P_N

        xs = U @ (P_N @ cb) + F
        Xs = U @ (P_N @ D) + K
        xbar.append(TrajectoryTable(tab.grid, xs))
        Xbar.append(Xs)
        cbar.append(cb)
        Ds.append(D)
        norms.append(float(np.abs(xs + Xs @ (P_fam @ c)).max()))
        if norms[-1] < EARLY_STOP * max(norms):
            break

    return SeriesSolution(
        branch, start, start + len(xbar) - 1, xbar, Xbar, cbar, Ds, P_fam, c, rho, norms
    )


def evaluate_series(sol, epsilon, c_rho=None):
    """Sum the truncated series at ``epsilon``.

    Returns the trajectory and the empirical ratio ``max ||term_{i+1}|| / ||term_i||``
    over terms above a relative noise floor; warns with DivergenceWarning if
    the ratio is at least 1.
    """
    epsilon = float(epsilon)
    if sol.start < 0 and epsilon == 0.0:
        raise ValueError("Laurent series cannot be evaluated at epsilon = 0")
    total = np.zeros_like(sol.xbar[0].states)
    tnorms = []
    for i in sol.indices:
        term = epsilon**i * sol.coefficient(i, c_rho)
        total += term
        tnorms.append(float(np.abs(term).max()))
    top = max(tnorms) if tnorms else 0.0
    ratio = 0.0
    for a, b in zip(tnorms, tnorms[1:]):
        if a > NOISE_FLOOR * top:
            ratio = max(ratio, b / a)
    if ratio >= 1.0:
        warnings.warn(f"series ratio test gives {ratio:.3g} >= 1 at eps = {epsilon:g}", DivergenceWarning, stacklevel=2)
    return TrajectoryTable(sol.grid, total), ratio


def derivative_defect(traj, h):
    """Fourth-order central differences of the states at nodes 2..m-2."""
    x = traj.states
    return (x[:-4] - 8.0 * x[1:-3] + 8.0 * x[3:-1] - x[4:]) / (12.0 * h)


def residual_report(prob, traj, epsilon=0.0):
    """ODE and boundary residuals of ``traj`` for the problem at ``epsilon``.

    The ODE residual is the maximum over interior nodes of
    ``|x' - (B + eps B1) x - g|`` with ``x'`` from finite differences.
    """
    grid = prob.grid
    nodes = grid.nodes[2:-2]
    x = traj.states
    if grid.m >= 4:
        Bt = prob.phase.B_at(nodes) + epsilon * prob.phase.B1_at(nodes)
        rhs = (Bt @ x[2:-2, :, None])[..., 0] + prob.phase.g_at(nodes)
        ode = float(np.abs(derivative_defect(traj, grid.h) - rhs).max())
    else:
        ode = 0.0
    bnd = float(np.linalg.norm(prob.alpha - apply_functional(prob.form, x)))
    return ode, bnd
