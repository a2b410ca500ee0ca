"""Multi-point boundary operators ``l x = sum_j M_j x(t_j)`` and their assembly into Q."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DimensionError
from .evolution import EvolutionTable, PhaseSystem, convolve


@dataclass(frozen=True)
class BoundaryForm:
    """Boundary operator into R^k given by ``(node_index, M_j)`` pairs, ``M_j`` of shape k x 2n."""

    points: Tuple[Tuple[int, np.ndarray], ...]

    def __post_init__(self):
        if not self.points:
            raise DimensionError("boundary form needs at least one point")
        pts = []
        shape = None
        for idx, M in self.points:
            M = np.atleast_2d(np.asarray(M, dtype=float))
            if not np.all(np.isfinite(M)):
                raise DimensionError("boundary matrix has non-finite entries")
            if shape is not None and M.shape != shape:
                raise DimensionError(f"boundary matrices disagree in shape: {M.shape} vs {shape}")
            shape = M.shape
            M.setflags(write=False)
            pts.append((int(idx), M))
        object.__setattr__(self, "points", tuple(pts))

    @property
    def target_dim(self):
        return self.points[0][1].shape[0]

    @property
    def state_dim(self):
        return self.points[0][1].shape[1]

    @classmethod
    def two_point(cls, M, N, m):
        """``M x(0) + N x(T)`` on a grid with ``m`` steps."""
        return cls(((0, M), (m, N)))

    @classmethod
    def periodic(cls, dim, m):
        return cls.two_point(np.eye(dim), -np.eye(dim), m)

    @classmethod
    def initial(cls, dim):
        return cls(((0, np.eye(dim)),))

    def check_grid(self, m):
        for idx, _ in self.points:
            if not 0 <= idx <= m:
                raise DimensionError(f"boundary node {idx} outside grid 0..{m}")

    def scale(self, tab):
        """Magnitude of the summands of Q; reference for rank decisions on Q."""
        return float(sum(np.linalg.norm(M, 2) * np.linalg.norm(tab.U[idx], 2) for idx, M in self.points))


def apply_functional(form, states):
    """``sum_j M_j x(t_j)`` for node samples ``states`` of shape (m+1, 2n) or (m+1, 2n, p)."""
    states = getattr(states, "states", states)
    states = np.asarray(states, dtype=float)
    if states.shape[1] != form.state_dim:
        raise DimensionError(f"trajectory dimension {states.shape[1]} != boundary form width {form.state_dim}")
    form.check_grid(states.shape[0] - 1)
    return sum(M @ states[idx] for idx, M in form.points)


def assemble_Q(form, tab):
    """``Q = l U(.) = sum_j M_j U(t_j)``, shape k x 2n."""
    if form.state_dim != tab.dim:
        raise DimensionError(f"boundary form width {form.state_dim} != phase dimension {tab.dim}")
    form.check_grid(tab.grid.m)
    return sum(M @ tab.U[idx] for idx, M in form.points)


@dataclass(frozen=True)
class LinearBvpProblem:
    """Assembled data of ``x' = B x + g``, ``l x = alpha`` on a fixed grid."""

    phase: PhaseSystem
    table: EvolutionTable
    form: BoundaryForm
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if alpha.shape != (self.form.target_dim,):
            raise DimensionError(f"alpha has shape {alpha.shape}, boundary target is R^{self.form.target_dim}")
        if self.form.state_dim != self.phase.dim or self.table.dim != self.phase.dim:
            raise DimensionError("phase system, evolution table and boundary form disagree in dimension")
        self.form.check_grid(self.table.grid.m)
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def grid(self):
        return self.table.grid

    def g_nodes(self):
        return self.phase.g_at(self.grid.nodes)


def boundary_defect(prob):
    """``b = alpha - l int_0^. Phi(., tau) g(tau) dtau``."""
    return prob.alpha - apply_functional(prob.form, convolve(prob.table, prob.g_nodes()))
