"""Phase-space lift of the second-order equation and its evolution operator.

``y'' + A(t) y = eps A1(t) y + f(t)`` becomes ``x' = B(t) x + g(t) + eps B1(t) x``
with ``x = (y, y')``, ``B = [[0, I], [-A, 0]]`` and ``g = (0, f)``. The
evolution operator ``U`` is sampled on a uniform grid with RK4; transition
operators and forward convolutions are derived from the stored samples.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import DimensionError, IllConditioned, NonFiniteState
from .exprparse import compile_entry

VELOCITY_BLOCK = "velocity_block"
POSITION_BLOCK = "position_block"
COND_LIMIT = 1e8


def _matrix_sampler(entries, n):
    rows = [[compile_entry(e) for e in row] for row in entries]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise DimensionError(f"expected a {n}x{n} matrix of entries")

    def sample(ts):
        ts = np.asarray(ts, dtype=float)
        out = np.empty(ts.shape + (n, n))
        for i, row in enumerate(rows):
            for j, fn in enumerate(row):
                out[..., i, j] = fn(ts)
        return out

    return sample


def _vector_sampler(entries, n):
    comps = [compile_entry(e) for e in entries]
    if len(comps) != n:
        raise DimensionError(f"expected {n} forcing entries, got {len(comps)}")

    def sample(ts):
        ts = np.asarray(ts, dtype=float)
        out = np.empty(ts.shape + (n,))
        for i, fn in enumerate(comps):
            out[..., i] = fn(ts)
        return out

    return sample


@dataclass(frozen=True)
class SecondOrderProblem:
    """``y'' + A(t) y = eps A1(t) y + f(t)`` on ``J = [0, T]`` in R^n.

    Entries of ``A``, ``A1`` and ``f`` may be numbers, expression strings,
    parsed trees or callables of ``t`` (vectorized over numpy arrays).
    ``A1=None`` means no perturbation.
    """

    n: int
    T: float
    A: Sequence[Sequence[object]]
    f: Sequence[object]
    A1: Sequence[Sequence[object]] = None
    b1_placement: str = POSITION_BLOCK

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("n must be positive")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError("horizon T must be positive and finite")
        if self.b1_placement not in (VELOCITY_BLOCK, POSITION_BLOCK):
            raise ValueError(f"unknown b1_placement {self.b1_placement!r}")


@dataclass(frozen=True)
class PhaseSystem:
    """First-order system of dimension ``2n``; samplers are vectorized over times."""

    n: int
    A_at: Callable
    A1_at: Callable
    f_at: Callable
    b1_placement: str = POSITION_BLOCK
    epsilon: float = 0.0

    @property
    def dim(self):
        return 2 * self.n

    def B_at(self, ts):
        ts = np.asarray(ts, dtype=float)
        n = self.n
        out = np.zeros(ts.shape + (2 * n, 2 * n))
        out[..., :n, n:] = np.eye(n)
        out[..., n:, :n] = -self.A_at(ts)
        if self.epsilon != 0.0:
            out += self.epsilon * self.B1_at(ts)
        return out

    def B1_at(self, ts):
        ts = np.asarray(ts, dtype=float)
        n = self.n
        out = np.zeros(ts.shape + (2 * n, 2 * n))
        if self.b1_placement == POSITION_BLOCK:
            out[..., n:, :n] = self.A1_at(ts)
        else:
            out[..., n:, n:] = self.A1_at(ts)
        return out

    def g_at(self, ts):
        ts = np.asarray(ts, dtype=float)
        out = np.zeros(ts.shape + (self.dim,))
        out[..., self.n :] = self.f_at(ts)
        return out

    def perturbed(self, epsilon):
        """The same system with generator ``B + epsilon * B1``."""
        return PhaseSystem(self.n, self.A_at, self.A1_at, self.f_at, self.b1_placement, self.epsilon + float(epsilon))


def lift_second_order(prob):
    n = prob.n
    A1 = prob.A1 if prob.A1 is not None else [[0.0] * n for _ in range(n)]
    return PhaseSystem(
        n,
        _matrix_sampler(prob.A, n),
        _matrix_sampler(A1, n),
        _vector_sampler(prob.f, n),
        prob.b1_placement,
    )


@dataclass(frozen=True)
class TimeGrid:
    T: float
    m: int

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError("horizon T must be positive and finite")
        if self.m < 2 or self.m % 2:
            raise ValueError(f"step count m must be even and >= 2, got {self.m}")

    @property
    def h(self):
        return self.T / self.m

    @property
    def nodes(self):
        return np.linspace(0.0, self.T, self.m + 1)

    @property
    def half_nodes(self):
        return np.linspace(0.0, self.T, 2 * self.m + 1)

    def snap(self, t):
        """Index of the grid node nearest to time ``t``."""
        if not -1e-12 * self.T <= t <= self.T * (1 + 1e-12):
            raise DimensionError(f"time {t} outside [0, {self.T}]")
        return int(round(t / self.h))


@dataclass(frozen=True)
class EvolutionTable:
    grid: TimeGrid
    U: np.ndarray
    cond: np.ndarray = field(repr=False)

    @property
    def cond_max(self):
        return float(self.cond.max())

    @property
    def ill_conditioned(self):
        return self.cond_max > COND_LIMIT

    @property
    def dim(self):
        return self.U.shape[1]


@dataclass(frozen=True)
class TrajectoryTable:
    grid: TimeGrid
    states: np.ndarray

    @property
    def n(self):
        return self.states.shape[1] // 2

    @property
    def y(self):
        return self.states[:, : self.n]

    @property
    def dy(self):
        return self.states[:, self.n :]

    def __add__(self, other):
        return TrajectoryTable(self.grid, self.states + other.states)

    def scaled(self, c):
        return TrajectoryTable(self.grid, c * self.states)


def propagate_evolution(sys, grid):
    """Sample ``U(t_k)`` for ``U' = B(t) U``, ``U(0) = I`` with classic RK4."""
    Bh = sys.B_at(grid.half_nodes)
    if not np.all(np.isfinite(Bh)):
        raise NonFiniteState("generator samples are not finite")
    U = kernels.rk4_propagate(Bh, grid.h)
    if not np.all(np.isfinite(U)):
        raise NonFiniteState("evolution operator overflowed")
    U[0] = np.eye(U.shape[1])
    cond = np.linalg.cond(U)
    U.setflags(write=False)
    return EvolutionTable(grid, U, cond)


def transition(tab, t_idx, tau_idx):
    """``Phi(t, tau) = U(t) U(tau)^{-1}`` via a linear solve."""
    if tab.cond[tau_idx] > COND_LIMIT:
        raise IllConditioned(f"cond(U) = {tab.cond[tau_idx]:.3e} at node {tau_idx}")
    return np.linalg.solve(tab.U[tau_idx].T, tab.U[t_idx].T).T


def sample_forcing(tab, g):
    """Node samples of a forcing: callables are evaluated, arrays are checked."""
    if callable(g):
        g = g(tab.grid.nodes)
    g = np.asarray(g, dtype=float)
    if g.shape[0] != tab.grid.m + 1 or g.shape[1] != tab.dim:
        raise DimensionError(f"forcing shape {g.shape} does not match grid/dimension")
    return g


def convolve(tab, g):
    """``int_0^{t_k} Phi(t_k, tau) g(tau) dtau`` at every node.

    ``g`` may be vector-valued ``(m+1, d)`` or operator-valued ``(m+1, d, p)``;
    the result has the same shape. Computed as ``U(t) int_0^t U^{-1} g``.
    """
    g = sample_forcing(tab, g)
    vector = g.ndim == 2
    G = g[..., None] if vector else g
    w = np.linalg.solve(tab.U, G)
    W = kernels.cumulative_quadrature(w.reshape(w.shape[0], -1), tab.grid.h).reshape(w.shape)
    out = tab.U @ W
    return out[..., 0] if vector else out


def forward_convolution(tab, g, t_idx):
    return convolve(tab, g)[t_idx]


def homogeneous(tab, c):
    """Trajectory ``U(t) c`` (vector) or operator trajectory ``U(t) C``."""
    c = np.asarray(c, dtype=float)
    return tab.U @ c
