"""Dense operator algebra: SVD with a numeric-rank cut, pseudoinverse, orthoprojectors.

Every abstract operator of the boundary value machinery (Q, B0, ...) is a small
dense real matrix here. Kernel and cokernel projectors are read off the same
SVD that defines the pseudoinverse, so the four objects are mutually consistent
for a given rank decision.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOperator

EPS = np.finfo(float).eps


def as_operator(M):
    """Return ``M`` as a finite 2-D float array, raising InvalidOperator otherwise."""
    A = np.array(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise InvalidOperator(f"expected a 2-D operator, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidOperator("operator has non-finite entries")
    return A


def default_rank_tol(shape):
    return max(shape) * EPS


@dataclass(frozen=True)
class SvdBundle:
    """Thin SVD ``M = left @ diag(singular_values) @ right.T`` plus a rank decision.

    ``right`` holds right singular vectors as columns. ``threshold`` is the
    absolute cut actually applied; singular values at or above it (and
    nonzero) count toward ``numeric_rank``.
    """

    matrix: np.ndarray
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray
    numeric_rank: int
    rank_tol: float
    threshold: float

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def kernel_dim(self):
        return self.shape[1] - self.numeric_rank

    @property
    def cokernel_dim(self):
        return self.shape[0] - self.numeric_rank


def svd_decompose(M, rank_tol=None, scale=None):
    """Factor ``M`` and decide its numeric rank.

    Parameters
    ----------
    M : array_like
        Finite 2-D matrix.
    rank_tol : float, optional
        Relative threshold in (0, 1). Defaults to ``max(rows, cols) * eps``.
    scale : float, optional
        Reference magnitude for the cut. The threshold is
        ``rank_tol * max(sigma_max, scale)``; pass the size of the terms that
        were summed to form ``M`` when ``M`` itself may be numerically zero.

    Returns
    -------
    SvdBundle
    """
    A = as_operator(M)
    if rank_tol is None:
        rank_tol = default_rank_tol(A.shape)
    if not 0.0 < rank_tol < 1.0:
        raise ValueError(f"rank_tol must lie in (0, 1), got {rank_tol}")
    rows, cols = A.shape
    if A.size == 0:
        s = np.zeros(0)
        U = np.zeros((rows, 0))
        V = np.zeros((cols, 0))
    else:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
        V = Vt.T
    smax = float(s[0]) if s.size else 0.0
    ref = max(smax, float(scale) if scale is not None else 0.0)
    threshold = rank_tol * ref
    # ties at the cut stay above it
    rank = int(np.count_nonzero((s >= threshold) & (s > 0.0))) if ref > 0.0 else 0
    for arr in (U, s, V):
        arr.setflags(write=False)
    A.setflags(write=False)
    return SvdBundle(A, U, s, V, rank, float(rank_tol), float(threshold))


def pseudoinverse(S):
    """Moore-Penrose inverse built from the singular triplets above the cut."""
    r = S.numeric_rank
    Ur = S.left[:, :r]
    Vr = S.right[:, :r]
    return (Vr / S.singular_values[:r]) @ Ur.T


def null_projector(S):
    """Orthoprojector onto the kernel N(M), acting on the domain."""
    Vr = S.right[:, : S.numeric_rank]
    return np.eye(S.shape[1]) - Vr @ Vr.T


def conull_projector(S):
    """Orthoprojector onto the cokernel N(M^T), acting on the codomain."""
    Ur = S.left[:, : S.numeric_rank]
    return np.eye(S.shape[0]) - Ur @ Ur.T


def range_projector(S):
    Ur = S.left[:, : S.numeric_rank]
    return Ur @ Ur.T


def intersection_dim(P1, P2, rank_tol=1e-6):
    """Dimension of range(P1) ∩ range(P2) for two orthoprojectors on the same space.

    The intersection is the common kernel of the two complement projectors,
    i.e. the kernel of their vertical stack.
    """
    d = P1.shape[0]
    stacked = np.vstack([np.eye(d) - P1, np.eye(d) - P2])
    S = svd_decompose(stacked, rank_tol=rank_tol, scale=1.0)
    return S.kernel_dim
