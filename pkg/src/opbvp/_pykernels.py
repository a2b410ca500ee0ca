"""Pure numpy implementations of the hot kernels (fallback backend)."""

import numpy as np


def rk4_propagate(Bh, h):
    """Classic RK4 for ``U' = B(t) U``, ``U(0) = I``.

    ``Bh`` holds generator samples at half steps, shape ``(2m+1, d, d)``:
    ``Bh[2k]`` at node k and ``Bh[2k+1]`` at its midpoint.
    """
    Bh = np.ascontiguousarray(Bh, dtype=float)
    m = (Bh.shape[0] - 1) // 2
    d = Bh.shape[1]
    U = np.empty((m + 1, d, d))
    U[0] = np.eye(d)
    half = 0.5 * h
    for k in range(m):
        Uk = U[k]
        B0, Bm, B1 = Bh[2 * k], Bh[2 * k + 1], Bh[2 * k + 2]
        k1 = B0 @ Uk
        k2 = Bm @ (Uk + half * k1)
        k3 = Bm @ (Uk + half * k2)
        k4 = B1 @ (Uk + h * k3)
        U[k + 1] = Uk + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return U


def cumulative_quadrature(w, h):
    """Running integral ``int_0^{t_k} w`` at every node, O(h^4).

    Even nodes use composite Simpson; odd nodes k >= 3 add a 3/8 panel to the
    Simpson sum at k - 3; node 1 uses a one-interval cubic (quadratic if m = 2).
    ``w`` has shape ``(m+1, q)``.
    """
    w = np.ascontiguousarray(w, dtype=float)
    m = w.shape[0] - 1
    out = np.zeros_like(w)
    panels = (h / 3.0) * (w[0:-2:2] + 4.0 * w[1:-1:2] + w[2::2])
    out[2::2] = np.cumsum(panels, axis=0)
    if m >= 4:
        out[1] = (h / 24.0) * (9.0 * w[0] + 19.0 * w[1] - 5.0 * w[2] + w[3])
    else:
        out[1] = (h / 12.0) * (5.0 * w[0] + 8.0 * w[1] - w[2])
    k = np.arange(3, m + 1, 2)
    if k.size:
        out[k] = out[k - 3] + (3.0 * h / 8.0) * (w[k - 3] + 3.0 * w[k - 2] + 3.0 * w[k - 1] + w[k])
    return out
