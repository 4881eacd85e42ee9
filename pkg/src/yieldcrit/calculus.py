"""Upwind signed gradient, its adjoint divergence and the discrete TV.

Fields are plain arrays: a scalar field has shape ``(n, n)`` and an upwind
field has shape ``(4, n, n)`` with components ordered
``(x-forward, x-backward, y-forward, y-backward)``.  Differences are
undivided; values outside the grid are replicated, so the differences that
would leave the grid are zero.
"""
import numpy as np


def upwind_gradient(v):
    """Undivided differences to the four edge neighbours of every cell.

    ``g[0, i, j] = v[i+1, j] - v[i, j]``, ``g[1, i, j] = v[i-1, j] - v[i, j]``
    and likewise along ``y`` for ``g[2]`` and ``g[3]``.
    """
    v = np.asarray(v, dtype=float)
    g = np.zeros((4,) + v.shape)
    dx = v[1:, :] - v[:-1, :]
    dy = v[:, 1:] - v[:, :-1]
    g[0, :-1, :] = dx
    g[1, 1:, :] = -dx
    g[2, :, :-1] = dy
    g[3, :, 1:] = -dy
    return g


def signed_divergence(p):
    """Negative adjoint of :func:`upwind_gradient`.

    Per cell this is ``p1+[i,j] - p1+[i-1,j] + p1-[i,j] - p1-[i+1,j]`` plus the
    same along ``y``.  Entries of ``p`` that pair with a difference leaving
    the grid (always zero) do not contribute, which keeps
    ``<grad v, p> = -<v, div p>`` exact.
    """
    p = np.asarray(p, dtype=float)
    fx, bx, fy, by = p[0, :-1, :], p[1, 1:, :], p[2, :, :-1], p[3, :, 1:]
    d = np.zeros(p.shape[1:])
    d[:-1, :] += fx
    d[1:, :] -= fx
    d[1:, :] += bx
    d[:-1, :] -= bx
    d[:, :-1] += fy
    d[:, 1:] -= fy
    d[:, 1:] += by
    d[:, :-1] -= by
    return d


def upwind_norms(v):
    """Euclidean norm of the positive part of the upwind gradient per cell."""
    g = np.maximum(upwind_gradient(v), 0.0)
    return np.sqrt(np.einsum("kij,kij->ij", g, g))


def discrete_tv(v, h=None):
    """Discrete total variation ``h * sum_ij |max(grad v_ij, 0)|``.

    ``h`` defaults to ``1/n``.  On the indicator of a cell rectangle this is
    its perimeter exactly.
    """
    v = np.asarray(v, dtype=float)
    if h is None:
        h = 1.0 / v.shape[0]
    # row-major sum of a contiguous array: fixed summation order
    return float(h * np.sum(np.ascontiguousarray(upwind_norms(v))))
