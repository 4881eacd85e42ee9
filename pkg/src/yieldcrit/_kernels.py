"""Fused primal-dual sweeps compiled with numba.

Both kernels advance the iteration in place by ``iters`` steps and return the
updated scalar multiplier.  They rely on the outer ring of cells being
exterior (``v = 0`` there), which lets the interior loops run without edge
branches.  Arguments:

``fmask``   1.0 on fluid cells, 0.0 elsewhere
``cval``    value forced on each cell after the primal step (1.0 on solid
            cells for the single-particle limit problem, else 0.0)
``si, sj``  indices of solid cells; ``slab`` their component ids
``counts``  cell count per component, index 0 unused
"""
import numpy as np
from numba import njit

# reassociation is fine (results stay run-to-run deterministic); NaN/Inf
# semantics are kept so divergence can still be detected
_FAST = {"nsz", "arcp", "contract", "afn", "reassoc"}


@njit(cache=True, nogil=True, fastmath=_FAST)
def _div_interior(p, i, j):
    return (p[0, i, j] - p[0, i - 1, j] + p[1, i, j] - p[1, i + 1, j]
            + p[2, i, j] - p[2, i, j - 1] + p[3, i, j] - p[3, i, j + 1])


@njit(cache=True, nogil=True, fastmath=_FAST)
def _project4(b0, b1, b2, b3, radius):
    if radius <= 0.0:
        return 0.0, 0.0, 0.0, 0.0
    b0 = max(b0, 0.0)
    b1 = max(b1, 0.0)
    b2 = max(b2, 0.0)
    b3 = max(b3, 0.0)
    nrm = np.sqrt(b0 * b0 + b1 * b1 + b2 * b2 + b3 * b3)
    f = radius / max(nrm, radius)
    return b0 * f, b1 * f, b2 * f, b3 * f


@njit(cache=True, nogil=True, fastmath=_FAST)
def _dual_edge_cell(p, vb, i, j, sigma, radius, rho):
    n = vb.shape[0]
    c = vb[i, j]
    a0 = p[0, i, j]
    a1 = p[1, i, j]
    a2 = p[2, i, j]
    a3 = p[3, i, j]
    b0 = a0 + sigma * (vb[i + 1, j] - c) if i < n - 1 else a0
    b1 = a1 + sigma * (vb[i - 1, j] - c) if i > 0 else a1
    b2 = a2 + sigma * (vb[i, j + 1] - c) if j < n - 1 else a2
    b3 = a3 + sigma * (vb[i, j - 1] - c) if j > 0 else a3
    b0, b1, b2, b3 = _project4(b0, b1, b2, b3, radius)
    p[0, i, j] = a0 + rho * (b0 - a0)
    p[1, i, j] = a1 + rho * (b1 - a1)
    p[2, i, j] = a2 + rho * (b2 - a2)
    p[3, i, j] = a3 + rho * (b3 - a3)


@njit(cache=True, nogil=True, fastmath=_FAST)
def _dual_step(p, vb, sigma, radius, rho):
    """p <- p + rho*(P(p + sigma*grad vb) - p) on every cell."""
    n = vb.shape[0]
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            c = vb[i, j]
            a0 = p[0, i, j]
            a1 = p[1, i, j]
            a2 = p[2, i, j]
            a3 = p[3, i, j]
            b0, b1, b2, b3 = _project4(a0 + sigma * (vb[i + 1, j] - c), a1 + sigma * (vb[i - 1, j] - c),
                                       a2 + sigma * (vb[i, j + 1] - c), a3 + sigma * (vb[i, j - 1] - c),
                                       radius)
            p[0, i, j] = a0 + rho * (b0 - a0)
            p[1, i, j] = a1 + rho * (b1 - a1)
            p[2, i, j] = a2 + rho * (b2 - a2)
            p[3, i, j] = a3 + rho * (b3 - a3)
    # outer ring: only differences that stay on the grid count
    for k in range(n):
        _dual_edge_cell(p, vb, 0, k, sigma, radius, rho)
        _dual_edge_cell(p, vb, n - 1, k, sigma, radius, rho)
    for k in range(1, n - 1):
        _dual_edge_cell(p, vb, k, 0, sigma, radius, rho)
        _dual_edge_cell(p, vb, k, n - 1, sigma, radius, rho)


@njit(cache=True, nogil=True, fastmath=_FAST)
def _finish(v, vt, vb, rho):
    """vb <- 2 vt - v, v <- v + rho (vt - v); returns sum(vb)."""
    n = v.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            b = 2.0 * vt[i, j] - v[i, j]
            vb[i, j] = b
            s += b
            v[i, j] += rho * (vt[i, j] - v[i, j])
    return s


@njit(cache=True, nogil=True, fastmath=_FAST)
def limit_sweeps(v, p, q, fmask, cval, si, sj, slab, counts, multi, tau, sigma, w, rho, iters):
    """Primal-dual iterations for the discrete TV quotient problem."""
    n = v.shape[0]
    ncomp = counts.shape[0]
    n_solid = 0.0
    for k in range(1, ncomp):
        n_solid += counts[k]
    vt = np.zeros_like(v)
    vb = np.empty_like(v)
    csum = np.zeros(ncomp)
    for _ in range(iters):
        shift = w * q
        for i in range(1, n - 1):
            for j in range(1, n - 1):
                vt[i, j] = fmask[i, j] * (v[i, j] + tau * (_div_interior(p, i, j) + shift)) + cval[i, j]
        if multi:
            for k in range(ncomp):
                csum[k] = 0.0
            for m in range(si.shape[0]):
                i = si[m]
                j = sj[m]
                csum[slab[m]] += v[i, j] + tau * (_div_interior(p, i, j) + shift)
            acc = 0.0
            for k in range(1, ncomp):
                csum[k] = csum[k] / counts[k]
                acc += counts[k] * csum[k]
            lam = (n_solid - acc) / n_solid
            for m in range(si.shape[0]):
                vt[si[m], sj[m]] = csum[slab[m]] + lam
        s = _finish(v, vt, vb, rho)
        _dual_step(p, vb, sigma, 1.0, rho)
        q = q - rho * sigma * w * s
    return q


@njit(cache=True, nogil=True, fastmath=_FAST)
def flow_sweeps(v, p, q, fmask, si, sj, slab, counts, ex, ey, drive, radius, tau, sigma, w, rho, iters):
    """Condat-Vu iterations for the viscous functional.

    ``ex[i, j]`` / ``ey[i, j]`` weight the edge from (i, j) to (i+1, j) /
    (i, j+1) in the Dirichlet term; ``drive`` is the per-cell linear force;
    ``radius`` is the dual-ball radius (yield number times h).
    """
    n = v.shape[0]
    ncomp = counts.shape[0]
    vt = np.zeros_like(v)
    vb = np.empty_like(v)
    csum = np.zeros(ncomp)
    for _ in range(iters):
        shift = w * q
        for i in range(1, n - 1):
            for j in range(1, n - 1):
                c = v[i, j]
                g = (ex[i, j] * (c - v[i + 1, j]) + ex[i - 1, j] * (c - v[i - 1, j])
                     + ey[i, j] * (c - v[i, j + 1]) + ey[i, j - 1] * (c - v[i, j - 1]) - drive[i, j])
                vt[i, j] = fmask[i, j] * (c - tau * (g - _div_interior(p, i, j) - shift))
        for k in range(ncomp):
            csum[k] = 0.0
        for m in range(si.shape[0]):
            i = si[m]
            j = sj[m]
            c = v[i, j]
            g = (ex[i, j] * (c - v[i + 1, j]) + ex[i - 1, j] * (c - v[i - 1, j])
                 + ey[i, j] * (c - v[i, j + 1]) + ey[i, j - 1] * (c - v[i, j - 1]) - drive[i, j])
            csum[slab[m]] += c - tau * (g - _div_interior(p, i, j) - shift)
        for k in range(1, ncomp):
            csum[k] = csum[k] / counts[k]
        for m in range(si.shape[0]):
            vt[si[m], sj[m]] = csum[slab[m]]
        s = _finish(v, vt, vb, rho)
        _dual_step(p, vb, sigma, radius, rho)
        q = q - rho * sigma * w * s
    return q
