"""Slow, simple reference solvers used to cross-check the primal-dual code.

They share nothing with the compiled kernels: the limit problem is attacked
with smoothed projected gradient descent and diminishing steps, the viscous
problem at ``Y = 0`` with plain projected gradient descent.
"""
from __future__ import annotations

import numpy as np

from .analysis import ZERO_THRESHOLD, solve_two_values, split_sets, QuantizationError
from .calculus import discrete_tv, signed_divergence, upwind_gradient
from .flow import dirichlet_energy, edge_weights
from .grid import DomainMasks
from .projections import ConstraintMode, project_primal
from .solver import YieldSolution, compute_yc


def _feasible_projection(x, masks, mode, passes=50):
    """Alternate between the particle constraints and the zero-mean row.

    Removing the mean shifts every domain cell by the same amount; projecting
    back onto the particle constraints undoes the shift on solid cells.  The
    passes therefore act on one scalar, the fluid offset, which is tracked
    directly instead of re-projecting full arrays.
    """
    y = project_primal(x, masks, mode)
    fluid = masks.fluid
    n_dom = masks.domain.sum()
    n_fl = fluid.sum()
    total = float(y.sum())
    offset = 0.0
    for _ in range(passes):
        offset -= (total + offset * n_fl) / n_dom
    y[fluid] += offset
    return y


def smoothed_tv_gradient(v, h, eps):
    """Gradient of ``h * sum huber_eps(|max(grad v, 0)|)``."""
    d = np.maximum(upwind_gradient(v), 0.0)
    norm = np.sqrt(np.einsum("kij,kij->ij", d, d))
    return -h * signed_divergence(d / np.maximum(norm, eps))


def subgradient_reference(masks: DomainMasks, mode=ConstraintMode.SINGLE, iters: int = 200_000,
                          step: float = 0.5, eps: float = 1e-6, record_every: int = 10,
                          start=None) -> YieldSolution:
    """Projected gradient descent on the Huber-smoothed TV with steps c/sqrt(k).

    Returns the iterate with the smallest discrete TV among those recorded.
    Intended for grids with ``n <= 32``.
    """
    if masks.grid.n > 32:
        raise ValueError("subgradient_reference is a desk-scale oracle (n <= 32)")
    mode = ConstraintMode.parse(mode)
    h = masks.grid.h
    v = np.zeros(masks.grid.shape) if start is None else np.array(start, dtype=float)
    v = _feasible_projection(v, masks, mode)
    best_v, best_tv = v, discrete_tv(v, h)
    for k in range(1, iters + 1):
        v = _feasible_projection(v - step / np.sqrt(k) * smoothed_tv_gradient(v, h, eps), masks, mode)
        if k % record_every == 0 or k == iters:
            tv = discrete_tv(v, h)
            if tv < best_tv:
                best_v, best_tv = v, tv
    return YieldSolution(v=best_v, yc=compute_yc(best_v, masks), tv=best_tv, masks=masks,
                         mode=mode, iterations=iters, converged=True)


def lp_vertex_check(v, masks: DomainMasks, threshold: float = ZERO_THRESHOLD, rtol: float = 1e-3):
    """Re-derive the two plateau values of a (near) three-valued field.

    With the signed level sets of ``v`` fixed, the values solving the two
    constraint rows are the only vertex of the feasible polyhedron.  Returns
    ``(beta_plus, beta_minus, consistent)`` where ``consistent`` means: the
    sign pattern is admissible, no single-value alternative is feasible and
    cheaper, and the plateau means of ``v`` agree with the solved values to
    ``rtol``.

    Raises
    ------
    ValueError
        If the level sets cannot satisfy both constraint rows.
    """
    v = np.asarray(v, dtype=float)
    pos, neg = split_sets(v, threshold)
    try:
        bp, bm = solve_two_values(pos, neg, masks)
    except QuantizationError:
        raise ValueError("level sets cannot satisfy constraints") from None
    h = masks.grid.h
    per = np.array([discrete_tv(pos.astype(float), h), discrete_tv(neg.astype(float), h)])
    objective = bp * per[0] - bm * per[1]

    solid = masks.solid
    cols = np.array([[pos.sum(), neg.sum()], [(pos & solid).sum(), (neg & solid).sum()]], dtype=float)
    rhs = np.array([0.0, float(solid.sum())])
    vertex_ok = True
    for keep, sign in ((0, 1.0), (1, -1.0)):
        col = cols[:, keep]
        x = (col @ rhs) / (col @ col) if col @ col > 0 else 0.0
        feasible = np.allclose(col * x, rhs, atol=1e-12 * rhs[1]) and sign * x >= 0
        if feasible and sign * x * per[keep] < objective * (1 - 1e-12):
            vertex_ok = False

    sign_ok = bp > 0 and bm < 0
    match = (np.isclose(v[pos].mean(), bp, rtol=rtol, atol=0.0)
             and np.isclose(v[neg].mean(), bm, rtol=rtol, atol=0.0))
    return float(bp), float(bm), bool(sign_ok and vertex_ok and match)


def quadratic_reference(masks: DomainMasks, iters: int = 50_000):
    """Projected gradient descent for the viscous problem at ``Y = 0``.

    Minimises ``D(w)/2 - h^2 * sum_solid w`` over rigid, zero-mean fields
    with step ``1/8`` (the Lipschitz bound of the Dirichlet gradient).
    Returns the field and its Dirichlet energy.
    """
    h = masks.grid.h
    ex, ey = edge_weights(masks)
    force = np.where(masks.solid, h * h, 0.0)
    dom = masks.domain

    def grad(w):
        g = -force.copy()
        dx = ex[:-1, :] * (w[:-1, :] - w[1:, :])
        dy = ey[:, :-1] * (w[:, :-1] - w[:, 1:])
        g[:-1, :] += dx
        g[1:, :] -= dx
        g[:, :-1] += dy
        g[:, 1:] -= dy
        return g

    def proj(w):
        w = project_primal(w, masks, ConstraintMode.MULTI, normalize=False)
        w[dom] -= w.sum() / dom.sum()
        return w

    w = np.zeros(masks.grid.shape)
    for _ in range(iters):
        w = proj(w - grad(w) / 8.0)
    return w, dirichlet_energy(w, masks)
