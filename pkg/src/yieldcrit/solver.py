"""Primal-dual solver for the critical yield number.

The limit problem is: minimise the discrete TV over fields that vanish on the
exterior, satisfy the particle constraint of the chosen
:class:`~yieldcrit.projections.ConstraintMode` and have zero mean.  The zero
mean is carried by a scalar multiplier ``q``; everything else is a
projection.  The critical yield number is the quotient
``(h^2 * sum over solid cells of v) / TV(v)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .calculus import discrete_tv
from .grid import DomainMasks
from .projections import ConstraintMode, project_primal

#: bound on the squared operator norm of (upwind gradient, mean row)
OPERATOR_NORM_SQ = 17.0


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 200_000
    tol: float = 1e-8
    check_every: int = 100
    tau: float = 1.0 / math.sqrt(OPERATOR_NORM_SQ)
    sigma: float = 1.0 / math.sqrt(OPERATOR_NORM_SQ)
    over_relaxation: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1 or self.check_every < 1:
            raise ValueError("max_iters and check_every must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if not (self.tau > 0 and self.sigma > 0):
            raise ValueError("step sizes must be positive")
        if not 1.0 <= self.over_relaxation <= 2.0:
            raise ValueError("over_relaxation must lie in [1, 2]")

    def check_steps(self):
        if self.tau * self.sigma * OPERATOR_NORM_SQ > 1.0 + 1e-12:
            raise ValueError(
                f"step sizes violate tau*sigma*L^2 <= 1 (tau={self.tau}, sigma={self.sigma}, L^2={OPERATOR_NORM_SQ})")


@dataclass(frozen=True)
class CheckRecord:
    """One telemetry sample, taken every ``check_every`` iterations."""

    iteration: int
    tv: float
    mean: float
    normalization_residual: float
    relative_change: float


@dataclass
class YieldSolution:
    v: np.ndarray
    yc: float
    tv: float
    masks: DomainMasks
    mode: ConstraintMode
    iterations: int
    converged: bool
    telemetry: list[CheckRecord] = field(default_factory=list)
    q: float = 0.0

    @property
    def mean(self) -> float:
        return float(self.masks.grid.h ** 2 * self.v.sum())

    @property
    def normalization_residual(self) -> float:
        m = self.masks
        return float(m.grid.h ** 2 * self.v[m.solid].sum() / m.solid_area - 1.0)

    @property
    def rescaled(self) -> np.ndarray:
        """The profile scaled to unit total variation."""
        return self.v / self.tv


def compute_yc(v, masks: DomainMasks) -> float:
    """Quotient of the solid integral of ``v`` and its discrete TV."""
    v = np.asarray(v, dtype=float)
    tv = discrete_tv(v, masks.grid.h)
    if not tv > 0.0:
        raise SolverError("quotient undefined: zero total variation")
    return float(masks.grid.h ** 2 * v[masks.solid].sum() / tv)


@dataclass(frozen=True)
class KernelLayout:
    """Flat arrays describing the masks, in the form the kernels take."""

    fmask: np.ndarray
    cval: np.ndarray
    si: np.ndarray
    sj: np.ndarray
    slab: np.ndarray
    counts: np.ndarray

    @classmethod
    def of(cls, masks: DomainMasks, pin_solid: bool = False) -> "KernelLayout":
        lab = masks.labels
        ring = np.ones(lab.shape, dtype=bool)
        ring[1:-1, 1:-1] = False
        if (lab[ring] >= 0).any():
            raise ValueError("the outer ring of cells must be exterior")
        si, sj = np.nonzero(lab > 0)
        return cls(
            fmask=np.ascontiguousarray(masks.fluid, dtype=float),
            cval=np.ascontiguousarray(masks.solid if pin_solid else np.zeros(lab.shape), dtype=float),
            si=si.astype(np.int64), sj=sj.astype(np.int64), slab=lab[si, sj].astype(np.int64),
            counts=np.concatenate([[0.0], masks.component_counts.astype(float)]),
        )


def solve(masks: DomainMasks, mode=ConstraintMode.SINGLE, cfg: SolverConfig | None = None) -> YieldSolution:
    """Minimise the discrete TV over the constraint set and return ``Y_c``.

    Raises
    ------
    SolverError
        On non-finite iterates or a solution without variation.
    """
    cfg = cfg or SolverConfig()
    cfg.check_steps()
    mode = ConstraintMode.parse(mode)
    h = masks.grid.h
    multi = mode is ConstraintMode.MULTI
    lay = KernelLayout.of(masks, pin_solid=not multi)
    # the mean row carries weight h, giving it unit operator norm
    w = h

    v = project_primal(np.zeros(masks.grid.shape), masks, mode)
    p = np.zeros((4,) + masks.grid.shape)
    q = 0.0
    solid = masks.solid
    telemetry = []
    it = 0
    converged = False
    while it < cfg.max_iters:
        chunk = min(cfg.check_every, cfg.max_iters - it)
        v_prev = v.copy()
        q = _kernels.limit_sweeps(v, p, q, lay.fmask, lay.cval, lay.si, lay.sj, lay.slab, lay.counts,
                                  multi, cfg.tau, cfg.sigma, w, cfg.over_relaxation, chunk)
        it += chunk
        if not (np.isfinite(q) and np.isfinite(v).all()):
            raise SolverError("divergence: check step sizes")
        vnorm = np.linalg.norm(v)
        rel = float(np.linalg.norm(v - v_prev) / vnorm) if vnorm > 0 else math.inf
        total = float(v.sum())
        telemetry.append(CheckRecord(
            iteration=it,
            tv=discrete_tv(v, h),
            mean=h * h * total,
            normalization_residual=float(v[solid].sum() / solid.sum() - 1.0),
            relative_change=rel,
        ))
        if rel <= cfg.tol and abs(total) <= cfg.tol * float(np.abs(v).sum()):
            converged = True
            break

    tv = discrete_tv(v, h)
    if tv < 1e-14:
        raise SolverError("degenerate solution (zero variation)")
    return YieldSolution(v=v, yc=compute_yc(v, masks), tv=tv, masks=masks, mode=mode,
                         iterations=it, converged=converged, telemetry=telemetry, q=q)
