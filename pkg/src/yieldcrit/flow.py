"""Viscous Bingham flow below and above the critical yield number.

The discrete functional is

    G_Y(w) = 1/2 * D(w) + Y * TV(w) - h^2 * sum_solid w

over fields that vanish on the exterior, are constant on each particle and
have zero mean.  ``D`` sums squared undivided differences over grid edges
with at least one fluid endpoint, which approximates the Dirichlet integral
without any ``h`` factor.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .calculus import discrete_tv
from .grid import DomainMasks
from .projections import ConstraintMode, project_primal
from .solver import OPERATOR_NORM_SQ, KernelLayout, SolverConfig, SolverError, solve

#: Lipschitz bound of the gradient of D/2 (graph Laplacian, degree <= 4)
DIRICHLET_LIPSCHITZ = 8.0


@dataclass(frozen=True)
class PhysicalScales:
    tau_Y: float
    mu_f: float
    rho_s: float
    rho_f: float
    g: float
    L_hat: float

    def __post_init__(self):
        if self.rho_s <= self.rho_f:
            raise ValueError("no buoyancy contrast: rho_s must exceed rho_f")
        if not (self.mu_f > 0 and self.L_hat > 0 and self.g > 0):
            raise ValueError("mu_f, L_hat and g must be positive")
        if self.tau_Y < 0:
            raise ValueError("yield stress must be nonnegative")


def buoyancy_number(s: PhysicalScales) -> tuple[float, float]:
    """Return the buoyancy number ``Y`` and the velocity scale ``omega0``."""
    drho_g = (s.rho_s - s.rho_f) * s.g
    return s.tau_Y / (drho_g * s.L_hat), drho_g * s.L_hat ** 2 / s.mu_f


@dataclass
class FlowSolution:
    Y: float
    omega: np.ndarray
    dirichlet_energy: float
    tv: float
    drive: float
    iterations: int = 0
    converged: bool = False
    mean: float = 0.0

    @property
    def energy(self) -> float:
        return 0.5 * self.dirichlet_energy + self.Y * self.tv - self.drive

    def identity_gap(self) -> float:
        """``|D - (drive - Y*TV)|``; zero at an exact minimiser."""
        return abs(self.dirichlet_energy - (self.drive - self.Y * self.tv))


def edge_weights(masks: DomainMasks):
    """0/1 weights of x- and y-edges that touch at least one fluid cell."""
    fl = masks.fluid
    ex = np.zeros(masks.grid.shape)
    ey = np.zeros(masks.grid.shape)
    ex[:-1, :] = fl[:-1, :] | fl[1:, :]
    ey[:, :-1] = fl[:, :-1] | fl[:, 1:]
    return ex, ey


def dirichlet_energy(omega, masks: DomainMasks) -> float:
    """Sum of squared differences over fluid-incident edges."""
    ex, ey = edge_weights(masks)
    dx = np.zeros(masks.grid.shape)
    dy = np.zeros(masks.grid.shape)
    dx[:-1, :] = omega[1:, :] - omega[:-1, :]
    dy[:, :-1] = omega[:, 1:] - omega[:, :-1]
    return float(np.sum(ex * dx * dx) + np.sum(ey * dy * dy))


def flow_step_sizes(sigma: float | None = None):
    sigma = sigma or 1.0 / math.sqrt(OPERATOR_NORM_SQ)
    tau = 1.0 / (DIRICHLET_LIPSCHITZ + sigma * OPERATOR_NORM_SQ)
    return tau, sigma


def solve_flow(masks: DomainMasks, Y: float, cfg: SolverConfig | None = None) -> FlowSolution:
    """Minimise the viscous functional for yield number ``Y``.

    Uses a primal-dual splitting with an explicit gradient step on the
    Dirichlet term; ``cfg.tau`` is ignored and replaced by the smooth-term
    bound ``1/(L_quad + sigma*L^2)``.
    """
    if Y < 0:
        raise ValueError("yield number must be nonnegative")
    cfg = cfg or SolverConfig()
    h = masks.grid.h
    tau, sigma = flow_step_sizes(cfg.sigma)
    lay = KernelLayout.of(masks)
    ex, ey = edge_weights(masks)
    drive = np.where(masks.solid, h * h, 0.0)
    w = h

    omega = np.zeros(masks.grid.shape)
    p = np.zeros((4,) + masks.grid.shape)
    q = 0.0
    # force scale: a single gradient step from rest moves solid cells by tau*h^2
    floor = tau * h * h
    it = 0
    converged = False
    while it < cfg.max_iters:
        chunk = min(cfg.check_every, cfg.max_iters - it)
        prev = omega.copy()
        q = _kernels.flow_sweeps(omega, p, q, lay.fmask, lay.si, lay.sj, lay.slab, lay.counts,
                                 ex, ey, drive, Y * h, tau, sigma, w, cfg.over_relaxation, chunk)
        it += chunk
        if not (np.isfinite(q) and np.isfinite(omega).all()):
            raise SolverError("divergence: check step sizes")
        change = np.linalg.norm(omega - prev)
        scale = max(np.linalg.norm(omega), floor)
        total = float(omega.sum())
        if change <= cfg.tol * scale and abs(total) <= cfg.tol * max(float(np.abs(omega).sum()), floor):
            converged = True
            break

    return FlowSolution(
        Y=float(Y),
        omega=omega,
        dirichlet_energy=dirichlet_energy(omega, masks),
        tv=discrete_tv(omega, h),
        drive=float(h * h * omega[masks.solid].sum()),
        iterations=it,
        converged=converged,
        mean=float(h * h * omega.sum()),
    )


@dataclass
class SweepRow:
    Y: float
    tv: float
    dirichlet: float
    drive: float
    rate_bound_ok: bool


@dataclass
class SweepResult:
    yc: float
    fluid_area: float
    rows: list[SweepRow]
    solutions: list[FlowSolution]
    profiles: dict[float, np.ndarray] = field(default_factory=dict)

    @property
    def tv_nonincreasing(self) -> bool:
        tvs = [r.tv for r in sorted(self.rows, key=lambda r: r.Y)]
        return all(b <= a * (1 + 1e-9) + 1e-14 for a, b in zip(tvs, tvs[1:]))


def rate_bound(Y, yc, fluid_area):
    """Upper bound ``|Omega_f| (Y_c - Y)^2`` on the Dirichlet energy."""
    return fluid_area * max(yc - Y, 0.0) ** 2


def critical_yield_number(masks: DomainMasks, cfg: SolverConfig | None = None) -> float:
    """``Y_c`` of the viscous problem: the per-particle (MULTI) limit solve."""
    return solve(masks, ConstraintMode.MULTI, cfg).yc


def sweep_to_critical(masks: DomainMasks, Y_list, cfg: SolverConfig | None = None,
                      yc: float | None = None, max_workers: int = 1) -> SweepResult:
    """Solve the flow for every ``Y`` and record energies and rescaled profiles.

    ``yc`` defaults to the MULTI-mode limit solve on the same grid.  Profiles
    ``omega / TV(omega)`` are kept only where the flow has not stopped.
    """
    Y_list = [float(y) for y in Y_list]
    if not Y_list:
        raise ValueError("no sweep points")
    if any(b < a for a, b in zip(Y_list, Y_list[1:])):
        raise ValueError("Y_list must be increasing")
    if yc is None:
        yc = critical_yield_number(masks, cfg)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers) as ex:
            sols = list(ex.map(lambda y: solve_flow(masks, y, cfg), Y_list))
    else:
        sols = [solve_flow(masks, y, cfg) for y in Y_list]
    area = masks.fluid_area
    rows, profiles = [], {}
    for s in sols:
        # absolute slack covers solver round-off once the flow has stopped
        ok = s.dirichlet_energy <= rate_bound(s.Y, yc, area) + 1e-12
        rows.append(SweepRow(s.Y, s.tv, s.dirichlet_energy, s.drive, ok))
        if s.tv > 1e-12:
            profiles[s.Y] = s.omega / s.tv
    return SweepResult(yc=yc, fluid_area=area, rows=rows, solutions=sols, profiles=profiles)


def stopped(sol: FlowSolution, atol: float = 1e-6) -> bool:
    return float(np.abs(sol.omega).max()) <= atol


def rigid_projection(omega, masks):
    """Project onto fields vanishing outside and constant on each particle."""
    return project_primal(omega, masks, ConstraintMode.MULTI, normalize=False)
