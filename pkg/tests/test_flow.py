import numpy as np
import pytest

from yieldcrit.flow import (PhysicalScales, buoyancy_number, critical_yield_number, dirichlet_energy,
                            edge_weights, rate_bound, solve_flow, stopped, sweep_to_critical)
from yieldcrit.oracles import quadratic_reference
from yieldcrit.solver import SolverConfig, solve

FRACTIONS = (0.25, 0.5, 0.75, 0.9)


def scales(**kw):
    base = dict(tau_Y=2.0, mu_f=1.0, rho_s=200.0, rho_f=100.0, g=10.0, L_hat=0.1)
    base.update(kw)
    return PhysicalScales(**base)


def test_buoyancy_number_examples():
    Y, omega0 = buoyancy_number(scales())
    assert Y == pytest.approx(0.02, rel=1e-15)
    assert omega0 == pytest.approx(10.0, rel=1e-15)
    assert buoyancy_number(scales(tau_Y=0.0))[0] == 0.0


@pytest.mark.parametrize("kw, msg", [
    (dict(rho_s=100.0), "no buoyancy contrast"),
    (dict(mu_f=0.0), "positive"),
    (dict(tau_Y=-1.0), "nonnegative"),
])
def test_invalid_scales(kw, msg):
    with pytest.raises(ValueError, match=msg):
        scales(**kw)


@pytest.fixture(scope="module")
def yc16(ref16):
    return critical_yield_number(ref16)


@pytest.fixture(scope="module")
def sweep16(ref16, yc16):
    return sweep_to_critical(ref16, [f * yc16 for f in (0.0,) + FRACTIONS + (1.05,)], yc=yc16)


def test_zero_yield_matches_quadratic_oracle(ref16):
    sol = solve_flow(ref16, 0.0, SolverConfig(tol=1e-12, max_iters=400_000))
    w, D = quadratic_reference(ref16, iters=200_000)
    assert np.linalg.norm(sol.omega - w) <= 1e-4 * np.linalg.norm(w)
    assert sol.dirichlet_energy == pytest.approx(D, rel=1e-4)


def test_stops_above_critical(sweep16):
    sol = sweep16.solutions[-1]
    assert stopped(sol)
    assert sol.tv <= 1e-10
    assert max(sweep16.profiles) < sol.Y  # no profile for the stopped flow


def test_rate_bound_and_monotone_tv(sweep16):
    assert all(r.rate_bound_ok for r in sweep16.rows)
    assert sweep16.tv_nonincreasing


def test_energy_identity(sweep16):
    for s in sweep16.solutions:
        assert s.identity_gap() <= 1e-6 * (1 + s.dirichlet_energy)


def test_zero_mean(sweep16):
    for s in sweep16.solutions:
        assert abs(s.mean) <= 1e-8


def test_quotient_tends_to_one(sweep16):
    ratios = [s.Y * s.tv / s.drive for s in sweep16.solutions[1:-1]]
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > 0.8


def test_rescaled_profiles_approach_limit(ref16, sweep16):
    limit = solve(ref16, "multi")
    vc = limit.v / limit.tv
    dist = {Y: np.abs(p - vc).sum() / np.abs(vc).sum() for Y, p in sweep16.profiles.items() if Y > 0}
    Ys = sorted(dist)
    assert dist[Ys[-1]] < dist[Ys[1]]  # 0.9 Y_c closer than 0.5 Y_c


def test_rigid_particles_in_flow(disks32):
    yc = critical_yield_number(disks32)
    sol = solve_flow(disks32, 0.5 * yc)
    for k in (1, 2):
        vals = sol.omega[disks32.labels == k]
        assert np.ptp(vals) == 0.0
    assert (sol.omega[disks32.exterior] == 0).all()
    # symmetric particles settle at the same speed
    a, b = (sol.omega[disks32.labels == k][0] for k in (1, 2))
    assert a == pytest.approx(b, rel=1e-6)


def test_dirichlet_quadrature(ref16):
    ex, ey = edge_weights(ref16)
    # solid-solid edges carry no weight
    assert not (ex[6:9, 6:10]).any() and not (ey[6:10, 6:9]).any()
    w = np.zeros((16, 16))
    w[ref16.solid] = 1.0
    # every fluid edge touching the 4x4 block: 16 edges with unit jump
    assert dirichlet_energy(w, ref16) == 16.0


def test_rate_bound_formula():
    assert rate_bound(0.5, 1.0, 2.0) == 0.5
    assert rate_bound(1.5, 1.0, 2.0) == 0.0


def test_sweep_errors(ref16):
    with pytest.raises(ValueError, match="no sweep points"):
        sweep_to_critical(ref16, [])
    with pytest.raises(ValueError, match="increasing"):
        sweep_to_critical(ref16, [0.02, 0.01], yc=0.04)
    with pytest.raises(ValueError, match="nonnegative"):
        solve_flow(ref16, -1.0)


def test_parallel_sweep_matches_serial(ref16, yc16):
    Ys = [0.3 * yc16, 0.6 * yc16]
    a = sweep_to_critical(ref16, Ys, yc=yc16)
    b = sweep_to_critical(ref16, Ys, yc=yc16, max_workers=2)
    for s, t in zip(a.solutions, b.solutions):
        np.testing.assert_array_equal(s.omega, t.omega)
