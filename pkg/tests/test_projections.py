import numpy as np
import pytest

from yieldcrit.grid import DomainMasks, build_grid
from yieldcrit.projections import ConstraintMode, component_velocities, project_dual, project_primal

from conftest import masks_from_blocks

SINGLE, MULTI = ConstraintMode.SINGLE, ConstraintMode.MULTI


def as_field(vec):
    p = np.zeros((4, 8, 8))
    p[:, 3, 3] = vec
    return p


@pytest.mark.parametrize("x, expected", [
    ((2, 0, 0, 0), (1, 0, 0, 0)),
    ((-1, 3, 4, 0), (0, 0.6, 0.8, 0)),
    ((0.1, 0.2, 0, 0.3), (0.1, 0.2, 0, 0.3)),
])
def test_project_dual_examples(x, expected):
    np.testing.assert_allclose(project_dual(as_field(x))[:, 3, 3], expected, rtol=0, atol=1e-15)


def test_project_dual_matches_qp():
    # brute force over a fine sample of the feasible set
    from scipy.optimize import minimize
    x = np.array([-1.0, 3.0, 4.0, 0.0])
    res = minimize(lambda y: np.sum((y - x) ** 2), np.full(4, 0.1), method="SLSQP",
                   bounds=[(0, None)] * 4, constraints=[{"type": "ineq", "fun": lambda y: 1 - y @ y}],
                   options={"ftol": 1e-14})
    np.testing.assert_allclose(res.x, [0, 0.6, 0.8, 0], atol=1e-6)


def test_project_dual_radius():
    np.testing.assert_allclose(project_dual(as_field((3, 4, 0, 0)), radius=0.5)[:, 3, 3], (0.3, 0.4, 0, 0))


def test_project_dual_idempotent_nonexpansive(rng):
    for _ in range(100):
        x = rng.normal(size=(4, 8, 8)) * 3
        y = rng.normal(size=(4, 8, 8)) * 3
        px = project_dual(x)
        assert np.max(np.abs(project_dual(px) - px)) <= 1e-15
        assert np.linalg.norm(px - project_dual(y)) <= np.linalg.norm(x - y) + 1e-12


def test_project_dual_optimal_against_samples(rng):
    x = rng.normal(size=(4, 8, 8)) * 2
    px = project_dual(x)
    d = np.linalg.norm(x - px, axis=0)
    for _ in range(200):
        y = project_dual(rng.normal(size=(4, 8, 8)) * rng.uniform(0, 3))
        assert (d <= np.linalg.norm(x - y, axis=0) + 1e-12).all()


@pytest.fixture
def three_one():
    # components of 3 and 1 cells
    solid = np.zeros((16, 16), bool)
    solid[3:6, 3] = True
    solid[10, 10] = True
    ext = np.ones((16, 16), bool)
    ext[1:-1, 1:-1] = False
    return DomainMasks.from_classes(ext, solid)


def test_multi_worked_example(three_one):
    v = np.zeros((16, 16))
    v[3:6, 3] = [0.2, 0.5, 0.8]  # mean 0.5
    v[10, 10] = 1.5
    out = project_primal(v, three_one, MULTI)
    np.testing.assert_allclose(component_velocities(out, three_one), [0.75, 1.75], rtol=0, atol=1e-15)
    assert 3 * out[4, 3] + out[10, 10] == pytest.approx(4.0, abs=1e-15)


def test_single_pins_solid_and_exterior(ref16, rng):
    out = project_primal(rng.normal(size=(16, 16)), ref16, SINGLE)
    assert (out[ref16.solid] == 1.0).all()
    assert (out[ref16.exterior] == 0.0).all()


def test_fluid_untouched(ref16, rng):
    v = rng.normal(size=(16, 16))
    for mode in (SINGLE, MULTI):
        out = project_primal(v, ref16, mode)
        np.testing.assert_array_equal(out[ref16.fluid], v[ref16.fluid])


@pytest.mark.parametrize("mode", [SINGLE, MULTI])
def test_primal_idempotent_and_nonexpansive(disks32, rng, mode):
    for _ in range(100):
        v = rng.normal(size=(32, 32)) * rng.uniform(0.1, 10)
        w = rng.normal(size=(32, 32)) * rng.uniform(0.1, 10)
        pv = project_primal(v, disks32, mode)
        np.testing.assert_array_equal(project_primal(pv, disks32, mode), pv)
        assert np.linalg.norm(pv - project_primal(w, disks32, mode)) <= np.linalg.norm(v - w) + 1e-12


def test_multi_normalization_and_constancy(disks32, rng):
    h2 = disks32.grid.h ** 2
    for _ in range(100):
        out = project_primal(rng.normal(size=(32, 32)) * 5, disks32, MULTI)
        assert abs(h2 * out[disks32.solid].sum() / disks32.solid_area - 1) <= 1e-12
        for k in (1, 2):
            vals = out[disks32.labels == k]
            assert (vals == vals[0]).all()


def test_multi_is_the_euclidean_projection(three_one, rng):
    # compare with a generic equality-constrained least squares solve
    v = rng.normal(size=(16, 16))
    out = project_primal(v, three_one, MULTI)
    g = np.array([v[3:6, 3].mean(), v[10, 10]])
    w = np.array([3.0, 1.0])
    # minimise sum w (x - g)^2 s.t. w.x = 4  ->  KKT system
    K = np.array([[2 * w[0], 0, w[0]], [0, 2 * w[1], w[1]], [w[0], w[1], 0]])
    x = np.linalg.solve(K, [2 * w[0] * g[0], 2 * w[1] * g[1], 4.0])[:2]
    np.testing.assert_allclose(component_velocities(out, three_one), x, atol=1e-14)


def test_unnormalized_is_rigid_only(disks32, rng):
    v = rng.normal(size=(32, 32))
    out = project_primal(v, disks32, MULTI, normalize=False)
    for k in (1, 2):
        assert out[disks32.labels == k][0] == pytest.approx(v[disks32.labels == k].mean(), abs=1e-14)


def test_normalization_infeasible():
    lab = -np.ones((8, 8), dtype=int)
    lab[1:-1, 1:-1] = 0
    masks = DomainMasks(build_grid(8), lab)  # bypasses the structural check
    with pytest.raises(ValueError, match="normalization infeasible"):
        project_primal(np.zeros((8, 8)), masks, MULTI)


def test_mode_parse():
    assert ConstraintMode.parse("Multi") is MULTI
    with pytest.raises(ValueError):
        ConstraintMode.parse("both")


def test_single_block_modes_agree():
    m = masks_from_blocks(16, [(6, 10, 6, 10)])
    v = np.random.default_rng(3).normal(size=(16, 16))
    a = project_primal(v, m, SINGLE)
    b = project_primal(v, m, MULTI)
    np.testing.assert_allclose(a, b, atol=1e-15)
