import numpy as np
import pytest

from yieldcrit import corpus
from yieldcrit.grid import (Disk, DomainMasks, GeometryError, GeometrySpec, Polygon, Rectangle, Stencil,
                            build_grid, label_components, rasterize)

from conftest import masks_from_blocks


def test_build_grid():
    g = build_grid(8)
    assert g.n == 8 and g.h == 0.125
    g = build_grid(128)
    assert g.h == 1 / 128 and g.h * g.n == 1.0
    assert g.shape == (128, 128)


def test_build_grid_too_coarse():
    with pytest.raises(GeometryError, match="resolution too coarse"):
        build_grid(4)


def _inset_predicate(lo, hi, n):
    # a cell row i is inside [lo + h, hi - h] iff lo + h <= i h and (i + 1) h <= hi - h
    i = np.arange(n)
    return (lo * n + 1 <= i + 1e-9) & (i + 1 <= hi * n - 1 + 1e-9)


def test_centered_square_matches_inset_predicate():
    n = 32
    m = rasterize(corpus.centered_squares(), build_grid(n))
    assert m.n_components == 1
    row = _inset_predicate(0.375, 0.625, n)
    np.testing.assert_array_equal(m.solid, np.outer(row, row))
    # exterior: cell at distance >= h from the domain square
    i = np.arange(n)
    gap = np.maximum.reduce([0.125 - (i + 1) / n, i / n - 0.875, np.zeros(n)])
    dist = np.hypot(gap[:, None], gap[None, :])
    np.testing.assert_array_equal(m.exterior, dist >= 1 / n - 1e-12)


def test_reference_geometry_layout(ref16):
    # 4x4 solid block inside a 12x12 block of non-exterior cells
    assert ref16.solid.sum() == 16
    assert ref16.domain.sum() == 144
    assert ref16.solid[6:10, 6:10].all()
    assert ref16.domain[2:14, 2:14].all()


def test_empty_solid_list():
    spec = GeometrySpec((corpus.square(0.1, 0.9),), ())
    with pytest.raises(GeometryError, match="component vanishes"):
        rasterize(spec, build_grid(16))


def test_tiny_particle_vanishes():
    spec = GeometrySpec((corpus.square(0.1, 0.9),), (Disk((0.5, 0.5), 0.05),))
    with pytest.raises(GeometryError, match="component vanishes"):
        rasterize(spec, build_grid(16))


def test_two_disks_ordered_row_major():
    m = rasterize(corpus.two_disks(), build_grid(64))
    assert m.n_components == 2
    first = [np.argwhere(m.labels == k)[0] for k in (1, 2)]
    assert tuple(first[0]) < tuple(first[1])
    # the left disk (smaller x = smaller first index) is component 1
    assert np.argwhere(m.labels == 1)[:, 0].mean() < 32


def test_label_components_examples():
    m = masks_from_blocks(16, [(3, 5, 3, 5), (9, 11, 9, 11)])
    assert label_components(m) == [(1, 4, 4 / 256), (2, 4, 4 / 256)]
    m = masks_from_blocks(16, [(4, 7, 4, 6)])
    assert label_components(m) == [(1, 6, 6 / 256)]
    solid = np.zeros((16, 16), bool)
    solid[4:7, 4] = True
    solid[4, 5:7] = True
    ext = np.ones((16, 16), bool)
    ext[1:-1, 1:-1] = False
    m = DomainMasks.from_classes(ext, solid)
    assert label_components(m) == [(1, 5, 5 / 256)]


def test_components_must_not_touch_diagonally():
    with pytest.raises(GeometryError, match="touches another component"):
        masks_from_blocks(16, [(3, 5, 3, 5), (5, 7, 5, 7)])


def test_particle_touching_exterior():
    with pytest.raises(GeometryError, match="particle touches boundary after rasterization"):
        masks_from_blocks(16, [(4, 6, 4, 6)], domain=(4, 12, 4, 12))


def test_outer_ring_must_be_exterior():
    with pytest.raises(GeometryError, match="outer 1-cell ring"):
        masks_from_blocks(16, [(6, 8, 6, 8)], domain=(0, 16, 0, 16))
    # margin is configurable
    m = masks_from_blocks(16, [(6, 8, 6, 8)], domain=(2, 14, 2, 14))
    m.check(margin=2)
    with pytest.raises(GeometryError):
        m.check(margin=3)


def test_masks_are_read_only(ref16):
    with pytest.raises(ValueError):
        ref16.labels[0, 0] = 3


def test_measures(ref16):
    h2 = 1 / 256
    assert ref16.solid_area == 16 * h2
    assert ref16.fluid_area == 128 * h2
    np.testing.assert_array_equal(ref16.component_areas, [16 * h2])


@pytest.mark.parametrize("spec", [
    GeometrySpec((Rectangle((0.0, 0.1), (0.9, 0.9)),), (Disk((0.5, 0.5), 0.1),)),
    GeometrySpec((corpus.square(0.1, 0.9),), (Disk((0.5, 0.5), 0.45),)),
    GeometrySpec((corpus.square(0.1, 0.9),), (Rectangle((0.05, 0.4), (0.3, 0.6)),)),
])
def test_invalid_specs(spec):
    with pytest.raises(GeometryError):
        rasterize(spec, build_grid(32))


def _cell_corners(n, idx):
    i, j = idx[:, 0], idx[:, 1]
    h = 1 / n
    return [np.stack([(i + a) * h, (j + b) * h], 1) for a in (0, 1) for b in (0, 1)]


@pytest.mark.parametrize("n", [32, 64, 128])
def test_erosion_never_misclassifies(n):
    spec = corpus.disk_in_square()
    m = rasterize(spec, build_grid(n))
    disk = spec.solid_shapes[0]
    for c in _cell_corners(n, np.argwhere(m.solid)):
        assert (np.hypot(c[:, 0] - 0.5, c[:, 1] - 0.5) <= disk.radius + 1e-12).all()
    for c in _cell_corners(n, np.argwhere(m.exterior)):
        inside = (c > 0.1 + 1e-12) & (c < 0.9 - 1e-12)
        assert not inside.all(axis=1).any()


def test_solid_area_converges_at_first_order():
    spec = corpus.disk_in_square()
    exact = np.pi * 0.2 ** 2
    consts = []
    for n in (32, 64, 128, 256):
        m = rasterize(spec, build_grid(n))
        consts.append(abs(m.solid_area - exact) * n)
    # |area(n) - exact| <= C h with C stable under refinement
    assert max(consts) < 4.0
    assert max(consts) / min(consts) < 2.0


def test_component_count_stable_under_refinement():
    spec = corpus.disk_and_bar()
    assert {rasterize(spec, build_grid(n)).n_components for n in (32, 64, 128, 256)} == {2}


def test_polygon_notch():
    m = rasterize(corpus.pacman(), build_grid(64))
    assert m.n_components == 1
    # nothing solid inside the notch, which opens towards +x
    i, j = np.argwhere(m.solid).T
    x, y = (i + 0.5) / 64 - 0.5, (j + 0.5) / 64 - 0.5
    assert not ((x > 0) & (np.abs(y) < x)).any()


def test_polygon_orientation_irrelevant():
    a = Polygon(((0.3, 0.3), (0.7, 0.3), (0.5, 0.7)))
    b = Polygon(((0.5, 0.7), (0.7, 0.3), (0.3, 0.3)))
    g = build_grid(32)
    np.testing.assert_array_equal(a.depth(g), b.depth(g))


def test_nonconvex_polygon_rejected():
    with pytest.raises(GeometryError):
        Polygon(((0.2, 0.2), (0.8, 0.2), (0.5, 0.4), (0.5, 0.8)))


def test_stencil_matches_shapes():
    n = 16
    c = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(c, c, indexing="ij")
    cls = np.zeros((n, n), dtype=np.uint8)
    cls[(X > 3 / 16) & (X < 13 / 16) & (Y > 3 / 16) & (Y < 13 / 16)] = 128
    cls[(X > 5 / 16) & (X < 11 / 16) & (Y > 5 / 16) & (Y < 11 / 16)] = 255
    pixels = cls[:, ::-1].T  # image orientation
    m = rasterize(GeometrySpec(stencil=Stencil(pixels)), build_grid(n))
    ref = rasterize(corpus.reference(), build_grid(n))
    np.testing.assert_array_equal(m.labels, ref.labels)


def test_stencil_rejects_bad_pixels():
    with pytest.raises(GeometryError):
        Stencil(np.full((8, 8), 7))


def test_mirror(disks32):
    np.testing.assert_array_equal(disks32.mirror_x() > 0, disks32.solid)
