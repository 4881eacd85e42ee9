"""Computational grid, geometry primitives and inset rasterization.

Cell ``(i, j)`` of a grid with ``n`` cells per side covers the closed square
``[i*h, (i+1)*h] x [j*h, (j+1)*h]`` with ``h = 1/n``.  The first array axis is
``x`` and the second is ``y``.

Rasterization follows the inset rule: a cell becomes Solid only if it lies at
distance at least ``h`` inside a solid shape, and Exterior only if it lies at
distance at least ``h`` outside the domain.  Everything else is Fluid, so the
discrete constraints are weaker than the continuous ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import ndimage

EXTERIOR = -1
FLUID = 0

_SLACK = 1e-12
_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)


class GeometryError(ValueError):
    """Raised when a geometry cannot be represented on the requested grid."""


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise GeometryError(f"resolution too coarse: n={self.n} (need n >= 8)")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def cell_bounds(self):
        """Lower/upper cell edges along one axis, shape ``(n,)`` each."""
        lo = np.arange(self.n) / self.n
        hi = np.arange(1, self.n + 1) / self.n
        return lo, hi

    def cell_centers(self):
        c = (np.arange(self.n) + 0.5) / self.n
        return np.meshgrid(c, c, indexing="ij")


def build_grid(n: int) -> Grid:
    """Return the ``n x n`` grid on the unit square."""
    return Grid(int(n))


# -- shape primitives ------------------------------------------------------
#
# Each primitive answers two questions for every cell square Q of a grid:
#   depth(Q)    -> distance from Q to the complement of the shape (<= 0 if Q
#                  is not contained in the shape)
#   distance(Q) -> distance from Q to the shape (0 if they intersect)


def _cell_boxes(grid: Grid):
    lo, hi = grid.cell_bounds()
    x0, y0 = np.meshgrid(lo, lo, indexing="ij")
    x1, y1 = np.meshgrid(hi, hi, indexing="ij")
    return x0, y0, x1, y1


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle ``[xmin, xmax] x [ymin, ymax]``."""

    min: tuple[float, float]
    max: tuple[float, float]
    negative: bool = False

    def __post_init__(self):
        if not (self.min[0] < self.max[0] and self.min[1] < self.max[1]):
            raise GeometryError(f"degenerate rectangle {self.min} - {self.max}")

    def depth(self, grid):
        x0, y0, x1, y1 = _cell_boxes(grid)
        return np.minimum.reduce([x0 - self.min[0], self.max[0] - x1,
                                  y0 - self.min[1], self.max[1] - y1])

    def distance(self, grid):
        x0, y0, x1, y1 = _cell_boxes(grid)
        dx = np.maximum.reduce([self.min[0] - x1, x0 - self.max[0], np.zeros_like(x0)])
        dy = np.maximum.reduce([self.min[1] - y1, y0 - self.max[1], np.zeros_like(y0)])
        return np.hypot(dx, dy)

    def bbox(self):
        return self.min, self.max

    def boundary_points(self, k=64):
        t = np.linspace(0, 1, k, endpoint=False)
        (a, b), (c, d) = self.min, self.max
        xs = np.concatenate([a + (c - a) * t, np.full(k, c), c - (c - a) * t, np.full(k, a)])
        ys = np.concatenate([np.full(k, b), b + (d - b) * t, np.full(k, d), d - (d - b) * t])
        return np.stack([xs, ys], axis=1)


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float
    negative: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"disk radius must be positive, got {self.radius}")

    def depth(self, grid):
        x0, y0, x1, y1 = _cell_boxes(grid)
        cx, cy = self.center
        fx = np.maximum(np.abs(x0 - cx), np.abs(x1 - cx))
        fy = np.maximum(np.abs(y0 - cy), np.abs(y1 - cy))
        return self.radius - np.hypot(fx, fy)

    def distance(self, grid):
        x0, y0, x1, y1 = _cell_boxes(grid)
        cx, cy = self.center
        dx = np.maximum.reduce([x0 - cx, cx - x1, np.zeros_like(x0)])
        dy = np.maximum.reduce([y0 - cy, cy - y1, np.zeros_like(y0)])
        return np.maximum(np.hypot(dx, dy) - self.radius, 0.0)

    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r), (cx + r, cy + r)

    def boundary_points(self, k=256):
        t = np.linspace(0, 2 * np.pi, k, endpoint=False)
        return np.stack([self.center[0] + self.radius * np.cos(t),
                         self.center[1] + self.radius * np.sin(t)], axis=1)


@dataclass(frozen=True)
class Polygon:
    """Convex polygon given by its vertices (either orientation)."""

    vertices: tuple[tuple[float, float], ...]
    negative: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise GeometryError("polygon needs at least 3 vertices (x, y)")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if not (np.all(cross > 0) or np.all(cross < 0)):
            raise GeometryError("polygon must be strictly convex")
        if cross[0] < 0:
            object.__setattr__(self, "vertices", tuple(map(tuple, v[::-1])))

    def _halfplanes(self):
        v = np.asarray(self.vertices, dtype=float)
        e = np.roll(v, -1, axis=0) - v
        normal = np.stack([e[:, 1], -e[:, 0]], axis=1)
        normal /= np.linalg.norm(normal, axis=1, keepdims=True)
        offset = np.einsum("kd,kd->k", normal, v)
        return normal, offset  # outward normals, inside: normal.x <= offset

    def depth(self, grid):
        x0, y0, x1, y1 = _cell_boxes(grid)
        normal, offset = self._halfplanes()
        out = np.full(x0.shape, np.inf)
        for (nx, ny), c in zip(normal, offset):
            far = np.maximum(nx * x0, nx * x1) + np.maximum(ny * y0, ny * y1)
            out = np.minimum(out, c - far)
        return out

    def distance(self, grid):
        x0, y0, x1, y1 = _cell_boxes(grid)
        v = np.asarray(self.vertices, dtype=float)
        normal, offset = self._halfplanes()
        # separating-axis test over polygon normals and the two box axes
        separated = np.zeros(x0.shape, dtype=bool)
        for (nx, ny), c in zip(normal, offset):
            near = np.minimum(nx * x0, nx * x1) + np.minimum(ny * y0, ny * y1)
            separated |= near > c
        separated |= (x0 > v[:, 0].max()) | (x1 < v[:, 0].min())
        separated |= (y0 > v[:, 1].max()) | (y1 < v[:, 1].min())
        dist = np.full(x0.shape, np.inf)
        corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        a_pts = v
        b_pts = np.roll(v, -1, axis=0)
        for (px, py) in corners:
            for a, b in zip(a_pts, b_pts):
                dist = np.minimum(dist, _point_segment(px, py, a, b))
        for vx, vy in v:
            dx = np.maximum.reduce([x0 - vx, vx - x1, np.zeros_like(x0)])
            dy = np.maximum.reduce([y0 - vy, vy - y1, np.zeros_like(y0)])
            dist = np.minimum(dist, np.hypot(dx, dy))
        return np.where(separated, dist, 0.0)

    def bbox(self):
        v = np.asarray(self.vertices)
        return tuple(v.min(axis=0)), tuple(v.max(axis=0))

    def boundary_points(self, k=64):
        v = np.asarray(self.vertices, dtype=float)
        t = np.linspace(0, 1, k, endpoint=False)[:, None]
        return np.concatenate([a + t * (b - a) for a, b in zip(v, np.roll(v, -1, axis=0))])


def _point_segment(px, py, a, b):
    ab = b - a
    t = ((px - a[0]) * ab[0] + (py - a[1]) * ab[1]) / (ab @ ab)
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(px - (a[0] + t * ab[0]), py - (a[1] + t * ab[1]))


@dataclass(frozen=True)
class Stencil:
    """Class raster on the unit square: 255 solid, 128 fluid, 0 exterior.

    ``pixels[r, c]`` follows image convention (row 0 at the top); it is
    converted to grid orientation on use.  The solid and exterior pixel sets
    are eroded by one source pixel before being sampled at cell centres.
    """

    pixels: np.ndarray = field(compare=False)

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] != px.shape[1]:
            raise GeometryError("stencil must be a square raster")
        bad = ~np.isin(px, (0, 128, 255))
        if bad.any():
            raise GeometryError("stencil pixels must be 0, 128 or 255")

    def _sample(self, grid, value):
        px = np.asarray(self.pixels)
        m = px.shape[0]
        region = (px == value)[::-1, :].T  # to (x, y) indexing
        region = ndimage.binary_erosion(region, structure=_EIGHT, border_value=value == 0)
        cx, cy = grid.cell_centers()
        ix = np.minimum((cx * m).astype(int), m - 1)
        iy = np.minimum((cy * m).astype(int), m - 1)
        return region[ix, iy]

    def solid_mask(self, grid):
        return self._sample(grid, 255)

    def exterior_mask(self, grid):
        return self._sample(grid, 0)


Shape = Union[Rectangle, Disk, Polygon]


def _inside_eroded(shapes: Sequence[Shape], grid: Grid) -> np.ndarray:
    h = grid.h
    pos = [s for s in shapes if not s.negative]
    neg = [s for s in shapes if s.negative]
    inside = np.zeros(grid.shape, dtype=bool)
    for s in pos:
        inside |= s.depth(grid) >= h - _SLACK
    for s in neg:
        inside &= s.distance(grid) >= h - _SLACK
    return inside


def _outside_eroded(shapes: Sequence[Shape], grid: Grid) -> np.ndarray:
    h = grid.h
    pos = [s for s in shapes if not s.negative]
    neg = [s for s in shapes if s.negative]
    outside = np.ones(grid.shape, dtype=bool)
    for s in pos:
        outside &= s.distance(grid) >= h - _SLACK
    for s in neg:
        outside |= s.depth(grid) >= h - _SLACK
    return outside


def _inside_point(shapes, pts):
    """Signed-shape membership for an array of points (used for validation)."""
    def member(s, p):
        if isinstance(s, Rectangle):
            return ((p[:, 0] > s.min[0]) & (p[:, 0] < s.max[0])
                    & (p[:, 1] > s.min[1]) & (p[:, 1] < s.max[1]))
        if isinstance(s, Disk):
            return np.hypot(p[:, 0] - s.center[0], p[:, 1] - s.center[1]) < s.radius
        normal, offset = s._halfplanes()
        return np.all(p @ normal.T < offset, axis=1)

    inside = np.zeros(len(pts), dtype=bool)
    for s in shapes:
        if not s.negative:
            inside |= member(s, pts)
    for s in shapes:
        if s.negative:
            inside &= ~member(s, pts)
    return inside


@dataclass(frozen=True)
class GeometrySpec:
    """Signed shape lists for the domain and the rigid particles.

    Each positive solid shape is one particle; negative solid shapes carve
    notches out of them.  Alternatively ``stencil`` supplies the classes
    directly and the shape lists are ignored.
    """

    domain_shapes: tuple[Shape, ...] = ()
    solid_shapes: tuple[Shape, ...] = ()
    stencil: Stencil | None = None
    name: str = ""

    def validate(self):
        if self.stencil is not None:
            return
        pos_dom = [s for s in self.domain_shapes if not s.negative]
        if not pos_dom:
            raise GeometryError("domain needs at least one positive shape")
        for s in pos_dom:
            (x0, y0), (x1, y1) = s.bbox()
            if not (x0 > 0 and y0 > 0 and x1 < 1 and y1 < 1):
                raise GeometryError("domain must lie strictly inside the unit square")
        for s in self.solid_shapes:
            if s.negative:
                continue
            pts = s.boundary_points()
            if not _inside_point(self.domain_shapes, pts).all():
                raise GeometryError("solid shape is not strictly inside the domain")


@dataclass(frozen=True, eq=False)
class DomainMasks:
    """Per-cell classification of a grid.

    ``labels`` holds ``-1`` for Exterior, ``0`` for Fluid and ``k >= 1`` for
    cells of solid component ``k``.
    """

    grid: Grid
    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.shape != self.grid.shape:
            raise GeometryError(f"labels shape {lab.shape} does not match grid {self.grid.shape}")
        lab = lab.copy()
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @classmethod
    def from_classes(cls, exterior, solid, margin: int = 1) -> "DomainMasks":
        """Build masks from boolean arrays, labelling solid components."""
        exterior = np.asarray(exterior, dtype=bool)
        solid = np.asarray(solid, dtype=bool)
        if exterior.shape != solid.shape or exterior.shape[0] != exterior.shape[1]:
            raise GeometryError("class arrays must be square and of equal shape")
        if (exterior & solid).any():
            raise GeometryError("a cell cannot be both solid and exterior")
        grid = Grid(exterior.shape[0])
        lab, count = ndimage.label(solid, structure=_FOUR)
        labels = np.where(exterior, EXTERIOR, lab)
        masks = cls(grid, labels)
        masks.check(margin)
        return masks

    # -- derived views
    @property
    def n_components(self) -> int:
        return int(self.labels.max(initial=0))

    @property
    def exterior(self):
        return self.labels == EXTERIOR

    @property
    def fluid(self):
        return self.labels == FLUID

    @property
    def solid(self):
        return self.labels > 0

    @property
    def domain(self):
        return self.labels >= 0

    @property
    def component_counts(self) -> np.ndarray:
        return np.bincount(self.labels[self.solid], minlength=self.n_components + 1)[1:]

    @property
    def component_areas(self) -> np.ndarray:
        return self.component_counts * self.grid.h ** 2

    @property
    def solid_area(self) -> float:
        return int(self.solid.sum()) * self.grid.h ** 2

    @property
    def fluid_area(self) -> float:
        return int(self.fluid.sum()) * self.grid.h ** 2

    @property
    def domain_area(self) -> float:
        return int(self.domain.sum()) * self.grid.h ** 2

    def check(self, margin: int = 1):
        """Validate the structural invariants; raise :class:`GeometryError`."""
        lab = self.labels
        if margin > 0:
            ring = np.ones(lab.shape, dtype=bool)
            ring[margin:-margin, margin:-margin] = False
            if (lab[ring] != EXTERIOR).any():
                raise GeometryError(f"domain reaches the outer {margin}-cell ring of the grid")
        if self.n_components < 1:
            raise GeometryError("component vanishes at this resolution: no solid cells")
        near_ext = ndimage.binary_dilation(self.exterior, structure=_EIGHT)
        if (near_ext & self.solid).any():
            raise GeometryError("particle touches boundary after rasterization")
        for k in range(1, self.n_components + 1):
            grown = ndimage.binary_dilation(lab == k, structure=_EIGHT)
            others = (lab > 0) & (lab != k)
            if (grown & others).any():
                raise GeometryError(f"solid component {k} touches another component")

    def mirror_x(self) -> np.ndarray:
        return self.labels[::-1, :]


def rasterize(spec: GeometrySpec, grid: Grid, margin: int = 1) -> DomainMasks:
    """Classify cells with the inset rule and label solid components.

    Raises
    ------
    GeometryError
        If the spec is invalid, a particle has no cell at this resolution or
        a particle touches the exterior after rasterization.
    """
    spec.validate()
    if spec.stencil is not None:
        solid = spec.stencil.solid_mask(grid)
        exterior = spec.stencil.exterior_mask(grid)
        return DomainMasks.from_classes(exterior, solid, margin=margin)

    negatives = [s for s in spec.solid_shapes if s.negative]
    particles = [s for s in spec.solid_shapes if not s.negative]
    if not particles:
        raise GeometryError("component vanishes at this resolution: empty solid list")
    solid = np.zeros(grid.shape, dtype=bool)
    for k, s in enumerate(particles):
        cells = _inside_eroded([s, *negatives], grid)
        if not cells.any():
            raise GeometryError(f"component vanishes at this resolution: solid shape {k} at n={grid.n}")
        solid |= cells
    exterior = _outside_eroded(spec.domain_shapes, grid)
    return DomainMasks.from_classes(exterior, solid, margin=margin)


def label_components(masks: DomainMasks) -> list[tuple[int, int, float]]:
    """``(component id, cell count, area)`` for every solid component."""
    h2 = masks.grid.h ** 2
    return [(k + 1, int(c), int(c) * h2) for k, c in enumerate(masks.component_counts)]
