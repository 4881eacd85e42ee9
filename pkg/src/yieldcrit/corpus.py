"""Named geometries used by the demos and the test-suite."""
import math

from .grid import Disk, GeometrySpec, Polygon, Rectangle


def square(lo, hi, negative=False):
    return Rectangle((lo, lo), (hi, hi), negative)


def reference():
    """Square particle of side 3/8 centred in a square domain of side 5/8.

    At ``n = 16`` this rasterizes to a 4x4 solid block inside a 12x12 block
    of non-exterior cells.
    """
    return GeometrySpec((square(3 / 16, 13 / 16),), (square(5 / 16, 11 / 16),), name="reference")


def centered_squares():
    """Particle of side 1/4 in a domain of side 3/4, both centred."""
    return GeometrySpec((square(0.125, 0.875),), (square(0.375, 0.625),), name="centered_squares")


def disk_in_square():
    return GeometrySpec((square(0.1, 0.9),), (Disk((0.5, 0.5), 0.2),), name="disk_in_square")


def offset_rectangle():
    """Elongated particle pushed towards one wall."""
    return GeometrySpec((square(0.1, 0.9),), (Rectangle((0.25, 0.3), (0.45, 0.75)),),
                        name="offset_rectangle")


def square_in_disk():
    return GeometrySpec((Disk((0.5, 0.5), 0.42),), (square(0.34, 0.66),), name="square_in_disk")


def two_disks(gap=0.2, radius=0.14):
    """Two identical disks placed symmetrically about ``x = 1/2``."""
    c = 0.5 - gap / 2 - radius
    return GeometrySpec((square(0.1, 0.9),),
                        (Disk((c, 0.5), radius), Disk((1 - c, 0.5), radius)), name="two_disks")


def disk_and_bar():
    """Two unequal particles: a disk and a thin bar."""
    return GeometrySpec((square(0.1, 0.9),),
                        (Disk((0.35, 0.6), 0.15), Rectangle((0.55, 0.2), (0.82, 0.38))),
                        name="disk_and_bar")


def three_blocks():
    return GeometrySpec((square(0.1, 0.9),),
                        (square(0.25, 0.4), Rectangle((0.55, 0.25), (0.75, 0.4)),
                         Rectangle((0.35, 0.6), (0.65, 0.72))), name="three_blocks")


def pacman(radius=0.2, notch_deg=90.0, center=(0.5, 0.5), domain=(1 / 32, 31 / 32)):
    """Disk with a wedge notch opening towards ``+x``.

    The notch is a triangle with apex at the disk centre and half-angle
    ``notch_deg / 2``, long enough to clear the rim.
    """
    cx, cy = center
    half = math.radians(notch_deg) / 2
    reach = 2 * radius / math.cos(half)
    notch = Polygon(((cx, cy),
                     (cx + reach * math.cos(-half), cy + reach * math.sin(-half)),
                     (cx + reach * math.cos(half), cy + reach * math.sin(half))), negative=True)
    return GeometrySpec((square(*domain),), (Disk(center, radius), notch), name="pacman")


def small_pacman():
    """Pacman shrunk into a domain of side 7/8 so it rasterizes at ``n = 32``."""
    return pacman(domain=(1 / 16, 15 / 16))


#: geometries the slow oracle resolves at n <= 32: (name, factory, mode)
SMALL_CORPUS = (
    ("reference", reference, "single"),
    ("disk_in_square", disk_in_square, "single"),
    ("offset_rectangle", offset_rectangle, "single"),
    ("square_in_disk", square_in_disk, "single"),
    ("two_disks", two_disks, "multi"),
    ("disk_and_bar", disk_and_bar, "multi"),
    ("three_blocks", three_blocks, "multi"),
)

#: everything, valid from n = 32 upwards
CORPUS = SMALL_CORPUS + (("pacman", small_pacman, "single"),)


def by_name(name):
    for key, factory, _ in CORPUS:
        if key == name:
            return factory()
    raise KeyError(f"unknown corpus geometry: {name}")
