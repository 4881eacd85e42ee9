"""Euclidean projections onto the dual ball and the primal constraint sets."""
import enum

import numpy as np


class ConstraintMode(enum.Enum):
    """How the particle cells are constrained.

    SINGLE pins every solid cell to 1.  MULTI lets each particle move with
    its own constant velocity, normalised so the area-weighted mean over the
    solid is 1.
    """

    SINGLE = "single"
    MULTI = "multi"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown constraint mode {value!r} (use 'single' or 'multi')") from None


def project_dual(p, radius=1.0):
    """Project every 4-vector onto ``{x >= 0, |x|_2 <= radius}``.

    Clamping then rescaling is the exact projection for a centred ball
    intersected with the positive orthant.
    """
    p = np.maximum(np.asarray(p, dtype=float), 0.0)
    norm = np.sqrt(np.einsum("kij,kij->ij", p, p))
    scale = radius / np.maximum(norm, radius)
    return p * scale


def component_means(v, masks):
    """Mean of ``v`` over each solid component, shape ``(N,)``."""
    lab = masks.labels
    solid = lab > 0
    vals = np.asarray(v, dtype=float)[solid]
    idx = lab[solid]
    k = masks.n_components + 1
    means = np.bincount(idx, weights=vals, minlength=k)[1:] / masks.component_counts
    # already-constant components keep their value bit for bit
    lo = np.full(k, np.inf)
    hi = np.full(k, -np.inf)
    np.minimum.at(lo, idx, vals)
    np.maximum.at(hi, idx, vals)
    flat = lo[1:] == hi[1:]
    return np.where(flat, lo[1:], means)


def project_primal(v, masks, mode, normalize=True):
    """Project ``v`` onto the constraint set of ``mode``.

    Exterior cells are set to zero and fluid cells are left alone.  In SINGLE
    mode solid cells become 1.  In MULTI mode each component becomes its mean
    shifted by a common ``lam`` that restores the weighted-mean normalisation;
    with ``normalize=False`` the shift is omitted (rigid particles only).

    Raises
    ------
    ValueError
        If there are no solid cells.
    """
    mode = ConstraintMode.parse(mode)
    counts = masks.component_counts
    if counts.sum() == 0:
        raise ValueError("normalization infeasible: no solid cells")
    out = np.array(v, dtype=float, copy=True)
    out[masks.exterior] = 0.0
    solid = masks.solid
    if mode is ConstraintMode.SINGLE:
        out[solid] = 1.0
        return out
    gamma = component_means(out, masks)
    if normalize:
        lam = (counts.sum() - counts @ gamma) / counts.sum()
        if abs(lam) > 8 * np.finfo(float).eps * max(1.0, np.abs(gamma).max()):
            gamma = gamma + lam
    out[solid] = gamma[masks.labels[solid] - 1]
    return out


def component_velocities(v, masks):
    """Velocity of each particle (the constant value on each component)."""
    return component_means(v, masks)
