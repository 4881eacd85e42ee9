"""Post-processing of limit profiles: histograms, three-value quantisation
and level-set diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .calculus import discrete_tv
from .grid import DomainMasks

#: fraction of max|v| below which a cell counts as numerically zero
ZERO_THRESHOLD = 0.05


class QuantizationError(ValueError):
    pass


def histogram(v, bins: int = 64):
    """Uniform-bin histogram over ``[min v, max v]`` as ``(centers, counts)``."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    v = np.asarray(v, dtype=float).ravel()
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(v, bins=bins, range=(lo, hi))
    return 0.5 * (edges[:-1] + edges[1:]), counts


@dataclass
class QuantizedSolution:
    beta_plus: float
    beta_minus: float
    positive_set: np.ndarray
    negative_set: np.ndarray
    quantized_field: np.ndarray
    tv_original: float
    tv_quantized: float
    mean_plus: float = np.nan
    mean_minus: float = np.nan

    @property
    def tv_ratio(self) -> float:
        return self.tv_quantized / self.tv_original


def split_sets(v, threshold: float = ZERO_THRESHOLD):
    """Cells above / below ``+-threshold * max|v|``."""
    v = np.asarray(v, dtype=float)
    t = threshold * float(np.abs(v).max())
    return v > t, v < -t


def solve_two_values(pos, neg, masks: DomainMasks):
    """Values on ``pos`` / ``neg`` meeting the mean-zero and solid-mean rows.

    Solves ``b+ |E+| + b- |E-| = 0`` and
    ``b+ |E+ & solid| + b- |E- & solid| = |solid|`` in cell counts (the
    common ``h^2`` cancels).
    """
    solid = masks.solid
    a = np.array([[pos.sum(), neg.sum()],
                  [(pos & solid).sum(), (neg & solid).sum()]], dtype=float)
    rhs = np.array([0.0, float(solid.sum())])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if det == 0.0:
        raise QuantizationError("quantization infeasible: level sets cannot satisfy both constraints")
    return ((rhs[0] * a[1, 1] - a[0, 1] * rhs[1]) / det,
            (a[0, 0] * rhs[1] - rhs[0] * a[1, 0]) / det)


def quantize_three(v, masks: DomainMasks, threshold: float = ZERO_THRESHOLD) -> QuantizedSolution:
    """Replace ``v`` by a field with values ``{beta_minus, 0, beta_plus}``.

    The two signed level sets come from thresholding; their values are the
    unique solution of the two constraint rows, so the quantised field stays
    feasible.
    """
    v = np.asarray(v, dtype=float)
    pos, neg = split_sets(v, threshold)
    bp, bm = solve_two_values(pos, neg, masks)
    q = np.zeros_like(v)
    q[pos] = bp
    q[neg] = bm
    h = masks.grid.h
    return QuantizedSolution(
        beta_plus=float(bp), beta_minus=float(bm),
        positive_set=pos, negative_set=neg, quantized_field=q,
        tv_original=discrete_tv(v, h), tv_quantized=discrete_tv(q, h),
        mean_plus=float(v[pos].mean()) if pos.any() else np.nan,
        mean_minus=float(v[neg].mean()) if neg.any() else np.nan,
    )


def constraint_residuals(v, masks: DomainMasks):
    """Relative residuals of the mean-zero and solid-normalisation rows."""
    v = np.asarray(v, dtype=float)
    scale = float(np.abs(v).sum())
    mean_res = abs(float(v.sum())) / scale
    solid = masks.solid
    norm_res = abs(float(v[solid].sum()) / solid.sum() - 1.0)
    return mean_res, norm_res


@dataclass(frozen=True)
class LevelSetComponent:
    label: int
    cells: int
    perimeter: float


def level_set_components(cells, h: float | None = None) -> list[LevelSetComponent]:
    """4-connected components of a boolean cell set with their perimeters."""
    cells = np.asarray(cells, dtype=bool)
    if h is None:
        h = 1.0 / cells.shape[0]
    lab, count = ndimage.label(cells, structure=ndimage.generate_binary_structure(2, 1))
    out = []
    for k in range(1, count + 1):
        ind = lab == k
        out.append(LevelSetComponent(k, int(ind.sum()), discrete_tv(ind.astype(float), h)))
    return out


def particles_in_set(cells, masks: DomainMasks) -> list[int]:
    """Ids of the particles whose cells lie in ``cells``."""
    lab = masks.labels
    return sorted(int(k) for k in np.unique(lab[cells & (lab > 0)]))
