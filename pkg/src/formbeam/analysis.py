"""Pattern KPIs: main-lobe gain, half-power area, sidelobe level.

KPIs compare a perturbed or calibrated pattern against the nominal one.
Main-lobe quantities come from the fine window around the steering
direction, the sidelobe level from the whole visible region outside a
main-lobe disk fixed by the nominal pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from formbeam.grid import BeamMaps, PatternMap

HALF_POWER_DB = 3.0
MASK_RADIUS_FACTOR = 2.5
MIN_HPBW_NODES = 8


class WindowMiss(ValueError):
    """The steering direction is not inside the map."""


class ResolutionTooCoarse(ValueError):
    """The -3 dB region is under-resolved or not enclosed by the window."""


class EmptyRegion(ValueError):
    """No valid node lies outside the main-lobe mask."""


class GridMismatch(ValueError):
    pass


class EmptyCurve(ValueError):
    pass


@dataclass(frozen=True)
class KpiThresholds:
    main_gain_delta_db: float = 1.0
    hpbw_area_delta_frac: float = 0.02
    sll_delta_db: float = 1.0
    requirement_prob: float = 0.90

    def __post_init__(self):
        if min(self.main_gain_delta_db, self.hpbw_area_delta_frac, self.sll_delta_db) <= 0:
            raise ValueError("thresholds must be positive")
        if not 0 < self.requirement_prob < 1:
            raise ValueError("requirement_prob must lie in (0, 1)")


@dataclass(frozen=True)
class KpiReport:
    delta_g_main: float
    delta_a_hpbw: float
    delta_g_sll: float
    pass_g: bool
    pass_a: bool
    pass_sll: bool

    @property
    def flags(self) -> dict[str, bool]:
        return {"g_main": self.pass_g, "a_hpbw": self.pass_a, "sll": self.pass_sll}


def main_lobe_gain(pmap: PatternMap) -> float:
    """Peak power (dB) in the main-lobe window around the steering direction."""
    u0, v0 = pmap.target.uv
    if not pmap.grid.contains(u0, v0):
        raise WindowMiss(f"steering direction ({u0:.4g}, {v0:.4g}) lies outside the map")
    return float(np.nanmax(pmap.power_db))


def _half_power_region(pmap: PatternMap) -> np.ndarray:
    p = np.where(pmap.valid, pmap.power, -np.inf)
    peak = np.unravel_index(np.argmax(p), p.shape)
    above = p >= p[peak] * 10.0 ** (-HALF_POWER_DB / 10.0)
    # default structuring element is 4-connected
    labels, _ = ndimage.label(above)
    return labels == labels[peak]


def hpbw_area(pmap: PatternMap) -> float:
    """uv area of the 4-connected -3 dB region around the peak."""
    region = _half_power_region(pmap)
    n = int(region.sum())
    if region[0, :].any() or region[-1, :].any() or region[:, 0].any() or region[:, -1].any():
        raise ResolutionTooCoarse("half-power region touches the window boundary")
    if n < MIN_HPBW_NODES:
        raise ResolutionTooCoarse(f"half-power region covers only {n} nodes")
    return n * pmap.grid.cell_area


def beam_radius_from_area(area: float) -> float:
    return math.sqrt(area / math.pi)


def main_lobe_mask(pmap: PatternMap, radius: float) -> np.ndarray:
    """Disk of uv radius ``radius`` centred on the steering direction."""
    u0, v0 = pmap.target.uv
    uu, vv = pmap.grid.mesh()
    return (uu - u0) ** 2 + (vv - v0) ** 2 <= radius * radius


def max_sll(pmap: PatternMap, exclusion: np.ndarray) -> float:
    """Highest power (dB) among valid nodes outside ``exclusion``."""
    outside = pmap.valid & ~np.asarray(exclusion, dtype=bool)
    if not outside.any():
        raise EmptyRegion("main-lobe mask covers every valid node")
    return float(10.0 * np.log10(pmap.power[outside].max()))


def as_beam_maps(maps, mask_radius: float | None = None) -> BeamMaps:
    """Promote a single map to a BeamMaps bundle that uses it for every KPI."""
    if isinstance(maps, BeamMaps):
        return maps
    if mask_radius is None:
        mask_radius = MASK_RADIUS_FACTOR * beam_radius_from_area(hpbw_area(maps))
    return BeamMaps(maps, maps, mask_radius)


def isolation_db(maps) -> float:
    """Main-lobe peak minus maximum sidelobe level, in dB."""
    bm = as_beam_maps(maps)
    return main_lobe_gain(bm.fine) - max_sll(bm.full, main_lobe_mask(bm.full, bm.mask_radius))


def _same_grid(a: PatternMap, b: PatternMap):
    if a.grid != b.grid or a.target != b.target:
        raise GridMismatch("maps were sampled on different grids")


def kpi_compare(nominal, other, thr: KpiThresholds = KpiThresholds()) -> KpiReport:
    """Compare ``other`` against ``nominal``.

    Both arguments are BeamMaps or single PatternMaps. The main-lobe mask
    is always the nominal one. If the half-power region of ``other``
    cannot be enclosed, its area change counts as infinite.
    """
    nom = as_beam_maps(nominal)
    oth = other if isinstance(other, BeamMaps) else BeamMaps(other, other, nom.mask_radius)
    _same_grid(nom.fine, oth.fine)
    _same_grid(nom.full, oth.full)

    dg = abs(main_lobe_gain(nom.fine) - main_lobe_gain(oth.fine))
    a_nom = hpbw_area(nom.fine)
    try:
        da = abs(hpbw_area(oth.fine) - a_nom) / a_nom
    except ResolutionTooCoarse:
        da = math.inf
    mask = main_lobe_mask(nom.full, nom.mask_radius)
    dsll = max_sll(oth.full, mask) - max_sll(nom.full, mask)
    return KpiReport(
        delta_g_main=dg,
        delta_a_hpbw=da,
        delta_g_sll=dsll,
        pass_g=dg < thr.main_gain_delta_db,
        pass_a=da < thr.hpbw_area_delta_frac,
        pass_sll=dsll < thr.sll_delta_db,
    )


def requirement_threshold(curve: Sequence[tuple[float, float]], target: float = 0.9) -> float:
    """Largest sigma up to which the probability stays at or above ``target``.

    Linear interpolation locates the first crossing; if the curve never
    drops below ``target`` the last sigma is returned.
    """
    pts = [(float(s), float(p)) for s, p in curve]
    if not pts:
        raise EmptyCurve("requirement curve has no points")
    if pts[0][1] < target:
        return pts[0][0]
    for (s0, p0), (s1, p1) in zip(pts, pts[1:]):
        if p1 < target:
            return s0 + (p0 - target) / (p0 - p1) * (s1 - s0)
    return pts[-1][0]
