"""Formation geometry: array offsets, satellite poses, spiral layouts.

All positions are in meters. The frame of satellite 0 is the global
reference frame and every pose maps a satellite's local frame into it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


class DegenerateLayout(ValueError):
    """Two satellites of a generated layout coincide."""


class InsufficientPoints(ValueError):
    """Fewer than three non-collinear points for a convex hull."""


@dataclass(frozen=True)
class ArrayConfig:
    """Planar direct radiating array carried by every satellite.

    ``boresight_gain`` is linear power (not dBi).
    """

    rows: int
    cols: int
    spacing_x: float
    spacing_y: float
    wavelength: float
    boresight_gain: float
    pattern_exponent: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array needs at least one row and one column")
        for name in ("spacing_x", "spacing_y", "wavelength", "boresight_gain", "pattern_exponent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class SatellitePose:
    translation: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        t = np.array(self.translation, dtype=float).reshape(3)
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-12 or abs(np.linalg.det(r) - 1.0) > 1e-12:
            raise ValueError("rotation is not a proper orthonormal matrix")
        t.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", r)

    @classmethod
    def identity(cls) -> SatellitePose:
        return cls(np.zeros(3), np.eye(3))


@dataclass(frozen=True)
class FormationLayout:
    poses: tuple[SatellitePose, ...]

    def __post_init__(self):
        poses = tuple(self.poses)
        if not poses:
            raise ValueError("layout needs at least one satellite")
        p0 = poses[0]
        if np.any(p0.translation != 0.0) or np.any(p0.rotation != np.eye(3)):
            raise ValueError("satellite 0 must carry the identity pose")
        if len(poses) > 1 and pdist(np.array([p.translation for p in poses])).min() <= 0.0:
            raise ValueError("satellite centers must be distinct")
        object.__setattr__(self, "poses", poses)

    @property
    def n_satellites(self) -> int:
        return len(self.poses)

    @property
    def translations(self) -> np.ndarray:
        return np.array([p.translation for p in self.poses])

    @property
    def rotations(self) -> np.ndarray:
        return np.array([p.rotation for p in self.poses])

    def key(self) -> bytes:
        """Hashable digest of the layout contents, used for caching."""
        return self.translations.tobytes() + self.rotations.tobytes()


@dataclass(frozen=True)
class LayoutMetrics:
    d_sat_min: float
    a_virtual: float
    delta_g_main_sll: float


def element_offsets(cfg: ArrayConfig) -> np.ndarray:
    """Local element offsets, shape (Nr*Nc, 3), row-major (e = i*Nc + j)."""
    x = (np.arange(cfg.rows) - (cfg.rows - 1) / 2.0) * cfg.spacing_x
    y = (np.arange(cfg.cols) - (cfg.cols - 1) / 2.0) * cfg.spacing_y
    xx, yy = np.meshgrid(x, y, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel(), np.zeros(cfg.n_elements)])


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(b: float) -> np.ndarray:
    c, s = math.cos(b), math.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(g: float) -> np.ndarray:
    c, s = math.cos(g), math.sin(g)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_zyx(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rotation ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def lsa_layout(
    n_satellites: int,
    angular_step: float = GOLDEN_ANGLE,
    growth_rate: float = 0.05,
    target_d_min: float = 1.0,
) -> FormationLayout:
    """Logarithmic-spiral formation with an exact minimum spacing.

    Satellite n sits at polar angle ``n * angular_step`` and radius
    ``exp(growth_rate * angle)``. The layout is shifted so satellite 0 is
    at the origin, then scaled so the closest pair is ``target_d_min``
    apart. Attitudes are all identity (nadir pointing).
    """
    if n_satellites < 1:
        raise ValueError("n_satellites must be >= 1")
    if not target_d_min > 0:
        raise ValueError("target_d_min must be positive")
    if growth_rate < 0:
        raise ValueError("growth_rate must be non-negative")

    phi = np.arange(n_satellites) * angular_step
    r = np.exp(growth_rate * phi)
    xy = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    xy -= xy[0]
    if n_satellites > 1:
        d_min = pdist(xy).min()
        if d_min <= 1e-12 * max(1.0, np.abs(xy).max()):
            raise DegenerateLayout("two spiral positions coincide")
        xy *= target_d_min / d_min
    xy[0] = 0.0
    poses = [SatellitePose.identity()]
    poses += [SatellitePose(np.array([x, y, 0.0])) for x, y in xy[1:]]
    return FormationLayout(tuple(poses))


def perturbed_element_positions(
    pose: SatellitePose,
    delta_t: np.ndarray,
    delta_r: np.ndarray,
    offsets: np.ndarray,
) -> np.ndarray:
    """Element positions in the reference frame: ``(t + dt) + (R @ dR) @ d_e``."""
    t = pose.translation + np.asarray(delta_t, dtype=float)
    r = pose.rotation @ np.asarray(delta_r, dtype=float)
    return t + offsets @ r.T


def nominal_element_positions(layout: FormationLayout, cfg: ArrayConfig) -> np.ndarray:
    """All nominal element positions, shape (Ns, Ne, 3)."""
    offsets = element_offsets(cfg)
    return np.stack([p.translation + offsets @ p.rotation.T for p in layout.poses])


def min_pairwise_distance(points: np.ndarray) -> float:
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return math.inf
    return float(pdist(points).min())


def hull_area(points_xy: np.ndarray) -> float:
    """Area of the 2-D convex hull; raises InsufficientPoints when degenerate."""
    pts = np.unique(np.asarray(points_xy, dtype=float)[:, :2], axis=0)
    if len(pts) < 3:
        raise InsufficientPoints(f"only {len(pts)} distinct points")
    try:
        # ConvexHull.volume is the enclosed area in 2-D
        return float(ConvexHull(pts).volume)
    except QhullError as exc:
        raise InsufficientPoints("projected points are collinear") from exc


def aperture_diameter(layout: FormationLayout, cfg: ArrayConfig) -> float:
    """Largest distance between any two nominal elements."""
    pts = nominal_element_positions(layout, cfg).reshape(-1, 3)
    if len(pts) < 2:
        return 0.0
    if len(pts) > 3:
        try:
            pts = pts[ConvexHull(pts[:, :2]).vertices]
        except QhullError:
            pass
    return float(pdist(pts).max())


def layout_metrics(layout: FormationLayout, cfg: ArrayConfig, nominal_pattern) -> LayoutMetrics:
    """Table-style summary of a nominal configuration.

    ``nominal_pattern`` is a :class:`formbeam.analysis.BeamMaps` (or a
    single ``PatternMap``) evaluated at the layout's steering target.
    """
    from formbeam import analysis

    pts = nominal_element_positions(layout, cfg).reshape(-1, 3)
    try:
        area = hull_area(pts)
    except InsufficientPoints:
        area = 0.0
    return LayoutMetrics(
        d_sat_min=min_pairwise_distance(layout.translations),
        a_virtual=area,
        delta_g_main_sll=analysis.isolation_db(nominal_pattern),
    )


def fit_growth_rate(
    n_satellites: int,
    cfg: ArrayConfig,
    target_d_min: float,
    target_area: float,
    angular_step: float = GOLDEN_ANGLE,
    b_max: float = 0.3,
    n_grid: int = 601,
) -> float:
    """Spiral growth rate whose layout hull area is closest to ``target_area``.

    Coarse scan over [0, b_max] followed by a local refinement around the
    best node. The area is not monotone in the growth rate, so the scan
    picks the global best on the grid.
    """

    def miss(b):
        try:
            lay = lsa_layout(n_satellites, angular_step, b, target_d_min)
        except DegenerateLayout:
            return math.inf
        pts = nominal_element_positions(lay, cfg).reshape(-1, 3)
        try:
            return abs(hull_area(pts) - target_area)
        except InsufficientPoints:
            return math.inf

    grid = np.linspace(0.0, b_max, n_grid)
    errs = [miss(b) for b in grid]
    i = int(np.argmin(errs))
    h = grid[1] - grid[0]
    fine = np.linspace(max(0.0, grid[i] - h), grid[i] + h, 41)
    errs = [miss(b) for b in fine]
    return float(fine[int(np.argmin(errs))])
