"""uv sampling grids and sampled pattern maps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BeamTarget:
    """Steering direction; ``theta0`` from boresight (+z), ``phi0`` from +x."""

    theta0: float = 0.0
    phi0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta0 < math.pi / 2:
            raise ValueError("theta0 must lie in [0, pi/2)")
        object.__setattr__(self, "phi0", float(self.phi0) % (2 * math.pi))

    @classmethod
    def from_degrees(cls, theta0: float, phi0: float) -> BeamTarget:
        return cls(math.radians(theta0), math.radians(phi0))

    @property
    def uv(self) -> tuple[float, float]:
        s = math.sin(self.theta0)
        return s * math.cos(self.phi0), s * math.sin(self.phi0)


@dataclass(frozen=True)
class GridSpec:
    u_min: float
    u_max: float
    n_u: int
    v_min: float
    v_max: float
    n_v: int

    def __post_init__(self):
        if self.n_u < 1 or self.n_v < 1:
            raise ValueError("grid needs at least one node per axis")
        if self.u_max < self.u_min or self.v_max < self.v_min:
            raise ValueError("grid bounds are reversed")

    @classmethod
    def centered(cls, u0: float, v0: float, half_width: float, step: float) -> GridSpec:
        """Square window with a node exactly at (u0, v0)."""
        n_half = max(1, int(math.ceil(half_width / step)))
        return cls(u0 - n_half * step, u0 + n_half * step, 2 * n_half + 1,
                   v0 - n_half * step, v0 + n_half * step, 2 * n_half + 1)

    @classmethod
    def visible(cls, step: float) -> GridSpec:
        """Grid covering the unit disk with a node at the origin."""
        return cls.centered(0.0, 0.0, 1.0, step)

    @property
    def u(self) -> np.ndarray:
        return np.linspace(self.u_min, self.u_max, self.n_u)

    @property
    def v(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.n_v)

    @property
    def du(self) -> float:
        return (self.u_max - self.u_min) / (self.n_u - 1) if self.n_u > 1 else 0.0

    @property
    def dv(self) -> float:
        return (self.v_max - self.v_min) / (self.n_v - 1) if self.n_v > 1 else 0.0

    @property
    def cell_area(self) -> float:
        return self.du * self.dv

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(U, V) arrays of shape (n_v, n_u); rows follow v."""
        return np.meshgrid(self.u, self.v)

    def contains(self, u: float, v: float) -> bool:
        return self.u_min <= u <= self.u_max and self.v_min <= v <= self.v_max

    def nearest_index(self, u: float, v: float) -> tuple[int, int]:
        """(row, col) of the node closest to (u, v)."""
        col = int(round((u - self.u_min) / self.du)) if self.n_u > 1 else 0
        row = int(round((v - self.v_min) / self.dv)) if self.n_v > 1 else 0
        return min(max(row, 0), self.n_v - 1), min(max(col, 0), self.n_u - 1)


def uv_to_angles(u, v):
    """Direction cosines to (theta, phi); only meaningful for u^2 + v^2 <= 1."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.sqrt(u * u + v * v)
    return np.arcsin(np.clip(s, 0.0, 1.0)), np.arctan2(v, u) % (2 * np.pi)


@dataclass(frozen=True)
class PatternMap:
    """Composite power sampled on a uv grid.

    ``power`` is linear, shape (n_v, n_u), NaN outside the visible disk.
    """

    grid: GridSpec
    power: np.ndarray
    target: BeamTarget
    seed: int | None = None

    def __post_init__(self):
        p = np.asarray(self.power, dtype=float)
        if p.shape != (self.grid.n_v, self.grid.n_u):
            raise ValueError(f"power shape {p.shape} does not match grid")
        p.flags.writeable = False
        object.__setattr__(self, "power", p)

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.power)

    @property
    def power_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.power)

    def scaled(self, factor: float) -> PatternMap:
        return PatternMap(self.grid, self.power * factor, self.target, self.seed)


@dataclass(frozen=True)
class BeamMaps:
    """Fine main-lobe window plus a whole-visible-region map of one pattern.

    ``mask_radius`` is the uv radius of the main-lobe exclusion disk used
    for sidelobe search; it always comes from the nominal pattern.
    """

    fine: PatternMap
    full: PatternMap
    mask_radius: float
