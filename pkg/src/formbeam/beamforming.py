"""Steering vectors, MRT precoding and the composite power pattern.

Directions use the spherical convention k_hat = (sin t cos p, sin t sin p,
cos t) with t measured from the nadir/boresight +z axis. Element gains
follow a cos^p law in the angle between a satellite's rotated boresight
and the observation direction; the back hemisphere radiates nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from formbeam import kernels
from formbeam.geometry import ArrayConfig, FormationLayout, element_offsets
from formbeam.grid import BeamTarget, GridSpec, PatternMap
from formbeam.perturbation import PerturbationSample

COS_CLAMP_TOL = 1e-9


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RealizationGeometry:
    """Effective poses (t', R') of every satellite for one realization."""

    cfg: ArrayConfig
    translations: np.ndarray
    rotations: np.ndarray

    @property
    def n_satellites(self) -> int:
        return len(self.translations)

    @property
    def positions(self) -> np.ndarray:
        """Element positions, shape (Ns, Ne, 3)."""
        d = element_offsets(self.cfg)
        return self.translations[:, None, :] + np.einsum("nij,ej->nei", self.rotations, d)

    @property
    def z_axes(self) -> np.ndarray:
        """Boresight of every satellite, R' @ (0, 0, 1)."""
        return self.rotations[:, :, 2]


@dataclass(frozen=True)
class PrecodingWeights:
    entries: np.ndarray
    provenance: Literal["nominal", "calibrated"] = "nominal"


def realization_geometry(
    layout: FormationLayout,
    cfg: ArrayConfig,
    samples: Sequence[PerturbationSample] | None = None,
) -> RealizationGeometry:
    """Compose t' = t + dt and R' = R @ dR for every satellite."""
    t = layout.translations.copy()
    r = layout.rotations.copy()
    if samples is not None:
        if len(samples) != layout.n_satellites:
            raise DimensionMismatch("one perturbation sample per satellite is required")
        for n, s in enumerate(samples):
            t[n] = t[n] + s.delta_t
            r[n] = r[n] @ s.delta_r
    return RealizationGeometry(cfg, t, r)


def unit_direction(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def wave_vector(theta, phi, wavelength: float) -> np.ndarray:
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    return (2 * math.pi / wavelength) * unit_direction(theta, phi)


def uv_direction(u, v) -> np.ndarray:
    """Unit vectors for direction cosines inside the visible disk."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.sqrt(np.clip(1.0 - u * u - v * v, 0.0, None))
    return np.stack([u, v, w], axis=-1)


def steering_vector(geom: RealizationGeometry, k) -> np.ndarray:
    """exp(j k . p) for every element, satellite-major, shape (Ns*Ne,)."""
    p = geom.positions.reshape(-1, 3)
    return np.exp(1j * (p @ np.asarray(k, dtype=float)))


def mrt_weights(a, provenance: Literal["nominal", "calibrated"] = "nominal") -> PrecodingWeights:
    """Conjugate-matched weights, unit norm: ``conj(a) / ||a||``."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    if a.size == 0:
        raise DimensionMismatch("empty steering vector")
    return PrecodingWeights(np.conj(a) / np.linalg.norm(a), provenance)


def target_weights(geom: RealizationGeometry, target: BeamTarget,
                   provenance: Literal["nominal", "calibrated"] = "nominal") -> PrecodingWeights:
    k0 = wave_vector(target.theta0, target.phi0, geom.cfg.wavelength)
    return mrt_weights(steering_vector(geom, k0), provenance)


def pattern_exponent_for_hpbw(hpbw: float) -> float:
    """Exponent p such that cos^(2p)(hpbw / 2) = 1/2."""
    if not 0 < hpbw < math.pi:
        raise ValueError("hpbw must lie in (0, pi)")
    return math.log(0.5) / (2.0 * math.log(math.cos(hpbw / 2.0)))


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _gain_from_cos(cos_theta, cfg: ArrayConfig) -> np.ndarray:
    c = np.asarray(cos_theta, dtype=float)
    c = np.where(c > 1.0, 1.0, c)
    return np.where(c >= 0.0, math.sqrt(cfg.boresight_gain) * np.abs(c) ** cfg.pattern_exponent, 0.0)


def element_gain(theta_eff, cfg: ArrayConfig):
    """sqrt(G0) cos^p(theta) on [0, pi/2], zero beyond."""
    theta = np.asarray(theta_eff, dtype=float)
    g = np.where(theta <= math.pi / 2, _gain_from_cos(np.cos(np.minimum(theta, math.pi / 2)), cfg), 0.0)
    return float(g) if g.ndim == 0 else g


def effective_polar_angle(z_axis, k_hat) -> float:
    """Angle between a satellite boresight and the observation direction."""
    z = np.asarray(z_axis, dtype=float)
    k = np.asarray(k_hat, dtype=float)
    if abs(np.linalg.norm(z) - 1) > COS_CLAMP_TOL or abs(np.linalg.norm(k) - 1) > COS_CLAMP_TOL:
        raise ValueError("inputs must be unit vectors")
    return math.acos(min(1.0, max(-1.0, float(z @ k))))


def satellite_gains(geom: RealizationGeometry, k_hat) -> np.ndarray:
    """Per-satellite amplitude gain g_n for each direction, shape (M, Ns)."""
    k_hat = np.atleast_2d(np.asarray(k_hat, dtype=float))
    cos_t = np.clip(k_hat @ geom.z_axes.T, -1.0, 1.0)
    return _gain_from_cos(cos_t, geom.cfg)


def composite_power(weights: PrecodingWeights, a, gains):
    """Array-factor power times the mean squared satellite gain.

    The weights hold the conjugated target response, so the radiated
    array factor is ``sum_n w[n] a[n]``; at the target this equals the
    norm of the steering vector.

    ``a`` is (Ns*Ne,) or (M, Ns*Ne); ``gains`` is (Ns,) or (M, Ns).
    """
    w = np.asarray(weights.entries if isinstance(weights, PrecodingWeights) else weights)
    a = np.asarray(a)
    g = np.asarray(gains, dtype=float)
    if a.shape[-1] != w.shape[0]:
        raise DimensionMismatch(f"steering vector length {a.shape[-1]} != weight length {w.shape[0]}")
    if g.ndim == 0 or (a.ndim == 2 and g.ndim == 2 and g.shape[0] != a.shape[0]):
        raise DimensionMismatch("gains must be given per satellite (and per direction)")
    if w.shape[0] % g.shape[-1]:
        raise DimensionMismatch("weight length is not a multiple of the satellite count")
    af = a @ w
    return np.abs(af) ** 2 * np.mean(g * g, axis=-1)


def array_factor_power(geom: RealizationGeometry, weights: PrecodingWeights, k_hat,
                       method: Literal["grid", "flat"] = "grid") -> np.ndarray:
    """Matched array-factor power ``|sum w a(k)|^2`` for unit directions (M, 3)."""
    cfg = geom.cfg
    w = np.asarray(weights.entries if isinstance(weights, PrecodingWeights) else weights)
    if w.shape[0] != geom.n_satellites * cfg.n_elements:
        raise DimensionMismatch("weight length does not match geometry")
    k = (2 * math.pi / cfg.wavelength) * np.atleast_2d(np.asarray(k_hat, dtype=float))
    coef = w
    if method == "flat":
        return kernels.array_factor_power(k, geom.positions.reshape(-1, 3), coef)
    af = kernels.grid_array_factor(
        k, geom.translations, geom.rotations,
        -(cfg.rows - 1) / 2 * cfg.spacing_x, cfg.spacing_x,
        -(cfg.cols - 1) / 2 * cfg.spacing_y, cfg.spacing_y,
        coef.reshape(geom.n_satellites, cfg.rows, cfg.cols),
    )
    return af.real * af.real + af.imag * af.imag


def pattern_power(geom: RealizationGeometry, weights: PrecodingWeights, k_hat,
                  method: Literal["grid", "flat"] = "grid") -> np.ndarray:
    """Composite power at unit directions ``k_hat`` (M, 3)."""
    k_hat = np.atleast_2d(np.asarray(k_hat, dtype=float))
    g = satellite_gains(geom, k_hat)
    return array_factor_power(geom, weights, k_hat, method) * np.mean(g * g, axis=1)


def evaluate_geometry(geom: RealizationGeometry, weights: PrecodingWeights, grid: GridSpec,
                      target: BeamTarget, seed: int | None = None,
                      method: Literal["grid", "flat"] = "grid") -> PatternMap:
    uu, vv = grid.mesh()
    inside = uu * uu + vv * vv <= 1.0
    power = np.full(uu.shape, np.nan)
    if inside.any():
        power[inside] = pattern_power(geom, weights, uv_direction(uu[inside], vv[inside]), method)
    return PatternMap(grid, power, target, seed)


def evaluate_pattern(layout: FormationLayout, cfg: ArrayConfig, weights: PrecodingWeights,
                     grid: GridSpec, samples: Sequence[PerturbationSample] | None = None,
                     target: BeamTarget = BeamTarget(), seed: int | None = None) -> PatternMap:
    """Sample the composite pattern of a (possibly perturbed) formation on a uv grid.

    Nodes outside the visible disk u^2 + v^2 <= 1 hold NaN.
    """
    return evaluate_geometry(realization_geometry(layout, cfg, samples), weights, grid, target, seed)


def nominal_beam_radius(geom: RealizationGeometry, weights: PrecodingWeights, target: BeamTarget,
                        n_cuts: int = 8) -> float:
    """Mean uv distance from the steering direction to the half-power point.

    Walks outward along ``n_cuts`` radial cuts and bisects the first
    crossing of half the on-target power.
    """
    u0, v0 = target.uv
    p0 = pattern_power(geom, weights, uv_direction(u0, v0))[0]
    extent = np.ptp(geom.positions.reshape(-1, 3)[:, :2], axis=0).max()
    step = 0.05 * geom.cfg.wavelength / max(extent, geom.cfg.wavelength)
    radii = []
    for az in np.arange(n_cuts) * (2 * math.pi / n_cuts):
        du, dv = math.cos(az), math.sin(az)

        def below(r):
            u, v = u0 + r * du, v0 + r * dv
            if u * u + v * v > 1.0:
                return True
            return pattern_power(geom, weights, uv_direction(u, v))[0] < 0.5 * p0

        lo, hi = 0.0, step
        while not below(hi):
            lo, hi = hi, hi + step
            if hi > 2.0:
                raise RuntimeError("no half-power crossing found")
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if below(mid) else (mid, hi)
        radii.append(0.5 * (lo + hi))
    return float(np.mean(radii))
