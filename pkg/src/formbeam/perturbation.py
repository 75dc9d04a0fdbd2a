"""Truncated-normal pose perturbations with reproducible random streams.

Every (sweep point, realization, satellite) triple owns its own generator
derived from one master seed, so results never depend on which worker
drew them or in what order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from formbeam.geometry import euler_zyx

MAX_REJECTIONS = 10_000


class RejectionStall(RuntimeError):
    """Rejection sampling failed to accept a draw; the bound is far below sigma."""


@dataclass(frozen=True)
class PerturbationSpec:
    sigma_t: tuple[float, float, float] = (0.0, 0.0, 0.0)
    t_max: float = 1.2
    sigma_r: tuple[float, float, float] = (0.0, 0.0, 0.0)
    eps_max: float = math.pi / 4

    def __post_init__(self):
        st = tuple(float(s) for s in self.sigma_t)
        sr = tuple(float(s) for s in self.sigma_r)
        if len(st) != 3 or len(sr) != 3:
            raise ValueError("sigma_t and sigma_r need three components")
        if min(st + sr) < 0:
            raise ValueError("standard deviations must be non-negative")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not 0 < self.eps_max <= math.pi / 4 + 1e-15:
            raise ValueError("eps_max must lie in (0, pi/4]")
        object.__setattr__(self, "sigma_t", st)
        object.__setattr__(self, "sigma_r", sr)

    @property
    def is_zero(self) -> bool:
        return not any(self.sigma_t) and not any(self.sigma_r)


@dataclass(frozen=True)
class PerturbationSample:
    delta_t: np.ndarray
    delta_eps: np.ndarray
    delta_r: np.ndarray

    @classmethod
    def identity(cls) -> PerturbationSample:
        return cls(np.zeros(3), np.zeros(3), np.eye(3))


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    sweep_index: int = 0
    realization_index: int = 0
    satellite_index: int = 0

    def child(self, **indices) -> SeedSpec:
        return SeedSpec(**{**self.__dict__, **indices})

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            self.master_seed,
            spawn_key=(self.sweep_index, self.realization_index, self.satellite_index),
        )
        return np.random.Generator(np.random.PCG64(ss))


def sample_truncated_vec(sigma, bound: float, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean normal 3-vector with diagonal std ``sigma``, conditioned on norm <= bound.

    Each component is first drawn from its normal truncated to [-bound, bound]
    (inverse CDF on the lower half, random sign); the vector is then rejected
    until it falls inside the ball. The ball lies inside that cube, so the
    result has the same law as plain rejection of the untruncated normal, but
    the acceptance rate stays above ~pi/6 even when bound << sigma.
    """
    sigma = np.asarray(sigma, dtype=float)
    if not bound > 0:
        raise ValueError("bound must be positive")
    active = sigma > 0
    safe = np.where(active, sigma, 1.0)
    lo = ndtr(-bound / safe)
    for _ in range(MAX_REJECTIONS):
        u = rng.random(3)
        sign = np.where(rng.random(3) < 0.5, -1.0, 1.0)
        v = np.where(active, sign * safe * ndtri(lo + u * (0.5 - lo)), 0.0)
        if math.sqrt(v @ v) <= bound:
            return v
    raise RejectionStall(f"{MAX_REJECTIONS} consecutive rejections (sigma={sigma.tolist()}, bound={bound})")


def sample_perturbation(spec: PerturbationSpec, rng: np.random.Generator) -> PerturbationSample:
    dt = sample_truncated_vec(spec.sigma_t, spec.t_max, rng)
    de = sample_truncated_vec(spec.sigma_r, spec.eps_max, rng)
    return PerturbationSample(dt, de, euler_zyx(*de))


def sample_formation(spec: PerturbationSpec, n_satellites: int, seed: SeedSpec) -> list[PerturbationSample]:
    """One independent sample per satellite, each from its own stream."""
    return [sample_perturbation(spec, seed.child(satellite_index=n).rng()) for n in range(n_satellites)]
