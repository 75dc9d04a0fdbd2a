"""Monte Carlo campaigns over translation and rotation perturbations.

A realization draws one perturbation per satellite, evaluates the
perturbed pattern (nominal weights) and the calibrated pattern (weights
recomputed from the perturbed geometry), and scores both against the
cached nominal pattern.
"""

from __future__ import annotations

import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from formbeam import analysis
from formbeam.analysis import KpiReport, KpiThresholds
from formbeam.beamforming import (
    PrecodingWeights,
    RealizationGeometry,
    evaluate_geometry,
    nominal_beam_radius,
    pattern_power,
    array_factor_power,
    realization_geometry,
    target_weights,
    uv_direction,
)
from formbeam.geometry import ArrayConfig, FormationLayout, aperture_diameter
from formbeam.grid import BeamMaps, BeamTarget, GridSpec, PatternMap
from formbeam.perturbation import PerturbationSpec, RejectionStall, SeedSpec, sample_formation

log = logging.getLogger(__name__)

VARIANTS = ("perturbed", "calibrated")
KPIS = ("g_main", "a_hpbw", "sll")


@dataclass(frozen=True)
class Scenario:
    """Formation, array and steering target plus the uv sampling plan.

    The fine window spans ``fine_radii`` nominal half-power radii around
    the target with ``fine_oversample`` nodes per radius. The full grid
    covers the visible disk with step wavelength / (full_oversample * D),
    D being the largest element separation.
    """

    layout: FormationLayout
    cfg: ArrayConfig
    target: BeamTarget = BeamTarget()
    fine_radii: float = 5.0
    fine_oversample: int = 16
    full_oversample: float = 4.0

    def cache_key(self):
        return (self.layout.key(), self.cfg, self.target, self.fine_radii,
                self.fine_oversample, self.full_oversample)


@dataclass(frozen=True)
class NominalPattern:
    geometry: RealizationGeometry
    weights: PrecodingWeights
    beam_radius: float
    maps: BeamMaps

    @property
    def fine_grid(self) -> GridSpec:
        return self.maps.fine.grid

    @property
    def full_grid(self) -> GridSpec:
        return self.maps.full.grid


_cache: dict = {}
_cache_lock = threading.Lock()


def nominal_pattern(scn: Scenario, seed: int | None = None) -> NominalPattern:
    """Nominal maps for a scenario, computed once and cached."""
    key = scn.cache_key()
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    geom = realization_geometry(scn.layout, scn.cfg)
    w = target_weights(geom, scn.target, "nominal")
    radius = nominal_beam_radius(geom, w, scn.target)
    u0, v0 = scn.target.uv
    fine_grid = GridSpec.centered(u0, v0, scn.fine_radii * radius, radius / scn.fine_oversample)
    d = max(aperture_diameter(scn.layout, scn.cfg), scn.cfg.wavelength)
    full_grid = GridSpec.visible(scn.cfg.wavelength / (scn.full_oversample * d))
    fine = evaluate_geometry(geom, w, fine_grid, scn.target, seed)
    full = evaluate_geometry(geom, w, full_grid, scn.target, seed)
    mask_radius = analysis.MASK_RADIUS_FACTOR * analysis.beam_radius_from_area(analysis.hpbw_area(fine))
    nom = NominalPattern(geom, w, radius, BeamMaps(fine, full, mask_radius))
    with _cache_lock:
        _cache.setdefault(key, nom)
    return nom


def clear_cache():
    with _cache_lock:
        _cache.clear()


def _maps(geom, weights, nom: NominalPattern, target, seed=None, full=True) -> BeamMaps:
    fine = evaluate_geometry(geom, weights, nom.fine_grid, target, seed)
    whole = evaluate_geometry(geom, weights, nom.full_grid, target, seed) if full else fine
    return BeamMaps(fine, whole, nom.maps.mask_radius)


@dataclass(frozen=True)
class RealizationResult:
    perturbed: KpiReport
    calibrated: KpiReport
    # |w^H a|^2 at the target for each variant (Ns*Ne when matched)
    perturbed_af_target: float
    calibrated_af_target: float


def perturbed_geometry(scn: Scenario, spec: PerturbationSpec, seed: SeedSpec) -> RealizationGeometry:
    samples = sample_formation(spec, scn.layout.n_satellites, seed)
    return realization_geometry(scn.layout, scn.cfg, samples)


def run_realization(scn: Scenario, spec: PerturbationSpec, seed: SeedSpec,
                    thr: KpiThresholds = KpiThresholds()) -> RealizationResult:
    nom = nominal_pattern(scn)
    geom = perturbed_geometry(scn, spec, seed)
    w_cal = target_weights(geom, scn.target, "calibrated")
    k0 = uv_direction(*scn.target.uv)
    reports = {}
    for variant, w in (("perturbed", nom.weights), ("calibrated", w_cal)):
        reports[variant] = analysis.kpi_compare(nom.maps, _maps(geom, w, nom, scn.target), thr)
    return RealizationResult(
        reports["perturbed"],
        reports["calibrated"],
        float(array_factor_power(geom, nom.weights, k0)[0]),
        float(array_factor_power(geom, w_cal, k0)[0]),
    )


@dataclass(frozen=True)
class SweepSpec:
    scenario: Scenario
    variable: Literal["translation", "rotation"]
    sigma_values: tuple[float, ...]
    realizations: int
    template: PerturbationSpec = PerturbationSpec()
    thresholds: KpiThresholds = KpiThresholds()
    master_seed: int = 0

    def __post_init__(self):
        s = tuple(float(x) for x in self.sigma_values)
        if self.variable not in ("translation", "rotation"):
            raise ValueError("variable must be 'translation' or 'rotation'")
        if not s or s[0] != 0.0 or any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("sigma_values must start at 0 and increase strictly")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        object.__setattr__(self, "sigma_values", s)

    def perturbation(self, sigma: float) -> PerturbationSpec:
        if self.variable == "translation":
            return replace(self.template, sigma_t=(sigma,) * 3, sigma_r=(0.0,) * 3)
        return replace(self.template, sigma_t=(0.0,) * 3, sigma_r=(sigma,) * 3)


@dataclass(frozen=True)
class RawRow:
    sigma_index: int
    sigma: float
    realization: int
    variant: str
    report: KpiReport


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[RawRow]
    completed: list[int]
    failed: list[int]
    wall_seconds: float = 0.0
    probabilities: dict = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return any(self.failed)

    def probability(self, sigma_index: int, variant: str, kpi: str) -> float:
        return self.probabilities[(sigma_index, variant, kpi)]

    def curve(self, variant: str, kpi: str) -> list[tuple[float, float]]:
        return [(s, self.probabilities[(i, variant, kpi)])
                for i, s in enumerate(self.spec.sigma_values) if self.completed[i]]


def _aggregate(res: SweepResult):
    for i in range(len(res.spec.sigma_values)):
        for variant in VARIANTS:
            rows = [r for r in res.rows if r.sigma_index == i and r.variant == variant]
            for kpi in KPIS:
                n_pass = sum(r.report.flags[kpi] for r in rows)
                res.probabilities[(i, variant, kpi)] = n_pass / len(rows) if rows else math.nan


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every (sigma, realization) task; output is independent of ``workers``."""
    t0 = time.perf_counter()
    nominal_pattern(spec.scenario)
    tasks = [(i, r) for i in range(len(spec.sigma_values)) for r in range(spec.realizations)]

    def one(task):
        i, r = task
        seed = SeedSpec(spec.master_seed, sweep_index=i, realization_index=r)
        try:
            return run_realization(spec.scenario, spec.perturbation(spec.sigma_values[i]), seed,
                                   spec.thresholds)
        except (RejectionStall, analysis.WindowMiss, analysis.EmptyRegion) as exc:
            log.warning("realization %d at sigma index %d failed: %s", r, i, exc)
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, tasks))
    else:
        results = [one(t) for t in tasks]

    n = len(spec.sigma_values)
    res = SweepResult(spec, [], [0] * n, [0] * n)
    for (i, r), out in zip(tasks, results):
        if out is None:
            res.failed[i] += 1
            continue
        res.completed[i] += 1
        res.rows.append(RawRow(i, spec.sigma_values[i], r, "perturbed", out.perturbed))
        res.rows.append(RawRow(i, spec.sigma_values[i], r, "calibrated", out.calibrated))
    if res.partial:
        log.warning("%d realizations excluded", sum(res.failed))
    _aggregate(res)
    res.wall_seconds = time.perf_counter() - t0
    return res


AXIS_COMPONENTS = {
    "x": ("t", (1, 0, 0)),
    "y": ("t", (0, 1, 0)),
    "z": ("t", (0, 0, 1)),
    "xy": ("t", (1, 1, 0)),
    "roll": ("r", (1, 0, 0)),
    "pitch": ("r", (0, 1, 0)),
    "yaw": ("r", (0, 0, 1)),
}


def axis_perturbation(component: str, sigma: float, template: PerturbationSpec = PerturbationSpec()):
    kind, mask = AXIS_COMPONENTS[component]
    sig = tuple(sigma * m for m in mask)
    if kind == "t":
        return replace(template, sigma_t=sig, sigma_r=(0.0,) * 3)
    return replace(template, sigma_t=(0.0,) * 3, sigma_r=sig)


def main_gain_loss(scn: Scenario, spec: PerturbationSpec, seed: SeedSpec) -> float:
    """Perturbed-variant main-lobe gain change (dB) for one realization."""
    nom = nominal_pattern(scn)
    geom = perturbed_geometry(scn, spec, seed)
    fine = evaluate_geometry(geom, nom.weights, nom.fine_grid, scn.target)
    return abs(analysis.main_lobe_gain(nom.maps.fine) - analysis.main_lobe_gain(fine))


def axis_impact(scn: Scenario, component: str, sigma: float, realizations: int,
                master_seed: int = 0, template: PerturbationSpec = PerturbationSpec()) -> np.ndarray:
    """Perturbed main-lobe gain loss per realization for one perturbation component."""
    spec = axis_perturbation(component, sigma, template)
    return np.array([
        main_gain_loss(scn, spec, SeedSpec(master_seed, realization_index=r))
        for r in range(realizations)
    ])


@dataclass(frozen=True)
class Representative:
    nominal: BeamMaps
    perturbed: BeamMaps
    calibrated: BeamMaps
    theta_deg: np.ndarray
    cut_db: dict

    def reports(self, thr: KpiThresholds = KpiThresholds()) -> dict[str, KpiReport]:
        return {v: analysis.kpi_compare(self.nominal, getattr(self, v), thr) for v in VARIANTS}


def theta_cut(geom, weights, u_nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pattern along phi = 0 (v = 0) at the given u nodes; theta signed by u."""
    u = np.asarray(u_nodes, dtype=float)
    u = u[np.abs(u) <= 1.0]
    p = pattern_power(geom, weights, uv_direction(u, np.zeros_like(u)))
    with np.errstate(divide="ignore"):
        return np.degrees(np.arcsin(u)), 10 * np.log10(p)


def run_representative(scn: Scenario, spec: PerturbationSpec, master_seed: int = 0) -> Representative:
    """Nominal, perturbed and calibrated maps of a single seeded realization plus phi = 0 cuts."""
    nom = nominal_pattern(scn, master_seed)
    geom = perturbed_geometry(scn, spec, SeedSpec(master_seed))
    w_cal = target_weights(geom, scn.target, "calibrated")
    maps = {
        "nominal": replace(nom.maps, fine=replace(nom.maps.fine, seed=master_seed),
                           full=replace(nom.maps.full, seed=master_seed)),
        "perturbed": _maps(geom, nom.weights, nom, scn.target, master_seed),
        "calibrated": _maps(geom, w_cal, nom, scn.target, master_seed),
    }
    u = nom.fine_grid.u
    cuts = {}
    theta = None
    for name, g, w in (("nominal", nom.geometry, nom.weights), ("perturbed", geom, nom.weights),
                       ("calibrated", geom, w_cal)):
        theta, cuts[name] = theta_cut(g, w, u)
    return Representative(maps["nominal"], maps["perturbed"], maps["calibrated"], theta, cuts)


def sigma_grid(sigma_max: float, points: int) -> tuple[float, ...]:
    return tuple(float(s) for s in np.linspace(0.0, sigma_max, points))


def summarize(res: SweepResult) -> list[dict]:
    out = []
    for i, s in enumerate(res.spec.sigma_values):
        for variant in VARIANTS:
            for kpi in KPIS:
                out.append({"sigma": s, "variant": variant, "kpi": kpi,
                            "probability": res.probabilities[(i, variant, kpi)],
                            "n_realizations": res.completed[i]})
    return out


def requirements(res_or_curves, target: float = 0.9) -> dict[tuple[str, str], float]:
    """sigma* per (variant, kpi)."""
    if isinstance(res_or_curves, SweepResult):
        curves = {(v, k): res_or_curves.curve(v, k) for v in VARIANTS for k in KPIS}
    else:
        curves = res_or_curves
    return {key: analysis.requirement_threshold(c, target) for key, c in curves.items()}


def mean_report(rows: Sequence[RawRow], variant: str) -> dict[str, float]:
    sel = [r.report for r in rows if r.variant == variant]
    return {
        "dG_main_db": float(np.mean([r.delta_g_main for r in sel])),
        "dA_hpbw_frac": float(np.mean([r.delta_a_hpbw for r in sel])),
        "dG_sll_db": float(np.mean([r.delta_g_sll for r in sel])),
    }
