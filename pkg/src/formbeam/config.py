"""Run configuration: flat dotted keys, presets, and builders.

Configuration files are TOML using dotted keys only (``array.rows = 6``).
Precedence, lowest first: preset, config file, ``--set`` overrides,
dedicated CLI flags.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path

from formbeam.analysis import KpiThresholds
from formbeam.beamforming import db_to_linear, pattern_exponent_for_hpbw
from formbeam.geometry import GOLDEN_ANGLE, ArrayConfig, FormationLayout, lsa_layout
from formbeam.grid import BeamTarget
from formbeam.montecarlo import Scenario, SweepSpec, sigma_grid
from formbeam.perturbation import PerturbationSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


WAVELENGTH = 0.3

# Nominal configurations: satellites -> (array side, d_sat_min [m], hull area [m^2]).
REFERENCE_CONFIGS = {
    4: (24, 10.91, 328.84),
    9: (16, 7.31, 437.40),
    16: (12, 6.14, 594.36),
    36: (8, 4.11, 659.35),
    64: (6, 3.02, 663.52),
    144: (4, 2.04, 701.44),
    256: (3, 1.54, 721.31),
    576: (2, 1.03, 727.50),
}

# Spiral growth rates (golden-angle step) whose hull area best matches
# REFERENCE_CONFIGS, from geometry.fit_growth_rate. Desk rows shrink every length by 4.
GROWTH_RATE_FULL = {4: 0.19893, 9: 0.05237, 16: 0.0237, 36: 0.0097, 64: 0.00393,
                     144: 0.00155, 256: 0.00063, 576: 0.00025}
GROWTH_RATE_DESK = {4: 0.21093, 9: 0.05237, 16: 0.0237, 36: 0.0097, 144: 0.00155}
DESK_SCALE = 4

DESK = {
    "array.rows": 3,
    "array.cols": 3,
    "array.spacing_x": WAVELENGTH / 2,
    "array.spacing_y": WAVELENGTH / 2,
    "array.wavelength": WAVELENGTH,
    "array.gain_dbi": 5.0,
    "array.hpbw_deg": 70.0,
    "layout.satellites": 16,
    "layout.angular_step": GOLDEN_ANGLE,
    "layout.growth_rate": GROWTH_RATE_DESK[16],
    "layout.d_min": REFERENCE_CONFIGS[16][1] / DESK_SCALE,
    "layout.file": "",
    "target.theta_deg": 0.0,
    "target.phi_deg": 0.0,
    "perturbation.sigma_t": WAVELENGTH / 5,
    "perturbation.sigma_r_deg": 5.0,
    "perturbation.t_max": 2.3,
    "perturbation.eps_max_deg": 45.0,
    "thresholds.g_main_db": 1.0,
    "thresholds.a_hpbw_frac": 0.02,
    "thresholds.sll_db": 1.0,
    "thresholds.probability": 0.9,
    "sweep.variable": "translation",
    "sweep.sigma_max": "auto",
    "sweep.points": 10,
    "sweep.realizations": 30,
    "grid.fine_radii": 5.0,
    "grid.fine_oversample": 16,
    "grid.full_oversample": 4.0,
    "run.seed": 0,
    "run.workers": 1,
    "run.out": "out",
}

FULL = {
    **DESK,
    "array.rows": 6,
    "array.cols": 6,
    "layout.satellites": 64,
    "layout.growth_rate": GROWTH_RATE_FULL[64],
    "layout.d_min": REFERENCE_CONFIGS[64][1],
    "perturbation.t_max": 1.2,
    "sweep.points": 40,
    "sweep.realizations": 100,
}

PRESETS = {"desk": DESK, "paper": FULL}


def reference_layout_keys(n_satellites: int, scale: str = "full") -> dict:
    """Config keys reproducing one nominal configuration row."""
    side, d_min, _ = REFERENCE_CONFIGS[n_satellites]
    if scale == "desk":
        if n_satellites not in GROWTH_RATE_DESK:
            raise ConfigError(f"no desk-scale row for {n_satellites} satellites")
        side //= DESK_SCALE
        d_min /= DESK_SCALE
        b = GROWTH_RATE_DESK[n_satellites]
    else:
        b = GROWTH_RATE_FULL[n_satellites]
    return {"array.rows": side, "array.cols": side, "layout.satellites": n_satellites,
            "layout.growth_rate": b, "layout.d_min": d_min}


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_value(text: str):
    """Parse a ``--set`` value with TOML scalar rules, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


@dataclass
class RunConfig:
    values: dict

    @classmethod
    def load(cls, preset: str = "desk", path: str | Path | None = None,
             overrides: dict | None = None) -> RunConfig:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        values = dict(PRESETS[preset])
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file {path} does not exist")
            try:
                loaded = _flatten(tomllib.loads(path.read_text()))
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
            values.update(loaded)
        values.update(overrides or {})
        unknown = sorted(set(values) - set(DESK))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(values)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def get_float(self, key) -> float:
        try:
            return float(self.values[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be a number") from exc

    def get_int(self, key) -> int:
        v = self.values[key]
        if isinstance(v, bool) or not float(v).is_integer():
            raise ConfigError(f"{key} must be an integer")
        return int(v)

    def validate(self):
        try:
            self.array_config()
            self.target()
            self.perturbation()
            self.thresholds()
            if self.values["sweep.variable"] not in ("translation", "rotation"):
                raise ConfigError("sweep.variable must be translation or rotation")
            if self.get_int("sweep.points") < 1 or self.get_int("sweep.realizations") < 1:
                raise ConfigError("sweep.points and sweep.realizations must be >= 1")
            if self.get_int("run.workers") < 1:
                raise ConfigError("run.workers must be >= 1")
            if not 0 <= self.get_int("run.seed") < 2 ** 64:
                raise ConfigError("run.seed must be an unsigned 64-bit integer")
            if self["layout.file"] and not Path(self["layout.file"]).is_file():
                raise ConfigError(f"layout file {self['layout.file']} does not exist")
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc

    def echo_lines(self) -> list[str]:
        return [f"{k} = {self.values[k]!r}" for k in sorted(self.values)]

    def array_config(self) -> ArrayConfig:
        return ArrayConfig(
            rows=self.get_int("array.rows"),
            cols=self.get_int("array.cols"),
            spacing_x=self.get_float("array.spacing_x"),
            spacing_y=self.get_float("array.spacing_y"),
            wavelength=self.get_float("array.wavelength"),
            boresight_gain=db_to_linear(self.get_float("array.gain_dbi")),
            pattern_exponent=pattern_exponent_for_hpbw(math.radians(self.get_float("array.hpbw_deg"))),
        )

    def layout(self) -> FormationLayout:
        if self["layout.file"]:
            from formbeam.io import read_layout
            return read_layout(self["layout.file"])
        return lsa_layout(
            self.get_int("layout.satellites"),
            self.get_float("layout.angular_step"),
            self.get_float("layout.growth_rate"),
            self.get_float("layout.d_min"),
        )

    def target(self) -> BeamTarget:
        return BeamTarget.from_degrees(self.get_float("target.theta_deg"), self.get_float("target.phi_deg"))

    def perturbation(self) -> PerturbationSpec:
        st = self.get_float("perturbation.sigma_t")
        sr = math.radians(self.get_float("perturbation.sigma_r_deg"))
        return PerturbationSpec(
            sigma_t=(st,) * 3,
            t_max=self.get_float("perturbation.t_max"),
            sigma_r=(sr,) * 3,
            eps_max=math.radians(self.get_float("perturbation.eps_max_deg")),
        )

    def thresholds(self) -> KpiThresholds:
        return KpiThresholds(
            self.get_float("thresholds.g_main_db"),
            self.get_float("thresholds.a_hpbw_frac"),
            self.get_float("thresholds.sll_db"),
            self.get_float("thresholds.probability"),
        )

    @property
    def seed(self) -> int:
        return self.get_int("run.seed")

    def scenario(self) -> Scenario:
        return Scenario(
            self.layout(), self.array_config(), self.target(),
            fine_radii=self.get_float("grid.fine_radii"),
            fine_oversample=self.get_int("grid.fine_oversample"),
            full_oversample=self.get_float("grid.full_oversample"),
        )

    def sigma_max(self, variable: str) -> float:
        """Sweep end point in SI units (meters or radians)."""
        raw = self["sweep.sigma_max"]
        if raw == "auto":
            return self.get_float("array.wavelength") / 5 if variable == "translation" else math.radians(10.0)
        v = self.get_float("sweep.sigma_max")
        return v if variable == "translation" else math.radians(v)

    def sweep_spec(self, variable: str | None = None) -> SweepSpec:
        variable = variable or self["sweep.variable"]
        return SweepSpec(
            scenario=self.scenario(),
            variable=variable,
            sigma_values=sigma_grid(self.sigma_max(variable), self.get_int("sweep.points")),
            realizations=self.get_int("sweep.realizations"),
            template=self.perturbation(),
            thresholds=self.thresholds(),
            master_seed=self.seed,
        )
