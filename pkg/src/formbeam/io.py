"""Plain-text file formats: layouts, pattern grids, KPI and sweep tables.

Every file starts with a ``#`` header block carrying the tool version, the
master seed, an ISO-8601 timestamp and the full config echo. Bodies are
deterministic for a given config and seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from formbeam import __version__
from formbeam.geometry import FormationLayout, SatellitePose
from formbeam.grid import BeamTarget, GridSpec, PatternMap

TIMESTAMP_PREFIX = "# timestamp: "


def header_lines(seed: int | None = None, config_echo: Sequence[str] = (), extra: Sequence[str] = ()) -> list[str]:
    lines = [f"# formbeam {__version__}",
             TIMESTAMP_PREFIX + datetime.now(timezone.utc).isoformat(timespec="seconds")]
    if seed is not None:
        lines.append(f"# seed: {seed}")
    lines += [f"# config: {c}" for c in config_echo]
    lines += [f"# {e}" for e in extra]
    return lines


def body_lines(path) -> list[str]:
    return [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]


def _fmt(x: float) -> str:
    return repr(float(x))


# -- layouts ---------------------------------------------------------------

LAYOUT_COLUMNS = "n tx ty tz r11 r12 r13 r21 r22 r23 r31 r32 r33"


def format_layout(layout: FormationLayout, header: Sequence[str] = ()) -> str:
    lines = list(header) + ["# " + LAYOUT_COLUMNS]
    for n, pose in enumerate(layout.poses):
        vals = list(pose.translation) + list(pose.rotation.ravel())
        lines.append(" ".join([str(n)] + [_fmt(v) for v in vals]))
    return "\n".join(lines) + "\n"


def write_layout(path, layout: FormationLayout, header: Sequence[str] = ()):
    Path(path).write_text(format_layout(layout, header))


def read_layout(path) -> FormationLayout:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 13:
            raise ValueError(f"{path}:{lineno}: expected 13 columns, got {len(parts)}")
        rows.append((int(parts[0]), [float(p) for p in parts[1:]]))
    rows.sort(key=lambda r: r[0])
    if [n for n, _ in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: satellite indices must be 0..N-1")
    return FormationLayout(tuple(SatellitePose(np.array(v[:3]), np.array(v[3:]).reshape(3, 3)) for _, v in rows))


# -- pattern grids -----------------------------------------------------------

def format_pattern(pmap: PatternMap, header: Sequence[str] = ()) -> str:
    g = pmap.grid
    t = pmap.target
    lines = list(header) + [
        f"# u_min u_max n_u = {_fmt(g.u_min)} {_fmt(g.u_max)} {g.n_u}",
        f"# v_min v_max n_v = {_fmt(g.v_min)} {_fmt(g.v_max)} {g.n_v}",
        f"# seed = {pmap.seed if pmap.seed is not None else 'none'}",
        f"# target theta0 phi0 = {_fmt(t.theta0)} {_fmt(t.phi0)}",
    ]
    db = pmap.power_db
    for row in db:
        lines.append(" ".join("NaN" if not math.isfinite(x) else f"{x:.12g}" for x in row))
    return "\n".join(lines) + "\n"


def write_pattern(path, pmap: PatternMap, header: Sequence[str] = ()):
    Path(path).write_text(format_pattern(pmap, header))


def read_pattern(path) -> PatternMap:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            if "=" in line:
                k, v = line[1:].split("=", 1)
                meta[k.strip()] = v.split()
            continue
        if line.strip():
            rows.append([float(x) for x in line.split()])
    u = meta["u_min u_max n_u"]
    v = meta["v_min v_max n_v"]
    grid = GridSpec(float(u[0]), float(u[1]), int(u[2]), float(v[0]), float(v[1]), int(v[2]))
    tgt = meta.get("target theta0 phi0", ["0", "0"])
    seed = meta.get("seed", ["none"])[0]
    power = 10.0 ** (np.array(rows) / 10.0)
    return PatternMap(grid, power, BeamTarget(float(tgt[0]), float(tgt[1])),
                      None if seed == "none" else int(seed))


# -- tables ------------------------------------------------------------------

def write_csv(path, header: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence]):
    buf = io.StringIO()
    for h in header:
        buf.write(h + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    Path(path).write_text(buf.getvalue())


def _cell(x):
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def read_csv(path) -> list[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


RAW_COLUMNS = ("sweep_sigma", "realization", "variant", "dG_main_db", "dA_hpbw_frac",
               "dG_sll_db", "pass_g", "pass_a", "pass_sll")
SUMMARY_COLUMNS = ("sigma", "variant", "kpi", "probability", "n_realizations")


def raw_rows(rows) -> list[tuple]:
    """One tuple per (realization, variant) in RAW_COLUMNS order."""
    return [(r.sigma, r.realization, r.variant, r.report.delta_g_main, r.report.delta_a_hpbw,
             r.report.delta_g_sll, r.report.pass_g, r.report.pass_a, r.report.pass_sll) for r in rows]


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
