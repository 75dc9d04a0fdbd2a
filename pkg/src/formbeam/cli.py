"""Command-line entry point: ``formbeam {layout,pattern,sweep,requirements}``.

Exit codes: 0 success, 1 configuration error, 2 partial completion.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path

from formbeam import __version__, io, montecarlo
from formbeam.analysis import EmptyCurve, hpbw_area, isolation_db, main_lobe_gain, requirement_threshold
from formbeam.config import PRESETS, ConfigError, RunConfig, parse_value
from formbeam.geometry import layout_metrics

log = logging.getLogger("formbeam")

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML file with flat dotted keys")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--workers", type=int, help="worker threads for Monte Carlo tasks")
    p.add_argument("--out", help="output directory")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formbeam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"formbeam {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="generate or import a layout and write its metrics")
    _common(p)

    p = sub.add_parser("pattern", help="nominal/perturbed/calibrated uv maps and phi=0 cuts")
    _common(p)
    p.add_argument("--variant", choices=("all", "nominal"), default="all")

    p = sub.add_parser("sweep", help="Monte Carlo KPI probability curves")
    _common(p)
    p.add_argument("--variable", choices=("translation", "rotation"))

    p = sub.add_parser("requirements", help="sigma* per variant and KPI from a sweep CSV")
    p.add_argument("sweep_csv")
    p.add_argument("--target", type=float, default=0.9)
    p.add_argument("--out", help="output directory (default: next to the sweep CSV)")
    return parser


def load_config(args) -> RunConfig:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = parse_value(v.strip())
    for flag, key in (("seed", "run.seed"), ("workers", "run.workers"), ("out", "run.out")):
        if getattr(args, flag, None) is not None:
            overrides[key] = getattr(args, flag)
    if getattr(args, "variable", None):
        overrides["sweep.variable"] = args.variable
    return RunConfig.load(args.preset, args.config, overrides)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg["run.out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _header(cfg: RunConfig, *extra: str) -> list[str]:
    return io.header_lines(cfg.seed, cfg.echo_lines(), extra)


def cmd_layout(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    scn = cfg.scenario()
    nom = montecarlo.nominal_pattern(scn)
    m = layout_metrics(scn.layout, scn.cfg, nom.maps)
    io.write_layout(out / "layout.txt", scn.layout, _header(cfg))
    io.write_json(out / "layout_metrics.json", {
        "tool_version": __version__,
        "seed": cfg.seed,
        "config": dict(sorted(cfg.values.items())),
        "n_satellites": scn.layout.n_satellites,
        "elements_per_satellite": scn.cfg.n_elements,
        "d_sat_min": m.d_sat_min,
        "a_virtual": m.a_virtual,
        "delta_g_main_sll": m.delta_g_main_sll,
        "hpbw_radius_uv": nom.beam_radius,
    })
    print(f"d_sat_min={m.d_sat_min:.4f} m  a_virtual={m.a_virtual:.2f} m^2  "
          f"main-SLL={m.delta_g_main_sll:.2f} dB")
    return EXIT_OK


def cmd_pattern(cfg: RunConfig, variant: str = "all") -> int:
    out = _out_dir(cfg)
    scn = cfg.scenario()
    hdr = _header(cfg)
    if variant == "nominal":
        nom = montecarlo.nominal_pattern(scn)
        bundles = {"nominal": nom.maps}
        theta, cut = montecarlo.theta_cut(nom.geometry, nom.weights, nom.fine_grid.u)
        cuts = {"nominal": cut}
    else:
        rep = montecarlo.run_representative(scn, cfg.perturbation(), cfg.seed)
        bundles = {"nominal": rep.nominal, "perturbed": rep.perturbed, "calibrated": rep.calibrated}
        theta, cuts = rep.theta_deg, rep.cut_db
    summary = {}
    for name, maps in bundles.items():
        fine = maps.fine if maps.fine.seed is not None else _with_seed(maps.fine, cfg.seed)
        full = maps.full if maps.full.seed is not None else _with_seed(maps.full, cfg.seed)
        io.write_pattern(out / f"pattern_{name}_fine.txt", fine, hdr)
        io.write_pattern(out / f"pattern_{name}_full.txt", full, hdr)
        io.write_csv(out / f"theta_cut_{name}.csv", hdr, ("theta_deg", "power_db"),
                     zip(theta, cuts[name]))
        summary[name] = {"main_lobe_gain_db": main_lobe_gain(maps.fine),
                         "hpbw_area": _safe_area(maps.fine),
                         "isolation_db": isolation_db(maps)}
    if variant != "nominal":
        for name, rpt in rep.reports(cfg.thresholds()).items():
            summary[name]["kpi"] = rpt.__dict__
    io.write_json(out / "pattern_summary.json", {"tool_version": __version__, "seed": cfg.seed,
                                                 "config": dict(sorted(cfg.values.items())),
                                                 "maps": summary})
    for name, s in summary.items():
        print(f"{name:>10}: main lobe {s['main_lobe_gain_db']:.2f} dB, "
              f"main-SLL {s['isolation_db']:.2f} dB")
    return EXIT_OK


def _with_seed(pmap, seed):
    from dataclasses import replace
    return replace(pmap, seed=seed)


def _safe_area(pmap):
    try:
        return hpbw_area(pmap)
    except ValueError:
        return None


def cmd_sweep(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    spec = cfg.sweep_spec()
    started = time.time()
    res = montecarlo.run_sweep(spec, workers=cfg.get_int("run.workers"))
    hdr = _header(cfg, f"variable: {spec.variable}",
                  "sigma unit: " + ("m" if spec.variable == "translation" else "rad"))
    stem = f"sweep_{spec.variable}"
    io.write_csv(out / f"{stem}_raw.csv", hdr, io.RAW_COLUMNS, io.raw_rows(res.rows))
    summary = montecarlo.summarize(res)
    io.write_csv(out / f"{stem}.csv", hdr, io.SUMMARY_COLUMNS,
                 [[r[c] for c in io.SUMMARY_COLUMNS] for r in summary])
    io.write_json(out / f"{stem}.json", {
        "tool_version": __version__,
        "seed": spec.master_seed,
        "config": dict(sorted(cfg.values.items())),
        "variable": spec.variable,
        "sigma_values": list(spec.sigma_values),
        "n_realizations": res.completed,
        "n_failed": res.failed,
        "requirements": {f"{v}/{k}": s for (v, k), s in
                         montecarlo.requirements(res, spec.thresholds.requirement_prob).items()},
        "wall_clock": {"started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
                       "seconds": res.wall_seconds},
        "workers": cfg.get_int("run.workers"),
    })
    print(f"{sum(res.completed)} realizations in {res.wall_seconds:.1f} s -> {out / stem}.csv")
    return EXIT_PARTIAL if res.partial else EXIT_OK


def cmd_requirements(path: str, target: float = 0.9, out: str | None = None) -> int:
    rows = io.read_csv(path)
    curves: dict[tuple[str, str], list] = {}
    for r in rows:
        curves.setdefault((r["variant"], r["kpi"]), []).append((float(r["sigma"]), float(r["probability"])))
    if not curves:
        raise EmptyCurve(f"{path} holds no sweep rows")
    table = []
    for (variant, kpi), curve in sorted(curves.items()):
        curve = [c for c in sorted(curve) if not math.isnan(c[1])]
        table.append((variant, kpi, requirement_threshold(curve, target)))
    out_dir = Path(out) if out else Path(path).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_csv(out_dir / (Path(path).stem + "_requirements.csv"),
                 io.header_lines(None, (), [f"source: {path}", f"target: {target!r}"]),
                 ("variant", "kpi", "sigma_star"), table)
    for variant, kpi, s in table:
        print(f"{variant:>10} {kpi:>7}  sigma* = {s:.6g}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "requirements":
            return cmd_requirements(args.sweep_csv, args.target, args.out)
        cfg = load_config(args)
        if args.command == "layout":
            return cmd_layout(cfg)
        if args.command == "pattern":
            return cmd_pattern(cfg, args.variant)
        return cmd_sweep(cfg)
    except (ConfigError, FileNotFoundError, EmptyCurve) as exc:
        print(f"formbeam: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
