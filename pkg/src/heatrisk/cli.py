"""Command-line entry point: ``heatrisk <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from . import io
from .config import load_config
from .exceptions import ConfigError, HeatRiskError
from .pipeline import (
    RunManifest,
    MANIFEST_NAME,
    _Writer,
    calibrate_country,
    load_country,
    run_pipeline,
    write_risk_reports,
)
from .scenario import NORDIC_2012_INVENTORY, scenario_table

log = logging.getLogger("heatrisk")


def _print_table(header, rows, out=None):
    out = out or sys.stdout
    text = [[str(h) for h in header]] + [
        [f"{v:.4f}" if isinstance(v, float) else str(v) for v in r] for r in rows
    ]
    widths = [max(len(r[i]) for r in text) for i in range(len(header))]
    for r in text:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


def one_decimal(x: float) -> str:
    """Half-up rounding of the shortest decimal form (12.45 -> 12.5)."""
    return str(Decimal(repr(x)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _config(args):
    if not args.config:
        raise ConfigError("--config is required")
    overrides = {}
    if getattr(args, "country", None):
        overrides["countries"] = args.country
    if getattr(args, "share", None):
        overrides["shares"] = args.share
    if getattr(args, "jobs", None):
        overrides["jobs"] = args.jobs
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    return load_config(args.config, **overrides)


def cmd_calibrate(args):
    cfg = _config(args)
    for c in cfg.countries:
        model, _, _ = calibrate_country(load_country(cfg, c), cfg.train_fraction)
        path = Path(cfg.output_dir) / "models" / f"{c}.json"
        io.save_model(model, path)
        print(f"{c}: R2={model.r_squared:.4f} n={model.n_obs} -> {path}")


def cmd_evaluate(args):
    cfg = _config(args)
    rows = []
    for c in cfg.countries:
        _, acc, _ = calibrate_country(load_country(cfg, c), cfg.train_fraction)
        rows += [[c, sample, m.rmse, m.mae, m.mape, m.smape] for sample, m in acc]
    header = ["country", "sample", "rmse_mwh", "mae_mwh", "mape_pct", "smape_pct"]
    _print_table(header, rows)
    io.write_rows(Path(cfg.output_dir) / "tables" / "accuracy.csv", header, rows)


def cmd_effects(args):
    cfg = _config(args)
    rows = []
    for c in cfg.countries:
        _, _, eff = calibrate_country(load_country(cfg, c), cfg.train_fraction)
        ranked = sorted(eff.items(), key=lambda kv: -kv[1])
        rows += [[c, g, f2] for g, f2 in ranked]
    header = ["country", "group", "cohens_f2"]
    _print_table(header, rows)
    io.write_rows(Path(cfg.output_dir) / "tables" / "effects.csv", header, rows)


def cmd_scenario_table(args):
    if args.config:
        cfg = _config(args)
        inventories = [cfg.inventory[c] for c in cfg.countries]
        shares, factor = [s for s in cfg.shares if s > 0], cfg.replacement_factor
    else:
        countries = args.country or list(NORDIC_2012_INVENTORY)
        inventories = [NORDIC_2012_INVENTORY[c] for c in countries]
        shares, factor = sorted(set(args.share or [0.5, 1.0])), 0.475
    rows = scenario_table(inventories, shares, factor)
    header = list(rows[0])
    _print_table(header, [[one_decimal(r[h]) if isinstance(r[h], float) else r[h] for h in header] for r in rows])
    if args.out:
        io.write_rows(args.out, header, ([r[h] for h in header] for r in rows))


def cmd_simulate(args):
    cfg = _config(args)
    if args.plots:
        cfg.plots = True
    if args.hourly:
        cfg.hourly_outputs = True
    manifest = run_pipeline(cfg)
    print(f"{manifest.scenario_count} weather scenarios, {len(manifest.outputs)} outputs in {cfg.output_dir}")


def cmd_report(args):
    run = Path(args.run)
    metrics = run / "risk" / "metrics.csv"
    if not metrics.is_file():
        raise ConfigError(f"no risk/metrics.csv under {run}")
    with open(metrics, encoding="utf-8") as fh:
        next(fh)
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    rows = [[r[0], r[1], r[2]] + [float(v) for v in r[3:]] for r in rows]
    out = Path(args.out) if args.out else run / "report"
    w = _Writer(out)
    summary = write_risk_reports(rows, w, plots=args.plots)
    _print_table(["area", "scenario", "metric", "mean", "std_dev", "cvar_upper_5pct", "n"], summary)


def cmd_verify(args):
    run = Path(args.run)
    manifest = RunManifest.from_json((run / MANIFEST_NAME).read_text(encoding="utf-8"))
    bad = manifest.verify(run)
    for rel in bad:
        print(f"MISMATCH {rel}")
    print(f"{len(manifest.outputs) - len(bad)}/{len(manifest.outputs)} outputs verified")
    return 3 if bad else 0


def cmd_make_fixture(args):
    from .fixture import generate_fixture

    path = generate_fixture(args.out, seed=args.seed if args.seed is not None else 20400101)
    print(f"fixture written; run with: heatrisk simulate --config {path}")


def build_parser():
    p = argparse.ArgumentParser(
        prog="heatrisk",
        description="Hourly consumption models, heating-electrification scenarios and weather-year risk.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="run configuration (YAML)")
        sp.add_argument("--country", action="append", help="restrict to country (repeatable)")
        sp.add_argument("--share", action="append", type=float, help="electrification share (repeatable)")
        sp.add_argument("--jobs", type=int, help="worker processes for scenario simulation")
        sp.add_argument("--seed", type=int, help="reserved; recorded in the config hash")
        sp.add_argument("--out", help="output directory (or file for scenario-table)")

    for name, fn, help_ in [
        ("calibrate", cmd_calibrate, "fit and save consumption models"),
        ("evaluate", cmd_evaluate, "train/validation/full-sample accuracy"),
        ("effects", cmd_effects, "Cohen's f2 per regressor group"),
    ]:
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("scenario-table", help="electrification arithmetic per country")
    common(sp, config_required=False)
    sp.set_defaults(func=cmd_scenario_table)

    sp = sub.add_parser("simulate", help="full run: calibrate, simulate weather years, report")
    common(sp)
    sp.add_argument("--plots", action="store_true", help="also write SVG plots")
    sp.add_argument("--hourly", action="store_true", help="write per-scenario hourly CSVs")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("report", help="recompute risk summaries from a run's metrics")
    sp.add_argument("--run", required=True)
    sp.add_argument("--out")
    sp.add_argument("--plots", action="store_true")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("verify", help="check a run's outputs against its manifest")
    sp.add_argument("--run", required=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("make-fixture", help="write the synthetic input bundle")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_make_fixture)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or 0
    except HeatRiskError as exc:
        print(f"heatrisk: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"heatrisk: error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
