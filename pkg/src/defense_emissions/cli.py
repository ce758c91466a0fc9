"""Command-line entry point.

Exit codes: 0 success, 2 configuration or usage error, 3 data validation
error, 4 solver non-convergence. Each successful run prints one JSON summary
line on stdout.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from . import local_projections as lp
from .calibration import load_calibration
from .exceptions import ConfigError, ConvergenceError, ValidationError
from .panel_data import load_panel, read_schema
from .scenarios import (
    DamageSpec,
    emissions_report,
    load_scenario,
    parse_grid,
    scc_damages,
    steady_g_hat,
    sweep,
)
from .shocks import extract_shocks
from .solvers import solve_steady, solve_transition

logger = logging.getLogger("defense_emissions")

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_CONVERGENCE = 0, 2, 3, 4
DEFAULT_SEED = 12345


def data_path(*parts: str) -> Path:
    """Location of a file shipped inside the package."""
    return Path(str(resources.files("defense_emissions").joinpath("data", *parts)))


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


# --------------------------------------------------------------------------
# output helpers


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, payload) -> Path:
    return atomic_write_text(path, json.dumps(_jsonable(payload), indent=2) + "\n")


def write_csv(path, df: pd.DataFrame) -> Path:
    return atomic_write_text(path, df.to_csv(index=False, float_format="%.10g", lineterminator="\n"))


def _existing(path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} {p} does not exist")
    return p


# --------------------------------------------------------------------------
# subcommands


def _panel(args):
    panel_path = _existing(args.panel or data_path("panel.csv"), "panel file")
    schema = read_schema(_existing(args.schema, "schema file")) if args.schema else None
    return load_panel(panel_path, schema)


def _calib(args):
    return load_calibration(_existing(args.calib or data_path("calibration"), "calibration directory"))


def _scenario(args, calib):
    if not args.scenario:
        raise ConfigError("--scenario is required")
    return load_scenario(_existing(args.scenario, "scenario file"), calib)


def cmd_extract_shocks(args) -> dict:
    shocks = extract_shocks(_panel(args), var=args.var, h=args.h, l=args.l)
    write_csv(args.out, shocks)
    return {"outputs": [str(args.out)], "rows": len(shocks)}


def _lp_spec(args) -> lp.LpSpec:
    return lp.LpSpec(horizon=args.horizon, lags=args.lags, year_fe=not args.no_year_fe,
                     ci_level=args.ci_level, dk_lags=args.dk_lags)


def _run_lp(panel, shocks, args) -> pd.DataFrame:
    spec = _lp_spec(args)
    log = args.log
    if args.spillover:
        src = shocks[shocks["country"] == args.spillover]
        if src.empty:
            raise ValidationError(f"no shocks for source country {args.spillover!r}")
        spec = lp.with_spec(spec, year_fe=False) if not args.no_year_fe else spec
        others = panel.subset([c for c in panel.countries if c != args.spillover])
        res = lp.spillover_lp(others, src, args.outcome, spec, log=log, threads=args.threads)
        return res.to_frame()
    if args.split == "intensity":
        res = lp.split_lp(panel, shocks, args.outcome, spec, log=log, threads=args.threads)
        parts = [r.to_frame().assign(group=g) for g, r in res.items() if r is not None]
        out = pd.concat(parts, ignore_index=True)
        return out[["group", *out.columns[:-1]]]
    return lp.estimate_lp(panel, shocks, args.outcome, spec, log=log, threads=args.threads).to_frame()


def cmd_lp(args) -> dict:
    panel = _panel(args)
    shocks = _read_shocks(_existing(args.shocks, "shock file"))
    irf = _run_lp(panel, shocks, args)
    outputs = [str(write_csv(args.out, irf))]
    if args.plotdata:
        outputs.append(str(write_csv(args.plotdata, plot_frame(irf))))
    return {"outputs": outputs, "horizons": int(irf["h"].max()) + 1}


def plot_frame(irf: pd.DataFrame) -> pd.DataFrame:
    """Long format: one row per (group, h, series) with series in beta/lo/hi."""
    if "group" not in irf.columns:
        irf = irf.assign(group="ALL")
    long = irf.melt(id_vars=["group", "h"], value_vars=["beta", "lo", "hi"],
                    var_name="series", value_name="value")
    return long.sort_values(["group", "series", "h"], kind="stable").reset_index(drop=True)


def _read_shocks(path) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"country": str})
    missing = {"country", "year", "shock_pp"} - set(df.columns)
    if missing:
        raise ValidationError(f"shock file lacks columns {sorted(missing)}")
    return df


def cmd_calibrate(args) -> dict:
    calib = _calib(args)
    write_json(args.out, calib.to_dict())
    return {"outputs": [str(args.out)], "industries": calib.n, "S_P": calib.S_P, "S_E": calib.S_E}


def _steady_report(calib, scenario, damages, args):
    sol = solve_steady(calib, steady_g_hat(scenario, calib), tol=min(args.tol, 1e-12))
    return sol, emissions_report(sol, scenario, calib, damages)


def cmd_steady(args) -> dict:
    calib = _calib(args)
    scenario, damages = _scenario(args, calib)
    sol, report = _steady_report(calib, scenario, damages, args)
    report["diagnostics"] = {"residual_norm": sol.residual_norm, "iterations": sol.iterations}
    write_json(args.out, report)
    return {"outputs": [str(args.out)], "emissions_pct": report["emissions_pct"],
            "intensity_pct": report["intensity_pct"], "real_gdp_pct": report["real_gdp_pct"]}


def _transition_frames(calib, scenario, args):
    sol = solve_transition(calib, scenario, T=args.T, tol=args.tol, method=args.method)
    return sol, sol.to_frame(), sol.capital_frame(calib.labels)


def cmd_transition(args) -> dict:
    calib = _calib(args)
    scenario, _ = _scenario(args, calib)
    sol, path, capital = _transition_frames(calib, scenario, args)
    outputs = [str(write_csv(args.out, path))]
    if args.capital_out:
        outputs.append(str(write_csv(args.capital_out, capital)))
    return {"outputs": outputs, "T": sol.T, "terminal_gap": sol.terminal_gap,
            "impact_emissions_pct": float(path["emissions_pct"].iloc[0])}


def cmd_sweep(args) -> dict:
    calib = _calib(args)
    presets = [p.strip() for p in args.presets.split(",") if p.strip()]
    df = sweep(calib, parse_grid(args.grid), presets, threads=args.threads)
    write_csv(args.out, df)
    return {"outputs": [str(args.out)], "rows": len(df)}


def cmd_damages(args) -> dict:
    damages = None
    delta = args.delta
    if args.scenario:
        calib = _calib(args)
        scenario, damages = _scenario(args, calib)
        if delta is None:
            delta = 100 * (solve_steady(calib, steady_g_hat(scenario, calib)).E_hat - 1)
    if args.scc is not None or damages is None:
        try:
            damages = DamageSpec(args.scc, args.base_emissions, args.base_gdp)
        except (TypeError, ValidationError) as exc:
            raise ConfigError("need --scc, --base-emissions and --base-gdp (or a scenario with them)") from exc
    if delta is None:
        raise ConfigError("need --delta or --scenario")
    dollars, share = scc_damages(delta, damages)
    payload = {"delta_emissions_pct": delta, "scc": damages.scc, "base_emissions": damages.base_emissions,
               "base_gdp": damages.base_gdp, "damages_per_year": dollars, "percent_of_gdp": share,
               "note": "steady-state annual flow; transition path not integrated"}
    write_json(args.out, payload)
    return {"outputs": [str(args.out)], "damages_per_year": dollars, "percent_of_gdp": share}


def cmd_pipeline(args) -> dict:
    out = Path(args.outdir)
    panel = _panel(args)
    shocks = extract_shocks(panel, var=args.var, h=args.h, l=args.l)
    outputs = [write_csv(out / "shocks.csv", shocks)]
    irf = _run_lp(panel, shocks, args)
    outputs.append(write_csv(out / "irf.csv", irf))
    calib = _calib(args)
    scenario, damages = _scenario(args, calib)
    sol, report = _steady_report(calib, scenario, damages, args)
    outputs.append(write_json(out / "steady_report.json", report))
    temp = scenario if scenario.rho < 1 else replace(scenario, rho=args.rho)
    _, path, capital = _transition_frames(calib, temp, args)
    outputs.append(write_csv(out / "transition_path.csv", path))
    outputs.append(write_csv(out / "transition_capital.csv", capital))
    return {"outputs": [str(p) for p in outputs], "peak_irf": float(irf["beta"].max()),
            "emissions_pct": report["emissions_pct"]}


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="defense-emissions", description="Military spending and emissions toolkit")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for any randomised step")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--tol", type=float, default=1e-6, help="terminal tolerance for transitions")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def panel_args(p):
        p.add_argument("--panel", "--input", dest="panel", help="panel CSV (default: shipped synthetic panel)")
        p.add_argument("--schema", help="schema file mapping canonical fields to CSV columns")

    def shock_args(p):
        p.add_argument("--var", choices=("share", "gk", "hbr"), default="share")
        p.add_argument("--h", type=int, default=2)
        p.add_argument("--l", type=int, default=2)

    def lp_args(p, *horizon_flags):
        p.add_argument("--outcome", default="emissions")
        p.add_argument("--horizon", *horizon_flags, dest="horizon", type=int, default=15)
        p.add_argument("--lags", type=int, default=2)
        p.add_argument("--dk-lags", type=int, default=2)
        p.add_argument("--ci-level", type=float, default=0.68)
        p.add_argument("--no-year-fe", action="store_true")
        p.add_argument("--log", action=argparse.BooleanOptionalAction, default=True,
                       help="log outcome (default); --no-log uses levels")
        p.add_argument("--split", choices=("none", "intensity"), default="none",
                       help="intensity: HIGH/LOW emission-intensity split")
        p.add_argument("--spillover", metavar="COUNTRY", help="response of other countries to COUNTRY's shocks")

    def calib_args(p):
        p.add_argument("--calib", help="calibration directory or JSON (default: shipped fixture)")

    def transition_args(p):
        p.add_argument("--T", type=int, default=200)
        p.add_argument("--method", choices=("linear", "nonlinear"), default="linear")

    p = sub.add_parser("extract-shocks", help="Hamilton-filter spending shocks")
    panel_args(p)
    shock_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract_shocks)

    p = sub.add_parser("lp", help="panel local projections")
    panel_args(p)
    lp_args(p, "--T")
    p.add_argument("--shocks", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plotdata", help="also write a long-format CSV for plotting")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("calibrate", help="build a calibration from raw tables")
    calib_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("steady", help="permanent-shock steady state")
    calib_args(p)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("transition", help="perfect-foresight transition path")
    calib_args(p)
    transition_args(p)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--capital-out", help="also write per-industry capital paths")
    p.set_defaults(func=cmd_transition)

    p = sub.add_parser("sweep", help="steady-state emissions over a grid of shock sizes")
    calib_args(p)
    p.add_argument("--grid", default="0:14:0.25", help="start:stop:step in p.p.")
    p.add_argument("--presets", default="baseline,personnel,material")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("damages", help="social-cost-of-carbon damages")
    calib_args(p)
    p.add_argument("--scenario")
    p.add_argument("--delta", type=float, help="emissions change in percent")
    p.add_argument("--scc", type=float)
    p.add_argument("--base-emissions", type=float)
    p.add_argument("--base-gdp", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_damages)

    p = sub.add_parser("pipeline", help="shocks, IRFs, steady state and transition in one run")
    panel_args(p)
    shock_args(p)
    lp_args(p)
    calib_args(p)
    transition_args(p)
    p.add_argument("--scenario", required=True)
    p.add_argument("--rho", type=float, default=0.86, help="persistence for the transition when the scenario is permanent")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    np.random.seed(args.seed)
    try:
        if args.threads < 1 or args.tol <= 0:
            raise ConfigError("--threads must be >= 1 and --tol positive")
        summary = args.func(args)
    except ConfigError as exc:
        return _fail(args.command, "config", exc, EXIT_CONFIG)
    except ValidationError as exc:
        return _fail(args.command, "validation", exc, EXIT_VALIDATION)
    except ConvergenceError as exc:
        return _fail(args.command, "convergence", exc, EXIT_CONVERGENCE)
    print(json.dumps(_jsonable({"status": "ok", "command": args.command, **summary})))
    return EXIT_OK


def _fail(command, category, exc, code) -> int:
    print(f"error: {exc}", file=sys.stderr)
    print(json.dumps({"status": "error", "command": command, "category": category, "message": str(exc)}))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
