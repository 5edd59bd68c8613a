"""Command-line front end.

Subcommands map one-to-one onto the library's experiments:

  ss           steady state as JSON
  multiplier   the eight analytic multiplier cells for a given mu
  determinacy  persistence thresholds per regime and preference kind
  sweep        multiplier along a q / debt / mu grid (CSV)
  simulate     nonlinear recession path (CSV)
  experiment   recession + debt-plan multiplier report (JSON)
  debt-levels  rerun the experiment across initial debt ratios (CSV)
  fit-data     OLS of real rates on debt ratios (JSON)
  calibrate    (beta, q) from the fitted line (JSON)
  repro        recompute headline results vs their references

Options may come from a JSON config (--config) with command-line flags
taking precedence; the effective configuration is echoed to stderr.
Exit status: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import repro as repro_mod
from .calibration import Calibration
from .empirics import (
    BUNDLED_PANEL,
    calibrate_beta_q,
    calibration_report,
    fit_line,
    load_panel,
)
from .errors import DomainError
from .experiments import (
    calibrate_shock,
    debt_level_experiment,
    debt_level_results_to_csv,
    debt_multiplier_experiment,
    run_experiment_cell,
    scenario_shock,
)
from .linear import (
    Instrument,
    Regime,
    analytic_multiplier,
    determinacy_threshold,
    sweep_multiplier,
    sweep_to_csv,
)
from .simulation import FiscalPlan, ShockSpec, solve_path
from .steady_state import solve_steady_state

CONFIG_KEYS = {"calibration", "shock", "plan", "sweep", "horizon", "mu", "out"}


def _round10(value):
    """Normalize floats to 10 significant digits for deterministic output."""
    if isinstance(value, float):
        return float(f"{value:.10g}")
    if isinstance(value, dict):
        return {k: _round10(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round10(v) for v in value]
    return value


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json_dump(data, out: str | None) -> None:
    _emit(json.dumps(_round10(data), indent=2), out)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return data


def _calibration(args, config: dict) -> Calibration:
    data = dict(config.get("calibration", {}))
    overrides = {
        "pref": args.pref, "q": args.q, "beta": args.beta,
        "debt_to_gdp": args.by, "theta": args.theta,
        "epsilon": args.epsilon, "alpha": args.alpha, "sigma": args.sigma,
        "phi_pi": args.phi_pi, "phi_y": args.phi_y, "L_bar": args.lbar,
        "eta": args.eta,
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    calib = Calibration.from_dict(data)
    if calib.eta is None:
        calib = calib.with_eta_pinned()
    print("calibration: " + calib.to_json(), file=sys.stderr)
    return calib


def _add_calibration_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--pref", choices=["loglog", "ghh"],
                        help="preference kind")
    parser.add_argument("--q", type=float, help="survival probability")
    parser.add_argument("--beta", type=float, help="discount factor")
    parser.add_argument("--by", type=float,
                        help="steady-state debt-to-GDP, quarterly basis")
    parser.add_argument("--theta", type=float, help="goods elasticity")
    parser.add_argument("--epsilon", type=float, help="GHH curvature")
    parser.add_argument("--alpha", type=float, help="price-fixity probability")
    parser.add_argument("--sigma", type=float, help="labor output elasticity")
    parser.add_argument("--phi-pi", dest="phi_pi", type=float,
                        help="rule inflation response")
    parser.add_argument("--phi-y", dest="phi_y", type=float,
                        help="rule output response")
    parser.add_argument("--lbar", type=float, help="steady-state hours target")
    parser.add_argument("--eta", type=float,
                        help="labor disutility weight (default: pinned from lbar)")
    parser.add_argument("--out", help="output file (default: stdout)")


def _plan_from(args, config: dict) -> FiscalPlan:
    block = dict(config.get("plan", {}))
    kind = args.plan if args.plan is not None else block.get("kind", "none")
    step = args.step if args.step is not None else block.get("step", 0.02)
    revert = args.revert if args.revert is not None else block.get("revert", 9)
    return FiscalPlan(kind=kind, debt_step=step, revert_period=revert)


def _grid(spec: str) -> list[float]:
    """Parse 'a,b,c' or 'start:stop:n' into a list of floats."""
    if ":" in spec:
        start, stop, n = spec.split(":")
        n = int(n)
        if n < 2:
            raise ValueError("grid must have at least 2 points")
        step = (float(stop) - float(start)) / (n - 1)
        return [float(start) + k * step for k in range(n)]
    return [float(v) for v in spec.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_ss(args) -> int:
    config = _load_config(args.config)
    calib = _calibration(args, config)
    _json_dump(solve_steady_state(calib).to_dict(), args.out)
    return 0


def _cmd_multiplier(args) -> int:
    config = _load_config(args.config)
    calib = _calibration(args, config)
    mu = args.mu if args.mu is not None else config.get("mu")
    if mu is None:
        raise ValueError("--mu is required (no default persistence)")
    table = {}
    for instrument in Instrument:
        for regime in Regime:
            value = analytic_multiplier(calib, mu, instrument, regime)
            table[f"{instrument.value}_{regime.value}"] = value
    _json_dump({"pref": calib.pref.value, "mu": mu, "multipliers": table},
               args.out)
    return 0


def _cmd_determinacy(args) -> int:
    config = _load_config(args.config)
    calib = _calibration(args, config)
    regimes = [Regime.parse(args.regime)] if args.regime else list(Regime)
    out = {}
    for regime in regimes:
        threshold = determinacy_threshold(calib, regime)
        out[regime.value] = {
            "threshold": threshold,
            "threshold_2dp": int(threshold * 100) / 100.0,
        }
    _json_dump({"pref": calib.pref.value, "thresholds": out}, args.out)
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args.config)
    calib = _calibration(args, config)
    block = dict(config.get("sweep", {}))
    axis = args.axis or block.get("axis")
    grid = _grid(args.grid) if args.grid else block.get("grid")
    instrument = args.instrument or block.get("instrument", "debt")
    regime = args.regime or block.get("regime", "normal")
    mu = args.mu if args.mu is not None else block.get("mu", config.get("mu"))
    if axis is None or grid is None:
        raise ValueError("--axis and --grid are required")
    rows = sweep_multiplier(calib, axis, grid, instrument, regime, mu=mu)
    _emit(sweep_to_csv(rows), args.out)
    return 0


def _cmd_simulate(args) -> int:
    config = _load_config(args.config)
    calib = _calibration(args, config)
    shock_block = dict(config.get("shock", {}))
    horizon = args.horizon or config.get("horizon", 200)
    length = args.length or shock_block.get("length", 8)
    target = args.target_drop
    if target is None:
        target = shock_block.get("target_drop")
    growth = args.growth if args.growth is not None else shock_block.get("growth")
    if growth is not None and target is not None:
        raise ValueError("give either --target-drop or --growth, not both")
    if growth is not None:
        shocks = ShockSpec.constant_growth(growth, length)
    elif target is not None:
        shocks = calibrate_shock(calib, target, length, horizon=horizon,
                                 track_natural_rate=not args.no_track)
    else:
        shocks = ShockSpec.none()
    plan = _plan_from(args, config)
    path = solve_path(calib, shocks, plan, horizon=horizon,
                      track_natural_rate=not args.no_track)
    _emit(path.to_csv(), args.out)
    return 0


def _cmd_experiment(args) -> int:
    config = _load_config(args.config)
    calib = _calibration(args, config)
    if args.plan is None or args.plan == "none":
        raise ValueError("--plan temporary|permanent is required")
    horizon = args.horizon or config.get("horizon", 200)
    scenario = args.scenario or "zlb"
    step = args.step if args.step is not None else 0.0005
    length = args.length or 8
    shocks = scenario_shock(calib, scenario, length, horizon=horizon,
                            track_natural_rate=not args.no_track)
    if args.plan == "temporary":
        plan = FiscalPlan.temporary(step, length + 1 if args.revert is None else args.revert)
    else:
        plan = FiscalPlan.permanent(step)
    report = debt_multiplier_experiment(calib, shocks, plan, horizon=horizon,
                                        k=args.pv_quarters,
                                        track_natural_rate=not args.no_track)
    payload = report.to_dict()
    payload.update({"pref": calib.pref.value, "q": calib.q,
                    "scenario": scenario, "plan": args.plan,
                    "debt_step": step})
    _json_dump(payload, args.out)
    return 0


def _cmd_debt_levels(args) -> int:
    config = _load_config(args.config)
    calib = _calibration(args, config)
    levels = _grid(args.levels) if args.levels else [0.60, 1.12, 1.50]
    horizon = args.horizon or config.get("horizon", 200)
    step = args.step if args.step is not None else 0.02
    revert = args.revert if args.revert is not None else 9
    results = debt_level_experiment(
        calib, levels, target_output_drop=args.target_drop or 0.04,
        recession_length=args.length or 8,
        plan=FiscalPlan.temporary(step, revert), horizon=horizon,
        track_natural_rate=not args.no_track, jobs=args.jobs,
    )
    _emit(debt_level_results_to_csv(results), args.out)
    return 0


def _cmd_fit_data(args) -> int:
    panel = load_panel(args.data or BUNDLED_PANEL)
    line = fit_line(panel)
    _json_dump(line.to_dict(), args.out)
    return 0


def _cmd_calibrate(args) -> int:
    panel = load_panel(args.data or BUNDLED_PANEL)
    line = fit_line(panel)
    pref = args.pref or "loglog"
    beta, q = calibrate_beta_q(line, pref)
    _json_dump(calibration_report(line, beta, q, pref), args.out)
    return 0


def _cmd_repro(args) -> int:
    report = repro_mod.run_repro(jobs=args.jobs)
    color = sys.stdout.isatty() and not os.environ.get("NO_COLOR")
    sys.stdout.write(repro_mod.report_text(report, color=color))
    if args.out:
        Path(args.out).write_text(json.dumps(_round10(report.to_dict()), indent=2))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="olgnk",
        description="OLG New Keynesian debt-multiplier toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        _add_calibration_flags(p)
        return p

    add("ss", _cmd_ss, "steady state (JSON)")

    p = add("multiplier", _cmd_multiplier, "analytic multipliers (JSON)")
    p.add_argument("--mu", type=float, help="short-run persistence")

    p = add("determinacy", _cmd_determinacy, "determinacy thresholds (JSON)")
    p.add_argument("--regime", choices=["normal", "zlb"])

    p = add("sweep", _cmd_sweep, "multiplier sweep (CSV)")
    p.add_argument("--axis", choices=["q", "debt_to_gdp", "mu"])
    p.add_argument("--grid", help="'a,b,c' or 'start:stop:n'")
    p.add_argument("--mu", type=float)
    p.add_argument("--instrument", choices=["debt", "spending"])
    p.add_argument("--regime", choices=["normal", "zlb"])

    def add_sim_flags(p, with_plan=True):
        p.add_argument("--horizon", type=int)
        p.add_argument("--length", type=int, help="recession length (quarters)")
        p.add_argument("--target-drop", dest="target_drop", type=float,
                       help="impact output drop to calibrate the shock to")
        p.add_argument("--no-track", dest="no_track", action="store_true",
                       help="freeze the rule intercept (no natural-rate term)")
        if with_plan:
            p.add_argument("--step", type=float,
                           help="debt step, annualized ratio points")
            p.add_argument("--revert", type=int, help="tax-restoring period")

    p = add("simulate", _cmd_simulate, "nonlinear path (CSV)")
    add_sim_flags(p)
    p.add_argument("--growth", type=float,
                   help="shifter growth during the window (alternative to target)")
    p.add_argument("--plan", choices=["none", "temporary", "permanent"])

    p = add("experiment", _cmd_experiment, "debt multiplier report (JSON)")
    add_sim_flags(p)
    p.add_argument("--plan", choices=["temporary", "permanent"])
    p.add_argument("--scenario", choices=["normal", "zlb"])
    p.add_argument("--pv-quarters", dest="pv_quarters", type=int, default=8)

    p = add("debt-levels", _cmd_debt_levels, "initial-debt-level sweep (CSV)")
    add_sim_flags(p)
    p.add_argument("--levels", help="annualized debt ratios, e.g. '0.6,1.12,1.5'")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("fit-data", help="OLS fit of the country panel (JSON)")
    p.set_defaults(func=_cmd_fit_data)
    p.add_argument("--data", help="panel CSV (default: bundled synthetic panel)")
    p.add_argument("--out")

    p = sub.add_parser("calibrate", help="calibrate (beta, q) from data (JSON)")
    p.set_defaults(func=_cmd_calibrate)
    p.add_argument("--data")
    p.add_argument("--pref", choices=["loglog", "ghh"])
    p.add_argument("--out")

    p = sub.add_parser("repro", help="recompute headline results vs references")
    p.set_defaults(func=_cmd_repro)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write the JSON report here")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
