"""Command-line entry point exposing all engines.

Subcommands: trace, quantum-trace, phase-diagram, lyapunov-map,
quantum-map, potential, critical, fit, feasibility.  Every run writes its
outputs under --out together with a metadata.json holding the fully
resolved configuration; replaying that file via --config reproduces the
run.  Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__

log = logging.getLogger("dicke")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors instead of argparse's 2
        raise UsageError(message)


def _add_grid_flags(sub, g_lo, g_hi, g_n, eta_lo, eta_hi, eta_n):
    sub.add_argument("--g-tilde-min", type=float, help=f"default {g_lo}")
    sub.add_argument("--g-tilde-max", type=float, help=f"default {g_hi}")
    sub.add_argument("--g-tilde-steps", type=int, help=f"default {g_n}")
    sub.add_argument("--eta-min", type=float, help=f"default {eta_lo}")
    sub.add_argument("--eta-max", type=float, help=f"default {eta_hi}")
    sub.add_argument("--eta-steps", type=int, help=f"default {eta_n}")
    sub.add_argument("--eta-spacing", choices=["linear", "log"],
                     help="default log")


def build_parser() -> _Parser:
    parser = _Parser(prog="dicke", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand")
    # Flags use SUPPRESS defaults so that explicit flags, --config values,
    # and built-in defaults can be merged in that order of precedence.
    kw = {"argument_default": argparse.SUPPRESS}

    common = {"--out": dict(type=str, help="output directory (default dicke-out)"),
              "--config": dict(type=str, help="JSON config (or prior metadata.json)"),
              "--seed": dict(type=int, help="base RNG seed (default 0)"),
              "--workers": dict(type=int, help="worker processes (default 1)")}

    def new_sub(name, help_text):
        sub = subs.add_parser(name, help=help_text, **kw)
        for flag, opts in common.items():
            sub.add_argument(flag, **opts)
        return sub

    sub = new_sub("trace", "integrate one mean-field trajectory, write CSV")
    for flag in ("--g-tilde", "--eta", "--g", "--theta0", "--beta0", "--alpha",
                 "--delta", "--omega", "--t-final", "--tol", "--sample-dt"):
        sub.add_argument(flag, type=float)

    sub = new_sub("quantum-trace", "propagate the exact quantum state, write CSV")
    for flag in ("--g-tilde", "--eta", "--g", "--theta0", "--beta0", "--alpha",
                 "--delta", "--omega", "--t-final", "--eps", "--tau-check",
                 "--sample-dt", "--krylov-tol"):
        sub.add_argument(flag, type=float)
    sub.add_argument("--n-spins", type=int)
    sub.add_argument("--delta-n", type=int)
    sub.add_argument("--ceiling", type=int)

    sub = new_sub("phase-diagram", "classical order-parameter map over (g~, eta)")
    _add_grid_flags(sub, 0.5, 2.5, 41, 0.1, 10.0, 31)
    for flag in ("--theta0", "--beta0", "--t-final", "--tol", "--threshold"):
        sub.add_argument(flag, type=float)
    sub.add_argument("--keep-traces", action="store_true")
    sub.add_argument("--resume", action="store_true")

    sub = new_sub("lyapunov-map", "Lyapunov exponent map over (g~, eta)")
    _add_grid_flags(sub, 0.5, 2.5, 41, 0.1, 10.0, 31)
    for flag in ("--theta0", "--beta0", "--t-total", "--t-transient",
                 "--renorm-dt", "--d0"):
        sub.add_argument(flag, type=float)
    sub.add_argument("--resume", action="store_true")

    sub = new_sub("quantum-map", "entropy/fluctuation/rate map over (g~, eta)")
    _add_grid_flags(sub, 0.5, 2.5, 11, 0.1, 10.0, 9)
    for flag in ("--theta0", "--beta0", "--t-final", "--eps",
                 "--window-t0", "--window-horizon", "--wall-budget-s"):
        sub.add_argument(flag, type=float)
    sub.add_argument("--n-spins", type=int)
    sub.add_argument("--ceiling", type=int)
    sub.add_argument("--fit-target", choices=["sz_var", "svn"])
    sub.add_argument("--resume", action="store_true")

    sub = new_sub("potential", "tabulate the effective 1D potential as CSV")
    sub.add_argument("--regime", choices=["spin", "boson"], required=True)
    for flag in ("--g-tilde", "--theta0", "--beta0", "--scale", "--span"):
        sub.add_argument(flag, type=float)
    sub.add_argument("--points", type=int)

    sub = new_sub("critical", "closed-form and numeric critical coupling as JSON")
    sub.add_argument("--regime", choices=["spin", "boson"], required=True)
    for flag in ("--theta0", "--beta0"):
        sub.add_argument(flag, type=float)

    sub = new_sub("fit", "fit a relaxation rate to a trajectory CSV column")
    sub.add_argument("--input", type=str, required=True)
    sub.add_argument("--column", type=str)
    sub.add_argument("--t-column", type=str)
    sub.add_argument("--kind", choices=["exp", "logistic", "both"])

    sub = new_sub("feasibility", "trapped-ion frequency/dephasing ratios")
    sub.add_argument("--two-g-hz", type=float, required=True,
                     help="2g/(2pi) in Hz")
    sub.add_argument("--gamma-el", type=float, required=True,
                     help="elastic dephasing rate in 1/s")
    sub.add_argument("--eta", type=float, required=True)
    return parser


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    explicit = {k: v for k, v in vars(args).items() if k != "subcommand"}
    cfg = {}
    config_path = explicit.pop("config", None) or defaults.get("config")
    if config_path:
        raw = json.loads(Path(config_path).read_text())
        cfg = raw.get("config", raw)  # accept a prior metadata.json
        cfg.pop("subcommand", None)
        cfg.pop("config", None)
    merged = {**defaults, **cfg, **explicit}
    merged.pop("config", None)
    return merged


def _write_metadata(out: Path, subcommand: str, cfg: dict) -> None:
    from .io import write_json

    write_json(out / "metadata.json", {
        "tool": "dicke",
        "version": __version__,
        "subcommand": subcommand,
        "config": cfg,
    })


def _model_inputs(cfg: dict):
    from .model import resolve_config

    keys = ("g", "delta", "omega", "n_spins", "g_tilde", "eta", "theta0",
            "beta0", "alpha")
    sub = {k: cfg[k] for k in keys if cfg.get(k) is not None}
    return resolve_config(sub)


def _cmd_trace(cfg: dict, out: Path) -> int:
    from .classical import integrate
    from .model import build_initial_classical, to_dimensionless

    params, ic = _model_inputs(cfg)
    view = to_dimensionless(params)
    x0 = build_initial_classical(ic, params)
    traj = integrate(x0, view, t_final=cfg["t_final"], tol=cfg["tol"],
                     sample_dt=cfg["sample_dt"], g=params.g)
    traj.to_csv(out / "trace.csv", out / "trace.json")
    print(f"wrote {out / 'trace.csv'}")
    return 0


def _cmd_quantum_trace(cfg: dict, out: Path) -> int:
    from .model import build_initial_quantum
    from .quantum import propagate_adaptive

    params, ic = _model_inputs(cfg)
    if params.n_spins is None:
        raise ValueError("quantum-trace requires --n-spins")
    psi0 = build_initial_quantum(params, ic, eps=cfg["eps"],
                                 ceiling=int(cfg["ceiling"]))
    traj = propagate_adaptive(
        psi0, params, t_final=cfg["t_final"], eps=cfg["eps"],
        tau_check=cfg["tau_check"], delta_n=int(cfg["delta_n"]),
        sample_dt=cfg["sample_dt"], krylov_tol=cfg["krylov_tol"],
        ceiling=int(cfg["ceiling"]),
    )
    traj.to_csv(out / "quantum_trace.csv", out / "quantum_trace.json")
    print(f"wrote {out / 'quantum_trace.csv'}")
    return 0


def _sweep_plan(cfg: dict, out: Path, task: str, settings_keys: dict):
    from .sweep import SweepPlan

    settings = {dst: cfg[src] for src, dst in settings_keys.items()
                if cfg.get(src) is not None}
    return SweepPlan(
        g_tilde_axis=(cfg["g_tilde_min"], cfg["g_tilde_max"], cfg["g_tilde_steps"]),
        eta_axis=(cfg["eta_min"], cfg["eta_max"], cfg["eta_steps"],
                  cfg["eta_spacing"]),
        task=task,
        output_dir=str(out),
        settings=settings,
        seed=int(cfg["seed"]),
    )


def _run_or_resume(plan, cfg):
    from .sweep import resume_sweep, run_sweep

    if cfg.get("resume"):
        return resume_sweep(plan, workers=int(cfg["workers"]))
    return run_sweep(plan, workers=int(cfg["workers"]))


def _cmd_phase_diagram(cfg: dict, out: Path) -> int:
    from .sweep import boundary_extract

    plan = _sweep_plan(cfg, out, "classical-phase", {
        "theta0": "theta0", "beta0": "beta0", "t_final": "t_final",
        "tol": "tol", "threshold": "threshold", "keep_traces": "keep_traces",
    })
    result = _run_or_resume(plan, cfg)
    threshold = plan.resolved_settings()["threshold"]
    curve = boundary_extract(result, threshold=threshold)
    curve.to_csv(out / "boundary.csv")
    print(f"wrote {out / 'records.csv'} ({len(result.records)} points, "
          f"{result.wall_time:.1f}s) and boundary.csv")
    for note in curve.notes:
        log.info("boundary: %s", note)
    return 0


def _cmd_lyapunov_map(cfg: dict, out: Path) -> int:
    plan = _sweep_plan(cfg, out, "lyapunov-map", {
        "theta0": "theta0", "beta0": "beta0", "t_total": "t_total",
        "t_transient": "t_transient", "renorm_dt": "renorm_dt", "d0": "d0",
    })
    result = _run_or_resume(plan, cfg)
    print(f"wrote {out / 'records.csv'} ({len(result.records)} points, "
          f"{result.wall_time:.1f}s)")
    return 0


def _cmd_quantum_map(cfg: dict, out: Path) -> int:
    plan = _sweep_plan(cfg, out, "quantum-map", {
        "theta0": "theta0", "beta0": "beta0", "t_final": "t_final",
        "eps": "eps", "n_spins": "n_spins", "ceiling": "ceiling",
        "window_t0": "window_t0", "window_horizon": "window_horizon",
        "fit_target": "fit_target", "wall_budget_s": "wall_budget_s",
    })
    result = _run_or_resume(plan, cfg)
    excluded = sum(1 for r in result.records if r.status == "excluded")
    print(f"wrote {out / 'records.csv'} ({len(result.records)} points, "
          f"{excluded} excluded, {result.wall_time:.1f}s)")
    return 0


def _cmd_potential(cfg: dict, out: Path) -> int:
    from .model import InitialCondition
    from .potential import Regime, potential_curve

    regime = Regime.SPIN_DOMINATED if cfg["regime"] == "spin" else Regime.BOSON_DOMINATED
    ic = InitialCondition(theta0=cfg["theta0"], beta0=cfg["beta0"])
    curve = potential_curve(regime, ic, g_tilde=cfg["g_tilde"],
                            scale=cfg["scale"], n_points=int(cfg["points"]),
                            span=cfg.get("span"))
    curve.to_csv(out / "potential.csv")
    print(f"wrote {out / 'potential.csv'}")
    return 0


def _cmd_critical(cfg: dict, out: Path) -> int:
    from .io import write_json
    from .model import InitialCondition
    from .potential import (
        Regime,
        critical_coupling_boson,
        critical_coupling_spin,
        numeric_critical_coupling,
    )

    if cfg["regime"] == "spin":
        regime = Regime.SPIN_DOMINATED
        closed = critical_coupling_spin(cfg["theta0"])
    else:
        regime = Regime.BOSON_DOMINATED
        closed = critical_coupling_boson(cfg["beta0"])
    ic = InitialCondition(theta0=cfg["theta0"], beta0=cfg["beta0"])
    numeric = numeric_critical_coupling(regime, ic)
    payload = {
        "closed_form": closed,
        "numeric": numeric,
        "regime": cfg["regime"],
        "initial": {"theta0": cfg["theta0"], "beta0": cfg["beta0"]},
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    write_json(out / "critical.json", payload)
    return 0


def _cmd_fit(cfg: dict, out: Path) -> int:
    from .analysis import fit_exponential_saturation, fit_translated_logistic
    from .io import numeric_column, read_csv_columns, write_json

    cols = read_csv_columns(cfg["input"])
    t = numeric_column(cols, cfg["t_column"], cfg["input"])
    y = numeric_column(cols, cfg["column"], cfg["input"])
    results = {}
    if cfg["kind"] in ("exp", "both"):
        results["exponential_saturation"] = fit_exponential_saturation(t, y).to_dict()
    if cfg["kind"] in ("logistic", "both"):
        results["translated_logistic"] = fit_translated_logistic(t, y).to_dict()
    payload = {"input": str(cfg["input"]), "column": cfg["column"], "fits": results}
    print(json.dumps(payload, indent=2, sort_keys=True))
    write_json(out / "fit.json", payload)
    return 0


def _cmd_feasibility(cfg: dict, out: Path) -> int:
    from .analysis import feasibility_ratios
    from .io import write_json

    g = math.pi * cfg["two_g_hz"]  # 2g = 2*pi * (2g/(2*pi) in Hz)
    d_ratio, o_ratio = feasibility_ratios(g, cfg["gamma_el"], cfg["eta"])
    payload = {
        "two_g_hz": cfg["two_g_hz"],
        "gamma_el": cfg["gamma_el"],
        "eta": cfg["eta"],
        "delta_over_gamma_el": d_ratio,
        "omega_over_gamma_el": o_ratio,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    write_json(out / "feasibility.json", payload)
    return 0


DEFAULTS = {
    "trace": {"g_tilde": None, "eta": None, "g": 1.0, "delta": None,
              "omega": None, "theta0": 0.0, "beta0": None, "alpha": None,
              "t_final": 100.0, "tol": 1e-10, "sample_dt": 0.1},
    "quantum-trace": {"g_tilde": None, "eta": None, "g": 1.0, "delta": None,
                      "omega": None, "theta0": 0.0, "beta0": None,
                      "alpha": None, "n_spins": None, "t_final": 100.0,
                      "eps": 1e-6, "tau_check": 1.0, "delta_n": 8,
                      "sample_dt": 0.1, "krylov_tol": 1e-10, "ceiling": 4096},
    "phase-diagram": {"g_tilde_min": 0.5, "g_tilde_max": 2.5, "g_tilde_steps": 41,
                      "eta_min": 0.1, "eta_max": 10.0, "eta_steps": 31,
                      "eta_spacing": "log", "theta0": None, "beta0": None,
                      "t_final": None, "tol": None, "threshold": None,
                      "keep_traces": None, "resume": False},
    "lyapunov-map": {"g_tilde_min": 0.5, "g_tilde_max": 2.5, "g_tilde_steps": 41,
                     "eta_min": 0.1, "eta_max": 10.0, "eta_steps": 31,
                     "eta_spacing": "log", "theta0": None, "beta0": None,
                     "t_total": None, "t_transient": None, "renorm_dt": None,
                     "d0": None, "resume": False},
    "quantum-map": {"g_tilde_min": 0.5, "g_tilde_max": 2.5, "g_tilde_steps": 11,
                    "eta_min": 0.1, "eta_max": 10.0, "eta_steps": 9,
                    "eta_spacing": "log", "theta0": None, "beta0": None,
                    "t_final": None, "eps": None, "n_spins": None,
                    "ceiling": None, "window_t0": None, "window_horizon": None,
                    "fit_target": None, "wall_budget_s": None, "resume": False},
    "potential": {"regime": None, "g_tilde": 1.4, "theta0": 0.0, "beta0": 1.0,
                  "scale": 1.0, "points": 401, "span": None},
    "critical": {"regime": None, "theta0": 0.0, "beta0": 1.0},
    "fit": {"input": None, "column": "svn", "t_column": "t", "kind": "both"},
    "feasibility": {"two_g_hz": None, "gamma_el": None, "eta": None},
}

COMMANDS = {
    "trace": _cmd_trace,
    "quantum-trace": _cmd_quantum_trace,
    "phase-diagram": _cmd_phase_diagram,
    "lyapunov-map": _cmd_lyapunov_map,
    "quantum-map": _cmd_quantum_map,
    "potential": _cmd_potential,
    "critical": _cmd_critical,
    "fit": _cmd_fit,
    "feasibility": _cmd_feasibility,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except SystemExit as err:  # --help / --version
        return int(err.code or 0)
    if args.subcommand is None:
        parser.print_help()
        return 1
    try:
        base = {"out": "dicke-out", "seed": 0, "workers": 1}
        cfg = _resolve(args, {**base, **DEFAULTS[args.subcommand]})
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        _write_metadata(out, args.subcommand, cfg)
        return COMMANDS[args.subcommand](cfg, out)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
