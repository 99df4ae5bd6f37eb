"""Command-line front end.

Subcommands: rates, loop-spectrum, loop-sim, spectrum, fig2, trajectories.
All frequencies and times are in atomic-lifetime units (spontaneous decay
rate = 1); there is no unit conversion.  Physical parameters (eta, eps,
g or lambda, L) are never defaulted silently; solver and grid controls
have documented defaults that are echoed into the run manifest.

Exit codes: 0 success, 1 I/O failure, 2 usage, 3 config parse error,
4 parameter domain error, 5 loop instability or runtime divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, InstabilityError, ParameterError, StepSizeError
from .bloch import AtomState
from .feedback import rates, steady_state
from .loop import (
    LoopConfig,
    LoopFilter,
    homodyne_spectrum,
    in_loop_spectrum,
    lambda_from_gain,
    gain_from_lambda,
    simulate_classical_loop,
    squeezing_from_lambda,
    welch_spectrum,
)
from .output import load_config, reject_unknown, take, write_csv, write_manifest
from .spectra import (
    analytic_power_spectrum,
    comparison_report,
    model_rates_and_steady_state,
    numerical_power_spectrum,
)
from .squeezed_bath import free_rates, free_steady_state, photon_parameters
from .trajectories import TrajectoryConfig, ensemble_current_psd, run_ensemble

EXIT_IO = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DOMAIN = 4
EXIT_UNSTABLE = 5


def _outdir(args) -> Path:
    base = args.outdir or os.environ.get("INLOOP_OUTDIR", ".")
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _filter_from(kind: str, tau: float, time_constant: float | None) -> LoopFilter:
    if kind == "rectangular":
        return LoopFilter.rectangular(tau)
    if kind == "exponential":
        return LoopFilter.exponential(tau, time_constant)
    if kind == "single_pole":
        return LoopFilter.single_pole(tau)
    raise ParameterError(f"unsupported filter kind {kind!r}")


def cmd_rates(args) -> int:
    report: dict = {}
    feedback_args = [args.lam, args.g]
    if any(v is not None for v in feedback_args):
        if sum(v is not None for v in feedback_args) != 1:
            raise ParameterError("give exactly one of --lambda or --g for the feedback model")
        if args.eps is None:
            raise ParameterError("the feedback model needs --eps")
        lam = args.lam if args.lam is not None else lambda_from_gain(args.g, args.eta)
        g = args.g if args.g is not None else gain_from_lambda(lam, args.eta)
        rs = rates(lam, args.eta, args.eps)
        report["feedback"] = {
            "lambda": lam,
            "g": g,
            "S_in": squeezing_from_lambda(lam, args.eta, args.eps),
            "z_ss": steady_state(lam, args.eta, args.eps).z,
            **rs.as_dict(),
        }
    if args.level is not None:
        rs = free_rates(args.eta, args.level)
        n, m = photon_parameters(args.level)
        report["free"] = {
            "L": args.level,
            "N": n,
            "M": m,
            "z_ss": free_steady_state(args.eta, args.level).z,
            **rs.as_dict(),
        }
    if not report:
        raise ParameterError("nothing to report: give --lambda/--g (with --eps) and/or --L")
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_loop_spectrum(args) -> int:
    filt = _filter_from(args.filter, args.tau, args.time_constant)
    cfg = LoopConfig(g=args.g, eps=args.eps, eta=args.eta, filter=filt)
    omega = np.linspace(args.omega_min, args.omega_max, args.points)
    values = in_loop_spectrum(cfg, omega) if args.quantity == "in" else homodyne_spectrum(cfg, omega)
    out = _outdir(args) / args.out
    write_csv(out, {"omega": omega, "value": values}, comments=[f"quantity = S_{args.quantity}"])
    print(f"wrote {out}")
    return 0


def cmd_loop_sim(args) -> int:
    config = load_config(args.config)
    g = take(config, "g", float, required=True)
    eps = take(config, "eps", float, required=True)
    eta = take(config, "eta", float, required=True)
    kind = take(config, "filter", str, default="rectangular")
    tau = take(config, "tau", float, required=True)
    time_constant = take(config, "time_constant", float)
    dt = take(config, "dt", float, required=True)
    duration = take(config, "duration", float, required=True)
    config_seed = take(config, "seed", int)
    seed = args.seed if args.seed is not None else config_seed
    nperseg = take(config, "nperseg", int)
    emit_records = take(config, "emit_records", bool, default=False)
    reject_unknown(config, "loop-sim")
    if seed is None:
        raise ConfigError("stochastic run needs a seed (--seed or config key)")

    cfg = LoopConfig(g=g, eps=eps, eta=eta, filter=_filter_from(kind, tau, time_constant))
    record = simulate_classical_loop(cfg, dt, duration, seed)
    outdir = _outdir(args)
    outputs = []

    for name, series in (("psd_xin.csv", record.x_in), ("psd_current.csv", record.current)):
        omega, psd = welch_spectrum(series, dt, nperseg=nperseg)
        write_csv(outdir / name, {"omega": omega, "value": psd})
        outputs.append(name)
    if emit_records:
        for name, series in (("xin.csv", record.x_in), ("current.csv", record.current)):
            write_csv(outdir / name, {"t": record.times, "value": series})
            outputs.append(name)

    manifest_cfg = {
        "g": g, "eps": eps, "eta": eta, "filter": kind, "tau": tau,
        "dt": dt, "duration": duration, "seed": seed,
        "emit_records": emit_records,
    }
    if time_constant is not None:
        manifest_cfg["time_constant"] = time_constant
    if nperseg is not None:
        manifest_cfg["nperseg"] = nperseg
    write_manifest(outdir / "loop_manifest.json", "loop-sim", manifest_cfg, outputs)
    print(f"wrote {', '.join(outputs)} and loop_manifest.json in {outdir}")
    return 0


def cmd_spectrum(args) -> int:
    kw = {"eta": args.eta}
    if args.model == "feedback":
        if args.eps is None:
            raise ParameterError("the feedback model needs --eps")
        if (args.lam is None) == (args.g is None):
            raise ParameterError("give exactly one of --lambda or --g")
        kw["eps"] = args.eps
        kw["lam"] = args.lam if args.lam is not None else lambda_from_gain(args.g, args.eta)
    else:
        if args.level is None:
            raise ParameterError("the free model needs --L")
        kw["level"] = args.level
    rs, z_ss = model_rates_and_steady_state(args.model, **kw)
    grid = np.linspace(-args.omega_max, args.omega_max, args.points)
    if args.method == "analytic":
        spec = analytic_power_spectrum(rs, args.eta, grid)
    else:

        class _Gen:
            def rate_set(self):
                return rs

            def steady_state(self):
                return AtomState(0.0, 0.0, z_ss)

        tau_max = args.tau_max or 200.0 / min(rs.gamma_x, rs.gamma_y)
        spec = numerical_power_spectrum(_Gen(), args.eta, grid, tau_max, args.dtau)
    out = _outdir(args) / args.out
    write_csv(out, {"omega": spec.grid, "value": spec.values},
              comments=[f"model = {args.model}", f"method = {args.method}"])
    print(f"wrote {out}")
    return 0


def cmd_fig2(args) -> int:
    report = comparison_report(eta=args.eta, eps=args.eps)
    out = _outdir(args) / args.out
    write_csv(
        out,
        {
            "omega": report.grid,
            "P_inloop": report.p_inloop,
            "P_free": report.p_free,
            "P_natural": report.p_natural,
        },
        comments=[
            "natural curve: half-width 0.5 Lorentzian peak-matched to P_inloop(0)",
            f"natural_scale = {report.natural_scale!r}",
        ],
    )
    print(json.dumps(report.rate_table(), indent=2, sort_keys=True))
    print(f"wrote {out}")
    return 0


def cmd_trajectories(args) -> int:
    config = load_config(args.config)
    g = take(config, "g", float, required=True)
    eps = take(config, "eps", float, required=True)
    eta = take(config, "eta", float, required=True)
    kind = take(config, "filter", str, default="rectangular")
    tau = take(config, "tau", float, required=True)
    time_constant = take(config, "time_constant", float)
    dt = take(config, "dt", float, required=True)
    duration = take(config, "duration", float, required=True)
    n_traj = take(config, "n_traj", int, required=True)
    config_seed = take(config, "seed", int)
    seed = args.seed if args.seed is not None else config_seed
    x0 = take(config, "x0", float, default=0.0)
    y0 = take(config, "y0", float, default=0.0)
    z0 = take(config, "z0", float, default=-1.0)
    record_stride = take(config, "record_stride", int)
    record_current = take(config, "record_current", bool, default=False)
    phi_guard = take(config, "phi_guard", float, default=1e3)
    nperseg = take(config, "nperseg", int)
    reject_unknown(config, "trajectories")
    if seed is None:
        raise ConfigError("stochastic run needs a seed (--seed or config key)")

    loop_cfg = LoopConfig(g=g, eps=eps, eta=eta, filter=_filter_from(kind, tau, time_constant))
    cfg = TrajectoryConfig(
        loop=loop_cfg,
        dt=dt,
        duration=duration,
        n_traj=n_traj,
        seed=seed,
        initial_state=AtomState(x0, y0, z0),
        record_stride=record_stride,
        record_current=record_current,
        phi_guard=phi_guard,
    )
    result = run_ensemble(cfg)
    outdir = _outdir(args)
    outputs = ["means.csv"]
    write_csv(
        outdir / "means.csv",
        {
            "t": result.times,
            "x": result.mean[:, 0],
            "y": result.mean[:, 1],
            "z": result.mean[:, 2],
            "se_x": result.stderr[:, 0],
            "se_y": result.stderr[:, 1],
            "se_z": result.stderr[:, 2],
        },
    )
    if record_current:
        omega, psd = ensemble_current_psd(result, nperseg=nperseg)
        write_csv(outdir / "current_psd.csv", {"omega": omega, "value": psd})
        outputs.append("current_psd.csv")

    manifest_cfg = {
        "g": g, "eps": eps, "eta": eta, "filter": kind, "tau": tau,
        "dt": dt, "duration": duration, "n_traj": n_traj, "seed": seed,
        "x0": x0, "y0": y0, "z0": z0,
        "record_stride": cfg.stride(),
        "record_current": record_current, "phi_guard": phi_guard,
    }
    if time_constant is not None:
        manifest_cfg["time_constant"] = time_constant
    if nperseg is not None:
        manifest_cfg["nperseg"] = nperseg
    write_manifest(outdir / "trajectories_manifest.json", "trajectories", manifest_cfg, outputs)
    print(f"wrote {', '.join(outputs)} and trajectories_manifest.json in {outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inloop",
        description="Two-level atom driven by in-loop squeezed light: "
        "decay rates, loop spectra, fluorescence spectra and conditioned trajectories.",
    )
    parser.add_argument("--version", action="version", version=f"inloop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="decay-rate report for one or both models (JSON)")
    p.add_argument("--eta", type=float, required=True, help="mode matching in [0, 1]")
    p.add_argument("--eps", type=float, help="detector efficiency in (0, 1]")
    p.add_argument("--lambda", dest="lam", type=float, help="feedback strength")
    p.add_argument("--g", type=float, help="round-loop gain (alternative to --lambda)")
    p.add_argument("--L", dest="level", type=float, help="free-bath X-quadrature level")
    p.add_argument("--json-out", help="write the report to a file instead of stdout")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("loop-spectrum", help="analytic in-loop or photocurrent spectrum (CSV)")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--filter", default="rectangular",
                   choices=["rectangular", "exponential", "single_pole"])
    p.add_argument("--tau", type=float, required=True, help="filter delay / time constant")
    p.add_argument("--time-constant", type=float, help="decay constant of the exponential filter")
    p.add_argument("--quantity", choices=["in", "hom"], default="in")
    p.add_argument("--omega-min", type=float, default=0.0)
    p.add_argument("--omega-max", type=float, required=True)
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--out", default="loop_spectrum.csv")
    p.add_argument("--outdir", help="output directory (default $INLOOP_OUTDIR or .)")
    p.set_defaults(func=cmd_loop_spectrum)

    p = sub.add_parser("loop-sim", help="Monte Carlo loop simulation (CSV + manifest)")
    p.add_argument("--config", required=True, help="key = value or JSON config file")
    p.add_argument("--seed", type=int, help="seed (mandatory here or in the config)")
    p.add_argument("--outdir", help="output directory (default $INLOOP_OUTDIR or .)")
    p.set_defaults(func=cmd_loop_sim)

    p = sub.add_parser("spectrum", help="fluorescence power spectrum of one model (CSV)")
    p.add_argument("--model", choices=["feedback", "free"], required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--g", type=float)
    p.add_argument("--L", dest="level", type=float)
    p.add_argument("--method", choices=["analytic", "numerical"], default="analytic")
    p.add_argument("--tau-max", type=float, help="transform cutoff (numerical method)")
    p.add_argument("--dtau", type=float, default=1e-3, help="transform step (numerical method)")
    p.add_argument("--omega-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=1201)
    p.add_argument("--out", default="spectrum.csv")
    p.add_argument("--outdir", help="output directory (default $INLOOP_OUTDIR or .)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fig2", help="paired in-loop / free-squeezing spectra comparison (CSV)")
    p.add_argument("--eta", type=float, default=0.8)
    p.add_argument("--eps", type=float, default=0.95)
    p.add_argument("--out", default="fig2.csv")
    p.add_argument("--outdir", help="output directory (default $INLOOP_OUTDIR or .)")
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("trajectories", help="conditioned-trajectory ensemble (CSV + manifest)")
    p.add_argument("--config", required=True, help="key = value or JSON config file")
    p.add_argument("--seed", type=int, help="seed (mandatory here or in the config)")
    p.add_argument("--outdir", help="output directory (default $INLOOP_OUTDIR or .)")
    p.set_defaults(func=cmd_trajectories)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InstabilityError, StepSizeError) as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
