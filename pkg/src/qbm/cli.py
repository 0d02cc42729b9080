"""Command-line interface: ``qbm compute|figure|sweep|simulate|selftest``.

Parameters come from flags or from a JSON file given with ``--config``
(keys named like the flags, with underscores); flags override the file.

Exit codes: 0 success, 1 selftest failure, 2 configuration error,
3 quadrature convergence failure, 4 non-monotone transition along a sweep.
"""
import argparse
import json
import math
import shlex
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from qbm import __version__
from qbm.errors import ConfigError, ConvergenceError, InvariantError, NonMonotoneFlip, QbmError
from qbm.model import Ohmic, PhysicalInputs, ReducedParams, SingleRelaxation, derive_reduced
from qbm.quadrature import TemperatureMode
from qbm.routes import ROUTES, evaluate_series
from qbm.series import MsdSeries, format_float, time_grid, to_csv, to_json

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_FLIP = 0, 1, 2, 3, 4

DEFAULTS = {
    "route": "exact",
    "kernel": "ohmic",
    "tau": None,
    "mode": "full_quantum",
    "gamma": 1.0,
    "omega_c": 0.0,
    "omega_th": 1.0,
    "mass": 1.0,
    "hbar": 1.0,
    "charge": None,
    "field": None,
    "light_speed": 1.0,
    "temperature": None,
    "k_boltzmann": 1.0,
    "t_start": 0.0,
    "t_end": 10.0,
    "n_points": 256,
    "spacing": "linear",
    "format": None,
    "output": None,
    "seed": 0,
    "n_particles": 10_000,
    "dt": None,
    "printed_offset": False,
}

# Figure presets: (route, omega_c, omega_th, kernel, quadrature mode)
FIGURES = {
    1: ("high_t", 0.1, 100.0, "ohmic", None),
    2: ("high_t", 10.0, 100.0, "ohmic", None),
    3: ("low_t", 0.1, 0.01, "ohmic", None),
    4: ("low_t", 10.0, 0.01, "ohmic", None),
    5: ("quadrature", 0.1, 100.0, "srt", "high_t"),
    6: ("quadrature", 10.0, 100.0, "srt", "high_t"),
    7: ("quadrature", 0.1, 0.01, "srt", "low_t"),
    8: ("quadrature", 10.0, 0.01, "srt", "low_t"),
}
FIGURE_TAU = 0.1
FIGURE_T_END = 10.0
FIGURE_POINTS = 1024


@dataclass
class RunConfig:
    route: str
    kernel: str
    tau: Optional[float]
    mode: str
    params: ReducedParams
    t_start: float
    t_end: float
    n_points: int
    spacing: str
    output: Optional[str]
    format: str
    seed: int
    n_particles: int
    dt: Optional[float]
    printed_offset: bool

    def kernel_model(self):
        if self.kernel == "ohmic":
            return Ohmic(self.params.gamma)
        return SingleRelaxation(self.params.gamma, self.tau)

    def times(self):
        try:
            return time_grid(self.t_start, self.t_end, self.n_points, self.spacing)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self, command):
        p = self.params
        echo = {
            "command": command,
            "version": __version__,
            "route": self.route,
            "kernel": self.kernel,
        }
        if self.kernel == "srt":
            echo["tau"] = float(self.tau)
        if self.route == "quadrature":
            echo["mode"] = self.mode
        echo.update(gamma=p.gamma, omega_c=p.omega_c, omega_th=p.omega_th, mass=p.mass, hbar=p.hbar)
        echo.update(t_start=float(self.t_start), t_end=float(self.t_end), n_points=self.n_points, spacing=self.spacing)
        if self.route == "simulate":
            echo.update(seed=self.seed, n_particles=self.n_particles, dt=float(self.sim_dt()))
        if self.route == "low_t":
            echo["low_t_offset"] = "printed" if self.printed_offset else "asymptotic"
        return echo

    def sim_dt(self):
        return self.dt or 0.01 / max(self.params.gamma, self.params.omega_c)

    def rerun_args(self, subcommand="compute"):
        """Flags that reproduce this configuration exactly."""
        p = self.params
        args = [
            "qbm", subcommand, "--route", self.route, "--kernel", self.kernel,
            "--gamma", format_float(p.gamma), "--omega-c", format_float(p.omega_c),
            "--omega-th", format_float(p.omega_th), "--mass", format_float(p.mass), "--hbar", format_float(p.hbar),
            "--t-start", format_float(self.t_start), "--t-end", format_float(self.t_end),
            "--n-points", str(self.n_points), "--spacing", self.spacing,
        ]
        if self.kernel == "srt":
            args += ["--tau", format_float(self.tau)]
        if self.route == "quadrature":
            args += ["--mode", self.mode]
        if self.route == "simulate":
            args += ["--seed", str(self.seed), "--n-particles", str(self.n_particles), "--dt", format_float(self.sim_dt())]
        if self.printed_offset:
            args.append("--printed-offset")
        return shlex.join(args)


def _merge(args, keys, defaults=None):
    """Defaults < JSON config file < explicit flags."""
    values = {k: DEFAULTS[k] for k in keys}
    values.update(defaults or {})
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(keys)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(loaded)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            values[k] = v
    return values


def _resolve_params(v):
    physical = [v["charge"], v["field"], v["temperature"]]
    try:
        if any(x is not None for x in physical):
            if any(x is None for x in physical):
                raise ConfigError("physical inputs need --charge, --field and --temperature together")
            inputs = PhysicalInputs(
                charge=float(v["charge"]), field=float(v["field"]), mass=float(v["mass"]),
                light_speed=float(v["light_speed"]), temperature=float(v["temperature"]),
                gamma=float(v["gamma"]), hbar=float(v["hbar"]), k_boltzmann=float(v["k_boltzmann"]),
            )
            return derive_reduced(inputs)
        return ReducedParams(
            gamma=float(v["gamma"]), omega_c=float(v["omega_c"]), omega_th=float(v["omega_th"]),
            mass=float(v["mass"]), hbar=float(v["hbar"]),
        )
    except (InvariantError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def build_config(args, defaults=None, forced=None) -> RunConfig:
    v = _merge(args, list(DEFAULTS), defaults)
    v.update(forced or {})
    if v["route"] not in ROUTES:
        raise ConfigError(f"unknown route {v['route']!r}")
    if v["kernel"] not in ("ohmic", "srt"):
        raise ConfigError(f"unknown kernel {v['kernel']!r}")
    if v["kernel"] == "srt" and not (v["tau"] is not None and float(v["tau"]) > 0):
        raise ConfigError("kernel srt requires --tau > 0")
    if v["mode"] not in [m.value for m in TemperatureMode]:
        raise ConfigError(f"unknown mode {v['mode']!r}")
    if v["spacing"] not in ("linear", "log"):
        raise ConfigError(f"unknown spacing {v['spacing']!r}")
    if int(v["n_points"]) < 2:
        raise ConfigError("n_points must be >= 2")
    if not float(v["t_start"]) >= 0:
        raise ConfigError("t_start must be >= 0")
    output = v["output"]
    fmt = v["format"] or ("json" if output and str(output).endswith(".json") else "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    return RunConfig(
        route=v["route"], kernel=v["kernel"], tau=None if v["tau"] is None else float(v["tau"]), mode=v["mode"],
        params=_resolve_params(v), t_start=float(v["t_start"]), t_end=float(v["t_end"]),
        n_points=int(v["n_points"]), spacing=v["spacing"], output=output, format=fmt,
        seed=int(v["seed"]), n_particles=int(v["n_particles"]),
        dt=None if v["dt"] is None else float(v["dt"]), printed_offset=bool(v["printed_offset"]),
    )


def compute_series(config: RunConfig, times=None, command=None) -> MsdSeries:
    times = config.times() if times is None else times
    try:
        kernel = config.kernel_model()
    except InvariantError as exc:
        raise ConfigError(str(exc)) from exc
    return evaluate_series(
        config.params, config.route, times, kernel=kernel, mode=TemperatureMode(config.mode),
        echo=config.echo(command or config.rerun_args()),
        simulation={"n_particles": config.n_particles, "seed": config.seed, "dt": config.sim_dt()},
        lowt_printed=config.printed_offset,
    )


def _emit(text, output):
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _serialize(series, fmt):
    return to_json(series) if fmt == "json" else to_csv(series)


def cmd_compute(args):
    config = build_config(args)
    series = compute_series(config)
    _emit(_serialize(series, config.format), config.output)
    return EXIT_OK


def figure_config(fig_id, output=None, fmt="csv", printed_offset=False) -> RunConfig:
    if fig_id not in FIGURES:
        raise ConfigError(f"figure id must be 1..8, got {fig_id}")
    route, wc, wth, kernel, mode = FIGURES[fig_id]
    # the low-temperature formula diverges at t = 0: start one grid step in
    t_start = FIGURE_T_END / FIGURE_POINTS if route == "low_t" else 0.0
    return RunConfig(
        route=route, kernel=kernel, tau=FIGURE_TAU if kernel == "srt" else None, mode=mode or "full_quantum",
        params=ReducedParams(gamma=1.0, omega_c=wc, omega_th=wth), t_start=t_start, t_end=FIGURE_T_END,
        n_points=FIGURE_POINTS, spacing="linear", output=output, format=fmt, seed=0, n_particles=0, dt=None,
        printed_offset=printed_offset,
    )


def cmd_figure(args):
    config = figure_config(args.id, args.output, args.format or "csv", args.printed_offset)
    series = compute_series(config, command=config.rerun_args())
    series.params_echo["figure"] = args.id
    _emit(_serialize(series, config.format), config.output)
    return EXIT_OK


def _parse_grid(args):
    if args.omega_c_grid and args.grid_log:
        raise ConfigError("give either --omega-c-grid or --grid-log, not both")
    if args.grid_log:
        lo, hi, n = args.grid_log
        if not (float(lo) > 0 and float(hi) > float(lo) and int(n) >= 1):
            raise ConfigError("--grid-log needs 0 < START < STOP and N >= 1")
        return list(np.geomspace(float(lo), float(hi), int(n)))
    if args.omega_c_grid:
        try:
            return [float(x) for x in args.omega_c_grid.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --omega-c-grid: {exc}") from exc
    raise ConfigError("sweep needs --omega-c-grid or --grid-log")


def cmd_sweep(args):
    from qbm.analysis import Verdict, scan_transition

    config = build_config(args)
    if config.route == "simulate":
        raise ConfigError("sweep supports the exact, quadrature, high_t and low_t routes")
    grid = _parse_grid(args)
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise ConfigError("omega_c grid must be strictly ascending")
    if any(w < 0 for w in grid):
        raise ConfigError("omega_c grid values must be >= 0")
    t_start = config.t_start
    if config.route == "low_t" and t_start == 0:
        t_start = config.t_end / config.n_points
    report = scan_transition(
        config.params, config.route, grid, (t_start, config.t_end), config.n_points,
        kernel=config.kernel_model(), prominence_rel=args.prominence, mode=TemperatureMode(config.mode),
    )
    lines = [f"# {k}={format_float(v) if isinstance(v, float) else v}" for k, v in config.echo(_sweep_command(args, config)).items()]
    lines.append(f"# prominence_rel={format_float(args.prominence)}")
    lines.append("omega_c,verdict,n_maxima,first_max_time")
    for wc, res in zip(report.omega_c, report.classifications):
        first = "" if res.first_max_time is None else format_float(res.first_max_time)
        lines.append(f"{format_float(wc)},{res.verdict.value},{res.n_local_maxima},{first}")
    verdicts = [r.verdict for r in report.classifications]
    if report.flip is not None and verdicts[0] is Verdict.MONOTONIC:
        lines.append(f"# flip_omega_c={format_float(report.flip)}")
    _emit("\n".join(lines) + "\n", config.output)
    return EXIT_OK


def _sweep_command(args, config):
    cmd = config.rerun_args("sweep")
    if args.grid_log:
        cmd += " --grid-log " + " ".join(str(x) for x in args.grid_log)
    else:
        cmd += " --omega-c-grid " + shlex.quote(args.omega_c_grid)
    return cmd + f" --prominence {format_float(args.prominence)}"


def cmd_simulate(args):
    from qbm.simulate import SimConfig, run_ensemble

    config = build_config(args, defaults={"t_end": 20.0, "n_points": 201}, forced={"route": "simulate", "kernel": "ohmic"})
    p = config.params
    dt = config.sim_dt()
    n_steps = int(math.ceil(config.t_end / dt - 1e-9))
    record_every = max(1, n_steps // max(1, config.n_points - 1))
    sim = SimConfig(dt=dt, n_steps=n_steps, n_particles=config.n_particles, seed=config.seed, params=p,
                    record_every=record_every)
    stats = run_ensemble(sim)
    echo = {
        "command": shlex.join([
            "qbm", "simulate", "--gamma", format_float(p.gamma), "--omega-c", format_float(p.omega_c),
            "--omega-th", format_float(p.omega_th), "--mass", format_float(p.mass), "--hbar", format_float(p.hbar),
            "--t-end", format_float(config.t_end), "--n-points", str(config.n_points), "--dt", format_float(dt),
            "--n-particles", str(config.n_particles), "--seed", str(config.seed),
        ]),
        "version": __version__, "route": "simulate", "kernel": "ohmic",
        "gamma": p.gamma, "omega_c": p.omega_c, "omega_th": p.omega_th, "mass": p.mass, "hbar": p.hbar,
        "dt": dt, "n_steps": n_steps, "record_every": record_every, "n_particles": config.n_particles, "seed": config.seed,
    }
    series = MsdSeries(stats.times, stats.msd_mean, "simulate", echo, None, {"msd_stderr": stats.msd_stderr})
    _emit(_serialize(series, config.format), config.output)
    return EXIT_OK


def cmd_selftest(args):
    from qbm import selftest

    if args.inject_fault == "lerch":
        with selftest.lerch_fault():
            ok = selftest.run(sys.stdout)
    else:
        ok = selftest.run(sys.stdout)
    print("selftest " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_SELFTEST


def _add_params(p, with_route=True):
    g = p.add_argument_group("parameters")
    g.add_argument("--config", help="JSON file with parameter values; flags override it")
    if with_route:
        g.add_argument("--route", choices=ROUTES)
        g.add_argument("--kernel", choices=("ohmic", "srt"))
        g.add_argument("--tau", type=float, help="relaxation time of the srt kernel")
        g.add_argument("--mode", choices=[m.value for m in TemperatureMode], help="thermal weight for the quadrature route")
        g.add_argument("--printed-offset", action="store_true", default=False,
                       help="low_t route: use the constant pi*omega_c/gamma instead of 2(omega_c/gamma)atan(omega_c/gamma)")
    g.add_argument("--gamma", type=float)
    g.add_argument("--omega-c", dest="omega_c", type=float)
    g.add_argument("--omega-th", dest="omega_th", type=float)
    g.add_argument("--mass", type=float)
    g.add_argument("--hbar", type=float)
    phys = p.add_argument_group("physical inputs (Gaussian units; replace --omega-c/--omega-th)")
    phys.add_argument("--charge", type=float)
    phys.add_argument("--field", type=float)
    phys.add_argument("--temperature", type=float)
    phys.add_argument("--light-speed", dest="light_speed", type=float)
    phys.add_argument("--k-boltzmann", dest="k_boltzmann", type=float)
    t = p.add_argument_group("time grid")
    t.add_argument("--t-start", dest="t_start", type=float)
    t.add_argument("--t-end", dest="t_end", type=float)
    t.add_argument("--n-points", dest="n_points", type=int)
    t.add_argument("--spacing", choices=("linear", "log"))
    s = p.add_argument_group("simulation")
    s.add_argument("--seed", type=int)
    s.add_argument("--n-particles", dest="n_particles", type=int)
    s.add_argument("--dt", type=float)
    o = p.add_argument_group("output")
    o.add_argument("-o", "--output", help="output file (default: standard output)")
    o.add_argument("--format", choices=("csv", "json"))


def build_parser():
    parser = argparse.ArgumentParser(prog="qbm", description="Mean-square displacement of a damped charged quantum particle in a magnetic field.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="MSD series by one route")
    _add_params(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("figure", help="data for one of the eight reference figures")
    p.add_argument("id", type=int, help="figure number 1..8")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--printed-offset", action="store_true", help="low_t figures: use the constant pi*omega_c/gamma")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("sweep", help="classify along an omega_c grid and locate the transition")
    _add_params(p)
    p.add_argument("--omega-c-grid", dest="omega_c_grid", help="comma-separated ascending omega_c values")
    p.add_argument("--grid-log", nargs=3, metavar=("START", "STOP", "N"), help="N log-spaced omega_c values")
    p.add_argument("--prominence", type=float, default=1e-3, help="relative prominence of a counted maximum")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="classical ensemble simulation (Ohmic, white noise)")
    _add_params(p, with_route=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("selftest", help="run the self-consistency suite")
    p.add_argument("--inject-fault", choices=("lerch",), help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"qbm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"qbm: quadrature did not converge (achieved error {exc.achieved:.3e}): {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except NonMonotoneFlip as exc:
        print(f"qbm: non-monotone transition: {exc}", file=sys.stderr)
        return EXIT_FLIP
    except (QbmError, InvariantError) as exc:
        print(f"qbm: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"qbm: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
