"""Command-line frontend: spectra, sweeps, mistuning design, simulation, H-infinity.

Subcommands
-----------
eigs      closed-loop spectrum and stability margin of one configuration
pde       Galerkin spectrum of the continuum model
sweep     margins (and optionally norms) over a range of platoon sizes
mistune   optimal mistuned gain schedule for a scenario
simulate  time-domain decay experiment
hinf      disturbance amplification by two independent methods
asymptote closed-form predictions vs numerical eigenvalues

All numeric output is formatted with 12 significant digits so identical
invocations produce byte-identical CSV/JSON.  Exit codes: 0 success,
2 usage or validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import math
import os
import sys

import numpy as np

from . import sim
from .asymptotics import mistuned_asymptote, symmetric_asymptote, predictions_to_csv
from .model import (
    ConfigurationError,
    MistuningProfile,
    PlatoonConfig,
    ProfileKind,
    Scenario,
    build_gain_schedule,
    load_config,
)
from .pde import (
    Boundary,
    assemble_galerkin,
    boundary_for_scenario,
    pde_spectrum,
)
from .robustness import hinf_bisection, hinf_sweep, sweep_to_csv
from .statespace import (
    NumericalError,
    build_closed_loop,
    format_matrix,
    sorted_representatives,
    spectrum_of_config,
    spectrum_to_csv,
)

USAGE_ERROR = 2
NUMERICAL_ERROR = 3


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _json_line(pairs) -> str:
    """Deterministic one-line JSON with 12-significant-digit floats."""
    parts = []
    for key, value in pairs:
        if isinstance(value, bool):
            rendered = "true" if value else "false"
        elif isinstance(value, (int, np.integer)):
            rendered = str(int(value))
        elif isinstance(value, float):
            rendered = _fmt(value)
        else:
            rendered = f'"{value}"'
        parts.append(f'"{key}": {rendered}')
    return "{" + ", ".join(parts) + "}"


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _add_config_flags(parser: argparse.ArgumentParser, with_n=True):
    parser.add_argument("--config", help="JSON configuration file")
    if with_n:
        parser.add_argument("--n", type=int, help="number of vehicles")
    parser.add_argument("--k0", type=float, default=1.0, help="nominal position gain")
    parser.add_argument("--b0", type=float, default=0.5, help="velocity damping gain")
    parser.add_argument("--scenario", choices=["I", "II"], default="I")
    parser.add_argument("--epsilon", type=float, default=0.0, help="mistuning amplitude")
    parser.add_argument(
        "--profile",
        choices=["symmetric", "optimal", "step", "constant", "sine", "pieces"],
        default="symmetric",
        help="mistuning profile ('optimal' resolves per scenario)",
    )
    parser.add_argument("--amplitude", type=float, default=1.0, help="sine amplitude")
    parser.add_argument("--wavenumber", type=int, default=1, help="sine wavenumber")
    parser.add_argument(
        "--pieces", help="piecewise profile as 'x0:v0,x1:v1,...' (x0 must be 0)"
    )


def _profile_from_args(args) -> MistuningProfile:
    name = args.profile
    if name == "optimal":
        name = "step" if args.scenario == "I" else "constant"
    if name == "symmetric":
        return MistuningProfile.symmetric()
    if name == "step":
        return MistuningProfile.optimal_step()
    if name == "constant":
        return MistuningProfile.optimal_constant()
    if name == "sine":
        return MistuningProfile.sine(args.amplitude, args.wavenumber)
    if not args.pieces:
        raise ConfigurationError("--profile pieces requires --pieces 'x0:v0,x1:v1,...'")
    pieces = []
    for chunk in args.pieces.split(","):
        x, v = chunk.split(":")
        pieces.append((float(x), float(v)))
    return MistuningProfile.piecewise_constant(pieces)


def _config_from_args(args, n_override=None) -> PlatoonConfig:
    if args.config:
        return load_config(args.config)
    n = n_override if n_override is not None else args.n
    if n is None:
        raise ConfigurationError("either --config or --n is required")
    return PlatoonConfig(
        n_vehicles=n,
        k0=args.k0,
        b0=args.b0,
        scenario=Scenario(args.scenario),
        epsilon=args.epsilon,
        profile=_profile_from_args(args),
    )


def _emit(args, text: str, filename: str):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, filename)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _thread_count() -> int:
    raw = os.environ.get("PLATOON_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"PLATOON_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise ConfigurationError(f"PLATOON_THREADS must be a positive integer, got {raw!r}")
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_eigs(args) -> int:
    config = _config_from_args(args)
    spectrum = spectrum_of_config(config)
    _emit(args, spectrum_to_csv(spectrum),
          f"eigs_{config.scenario.value}_{config.n_vehicles}.csv")
    if args.dump_matrix:
        model = build_closed_loop(build_gain_schedule(config))
        with open(args.dump_matrix, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_matrix(model.a_matrix))
    print(_json_line([
        ("n", config.n_vehicles),
        ("stability_margin", spectrum.stability_margin),
        ("least_stable_re", spectrum.least_stable.real),
        ("least_stable_im", spectrum.least_stable.imag),
    ]))
    return 0


def cmd_pde(args) -> int:
    config = _config_from_args(args)
    boundary = Boundary(args.boundary) if args.boundary else None
    disc = assemble_galerkin(config, boundary=boundary, basis_size=args.basis_size)
    spectrum = pde_spectrum(disc)
    _emit(args, spectrum_to_csv(spectrum),
          f"pde_{config.scenario.value}_{config.n_vehicles}.csv")
    if args.dump_matrix:
        with open(args.dump_matrix, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_matrix(disc.companion))
    print(_json_line([
        ("n", config.n_vehicles),
        ("basis_size", disc.basis_size),
        ("stability_margin", spectrum.stability_margin),
        ("least_stable_re", spectrum.least_stable.real),
        ("least_stable_im", spectrum.least_stable.imag),
    ]))
    return 0


def _parse_n_values(args) -> list[int]:
    if args.n_values:
        values = [int(tok) for tok in args.n_values.split(",")]
    else:
        values = sorted(
            {int(round(v)) for v in np.logspace(
                math.log10(args.n_min), math.log10(args.n_max), args.n_points)}
        )
    if any(v < 2 for v in values):
        raise ConfigurationError("all sweep sizes must be >= 2")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigurationError("sweep sizes must be strictly increasing")
    return values


def _sweep_value(source: str, config: PlatoonConfig) -> float:
    if source == "spectrum":
        return spectrum_of_config(config).stability_margin
    if source == "pde":
        return pde_spectrum(assemble_galerkin(config)).stability_margin
    if source == "asymptote":
        pred = mistuned_asymptote(config, 1)
        return -pred.s_plus
    if source == "hinf":
        model = build_closed_loop(build_gain_schedule(config))
        return hinf_bisection(model).gamma
    raise ConfigurationError(f"unknown sweep output {source!r}")


_SWEEP_SOURCE_LABEL = {"spectrum": "platoon", "pde": "pde", "asymptote": "asymptote",
                       "hinf": "hinf"}


def cmd_sweep(args) -> int:
    n_values = _parse_n_values(args)
    outputs = args.outputs.split(",")
    for source in outputs:
        if source not in _SWEEP_SOURCE_LABEL:
            raise ConfigurationError(f"unknown sweep output {source!r}")
    configs = [_config_from_args(args, n_override=n) for n in n_values]

    def run_one(pair):
        source, config = pair
        try:
            return _sweep_value(source, config)
        except NumericalError as exc:
            print(f"warning: {source} failed for N={config.n_vehicles}: {exc}",
                  file=sys.stderr)
            return float("nan")

    jobs = [(source, config) for source in outputs for config in configs]
    workers = _thread_count()
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run_one, jobs))
    else:
        values = [run_one(job) for job in jobs]

    slopes = []
    idx = 0
    for source in outputs:
        rows = values[idx: idx + len(n_values)]
        idx += len(n_values)
        label = _SWEEP_SOURCE_LABEL[source]
        lines = ["N,source,value"]
        for n, v in zip(n_values, rows):
            lines.append(f"{n},{label},{_fmt(v)}")
        name = (f"sweep_{source}_{args.scenario}_"
                f"{n_values[0]}-{n_values[-1]}.csv")
        _emit(args, "\n".join(lines) + "\n", name)
        upper = [(n, v) for n, v in zip(n_values, rows)
                 if n >= n_values[len(n_values) // 2] and np.isfinite(v) and v > 0]
        if len(upper) >= 2:
            ln = np.log([n for n, _ in upper])
            lv = np.log([v for _, v in upper])
            slope = float(np.polyfit(ln, lv, 1)[0])
        else:
            slope = float("nan")
        slopes.append((f"slope_{source}", slope))
    print(_json_line([("n_min", n_values[0]), ("n_max", n_values[-1]), *slopes]))
    return 0


def cmd_mistune(args) -> int:
    if args.profile == "symmetric":
        args.profile = "optimal"
    config = _config_from_args(args)
    schedule = build_gain_schedule(config)
    x = config.sample_positions()
    lines = ["i,x,k_front,k_back,damping"]
    for i in range(config.n_vehicles):
        lines.append(
            f"{i + 1},{_fmt(x[i])},{_fmt(schedule.k_front[i])},"
            f"{_fmt(schedule.k_back[i])},{_fmt(schedule.damping[i])}"
        )
    _emit(args, "\n".join(lines) + "\n",
          f"mistune_{config.scenario.value}_{config.n_vehicles}.csv")
    pred = mistuned_asymptote(config, 1)
    print(_json_line([
        ("n", config.n_vehicles),
        ("epsilon", config.epsilon),
        ("predicted_margin", -pred.s_plus),
        ("first_order_shift", pred.shift),
    ]))
    return 0


def cmd_simulate(args) -> int:
    config = _config_from_args(args)
    setup = sim.SimulationSetup(
        config=config,
        delta_phys=args.gap,
        v_desired=args.vd,
        t_final=args.t_final,
        dt=args.dt,
        initial_perturbation=args.perturbation,
    )
    schedule = build_gain_schedule(config)
    result = sim.simulate(setup, schedule)
    _emit(args, sim.trajectory_to_csv(result),
          f"simulate_{config.scenario.value}_{config.n_vehicles}.csv")
    pairs = [("n", config.n_vehicles), ("t_final", setup.t_final)]
    try:
        pairs.append(("tail_log_slope", sim.tail_log_slope(result)))
    except ValueError:
        pass  # horizon too short for a decay fit; omit the slope
    print(_json_line(pairs))
    return 0


def cmd_hinf(args) -> int:
    config = _config_from_args(args)
    model = build_closed_loop(build_gain_schedule(config))
    bisect = hinf_bisection(model, tol_rel=args.tol)
    sweep = hinf_sweep(model)
    if args.dump_sweep:
        with open(args.dump_sweep, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(sweep_to_csv(model))
    gamma = max(bisect.gamma, sweep.gamma)
    budget = (2.0 * args.tol + 1e-3) * gamma
    agree = abs(bisect.gamma - sweep.gamma) <= budget
    print(_json_line([
        ("n", config.n_vehicles),
        ("gamma_bisect", bisect.gamma),
        ("gamma_sweep", sweep.gamma),
        ("peak_frequency", sweep.peak_frequency),
        ("agree", agree),
    ]))
    if not agree:
        print(
            f"error: H-infinity methods disagree beyond tolerance "
            f"({_fmt(bisect.gamma)} vs {_fmt(sweep.gamma)})",
            file=sys.stderr,
        )
        return NUMERICAL_ERROR
    return 0


def cmd_asymptote(args) -> int:
    config = _config_from_args(args)
    boundary = boundary_for_scenario(config.scenario)
    spectrum = spectrum_of_config(config)
    reps = sorted_representatives(spectrum.eigenvalues)
    rows = []
    for l in range(1, args.modes + 1):
        if config.epsilon == 0.0:
            pred = symmetric_asymptote(config.k0, config.b0, config.n_vehicles, l, boundary)
        else:
            pred = mistuned_asymptote(config, l, boundary)
        numeric = reps[l - 1].real if l <= len(reps) else float("nan")
        rows.append((config.n_vehicles, l, pred.s_plus, numeric))
    _emit(args, predictions_to_csv(rows),
          f"asymptote_{config.scenario.value}_{config.n_vehicles}.csv")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platoon",
        description="Spectral analysis and mistuning design for bidirectional platoons",
    )
    parser.add_argument("--out", help="write CSV outputs into this directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigs", help="closed-loop spectrum of one configuration")
    _add_config_flags(p)
    p.add_argument("--dump-matrix", help="also write the system matrix (plain text)")
    p.set_defaults(func=cmd_eigs)

    p = sub.add_parser("pde", help="Galerkin spectrum of the continuum model")
    _add_config_flags(p)
    p.add_argument("--boundary", choices=["DD", "ND"], help="override boundary pairing")
    p.add_argument("--basis-size", type=int, help="number of basis functions")
    p.add_argument("--dump-matrix", help="also write the companion matrix (plain text)")
    p.set_defaults(func=cmd_pde)

    p = sub.add_parser("sweep", help="margins over a range of platoon sizes")
    _add_config_flags(p, with_n=False)
    p.add_argument("--n-values", help="comma-separated platoon sizes")
    p.add_argument("--n-min", type=int, default=10)
    p.add_argument("--n-max", type=int, default=400)
    p.add_argument("--n-points", type=int, default=12)
    p.add_argument("--outputs", default="spectrum",
                   help="comma set from spectrum,pde,asymptote,hinf")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mistune", help="print the optimal mistuned gain schedule")
    _add_config_flags(p)
    p.set_defaults(func=cmd_mistune)

    p = sub.add_parser("simulate", help="time-domain decay experiment")
    _add_config_flags(p)
    p.set_defaults(n=20, epsilon=0.0)
    p.add_argument("--gap", type=float, default=1.0, help="desired inter-vehicle gap")
    p.add_argument("--vd", type=float, default=5.0, help="desired velocity")
    p.add_argument("--t-final", type=float, default=300.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--perturbation", type=float, default=0.5,
                   help="initial spacing error of vehicle 1")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hinf", help="disturbance amplification, two methods")
    _add_config_flags(p)
    p.add_argument("--tol", type=float, default=1e-4, help="bisection relative tolerance")
    p.add_argument("--dump-sweep", help="also write omega,sigma_max CSV")
    p.set_defaults(func=cmd_hinf)

    p = sub.add_parser("asymptote", help="closed-form predictions vs numerics")
    _add_config_flags(p)
    p.add_argument("--modes", type=int, default=3, help="number of modes to report")
    p.set_defaults(func=cmd_asymptote)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
