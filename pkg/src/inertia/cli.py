"""Command-line experiment runner.

Each subcommand integrates a configured system, writes machine-readable
data (CSV by default, columnar JSON with ``--format json``) plus a
``manifest.json`` recording the resolved parameters, and prints a short
summary. Exit codes: 0 success, 2 invalid arguments, 3 numerical failure
(including an experiment whose documented expectation did not hold).
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .analysis import damped_period, ensemble_expected_decay, sweep_gamma
from .discrete import DiscreteState, discrete_inertia, drift_profile, momentum_step
from .dynamics import State, SystemSpec
from .errors import InvalidArgument, NumericalFailure
from .integrators import METHODS, RNG_ALGORITHM, IntegratorConfig, Trajectory, integrate
from .landscapes import landscape_from_name
from .output import format_float, write_csv, write_json, write_manifest
from .render import render_csv

__all__ = ["main", "build_parser"]


# ---------------------------------------------------------------------------
# flag parsing helpers


def _parse_floats(text: str, flag: str) -> list[float]:
    items = [piece for piece in text.split(",") if piece.strip() != ""]
    if not items:
        raise InvalidArgument(f"{flag} needs at least one value, got {text!r}")
    try:
        return [float(piece) for piece in items]
    except ValueError:
        raise InvalidArgument(f"{flag} expects comma-separated numbers, got {text!r}")


def _parse_noise(text: str) -> tuple[str, float | None]:
    if text == "white":
        return "white", None
    if text.startswith("ou:"):
        try:
            tau = float(text[3:])
        except ValueError:
            raise InvalidArgument(f"bad correlation time in --noise {text!r}")
        return "ou", tau
    raise InvalidArgument(f"--noise must be 'white' or 'ou:<tau>', got {text!r}")


def _parse_inits(text: str, dim: int) -> list[list[float]]:
    inits = []
    for piece in text.split(";"):
        if piece.strip() == "":
            continue
        init = _parse_floats(piece, "--inits")
        if len(init) != dim:
            raise InvalidArgument(
                f"initialization {piece!r} has {len(init)} coordinates, landscape needs {dim}"
            )
        inits.append(init)
    if not inits:
        raise InvalidArgument(f"--inits needs at least one initialization, got {text!r}")
    return inits


def _resolve_method(gamma: float, override: str | None) -> str:
    """Pick the deterministic integrator: verlet when frictionless, else splitting."""
    if override is not None:
        return override
    return "verlet" if gamma == 0 else "damped_splitting"


def _initial(args, landscape) -> State:
    w0 = _parse_floats(args.w0, "--w0")
    v0 = _parse_floats(args.v0, "--v0")
    if len(w0) != landscape.dim or len(v0) != landscape.dim:
        raise InvalidArgument(
            f"--w0/--v0 must have {landscape.dim} coordinates for this landscape"
        )
    return State(w0, v0)


# ---------------------------------------------------------------------------
# output helpers


def _trajectory_columns(trajectory: Trajectory) -> dict[str, np.ndarray]:
    dim = trajectory.ws.shape[1]
    columns: dict[str, np.ndarray] = {"t": trajectory.times}
    for i in range(dim):
        columns[f"w{i}"] = trajectory.ws[:, i]
    for i in range(dim):
        columns[f"v{i}"] = trajectory.vs[:, i]
    columns["inertia"] = trajectory.inertia
    return columns


class _Experiment:
    """Collects output files and writes the manifest when the command is done."""

    def __init__(self, args, name: str, parameters: dict, stochastic: bool = False):
        self.out_dir = args.out_dir
        self.fmt = args.format
        self.name = name
        self.parameters = parameters
        self.seed = getattr(args, "seed", None)
        self.stochastic = stochastic
        self.outputs: list[str] = []
        self.started = time.monotonic()
        os.makedirs(self.out_dir, exist_ok=True)

    def write(self, stem: str, columns: dict[str, np.ndarray]) -> str:
        filename = f"{stem}.{self.fmt}"
        path = os.path.join(self.out_dir, filename)
        if self.fmt == "json":
            write_json(path, columns)
        else:
            write_csv(path, columns)
        self.outputs.append(filename)
        print(f"wrote {path}")
        return path

    def finish(self) -> int:
        write_manifest(
            self.out_dir,
            self.name,
            self.parameters,
            self.outputs,
            time.monotonic() - self.started,
            seed=self.seed,
            rng_algorithm=RNG_ALGORITHM if self.stochastic else None,
        )
        return 0


# ---------------------------------------------------------------------------
# subcommands


def cmd_conserve(args) -> int:
    landscape = landscape_from_name(args.landscape or "iso1d")
    initial = _initial(args, landscape)
    t_end = args.T if args.T is not None else 10.0
    gammas = [0.0]
    if not args.gamma0_only and args.gamma != 0.0:
        gammas.append(args.gamma)

    exp = _Experiment(
        args,
        "conserve",
        {
            "landscape": args.landscape or "iso1d",
            "gammas": gammas,
            "method": args.method,
            "h": args.h,
            "T": t_end,
            "w0": list(initial.w),
            "v0": list(initial.v),
        },
    )
    combined: dict[str, np.ndarray] = {}
    for gamma in gammas:
        method = _resolve_method(gamma, args.method)
        spec = SystemSpec(landscape=landscape, gamma=gamma)
        config = IntegratorConfig(method=method, h=args.h, t_end=t_end, seed=args.seed)
        trajectory = integrate(spec, initial, config)
        exp.write(f"conserve_g{gamma:g}", _trajectory_columns(trajectory))

        energy = trajectory.inertia
        scale = energy[0] if energy[0] != 0 else 1.0
        drift = float(np.max(np.abs(energy - energy[0])) / scale)
        print(f"gamma={gamma:g} ({method}): max relative inertia drift = {drift:.3e}")
        if gamma > 0:
            print(
                f"gamma={gamma:g}: I(T)/I(0) = {energy[-1] / energy[0]:.6f}, "
                f"exp(-gamma*T) = {np.exp(-gamma * t_end):.6f}"
            )
        if method == "explicit_euler" and np.all(np.diff(energy) > 0):
            print(
                "warning: explicit_euler grows the energy monotonically; "
                "it is the negative control, not a production integrator"
            )
        if not combined:
            combined["t"] = trajectory.times
        combined[f"inertia_g{gamma:g}"] = energy

    if len(gammas) > 1:
        exp.write("conserve", combined)
    return exp.finish()


def cmd_phase(args) -> int:
    landscape = landscape_from_name(args.landscape or "iso1d")
    initial = _initial(args, landscape)
    gammas = _parse_floats(args.gammas, "--gammas")
    t_end = args.T if args.T is not None else 20.0

    exp = _Experiment(
        args,
        "phase",
        {
            "landscape": args.landscape or "iso1d",
            "gammas": gammas,
            "h": args.h,
            "T": t_end,
            "w0": list(initial.w),
            "v0": list(initial.v),
        },
    )
    for gamma in gammas:
        method = _resolve_method(gamma, args.method)
        spec = SystemSpec(landscape=landscape, gamma=gamma)
        config = IntegratorConfig(method=method, h=args.h, t_end=t_end, seed=args.seed)
        trajectory = integrate(spec, initial, config)
        exp.write(f"phase_g{gamma:g}", _trajectory_columns(trajectory))

        if gamma == 0:
            # a frictionless orbit must return near its starting point
            late = trajectory.times >= 0.5 * t_end
            gaps = np.sqrt(
                np.sum((trajectory.ws[late] - initial.w) ** 2, axis=1)
                + np.sum((trajectory.vs[late] - initial.v) ** 2, axis=1)
            )
            closure = float(gaps.min())
            print(f"gamma=0: orbit closure distance = {closure:.3e}")
            if closure > 1e-3:
                raise NumericalFailure(
                    f"frictionless orbit failed to close: distance {closure:.3e} > 1e-3"
                )
        else:
            radius = float(
                np.sqrt(np.sum(trajectory.ws[-1] ** 2) + np.sum(trajectory.vs[-1] ** 2))
            )
            print(f"gamma={gamma:g}: final phase-space radius = {radius:.4f}")
    return exp.finish()


def cmd_sweep(args) -> int:
    gammas = _parse_floats(args.gammas, "--gammas")
    w0 = _parse_floats(args.w0, "--w0")
    v0 = _parse_floats(args.v0, "--v0")
    if len(w0) != 1 or len(v0) != 1:
        raise InvalidArgument("the decay-rate sweep runs on the 1D quadratic")

    exp = _Experiment(
        args,
        "sweep",
        {"gammas": sorted(gammas), "h": args.h, "periods": args.periods,
         "w0": w0, "v0": v0},
    )
    entries = sweep_gamma(gammas, h=args.h, n_periods=args.periods, w0=w0[0], v0=v0[0])
    nan = float("nan")
    exp.write(
        "sweep",
        {
            "gamma": np.array([e.gamma for e in entries]),
            "gamma_hat": np.array([nan if e.gamma_hat is None else e.gamma_hat for e in entries]),
            "r_squared": np.array([nan if e.r_squared is None else e.r_squared for e in entries]),
        },
    )

    failed = [e for e in entries if e.error is not None]
    for entry in failed:
        print(f"gamma={entry.gamma:g}: fit failed: {entry.error}", file=sys.stderr)
    fitted = [e for e in entries if e.gamma_hat is not None]
    for entry in fitted:
        print(
            f"gamma={entry.gamma:g}: gamma_hat = {entry.gamma_hat:.6f} "
            f"(r^2 = {entry.r_squared:.9f})"
        )
    if len(fitted) >= 2:
        rates = [e.gamma_hat for e in fitted]
        if not all(b > a for a, b in zip(rates, rates[1:])):
            raise NumericalFailure("fitted decay rates are not monotone in gamma")
        slope = float(np.polyfit([e.gamma for e in fitted], rates, 1)[0])
        print(f"regression slope of gamma_hat vs gamma = {slope:.6f}")
    exp.finish()
    if failed:
        raise NumericalFailure(f"{len(failed)} of {len(entries)} fits failed")
    return 0


def cmd_traj2d(args) -> int:
    landscape = landscape_from_name(args.landscape or "iso2d")
    inits = _parse_inits(args.inits, landscape.dim)
    if args.v0 is None:
        v0 = [0.0] * landscape.dim
    else:
        v0 = _parse_floats(args.v0, "--v0")
        if len(v0) != landscape.dim:
            raise InvalidArgument(f"--v0 must have {landscape.dim} coordinates")
    t_end = args.T if args.T is not None else 10.0
    gamma = args.gamma

    exp = _Experiment(
        args,
        "traj2d",
        {
            "landscape": args.landscape or "iso2d",
            "gamma": gamma,
            "inits": inits,
            "v0": v0,
            "h": args.h,
            "T": t_end,
        },
    )
    method = _resolve_method(gamma, args.method)
    spec = SystemSpec(landscape=landscape, gamma=gamma)
    config = IntegratorConfig(method=method, h=args.h, t_end=t_end, seed=args.seed)
    for index, w0 in enumerate(inits):
        trajectory = integrate(spec, State(w0, v0), config)
        exp.write(f"traj2d_init{index}", _trajectory_columns(trajectory))
        energy = trajectory.inertia
        if gamma == 0:
            scale = energy[0] if energy[0] != 0 else 1.0
            drift = float(np.max(np.abs(energy - energy[0])) / scale)
            print(f"init {w0}: inertia = {energy[0]:g}, max relative drift = {drift:.3e}")
            if drift > 1e-4:
                raise NumericalFailure(
                    f"frictionless trajectory {index} drifted by {drift:.3e} > 1e-4"
                )
        else:
            increases = np.diff(energy)
            print(
                f"init {w0}: inertia {energy[0]:g} -> {energy[-1]:.6g}"
            )
            if increases.max() > 1e-12:
                raise NumericalFailure(
                    f"damped trajectory {index} has an energy increase of {increases.max():.3e}"
                )
    return exp.finish()


def cmd_discrete(args) -> int:
    landscape = landscape_from_name(args.landscape or "iso1d")
    if args.eta <= 0:
        raise InvalidArgument(f"--eta must be positive, got {args.eta}")
    n_steps = args.steps if args.steps is not None else int(round(10.0 / args.eta))
    if n_steps < 1:
        raise InvalidArgument(f"--steps must be >= 1, got {n_steps}")
    initial = _initial(args, landscape)

    exp = _Experiment(
        args,
        "discrete",
        {
            "landscape": args.landscape or "iso1d",
            "eta": args.eta,
            "steps": n_steps,
            "w0": list(initial.w),
            "v0": list(initial.v),
            "eta_halving": bool(args.eta_halving),
        },
    )
    dim = landscape.dim
    ws = np.empty((n_steps + 1, dim))
    vs = np.empty((n_steps + 1, dim))
    energy = np.empty(n_steps + 1)
    state = DiscreteState(initial.w, initial.v)
    ws[0], vs[0] = state.w, state.v
    energy[0] = discrete_inertia(state, landscape)
    for k in range(1, n_steps + 1):
        state = momentum_step(state, args.eta, landscape)
        ws[k], vs[k] = state.w, state.v
        energy[k] = discrete_inertia(state, landscape)

    columns: dict[str, np.ndarray] = {"step": np.arange(n_steps + 1, dtype=float)}
    for i in range(dim):
        columns[f"w{i}"] = ws[:, i]
    for i in range(dim):
        columns[f"v{i}"] = vs[:, i]
    columns["inertia"] = energy
    exp.write("discrete", columns)

    max_drift = float(np.max(np.abs(energy - energy[0])))
    scale = energy[0] if energy[0] != 0 else 1.0
    print(
        f"eta={args.eta:g}, {n_steps} steps: max |I_t - I_0| = {max_drift:.3e} "
        f"({max_drift / scale:.3%} of I_0)"
    )

    if args.eta_halving:
        _, drift_full = drift_profile(initial.w, initial.v, args.eta, n_steps, landscape)
        _, drift_half = drift_profile(initial.w, initial.v, args.eta / 2, 2 * n_steps, landscape)
        exp.write(
            "discrete_halving",
            {
                "eta": np.array([args.eta, args.eta / 2]),
                "n_steps": np.array([float(n_steps), float(2 * n_steps)]),
                "max_drift": np.array([drift_full, drift_half]),
            },
        )
        if drift_half > 0:
            print(f"drift ratio eta vs eta/2 (same horizon): {drift_full / drift_half:.3f}")
    return exp.finish()


def cmd_stochastic(args) -> int:
    landscape = landscape_from_name(args.landscape or "iso1d")
    initial = _initial(args, landscape)
    noise_kind, tau = _parse_noise(args.noise)
    if args.method not in (None, "stochastic_splitting"):
        raise InvalidArgument("noisy dynamics require the stochastic_splitting method")
    t_end = args.T if args.T is not None else 10.0

    spec = SystemSpec(
        landscape=landscape, gamma=args.gamma, sigma=args.sigma,
        noise_kind=noise_kind, tau=tau,
    )
    config = IntegratorConfig(
        method="stochastic_splitting", h=args.h, t_end=t_end, seed=args.seed
    )
    exp = _Experiment(
        args,
        "stochastic",
        {
            "landscape": args.landscape or "iso1d",
            "gamma": args.gamma,
            "sigma": args.sigma,
            "noise": args.noise,
            "members": args.members,
            "h": args.h,
            "T": t_end,
            "w0": list(initial.w),
            "v0": list(initial.v),
        },
        stochastic=True,
    )
    result = ensemble_expected_decay(spec, initial, config, args.members)
    columns = {
        "t": result.times,
        "mean_I": result.inertia.mean_series,
        "stderr_I": result.inertia.stderr_series,
        "mean_speed_sq": result.speed_squared.mean_series,
        "mean_dIdt": result.inertia_rate.mean_series,
    }
    if result.mean_noise_dot_v is not None:
        columns["mean_noise_dot_v"] = result.mean_noise_dot_v
    exp.write("stochastic", columns)
    print(
        f"balance residual = {format_float(result.balance_residual)} "
        f"+/- {format_float(result.balance_stderr)} ({args.members} members)"
    )
    return exp.finish()


def cmd_render(args) -> int:
    out_dir = os.path.dirname(args.out) or "."
    os.makedirs(out_dir, exist_ok=True)
    started = time.monotonic()
    render_csv(args.input, args.out, xy=args.xy)
    print(f"wrote {args.out}")
    write_manifest(
        out_dir,
        "render",
        {"input": args.input, "out": args.out, "xy": args.xy},
        [os.path.basename(args.out)],
        time.monotonic() - started,
    )
    return 0


# ---------------------------------------------------------------------------
# parser and entry point


def _common_flags(v0_default: str | None = "0", sigma_default: float = 0.0) -> argparse.ArgumentParser:
    # Built fresh per subcommand: argparse parents share action objects, so a
    # single parent would leak per-subcommand default overrides to the others.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", type=float, default=0.4, help="damping coefficient")
    common.add_argument("--sigma", type=float, default=sigma_default, help="noise amplitude")
    common.add_argument("--noise", default="white", help="noise kind: white or ou:<tau>")
    common.add_argument("--method", choices=METHODS, default=None,
                        help="integrator (default: picked from gamma/noise)")
    common.add_argument("--h", type=float, default=0.01, help="integration step size")
    common.add_argument("--T", type=float, default=None, help="time horizon")
    common.add_argument("--seed", type=int, default=0, help="RNG seed (stochastic runs)")
    common.add_argument("--landscape", default=None,
                        help="loss surface: iso<N>d or diag:<d1,d2,...>")
    common.add_argument("--w0", default="1", help="initial parameters, comma-separated")
    common.add_argument("--v0", default=v0_default, help="initial velocity, comma-separated")
    common.add_argument("--out-dir", default="out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inertia",
        description="Energy-conservation experiments for continuous-time momentum dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("conserve", parents=[_common_flags()],
                       help="frictionless vs damped energy traces")
    p.add_argument("--gamma0-only", action="store_true", help="run only the gamma=0 case")
    p.set_defaults(func=cmd_conserve)

    p = sub.add_parser("phase", parents=[_common_flags()], help="phase-space orbits and spirals")
    p.add_argument("--gammas", default="0,0.4", help="damping values, comma-separated")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("sweep", parents=[_common_flags()], help="fitted decay rate vs damping")
    p.add_argument("--gammas", default="0.1,0.2,0.4,0.8", help="damping values, comma-separated")
    p.add_argument("--periods", type=int, default=5, help="fit window length in damped periods")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("traj2d", parents=[_common_flags(v0_default=None)],
                       help="2D trajectories with energy coloring data")
    p.add_argument("--inits", default="1,0;0,1;1,1",
                   help="semicolon-separated initial points, e.g. '1,0;0,1'")
    p.set_defaults(func=cmd_traj2d)

    p = sub.add_parser("discrete", parents=[_common_flags()],
                       help="discrete momentum map energy drift")
    p.add_argument("--eta", type=float, default=0.01, help="discrete step size")
    p.add_argument("--steps", type=int, default=None,
                   help="number of steps (default: horizon 10 / eta)")
    p.add_argument("--eta-halving", action="store_true",
                   help="also run eta/2 over the same horizon and report the drift ratio")
    p.set_defaults(func=cmd_discrete)

    p = sub.add_parser("stochastic", parents=[_common_flags(sigma_default=0.3)],
                       help="noisy ensemble decay balance")
    p.add_argument("--members", type=int, default=100, help="ensemble size")
    p.set_defaults(func=cmd_stochastic)

    p = sub.add_parser("render", help="plot a CSV produced by another subcommand as SVG")
    p.add_argument("--input", required=True, help="input CSV file")
    p.add_argument("--out", required=True, help="output SVG file")
    p.add_argument("--xy", default=None, help="plot <ycol> against <xcol> as 'xcol:ycol'")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
