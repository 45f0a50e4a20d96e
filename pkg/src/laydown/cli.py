"""Command-line front end.

Subcommands::

    simulate   simulate one lay-down path and write it as CSV
    expected   analytic expected occupation time of a rectangle
    mc         Monte-Carlo estimate of the expected occupation time
    occupancy  occupation time / grid / strip profile of a path file
    estimate   recover (lambda, sigma1, sigma2) from observations
    table1     analytic-vs-Monte-Carlo comparison table as CSV
    table3     Monte-Carlo observation matrix of the estimation study as CSV
    table4     round-trip parameter recovery table as CSV

All randomness is controlled by explicit ``--seed`` flags; numeric output is
printed with 6 significant digits unless ``--digits`` says otherwise.  Exit
status is 0 on success, 1 on input or configuration errors, and 3 when the
parameter estimation fails to converge.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from typing import IO, Sequence

import numpy as np

from . import benchmarks, io
from .analytic import QuadratureConfig, QuadratureError, expected_occupation
from .estimation import (
    DegenerateObservationsError,
    EstimationResult,
    ModelParams,
    ObservationSet,
    OptimizerConfig,
    estimate_params,
)
from .model import DEFAULT_STEPS_PER_UNIT_TIME, BeltConfig, Rect, TimeGrid, simulate_path
from .montecarlo import McConfig, mc_expected_occupation
from .occupation import (
    grid_occupation,
    occupation_time_polyline,
    occupation_time_sampled,
    strip_profile,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 3


def _fmt(value: float, digits: int) -> str:
    return f"{value:.{digits}g}"


def _parse_rect(text: str) -> Rect:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"expected 'a1,b1,a2,b2', got {text!r}"
        )
    try:
        return Rect(*(float(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected 'lam,sigma1,sigma2', got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'nx,ny', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, required=True,
                        help="stiffness of the mean reversion (> 0)")
    parser.add_argument("--sigma1", type=float, required=True,
                        help="diffusion along the belt direction (>= 0)")
    parser.add_argument("--sigma2", type=float, required=True,
                        help="diffusion across the belt (>= 0)")
    parser.add_argument("--kappa", type=float, default=0.0, help="belt speed (>= 0)")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--digits", type=int, default=6,
                        help="significant digits for printed numbers")
    parser.add_argument("--quad-tol", type=float, default=1e-8,
                        help="absolute tolerance of the time quadrature")


def _grid_from_args(args: argparse.Namespace, horizon: float) -> TimeGrid:
    if args.steps is not None:
        return TimeGrid(horizon, args.steps)
    return TimeGrid.with_resolution(horizon, args.steps_per_unit_time)


def _out_stream(args: argparse.Namespace) -> IO[str]:
    return open(args.out, "w") if args.out else sys.stdout


def _close_out(stream: IO[str]) -> None:
    if stream is not sys.stdout:
        stream.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laydown",
        description="Moving-belt fiber lay-down: simulation, occupation times, "
        "and parameter estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one path, write CSV (t,y1,y2)")
    _add_model_flags(p)
    p.add_argument("--T", type=float, required=True, help="time horizon")
    p.add_argument("--steps", type=int, default=None, help="number of time steps")
    p.add_argument("--steps-per-unit-time", type=float,
                   default=DEFAULT_STEPS_PER_UNIT_TIME)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output CSV file (default stdout)")
    _add_common_flags(p)

    p = sub.add_parser("expected", help="analytic expected occupation time")
    _add_model_flags(p)
    p.add_argument("--rect", type=_parse_rect, required=True, metavar="a1,b1,a2,b2")
    p.add_argument("--T", type=float, required=True)
    _add_common_flags(p)

    p = sub.add_parser("mc", help="Monte-Carlo expected occupation time")
    _add_model_flags(p)
    p.add_argument("--rect", type=_parse_rect, required=True, metavar="a1,b1,a2,b2")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--paths", type=int, default=10000, help="number of sample paths")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--steps-per-unit-time", type=float,
                   default=DEFAULT_STEPS_PER_UNIT_TIME)
    _add_common_flags(p)

    p = sub.add_parser("occupancy",
                       help="occupation time of a path file over a rectangle, "
                       "grid, or strip profile")
    p.add_argument("--path", required=True, help="path CSV file")
    p.add_argument("--rect", type=_parse_rect, required=True, metavar="a1,b1,a2,b2",
                   help="rectangle (or grid/strip bounds)")
    p.add_argument("--grid", type=_parse_pair, default=None, metavar="NX,NY",
                   help="emit an NXxNY occupation grid as CSV")
    p.add_argument("--strips", type=int, default=None, metavar="N",
                   help="emit N vertical strips as CSV")
    p.add_argument("--rule", choices=("polyline", "sampled"), default="polyline",
                   help="occupation rule for a single rectangle")
    p.add_argument("--out", default=None)
    _add_common_flags(p)

    p = sub.add_parser("estimate",
                       help="recover (lambda, sigma1, sigma2) from observations")
    p.add_argument("--obs", default=None, help="observation file")
    p.add_argument("--path", default=None, help="path CSV file (alternative to --obs)")
    p.add_argument("--region", type=_parse_rect, action="append", default=None,
                   metavar="a1,b1,a2,b2",
                   help="region for --path mode; repeat for several regions")
    p.add_argument("--kappa", type=float, default=None,
                   help="belt speed of the path observations")
    p.add_argument("--T", type=float, default=None,
                   help="horizon of the path observations (default: path duration)")
    p.add_argument("--guess", type=_parse_triple, default=(1.0, 1.0, 1.0),
                   metavar="l,s1,s2", help="initial guess")
    p.add_argument("--multi-start", action="store_true",
                   help="restart from the guess scaled by powers of 10")
    p.add_argument("--max-evals", type=int, default=5000)
    p.add_argument("--out", default=None, help="write the result as a file")
    _add_common_flags(p)

    p = sub.add_parser("table1", help="analytic vs Monte-Carlo comparison CSV")
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps-per-unit-time", type=float,
                   default=DEFAULT_STEPS_PER_UNIT_TIME)
    p.add_argument("--out", default=None)
    _add_common_flags(p)

    p = sub.add_parser("table3", help="Monte-Carlo observation matrix CSV")
    p.add_argument("--paths", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps-per-unit-time", type=float,
                   default=DEFAULT_STEPS_PER_UNIT_TIME)
    p.add_argument("--out", default=None)
    _add_common_flags(p)

    p = sub.add_parser("table4", help="round-trip parameter recovery CSV")
    p.add_argument("--paths", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rows", type=int, default=None,
                   help="limit to the first N true-parameter rows")
    p.add_argument("--steps-per-unit-time", type=float,
                   default=DEFAULT_STEPS_PER_UNIT_TIME)
    p.add_argument("--out", default=None)
    _add_common_flags(p)

    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = ModelParams(args.lam, args.sigma1, args.sigma2)
    grid = _grid_from_args(args, args.T)
    path = simulate_path(params, BeltConfig(args.kappa), grid, args.seed)
    stream = _out_stream(args)
    try:
        io.write_fiber_path(path, stream)
    finally:
        _close_out(stream)
    return EXIT_OK


def _cmd_expected(args: argparse.Namespace) -> int:
    params = ModelParams(args.lam, args.sigma1, args.sigma2)
    value = expected_occupation(
        params, BeltConfig(args.kappa), args.rect, args.T,
        QuadratureConfig(abs_tol=args.quad_tol),
    )
    print(_fmt(value, args.digits))
    return EXIT_OK


def _cmd_mc(args: argparse.Namespace) -> int:
    params = ModelParams(args.lam, args.sigma1, args.sigma2)
    grid = _grid_from_args(args, args.T)
    estimate = mc_expected_occupation(
        params, BeltConfig(args.kappa), args.rect,
        McConfig(args.paths, args.seed, grid),
    )
    print(f"{_fmt(estimate.mean, args.digits)} ± {_fmt(estimate.std_error, args.digits)}")
    return EXIT_OK


def _cmd_occupancy(args: argparse.Namespace) -> int:
    path = io.load_fiber_path(args.path)
    if args.grid is not None and args.strips is not None:
        print("error: --grid and --strips are mutually exclusive", file=sys.stderr)
        return EXIT_ERROR
    if args.grid is not None:
        nx, ny = args.grid
        grid = grid_occupation(path, args.rect, nx, ny)
        stream = _out_stream(args)
        try:
            io.write_grid_csv(grid, stream)
        finally:
            _close_out(stream)
        return EXIT_OK
    if args.strips is not None:
        strips = strip_profile(path, args.rect, args.strips)
        edges = np.linspace(args.rect.a1, args.rect.b1, args.strips + 1)
        stream = _out_stream(args)
        try:
            io.write_strips_csv(edges, strips, stream)
        finally:
            _close_out(stream)
        return EXIT_OK
    if args.rule == "sampled":
        value = occupation_time_sampled(path, args.rect)
    else:
        value = occupation_time_polyline(path, args.rect)
    print(_fmt(value, args.digits))
    return EXIT_OK


def _observations_from_path(args: argparse.Namespace) -> ObservationSet:
    if not args.region or len(args.region) < 3:
        raise ValueError(
            "--path mode needs at least three --region flags (3 parameters "
            "require at least 3 observations)"
        )
    if args.kappa is None:
        raise ValueError("--path mode requires --kappa")
    path = io.load_fiber_path(args.path)
    horizon = args.T if args.T is not None else path.duration
    values = np.array(
        [[occupation_time_polyline(path, region)] for region in args.region]
    )
    return ObservationSet(
        regions=tuple(args.region),
        belt_speeds=(args.kappa,),
        horizon=horizon,
        values=values,
    )


def _cmd_estimate(args: argparse.Namespace) -> int:
    if (args.obs is None) == (args.path is None):
        print("error: provide exactly one of --obs or --path", file=sys.stderr)
        return EXIT_ERROR
    if args.obs is not None:
        observations = io.load_observations(args.obs)
    else:
        observations = _observations_from_path(args)
    config = OptimizerConfig(
        initial_guess=ModelParams(*args.guess),
        max_evals=args.max_evals,
        multi_start=args.multi_start,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        result: EstimationResult = estimate_params(
            observations, config, QuadratureConfig(abs_tol=args.quad_tol)
        )
    for warning in caught:
        print(f"warning: {warning.message}", file=sys.stderr)
    d = args.digits
    print(f"lambda  = {_fmt(result.params.lam, d)}")
    print(f"sigma1  = {_fmt(result.params.sigma1, d)}")
    print(f"sigma2  = {_fmt(result.params.sigma2, d)}")
    print(f"cost    = {_fmt(result.final_cost, d)}")
    if args.out:
        with open(args.out, "w") as stream:
            stream.write(f"lambda {result.params.lam:.17g}\n")
            stream.write(f"sigma1 {result.params.sigma1:.17g}\n")
            stream.write(f"sigma2 {result.params.sigma2:.17g}\n")
            stream.write(f"cost {result.final_cost:.17g}\n")
            stream.write(f"iterations {result.iterations}\n")
            stream.write(f"converged {result.converged}\n")
    if not result.converged:
        print("error: simplex search did not converge within the evaluation "
              "budget", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_table1(args: argparse.Namespace) -> int:
    rows = benchmarks.comparison_table(
        num_paths=args.paths,
        master_seed=args.seed,
        steps_per_unit_time=args.steps_per_unit_time,
        quad=QuadratureConfig(abs_tol=args.quad_tol),
    )
    stream = _out_stream(args)
    try:
        stream.write("horizon,lambda,sigma,kappa,analytic,mc,mc_std_error\n")
        d = args.digits
        for row in rows:
            stream.write(
                f"{_fmt(row['horizon'], d)},{_fmt(row['lam'], d)},"
                f"{_fmt(row['sigma'], d)},{_fmt(row['kappa'], d)},"
                f"{_fmt(row['analytic'], d)},{_fmt(row['mc'], d)},"
                f"{_fmt(row['mc_std_error'], d)}\n"
            )
    finally:
        _close_out(stream)
    return EXIT_OK


def _cmd_table3(args: argparse.Namespace) -> int:
    observations = benchmarks.observation_study(
        num_paths=args.paths,
        master_seed=args.seed,
        steps_per_unit_time=args.steps_per_unit_time,
    )
    stream = _out_stream(args)
    try:
        d = args.digits
        header = ",".join(f"kappa={_fmt(s, d)}" for s in observations.belt_speeds)
        stream.write(f"a1,b1,a2,b2,{header}\n")
        for region, row in zip(observations.regions, observations.values):
            cells = ",".join(_fmt(v, d) for v in row)
            stream.write(
                f"{_fmt(region.a1, d)},{_fmt(region.b1, d)},"
                f"{_fmt(region.a2, d)},{_fmt(region.b2, d)},{cells}\n"
            )
    finally:
        _close_out(stream)
    return EXIT_OK


def _cmd_table4(args: argparse.Namespace) -> int:
    true_params = benchmarks.RECOVERY_TRUE_PARAMS
    if args.rows is not None:
        true_params = true_params[: args.rows]
    rows = benchmarks.recovery_study(
        num_paths=args.paths,
        master_seed=args.seed,
        true_params=true_params,
        steps_per_unit_time=args.steps_per_unit_time,
        quad=QuadratureConfig(abs_tol=args.quad_tol),
    )
    stream = _out_stream(args)
    try:
        d = args.digits
        stream.write(
            "true_lambda,true_sigma1,true_sigma2,"
            "est_lambda,est_sigma1,est_sigma2,cost\n"
        )
        for row in rows:
            stream.write(
                f"{_fmt(row['true_lam'], d)},{_fmt(row['true_sigma1'], d)},"
                f"{_fmt(row['true_sigma2'], d)},{_fmt(row['est_lam'], d)},"
                f"{_fmt(row['est_sigma1'], d)},{_fmt(row['est_sigma2'], d)},"
                f"{_fmt(row['cost'], d)}\n"
            )
    finally:
        _close_out(stream)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "expected": _cmd_expected,
    "mc": _cmd_mc,
    "occupancy": _cmd_occupancy,
    "estimate": _cmd_estimate,
    "table1": _cmd_table1,
    "table3": _cmd_table3,
    "table4": _cmd_table4,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (io.FileFormatError, DegenerateObservationsError, QuadratureError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
