"""Command-line interface.

Exit codes: 0 success, 1 estimator failure, 2 usage or input-file error.
"""

import argparse
import sys

import numpy as np

from . import harness
from .errors import CalibrationError, InvalidOrientation, ParseError, PreconditionError
from .io import (SCHEMA_HELP, file_digest, load_dataset, save_dataset, truth_to_dict,
                 write_json)
from .known_gravity import (calibrate_cayley, calibrate_relaxation, cayley_system,
                            estimate_cog, relaxation_regressor)
from .numerics import condition_number
from .report import build_report
from .simulate import generate_dataset, random_scenario
from .unknown_gravity import (build_operators, calibrate_eigen, calibrate_iterative,
                              calibrate_nullspace)

EXIT_OK, EXIT_ESTIMATOR, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _vector(text):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z numbers, got {text!r}") from None
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected 3 comma-separated numbers, got {text!r}")
    return np.array(values)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _methods(text):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in harness.METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown methods {bad}; choose from {harness.METHODS}")
    return methods


def _add_harness_args(p, reps, snr, methods=None):
    p.add_argument("--reps", type=int, default=reps, help="repetitions per noise level")
    p.add_argument("--poses", type=int, default=100, help="poses per dataset")
    p.add_argument("--gravity-std", type=float, default=100.0,
                   help="per-component std of the random gravity vector")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--output", "-o", help="CSV path (default: stdout)")
    p.add_argument("--figure", help="also render a figure from the table to this path")
    if snr is not None:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--snr", type=float, default=snr, help="gravity std / force noise std")
        g.add_argument("--noise", type=float, help="force noise std (overrides --snr)")
    if methods is not None:
        p.add_argument("--methods", type=_methods, default=list(methods))


def build_parser():
    parser = _Parser(prog="ftcalib", description="Force/torque sensor calibration toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="estimate the sensor calibration from a dataset")
    p.add_argument("--method", required=True,
                   choices=["relaxation", "cayley", "eigen", "nullspace", "iterative"])
    p.add_argument("--input", "-i", required=True, help="dataset file (.json or .csv)")
    p.add_argument("--output", "-o", help="report JSON path (default: stdout)")
    p.add_argument("--gravity", type=_vector, help="known gravity x,y,z in the base frame")
    p.add_argument("--mass", type=float, help="known payload mass (cayley)")
    p.add_argument("--ols", action="store_true", help="cayley: ordinary instead of total LS")
    p.add_argument("--estimate-cog", action="store_true", help="also estimate the centre of gravity")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=50)

    p = sub.add_parser("simulate", help="write a synthetic dataset and its ground truth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--poses", type=int, default=100)
    p.add_argument("--noise-force", type=float, default=0.0)
    p.add_argument("--noise-torque", type=float, help="defaults to --noise-force")
    grav = p.add_mutually_exclusive_group()
    grav.add_argument("--gravity-std", type=float,
                      help="random gravity, iid per component (mass fixed to 1)")
    grav.add_argument("--gravity", type=_vector, help="fixed gravity x,y,z (default 0,0,-9.81)")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--cog-std", type=float, default=0.05)
    p.add_argument("--output", "-o", required=True, help="dataset path (.json or .csv)")
    p.add_argument("--truth", required=True, help="ground-truth JSON path")

    p = sub.add_parser("sweep", help="rotation error vs. force noise (CSV)")
    _add_harness_args(p, reps=100, snr=None, methods=harness.METHODS)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--noise-levels", type=_float_list, help="explicit force noise stds")
    g.add_argument("--num-levels", type=int, default=8,
                   help="log-spaced levels from --snr-max down to --snr-min")
    p.add_argument("--snr-max", type=float, default=1e4)
    p.add_argument("--snr-min", type=float, default=1.0)
    p.add_argument("--mass-error", type=float, default=1.0,
                   help="mass given to cayley, as a multiple of the true mass")

    p = sub.add_parser("trace", help="iterative-method errors per iteration (CSV)")
    _add_harness_args(p, reps=200, snr=100.0)

    p = sub.add_parser("audit", help="pairwise disagreement of eigen/nullspace/iterative (CSV)")
    _add_harness_args(p, reps=200, snr=100.0)

    p = sub.add_parser("plot", help="render a figure from a harness CSV")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    return parser


def _report_for(args, data):
    method = args.method
    cond = {}
    extra = {}
    mass_out = None
    if method in ("relaxation", "cayley"):
        if args.gravity is None:
            raise UsageError(f"--method {method} requires --gravity x,y,z")
        if method == "cayley" and args.mass is None:
            raise UsageError("--method cayley requires --mass")
    if args.estimate_cog and not data.has_torque:
        raise UsageError("--estimate-cog requires torque columns in the dataset")

    if method == "relaxation":
        est = calibrate_relaxation(data, args.gravity)
        cond["regressor"] = condition_number(relaxation_regressor(data, args.gravity))
        gravity, mass = args.gravity, est.mass
        extra.update(gravity=gravity, gravity_scaled=mass * gravity, residual_force=est.residual_force)
        mass_out = mass
    elif method == "cayley":
        est = calibrate_cayley(data, args.gravity, args.mass, use_tls=not args.ols)
        cond["regressor"] = condition_number(cayley_system(data, args.mass * args.gravity)[0])
        gravity, mass = args.gravity, est.mass
        extra.update(gravity=gravity, gravity_scaled=mass * gravity, residual_force=est.residual_force)
        method = est.method.value
        mass_out = mass
    else:
        if method == "eigen":
            est = calibrate_eigen(data)
        elif method == "nullspace":
            est = calibrate_nullspace(data)
            extra["nullspace_gap"] = est.nullspace_gap
        else:
            est = calibrate_iterative(data, args.max_iters, args.tol)
            extra.update(iterations_used=est.iterations_used, converged=est.converged)
        ops = build_operators(data)
        cond.update(D=condition_number(ops.D), F=condition_number(ops.F))
        gravity, mass = est.gravity_scaled, 1.0
        extra.update(gravity_scaled=est.gravity_scaled, residual_force=est.residual)
    if args.estimate_cog:
        cog = estimate_cog(data, est.rotation, gravity, mass)
        extra.update(cog=cog.cog, residual_torque=cog.residual_torque)
    return build_report(method, est.rotation, mass=mass_out, condition_numbers=cond,
                        input_digest=file_digest(args.input), **extra)


def _calibrate(args):
    try:
        data = load_dataset(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror or exc}") from None
    report = _report_for(args, data)
    text = write_json(report, args.output)
    if text is not None:
        sys.stdout.write(text)


def _simulate(args):
    try:
        scenario = random_scenario(
            args.seed, num_poses=args.poses, noise_std_force=args.noise_force,
            noise_std_torque=args.noise_torque, gravity_std=args.gravity_std,
            gravity=args.gravity, mass=args.mass, cog_std=args.cog_std,
        )
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    data, truth = generate_dataset(scenario)
    save_dataset(data, args.output)
    write_json(truth_to_dict(truth, scenario), args.truth)


def _noise(args):
    if args.noise is not None:
        return args.noise
    return args.gravity_std / args.snr


def _spec(args, noise_levels, methods=harness.UNKNOWN_GRAVITY_METHODS, mass_error=1.0):
    try:
        return harness.SweepSpec(
            noise_levels=noise_levels, num_repetitions=args.reps, num_poses=args.poses,
            methods=methods, mass_error_factor=mass_error, gravity_std=args.gravity_std,
            seed=args.seed, max_iters=args.max_iters, tol=args.tol, workers=args.workers,
        )
    except (ValueError, PreconditionError) as exc:
        raise UsageError(str(exc)) from None


def _emit(rows, args):
    if args.output:
        harness.write_csv(rows, args.output)
    else:
        harness.rows_to_csv(rows, sys.stdout)
    if args.figure:
        from .plotting import plot_rows
        plot_rows(rows, args.figure)


def _sweep(args):
    if args.noise_levels:
        levels = args.noise_levels
    else:
        levels = harness.default_noise_levels(args.gravity_std, args.num_levels,
                                              args.snr_max, args.snr_min)
    spec = _spec(args, levels, args.methods, args.mass_error)
    rows = harness.run_noise_sweep(spec)
    _emit(rows, args)
    if args.output:
        for (method, noise), s in sorted(harness.summarize(rows).items()):
            print(f"{method:>11s} noise={noise:<10.4g} median={s.median:.3e} "
                  f"iqr=[{s.q25:.3e}, {s.q75:.3e}] failed={s.n_failed}")


def _trace(args):
    rows = harness.run_iteration_trace(_spec(args, [_noise(args)]))
    _emit(rows, args)
    if args.output:
        final = harness.final_iterations(rows)
        ok = [r for r in final if r.status == "ok"]
        conv = sum(bool(r.converged) for r in ok)
        med = np.median([r.gravity_rel_error for r in ok]) if ok else float("nan")
        print(f"converged {conv}/{len(final)}; final median gravity_rel_error {med:.4g}")


def _audit(args):
    rows = harness.run_equivalence_audit(_spec(args, [_noise(args)]))
    _emit(rows, args)
    if args.output:
        for (a, b), s in harness.summarize(rows, "rotation_disagreement_rad",
                                           ("method_a", "method_b")).items():
            print(f"{a}/{b}: median {s.median:.3e} rad, failed {s.n_failed}")


def _plot(args):
    from .plotting import plot_csv
    try:
        plot_csv(args.input, args.output)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None


COMMANDS = {
    "calibrate": _calibrate,
    "simulate": _simulate,
    "sweep": _sweep,
    "trace": _trace,
    "audit": _audit,
    "plot": _plot,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ParseError, InvalidOrientation) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(SCHEMA_HELP, file=sys.stderr)
        return EXIT_USAGE
    except CalibrationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        cond = getattr(exc, "condition_estimate", None)
        if cond is not None:
            print(f"  condition estimate: {cond:.3g}", file=sys.stderr)
        return EXIT_ESTIMATOR
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
