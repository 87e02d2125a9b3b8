#!/usr/bin/env python3
"""Command-line entry point: Zak transforms, theta kernel, example windows, partner diagnostics and verify suites."""

import argparse
import json
import logging
import os
import sys

from src.config import load_config
from src.errors import DomainError, GaborError
from src.numeric_core import Grid, SampledSignal, write_signal_csv
from src.partner import (
    PartnerConfig,
    column_sums_payload,
    shift_invariance_demo,
    standard_test_pairs,
    weak_identity_check,
)
from src.report import Report, dumps_json, write_json
from src.suites import SUITES, bastiaans_suite, run_verify, theta_suite, write_example4_artifacts
from src.theta_kernel import theta_grid, write_theta_csv
from src.tracing import get_opentelemetry_tracer, init_tracer_provider, record_failure
from src.windows import window_from_name
from src.zak import check_quasiperiodicity, write_zak_csv, zak_forward

logger = logging.getLogger("repgabor")

WINDOWS = ["gaussian", "box", "bastiaans", "example4_g", "example4_gamma"]
EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _grid_spec(text):
    try:
        t_min, t_max, n = text.split(",")
        return Grid(float(t_min), float(t_max), int(n))
    except (ValueError, DomainError) as e:
        raise argparse.ArgumentTypeError(f"expected t_min,t_max,n with t_min < t_max and n >= 2 ({e})")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", dest="log_level", default=None,
                        help="Logging level (default from REPGABOR_LOG_LEVEL or WARNING)")
    common.add_argument("--seed", type=int, default=None, help="Seed for random node sampling")
    common.add_argument("--json", dest="json_path", default=None, help="Write the JSON report to this path")

    parser = argparse.ArgumentParser(description="Gabor systems at critical density: Zak transform, theta kernel, "
                                                 "reproducing partner of the Gaussian")
    commands = parser.add_subparsers(dest="command", required=True)

    zak = commands.add_parser("zak", parents=[common], help="Sample Z_a of a window on Q_a")
    zak.add_argument("--window", choices=WINDOWS, default="gaussian")
    zak.add_argument("--a", type=float, default=1.0)
    zak.add_argument("--sigma", type=float, default=1.0)
    zak.add_argument("--grid", type=_positive_int, default=None, help="Nodes per axis")
    zak.add_argument("--out", required=True, help="CSV path (x, omega, re, im)")

    theta = commands.add_parser("theta", help="Theta kernel Theta(omega)")
    theta_commands = theta.add_subparsers(dest="theta_command", required=True)
    theta_grid_cmd = theta_commands.add_parser("grid", parents=[common], help="Theta on an N x N grid of [0,1)^2")
    theta_grid_cmd.add_argument("--grid", type=_positive_int, default=None)
    theta_grid_cmd.add_argument("--out", required=True)
    theta_commands.add_parser("check", parents=[common], help="Grid scan, Hessian and product-form checks")

    windows = commands.add_parser("windows", help="Window functions")
    window_commands = windows.add_subparsers(dest="windows_command", required=True)
    dump = window_commands.add_parser("dump", parents=[common], help="Sample a window on a grid")
    dump.add_argument("--window", choices=WINDOWS, required=True)
    dump.add_argument("--a", type=float, default=1.0)
    dump.add_argument("--sigma", type=float, default=1.0)
    dump.add_argument("--grid", type=_grid_spec, default=Grid(-8.0, 8.0, 1601), help="t_min,t_max,n")
    dump.add_argument("--out", required=True)

    example4 = commands.add_parser("example4", parents=[common], help="Band-limited pair g_a, gamma_a and their figure")
    example4.add_argument("--a", type=float, default=1.0)
    example4.add_argument("--out-dir", dest="out_dir", required=True)
    example4.add_argument("--svg", action=argparse.BooleanOptionalAction, default=True)

    commands.add_parser("bastiaans", parents=[common], help="Calibration, pair bounds and growth scan of psi")

    partner = commands.add_parser("partner", help="Reproducing partner of the Gaussian system")
    partner_commands = partner.add_subparsers(dest="partner_command", required=True)
    sums = partner_commands.add_parser("column-sums", parents=[common], help="T_R(n, m) for R = radius / 2^j")
    sums.add_argument("--n", type=int, default=0)
    sums.add_argument("--m", type=int, default=0)
    sums.add_argument("--radius", type=_positive_int, default=None)
    sums.add_argument("--corrected", action=argparse.BooleanOptionalAction, default=True,
                      help="--corrected (default) or --no-corrected")
    sums.add_argument("--uncorrected", dest="corrected", action="store_false")
    sums.add_argument("--cache-dir", dest="cache_dir", default=None)
    weak = partner_commands.add_parser("weak-identity", parents=[common], help="Weak reconstruction on the test pairs")
    weak.add_argument("--tol", type=float, default=None)
    weak.add_argument("--cache-dir", dest="cache_dir", default=None)
    shift = partner_commands.add_parser("shift-invariance", parents=[common], help="Corrected vs uncorrected columns")
    shift.add_argument("--cache-dir", dest="cache_dir", default=None)

    verify = commands.add_parser("verify", parents=[common], help="Run an acceptance suite")
    verify.add_argument("suite", choices=list(SUITES) + ["all"])
    verify.add_argument("--cache-dir", dest="cache_dir", default=None)
    return parser


def column_radii(radius):
    radii = []
    while radius >= 16 and len(radii) < 4:
        radii.append(radius)
        radius //= 2
    if not radii:
        raise DomainError("column sums need a radius >= 16")
    return sorted(radii)


def _emit(report: Report, json_path):
    if json_path:
        report.write_json(json_path)
        logger.info(f"Report written to {json_path}")
    for check in report.failed_checks():
        logger.warning(f"Failed check {check.check}: value={check.value} tolerance={check.tolerance}")
    return EXIT_OK if report.passed else EXIT_FAILED


def run_zak(args, config):
    window = window_from_name(args.window, sigma=args.sigma, a=args.a)
    n = args.grid or config["zak_resolution"]
    field = zak_forward(window, args.a, n, n)
    echo = {"window": window.label, "a": args.a, "resolution": [n, n]}
    write_zak_csv(field, args.out, config=echo)
    report = Report("zak", config=echo)
    finite = int(field.finite_mask.sum())
    report.add("finite_nodes", finite > 0, finite, field.finite_mask.size)
    if args.window in ("gaussian", "box"):
        report.check_close("unitarity", field.norm(), 1.0, 1e-8)
    if window.zak(field.x[:1], field.omega[:1], args.a) is None:
        report.merge(check_quasiperiodicity(field, window, config["quasiperiodicity_nodes"], seed=config["seed"]),
                     prefix="quasiperiodicity")
    return _emit(report, args.json_path)


def run_theta(args, config):
    if args.theta_command == "grid":
        n = args.grid or config["theta_grid"]
        write_theta_csv(theta_grid(n, config["theta_radius"]), args.out,
                        config={"grid": n, "theta_radius": config["theta_radius"]})
        return EXIT_OK
    return _emit(theta_suite(config), args.json_path)


def run_windows(args, config):
    window = window_from_name(args.window, sigma=args.sigma, a=args.a)
    grid = args.grid
    signal = SampledSignal(grid, window.evaluate(grid.points))
    write_signal_csv(signal, args.out, config={"window": window.label, "a": args.a, "sigma": args.sigma,
                                               "grid": [grid.t_min, grid.t_max, grid.n_samples]})
    return EXIT_OK


def run_example4(args, config):
    paths = write_example4_artifacts(args.a, args.out_dir, config, svg=args.svg)
    logger.info(f"Example pair written: {json.dumps(paths)}")
    return EXIT_OK


def run_partner(args, config):
    cfg = PartnerConfig.from_config(config)
    if args.partner_command == "column-sums":
        radii = column_radii(args.radius or config["column_radius"])
        payload = column_sums_payload(args.n, args.m, radii, args.corrected, cfg)
        if args.json_path:
            write_json(args.json_path, payload)
        else:
            sys.stdout.write(dumps_json(payload))
        return EXIT_OK
    if args.partner_command == "weak-identity":
        tolerance = args.tol if args.tol is not None else config["weak_tolerance"]
        report = Report("weak_identity_pairs", config={"radii": config["weak_radii"], "tolerance": tolerance})
        for name, f, h in standard_test_pairs():
            report.merge(weak_identity_check(f, h, cfg, config["weak_radii"], tolerance, label=name), prefix=name)
        return _emit(report, args.json_path)
    return _emit(shift_invariance_demo(cfg, config["column_radii"]), args.json_path)


def run_verify_command(args, config):
    return _emit(run_verify(args.suite, config), args.json_path)


HANDLERS = {
    "zak": run_zak,
    "theta": run_theta,
    "windows": run_windows,
    "example4": run_example4,
    "bastiaans": lambda args, config: _emit(bastiaans_suite(config), args.json_path),
    "partner": run_partner,
    "verify": run_verify_command,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    overrides = {
        "seed": args.seed,
        "log_level": args.log_level,
        "cache_dir": getattr(args, "cache_dir", None),
        "column_radius": getattr(args, "radius", None),
    }
    run_config = load_config(overrides)
    logging.basicConfig(level=getattr(logging, str(run_config["log_level"]).upper(), logging.WARNING),
                        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    provider = init_tracer_provider("repgabor")
    tracer = get_opentelemetry_tracer("repgabor")
    logger.info(f"Starting '{args.command}' with resolved config: {json.dumps(run_config, default=str)}")

    with tracer.start_as_current_span(f"cli.{args.command}") as span:
        try:
            if args.json_path:
                os.makedirs(os.path.dirname(os.path.abspath(args.json_path)), exist_ok=True)
            status = HANDLERS[args.command](args, run_config)
        except DomainError as e:
            record_failure(span, e)
            logger.error(f"{args.command}: {e}")
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        except GaborError as e:
            record_failure(span, e)
            logger.error(f"{args.command}: numeric failure: {e}")
            print(f"numeric failure: {e}", file=sys.stderr)
            return EXIT_FAILED
        span.set_attribute("cli.exit_status", status)
    if hasattr(provider, "force_flush"):
        provider.force_flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
