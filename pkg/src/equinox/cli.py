"""Command-line interface: scenario ingestion, solving, checking, sweeps.

Exit codes: 0 success, 2 validation failure, 3 solver or certificate failure,
4 I/O or schema error.  All randomness derives from --seed.  The environment
variable EQUINOX_LOG (error | info | debug) controls logging verbosity.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
import time

import numpy as np

from .equilibrium import (
    ApproximateEquilibrium,
    Economy,
    check_equilibrium,
    refine_sequence,
    solve,
    validate_economy,
)
from .errors import EquinoxError, SchemaError
from .fixed_point import approximate_zero
from .geometry import Ball, Box, FiniteCone, VPolytope
from .preferences import Preference

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TOP_LEVEL_KEYS = {"schema", "dimension", "consumers", "production_generators",
                  "interior_points", "solver"}
CONSUMER_KEYS = {"set", "bliss_point", "Q"}
SOLVER_KEYS = {"epsilon", "seed", "max_refine", "tolerances"}

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _configure_logging():
    level = os.environ.get("EQUINOX_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


def _build_body(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SchemaError("consumer set needs a 'kind'")
    kind = spec["kind"]
    if kind == "box":
        return Box(spec["bounds"])
    if kind == "ball":
        return Ball(spec["center"], spec["radius"])
    if kind == "vpolytope":
        return VPolytope(spec["vertices"])
    raise SchemaError(f"unknown set kind: {kind}")


def load_scenario(path):
    """Parse and validate a scenario file into (Economy, solver options)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read scenario: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario is not valid JSON: {exc}") from exc

    if not isinstance(data, dict):
        raise SchemaError("scenario must be a JSON object")
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            raise SchemaError(f"unknown key: {key}")
    if data.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version: {data.get('schema')!r}")
    for key in ("dimension", "consumers", "production_generators"):
        if key not in data:
            raise SchemaError(f"missing key: {key}")

    dimension = data["dimension"]
    if not isinstance(dimension, int) or dimension < 1:
        raise SchemaError("dimension must be a positive integer")

    consumers = []
    if not isinstance(data["consumers"], list) or not data["consumers"]:
        raise SchemaError("consumers must be a nonempty list")
    for i, cons in enumerate(data["consumers"]):
        if not isinstance(cons, dict):
            raise SchemaError(f"consumer {i} must be an object")
        for key in cons:
            if key not in CONSUMER_KEYS:
                raise SchemaError(f"unknown key: consumers[{i}].{key}")
        if "set" not in cons or "bliss_point" not in cons:
            raise SchemaError(f"consumer {i} needs 'set' and 'bliss_point'")
        body = _build_body(cons["set"])
        if body.dim != dimension:
            raise SchemaError(f"consumer {i} set dimension mismatch")
        consumers.append(Preference(body, cons["bliss_point"], cons.get("Q")))

    generators = np.asarray(data["production_generators"], dtype=float)
    if generators.ndim != 2 or generators.shape[1] != dimension:
        raise SchemaError("production_generators must be a list of N-vectors")
    production = FiniteCone(generators)

    interior = data.get("interior_points")
    solver_spec = data.get("solver", {})
    if not isinstance(solver_spec, dict):
        raise SchemaError("solver must be an object")
    for key in solver_spec:
        if key not in SOLVER_KEYS:
            raise SchemaError(f"unknown key: solver.{key}")

    economy = Economy(consumers=consumers, production=production,
                      interior_points=interior)
    options = {
        "epsilon": float(solver_spec.get("epsilon", 0.01)),
        "seed": int(solver_spec.get("seed", 0)),
        "max_refine": int(solver_spec.get("max_refine", 12)),
        "tolerances": solver_spec.get("tolerances", {}),
    }
    return economy, options


def _print_validation(report):
    print(f"pointedness: {'pass' if report.pointedness else 'FAIL'}"
          f" (certificate: {report.pointedness_certificate})")
    for i, witness in enumerate(report.interior_witnesses):
        if witness is None:
            print(f"interior witness {i}: FAIL")
        else:
            point = np.array2string(np.asarray(witness[0]), precision=6)
            print(f"interior witness {i}: pass {point} radius {witness[1]:.6g}")
    print(f"nonsatiation samples: {report.nonsatiation_pass} pass,"
          f" {report.nonsatiation_fail} fail")
    for note in report.notes:
        print(f"note: {note}")
    print(f"validation: {'pass' if report.passed else 'FAIL'}")


def cmd_validate(args):
    economy, options = load_scenario(args.scenario)
    report = validate_economy(economy, seed=options["seed"])
    _print_validation(report)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_solve(args):
    economy, options = load_scenario(args.scenario)
    epsilon = args.epsilon if args.epsilon is not None else options["epsilon"]
    seed = args.seed if args.seed is not None else options["seed"]
    max_refine = args.max_refine if args.max_refine is not None else options["max_refine"]

    t0 = time.perf_counter()
    report = validate_economy(economy, seed=seed)
    t1 = time.perf_counter()
    if not report.passed:
        _print_validation(report)
        return EXIT_VALIDATION
    certificate = solve(economy, epsilon, seed=seed, max_refine=max_refine)
    t2 = time.perf_counter()

    bundle = {
        "schema": SCHEMA_VERSION,
        "certificate": certificate.to_dict(),
        "validation": report.to_dict(),
        "timing": {"validate_s": t1 - t0, "solve_s": t2 - t1},
    }
    text = json.dumps(bundle, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(f"solved: p = {np.array2string(certificate.price, precision=8)}, "
          f"p.eta = {certificate.metrics['p_dot_eta']:.3g}, "
          f"dist(eta, Y) = {certificate.metrics['dist_eta_to_Y']:.3g}",
          file=sys.stderr)
    return EXIT_OK


def cmd_check(args):
    economy, _ = load_scenario(args.scenario)
    try:
        with open(args.certificate, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read certificate: {exc}") from exc
    payload = data.get("certificate", data)
    try:
        certificate = ApproximateEquilibrium.from_dict(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed certificate: {exc}") from exc

    report = check_equilibrium(economy, certificate)
    for name, ok, detail in report.clauses + report.grid_oracle:
        status = "pass" if ok else "FAIL"
        print(f"{status}: {name}" + (f" ({detail})" if detail else ""))
    print(f"certificate: {'pass' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_SOLVER


def sweep_rows(economy, eps0, k, seed):
    """Rows of the sweep table for refine_sequence output."""
    results = refine_sequence(economy, eps0, k, seed=seed)
    rows = []
    previous = None
    for n, cert in enumerate(results):
        step = "" if previous is None else \
            repr(float(np.linalg.norm(cert.price - previous)))
        rows.append([n, repr(float(cert.epsilon))]
                    + [repr(float(v)) for v in cert.price]
                    + [repr(float(cert.metrics["p_dot_eta"])),
                       repr(float(cert.metrics["dist_eta_to_Y"])), step])
        previous = cert.price
    return rows, results


def cmd_sweep(args):
    economy, options = load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else options["seed"]
    rows, results = sweep_rows(economy, args.eps0, args.k, seed)
    if not results:
        return EXIT_SOLVER

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    dimension = economy.dimension
    header = ["n", "epsilon"] + [f"p_{i}" for i in range(dimension)] \
        + ["p_dot_eta", "dist_eta_Y", "price_step"]
    writer.writerow(header)
    writer.writerows(rows)
    text = buffer.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return EXIT_OK if len(results) == args.k + 1 else EXIT_SOLVER


def cmd_ivt(args):
    coeffs = np.asarray(args.function, dtype=float)

    def f(x):
        return np.polyval(coeffs[::-1], x)

    zero = approximate_zero(f, args.epsilon)
    print(zero)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="equinox",
        description="Approximate competitive equilibria of conical economies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an economy against the hypotheses")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="compute an approximate equilibrium certificate")
    p.add_argument("scenario")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-refine", type=int, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="re-verify a certificate against a scenario")
    p.add_argument("scenario")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="solve along a halving epsilon sequence")
    p.add_argument("scenario")
    p.add_argument("--eps0", type=float, default=0.1)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ivt", help="approximate zero of a bracketing polynomial on [0,1]")
    p.add_argument("--function", type=float, nargs="+", required=True,
                   help="polynomial coefficients, ascending powers")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.set_defaults(func=cmd_ivt)
    return parser


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EquinoxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
