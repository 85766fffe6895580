"""
Command-line interface
----------------------

    pdfw run    [--config FILE] [--instance FILE] [--algo NAME] [--schedule NAME]
                [--horizons T ...] [--seeds N] [--out DIR] [--workers N] [--trace] [--timing]
    pdfw verify SUITE [--full]
    pdfw gen    GENERATOR --out FILE [--d D] [--n-states S] [--n-vertices V] [--seed K]
    pdfw gap    --instance FILE --gamma X [X ...]

Exit codes: 0 success, 1 a checked property failed, 2 usage error.
"""

import argparse
import logging
import sys

import numpy as np
import yaml

from pdfw.common import logger, PlanError, PropertyFailure, ContractViolation
from pdfw.common.config import check_params, set_nested
from pdfw.common.utils import load_yaml
from pdfw.core import SCHEDULES
from pdfw.diagnostics import MixturePolytope, fw_gap, dist_to_polytope, solve_gamma_star
from pdfw.problems import GENERATORS, generate, load_instance, save_instance
from pdfw.harness.plan import ALGORITHMS, ExperimentPlan, run_plan
from pdfw.harness.suites import SUITES, verify_all

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdfw", description="Primal-dual Frank-Wolfe experiments and acceptance suites"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="run an experiment plan")
    run.add_argument("--config", help="user config YAML (defaults to the bundled config.yaml)")
    run.add_argument("--instance", help="instance file; overrides the generator")
    run.add_argument("--algo", choices=ALGORITHMS, help="algorithm")
    run.add_argument("--schedule", choices=SCHEDULES, help="parameter schedule")
    run.add_argument("--horizons", type=int, nargs="+", help="strictly increasing horizons")
    run.add_argument("--seeds", type=int, help="Monte Carlo seeds per horizon")
    run.add_argument("--out", help="output folder")
    run.add_argument("--name", help="experiment name (output file prefix)")
    run.add_argument("--workers", type=int, help="worker processes")
    run.add_argument("--trace", action="store_true", help="also write per-slot traces")
    run.add_argument("--timing", action="store_true", help="record wall-clock seconds")

    verify = subparsers.add_parser("verify", help="run an acceptance suite")
    verify.add_argument("suite", help=f"one of {', '.join(SUITES)}")
    verify.add_argument("--full", action="store_true", help="full Monte Carlo protocol")

    gen = subparsers.add_parser("gen", help="write an instance file from a generator")
    gen.add_argument("generator", choices=sorted(GENERATORS))
    gen.add_argument("--out", required=True, help="instance file to write")
    gen.add_argument("--d", type=int, default=2)
    gen.add_argument("--n-states", type=int, default=2)
    gen.add_argument("--n-vertices", type=int, default=3, help="random_finite only")
    gen.add_argument("--seed", type=int, default=0)

    gap = subparsers.add_parser("gap", help="Frank-Wolfe gap and distance of one point")
    gap.add_argument("--instance", required=True, help="instance file")
    gap.add_argument("--gamma", type=float, nargs="+", required=True, help="query point")
    return parser


#######################
# Commands
#######################


def _user_config(args) -> dict:
    if args.config is None:
        user_yaml = load_yaml("config.yaml")
    else:
        try:
            with open(args.config, "r", encoding="utf8") as configfile:
                user_yaml = yaml.safe_load(configfile) or {}
        except OSError as err:
            raise OSError(f"Could not read config {args.config}: {err}") from err
    overrides = {
        ("instance", "path"): args.instance,
        ("algorithm", "name"): args.algo,
        ("algorithm", "schedule"): args.schedule,
        ("experiment", "horizons"): args.horizons,
        ("experiment", "seeds"): args.seeds,
        ("experiment", "output folder"): args.out,
        ("experiment", "name"): args.name,
        ("experiment", "workers"): args.workers,
        ("experiment", "trace"): args.trace or None,
        ("experiment", "timing"): args.timing or None,
    }
    for keys, value in overrides.items():
        if value is not None:
            set_nested(user_yaml, list(keys), value)
    return user_yaml


def command_run(args) -> int:
    params = check_params(_user_config(args))
    plan = ExperimentPlan.from_params(params)
    report = run_plan(plan)
    for path in report.paths.values():
        print(path)
    if not report.passed:
        raise PropertyFailure(f"{len(report.failures)} bound check(s) failed")
    return EXIT_OK


def command_verify(args) -> int:
    report = verify_all(args.suite, "full" if args.full else "quick")
    print(report.to_frame().to_string(index=False))
    report.raise_on_failure()
    return EXIT_OK


def command_gen(args) -> int:
    params = {"d": args.d, "n_states": args.n_states, "seed": args.seed}
    if args.generator == "random_finite":
        params["n_vertices"] = args.n_vertices
    inst = generate(args.generator, **params)
    if inst.objective.convex:
        inst.certificates["gamma_star"] = solve_gamma_star(inst, MixturePolytope.from_instance(inst))
    save_instance(inst, args.out)
    print(args.out)
    return EXIT_OK


def command_gap(args) -> int:
    inst = load_instance(args.instance)
    gamma = np.asarray(args.gamma, dtype=float)
    if gamma.shape != (inst.dimension,):
        raise ContractViolation(
            f"Point has {gamma.size} coordinates, the instance has dimension {inst.dimension}"
        )
    poly = MixturePolytope.from_instance(inst)
    print(f"fw_gap {fw_gap(inst, poly, gamma):.10g}")
    print(f"dist {dist_to_polytope(poly, gamma):.10g}")
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "verify": command_verify,
    "gen": command_gen,
    "gap": command_gap,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except PropertyFailure as err:
        logger.error(str(err))
        return EXIT_PROPERTY_FAILURE
    except (PlanError, ContractViolation, ValueError, NotImplementedError, RuntimeWarning, OSError) as err:
        logger.error(str(err))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
