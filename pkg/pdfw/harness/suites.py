"""
Acceptance suites
-----------------
Each suite returns a list of `Check`s. `verify_all(suite, scale)` runs one
suite, logs a pass/fail line per check and returns a `SuiteReport`. The
`quick` scale uses reduced horizons and seed counts; `full` runs the
complete Monte Carlo protocol (minutes to hours).
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from pdfw.common import logger, timer, PlanError, PropertyFailure
from pdfw.core import AlgoConfig, CUBE_ROOT, SQUARE_ROOT
from pdfw.algorithms import run_pdfw, run_pd_gradient, tracking_trace
from pdfw.diagnostics import (
    MixturePolytope,
    DriftTestConfig,
    drift_test,
    dist_to_polytope,
    fw_gap,
    fit_rate,
    gap_perturbation_check,
    bruteforce_dist,
    bruteforce_fw_gap,
)
from pdfw.distributed import (
    make_consensus_nodes,
    make_cycle_graph,
    make_path_graph,
    run_distributed,
    stack_instance,
)
from pdfw.problems import (
    make_convex_scheduling,
    make_sigmoidal_scheduling,
    make_deterministic,
    make_random_finite,
    make_objective,
)
from pdfw.harness.plan import ExperimentPlan, PlanContext, run_plan

IDENTITY_SLACK = 1e-9
ORACLE_TOLERANCE = 1e-4
IDENTITY_HORIZONS = (1, 7, 100)

SCALES = {
    "quick": {
        "instances": 10,
        "horizons": (100, 300, 1000),
        "seeds": 20,
        "stacked_T": 50,
        "pairs": 100,
        "oracle_instances": 20,
        "oracle_points": 5,
        "rates": False,
    },
    "full": {
        "instances": 50,
        "horizons": (1000, 10000, 100000),
        "seeds": 200,
        "stacked_T": 500,
        "pairs": 100,
        "oracle_instances": 40,
        "oracle_points": 10,
        "rates": True,
    },
}


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    suite: str
    scale: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(self.suite, c.name, c.passed, c.detail) for c in self.checks],
            columns=["suite", "check", "passed", "detail"],
        )

    def raise_on_failure(self):
        failed = [check.name for check in self.checks if not check.passed]
        if failed:
            raise PropertyFailure(f"Suite `{self.suite}` failed: {', '.join(failed)}")


def _plan_checks(name: str, plan_report) -> List[Check]:
    checks = []
    for row in plan_report.report.itertuples():
        checks.append(
            Check(
                f"{name}: {row.quantity} at T={row.T}",
                bool(row.passed),
                f"mean {row.mean:.4g} (se {row.se:.2g}) vs bound {row.bound:.4g}",
            )
        )
    return checks


def _rate_check(name: str, horizons, errors, limit: float) -> Check:
    try:
        slope = fit_rate(horizons, errors)
    except ValueError as err:
        return Check(name, False, str(err))
    return Check(name, slope <= limit, f"fitted slope {slope:.3f}, required <= {limit}")


def _plan(scale: dict, **kwargs) -> ExperimentPlan:
    kwargs.setdefault("horizons", scale["horizons"])
    kwargs.setdefault("seeds", scale["seeds"])
    return ExperimentPlan(**kwargs)


def _convex_instance():
    return make_convex_scheduling(d=2, n_states=2, seed=0)


def _sigmoidal_instance():
    return make_sigmoidal_scheduling(d=2, n_states=2, seed=0)


#######################
# Suites
#######################


def suite_identities(scale: dict) -> List[Check]:
    """Per-run identities on random finite instances, exact up to rounding"""
    objectives = ("quadratic", "linear", "sigmoidal")
    worst = {"recursion": 0.0, "queue update": 0.0, "path average": 0.0, "queue bound": -np.inf}
    nonnegative, bounded_steps = True, True
    for k in range(scale["instances"]):
        rng = np.random.default_rng(k)
        inst = make_random_finite(
            d=int(rng.integers(1, 4)),
            n_states=int(rng.integers(1, 4)),
            n_vertices=int(rng.integers(1, 5)),
            seed=k,
            objective=objectives[k % 3],
        )
        for T in IDENTITY_HORIZONS:
            for cfg in (
                AlgoConfig(T=T, V=float(rng.uniform(0.5, 20)), eta=float(rng.uniform(0.05, 0.95)), seed=k),
                AlgoConfig(T=T, seed=k, schedule=SQUARE_ROOT),
            ):
                trace = run_pdfw(inst, cfg).trace
                eta = cfg.eta_eff
                worst["recursion"] = max(worst["recursion"], trace.recursion_error(eta))
                worst["queue update"] = max(worst["queue update"], trace.queue_error(inst.constraints))
                # x_bar - theta_bar = (gamma_{T-1} - gamma_{-1}) / (eta T)
                identity = trace.x_bar - trace.theta_bar - (trace.gamma(T - 1) - trace.gamma(-1)) / (eta * T)
                worst["path average"] = max(worst["path average"], float(np.max(np.abs(identity))))
                # <a_i, x_bar> - b_i <= Q_i(T) / T
                excess = inst.constraints.residuals(trace.x_bar) - trace.queues[-1] / T
                worst["queue bound"] = max(worst["queue bound"], float(np.max(excess)))
                nonnegative &= bool(np.all(trace.queues >= 0))
                steps = np.linalg.norm(np.diff(trace.queues, axis=0), axis=1)
                bounded_steps &= bool(np.all(steps <= inst.bounds.B + IDENTITY_SLACK))
    checks = [
        Check(f"{name} identity", value <= IDENTITY_SLACK, f"largest deviation {value:.3g}")
        for name, value in worst.items()
    ]
    checks.append(Check("queues nonnegative", nonnegative))
    checks.append(Check("one-step queue change <= B", bounded_steps))
    return checks


def suite_convex_bounds(scale: dict) -> List[Check]:
    inst = _convex_instance()
    checks = []
    for schedule in (CUBE_ROOT, SQUARE_ROOT):
        plan = _plan(scale, schedule=schedule, name=f"convex_{schedule}")
        report = run_plan(plan, save=False, context=PlanContext.create(plan, inst))
        checks.extend(_plan_checks(f"convex {schedule}", report))
        if scale["rates"] and schedule == SQUARE_ROOT:
            errors = [
                np.mean([abs(c["subopt"]) for c in report.cells if c["T"] == T])
                for T in plan.horizons
            ]
            checks.append(_rate_check("convex SquareRoot suboptimality rate", plan.horizons, errors, -0.4))
    return checks


def suite_nonconvex_bounds(scale: dict) -> List[Check]:
    inst = _sigmoidal_instance()
    plan = _plan(scale, schedule=CUBE_ROOT, name="nonconvex")
    report = run_plan(plan, save=False, context=PlanContext.create(plan, inst))
    return _plan_checks("nonconvex CubeRoot", report)


def _drift_check(name: str, inst, plan_report, context) -> Check:
    T = max(context.plan.horizons)
    norms = np.array([c["queue_norms"] for c in plan_report.cells if c["T"] == T])
    V, eta = context.parameters(T)
    cfg = DriftTestConfig.from_bounds(
        context.bounds, context.slater.margin, V, eta, t0=int(np.ceil(np.sqrt(T)))
    )
    result = drift_test(norms, cfg)
    window = "vacuous" if result.vacuous else f"window mean {result.window_mean:.3g}"
    return Check(
        name,
        result.passed,
        f"max step {result.max_step:.3g} (B {cfg.delta_max:.3g}), {window}, "
        f"max mean norm {result.max_mean_norm:.3g} vs {result.expectation_bound:.3g}",
    )


def suite_slater(scale: dict) -> List[Check]:
    inst = _sigmoidal_instance()
    plan = _plan(scale, schedule=SQUARE_ROOT, name="slater")
    context = PlanContext.create(plan, inst)
    if context.slater is None:
        return [Check("Slater certificate", False, f"`{inst.name}` has no Slater margin")]
    report = run_plan(plan, save=False, context=context)
    checks = _plan_checks("Slater SquareRoot", report)
    checks.append(_drift_check("queue drift at the largest horizon", inst, report, context))
    return checks


def suite_drift(scale: dict) -> List[Check]:
    checks = []
    for inst in (_convex_instance(), _sigmoidal_instance()):
        plan = _plan(scale, schedule=SQUARE_ROOT, name="drift")
        context = PlanContext.create(plan, inst)
        report = run_plan(plan, save=False, context=context)
        checks.append(_drift_check(f"queue drift on `{inst.name}`", inst, report, context))
    return checks


def suite_perturbation(scale: dict) -> List[Check]:
    checks = []
    for inst in (_sigmoidal_instance(), make_random_finite(2, 3, 3, seed=1, objective="sigmoidal")):
        poly = MixturePolytope.from_instance(inst)
        rng = np.random.default_rng(0)
        points = poly.sample(rng, 2 * scale["pairs"])
        pairs = list(zip(points[::2], points[1::2]))
        result = gap_perturbation_check(inst, poly, pairs, inst.bounds)
        checks.append(
            Check(
                f"gap perturbation on `{inst.name}`",
                result.passed,
                f"{result.n_pairs} pairs, largest excess {result.max_violation:.3g}",
            )
        )
    return checks


def _stacked_equal(graph, nodes, T: int, seed: int) -> bool:
    cfg = AlgoConfig(T=T, seed=seed, schedule=CUBE_ROOT)
    distributed = run_distributed(graph, nodes, cfg).stacked_trace()
    centralized = run_pdfw(stack_instance(graph, nodes), cfg).trace
    return (
        np.array_equal(distributed.xs, centralized.xs)
        and np.array_equal(distributed.gammas, centralized.gammas)
        and np.array_equal(distributed.queues, centralized.queues)
        and distributed.alpha == centralized.alpha
    )


def suite_distributed(scale: dict) -> List[Check]:
    graph = make_cycle_graph(4)
    nodes = make_consensus_nodes(4, p=1, seed=0)
    checks = [
        Check(
            "distributed run equals the stacked centralized run",
            all(_stacked_equal(graph, nodes, scale["stacked_T"], seed) for seed in range(3)),
        )
    ]
    plan = _plan(
        scale,
        algorithm="distributed",
        schedule=CUBE_ROOT,
        generator_params={"d": 1, "n_states": 2, "seed": 0},
        name="distributed",
    )
    report = run_plan(plan, save=False)
    checks.extend(_plan_checks("distributed CubeRoot", report))
    if scale["rates"]:
        checks.append(
            _rate_check(
                "consensus residual rate",
                plan.horizons,
                report.summary["consensus_residual"].to_numpy(),
                -0.25,
            )
        )
    return checks


def suite_two_phase(scale: dict) -> List[Check]:
    checks = []
    inst = _convex_instance()
    try:
        target = run_pdfw(inst, AlgoConfig(T=200, schedule=CUBE_ROOT)).gamma_alpha
        tracking_trace(inst, target, 200, seed=0)
        checks.append(Check("tracking running-average identity", True))
    except PropertyFailure as err:
        checks.append(Check("tracking running-average identity", False, str(err)))
    for inst in (inst, _sigmoidal_instance()):
        plan = _plan(scale, algorithm="two_phase", schedule=CUBE_ROOT, name="two_phase")
        report = run_plan(plan, save=False, context=PlanContext.create(plan, inst))
        checks.extend(_plan_checks(f"two-phase on `{inst.name}`", report))
    return checks


def _deterministic_instance():
    vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.6, 0.6]]
    objective = make_objective("sigmoidal", dimension=2)
    return make_deterministic(vertices, objective, A=[[1.0, 1.0]], b=[0.9], name="deterministic_sigmoidal")


def suite_baselines(scale: dict) -> List[Check]:
    inst = _sigmoidal_instance()
    T = scale["stacked_T"]
    gradient = run_pd_gradient(inst, 0.2, T, seed=3).trace
    pdfw = run_pdfw(inst, AlgoConfig(T=T, V=1 / 0.2, eta=0.2, seed=3)).trace
    checks = [
        Check(
            "primal-dual gradient equals PDFW(1/beta, beta)",
            np.array_equal(gradient.xs, pdfw.xs)
            and np.array_equal(gradient.gammas, pdfw.gammas)
            and np.array_equal(gradient.queues, pdfw.queues),
        )
    ]

    nodes = make_consensus_nodes(1, d=2, p=1, seed=4)
    checks.append(
        Check(
            "single-node distributed run equals the centralized run",
            _stacked_equal(make_path_graph(1), nodes, T, seed=0),
        )
    )

    deterministic = _deterministic_instance()
    poly = MixturePolytope.from_instance(deterministic)
    trace = run_pdfw(deterministic, AlgoConfig(T=T, schedule=SQUARE_ROOT)).trace
    distances = [dist_to_polytope(poly, trace.gamma(t)) for t in range(-1, T)]
    checks.append(
        Check("deterministic iterates stay in the polytope", max(distances) == 0.0, f"max dist {max(distances):.3g}")
    )

    if scale["rates"]:
        for schedule, limit in ((CUBE_ROOT, -0.25), (SQUARE_ROOT, -0.4)):
            errors = []
            for horizon in scale["horizons"]:
                trace = run_pdfw(deterministic, AlgoConfig(T=horizon, schedule=schedule)).trace
                # E over alpha approximated on 50 evenly spaced slots
                slots = np.unique(np.linspace(-1, horizon - 2, 50).round().astype(int))
                errors.append(np.mean([max(fw_gap(deterministic, poly, trace.gamma(t)), 0.0) for t in slots]))
            checks.append(_rate_check(f"deterministic {schedule} gap rate", scale["horizons"], errors, limit))
    return checks


def suite_oracles(scale: dict) -> List[Check]:
    worst_dist, worst_gap, compared = 0.0, 0.0, 0
    for k in range(scale["oracle_instances"]):
        rng = np.random.default_rng(100 + k)
        inst = make_random_finite(
            d=int(rng.integers(1, 3)),
            n_states=int(rng.integers(1, 4)),
            n_vertices=int(rng.integers(1, 4)),
            seed=100 + k,
            objective=("quadratic", "sigmoidal")[k % 2],
        )
        poly = MixturePolytope.from_instance(inst)
        inside = poly.sample(rng, scale["oracle_points"])
        outside = rng.uniform(-0.5, 1.5, size=(scale["oracle_points"], inst.dimension))
        for gamma in np.vstack([inside, outside]):
            worst_dist = max(worst_dist, abs(dist_to_polytope(poly, gamma) - bruteforce_dist(poly, gamma)))
            worst_gap = max(
                worst_gap, abs(fw_gap(inst, poly, gamma) - bruteforce_fw_gap(inst, poly, gamma))
            )
            compared += 1
    checks = [
        Check("dist_to_polytope matches enumeration", worst_dist <= ORACLE_TOLERANCE, f"{compared} points, worst {worst_dist:.3g}"),
        Check("fw_gap matches enumeration", worst_gap <= ORACLE_TOLERANCE, f"{compared} points, worst {worst_gap:.3g}"),
    ]
    return checks + suite_perturbation(scale)


SUITES = {
    "identities": suite_identities,
    "convex-bounds": suite_convex_bounds,
    "nonconvex-bounds": suite_nonconvex_bounds,
    "slater": suite_slater,
    "distributed": suite_distributed,
    "perturbation": suite_perturbation,
    "drift": suite_drift,
    "two-phase": suite_two_phase,
    "baselines": suite_baselines,
    "oracles": suite_oracles,
}


@timer("Acceptance suite", log=True)
def verify_all(suite: str, scale: str = "quick") -> SuiteReport:
    """
    Raises:
        PlanError: unknown suite or scale
    """
    if suite not in SUITES:
        raise PlanError(f"Unknown suite `{suite}`, choose from {sorted(SUITES)}")
    if scale not in SCALES:
        raise PlanError(f"Unknown scale `{scale}`, choose from {sorted(SCALES)}")
    report = SuiteReport(suite, scale, SUITES[suite](SCALES[scale]))
    for check in report.checks:
        line = f"[{suite}] {check.name}: {'pass' if check.passed else 'FAIL'} {check.detail}"
        if check.passed:
            logger.info(line)
        else:
            logger.error(line)
    return report
