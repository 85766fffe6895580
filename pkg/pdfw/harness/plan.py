"""
Experiment plans
----------------
An `ExperimentPlan` fixes one instance (file or generator), one algorithm
with its parameter schedule, a list of horizons and a number of Monte Carlo
seeds. `run_plan` evaluates every (T, seed) cell, aggregates the cells per
horizon into mean and standard error, evaluates the closed-form bounds at
every horizon and writes the summary, the bound-check report and, on
request, the per-slot traces.
"""

import dataclasses
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional

import numpy as np
import pandas as pd

from pdfw.common import (
    logger,
    timer,
    mean_and_se,
    ContractViolation,
    PlanError,
)
from pdfw.core.types import (
    CUBE_ROOT,
    FIXED,
    SCHEDULES,
    SQUARE_ROOT,
    AlgoConfig,
)
from pdfw.algorithms import run_algorithm
from pdfw.diagnostics import (
    MixturePolytope,
    SlaterCertificate,
    compute_bounds,
    convex_bounds,
    lagrange_bounds,
    nonconvex_bounds,
    slater_bounds,
    deterministic_bounds,
    tracking_bounds,
    certify_slater,
    certify_lagrange,
    solve_gamma_star,
    fw_gap,
    dist_to_polytope,
)
from pdfw.distributed import (
    GraphTopology,
    make_graph,
    make_consensus_nodes,
    run_distributed,
    stack_instance,
)
from pdfw.problems import generate, load_instance, load_spec
from pdfw.export import save_summary, save_report, save_traces

ALGORITHMS = ("pdfw", "dpp", "pdgrad", "two_phase", "frank_wolfe", "distributed")
GENERATOR_KEYS = {
    "convex_scheduling": ("d", "n_states", "seed"),
    "sigmoidal_scheduling": ("d", "n_states", "seed"),
    "random_finite": ("d", "n_states", "n_vertices", "seed"),
}


@dataclass
class ExperimentPlan:
    """
    Attributes:
        algorithm (str): one of ALGORITHMS
        schedule (str): Fixed, CubeRoot or SquareRoot
        horizons (tuple): strictly increasing horizons T
        seeds (int): Monte Carlo runs per horizon, seeds first_seed..first_seed+seeds-1
        instance_path (str or None): instance file; when None the generator is used.
            For the distributed algorithm the file only provides the graph edges.
        generator (str), generator_params (dict): instance generator and its arguments
        V, eta: parameters of the Fixed schedule
        beta: step of the primal-dual gradient baseline
        workers (int): worker processes for the (T, seed) cells
        trace (bool): also write the per-slot trace CSV
        timing (bool): fill the wallclock_s column
        graph, nodes, p, theta_lower, theta_upper: distributed variant
        n_se (float): standard errors allowed in the bound checks
        property_slack (float): absolute slack of the bound checks
    """

    algorithm: str = "pdfw"
    schedule: str = SQUARE_ROOT
    horizons: tuple = (100, 1000)
    seeds: int = 20
    first_seed: int = 0
    instance_path: Optional[str] = None
    generator: str = "convex_scheduling"
    generator_params: dict = field(default_factory=lambda: {"d": 2, "n_states": 2, "seed": 0})
    V: float = 10.0
    eta: float = 0.1
    beta: float = 0.1
    workers: int = 1
    trace: bool = False
    timing: bool = False
    output_folder: str = "output"
    name: str = "run"
    graph: str = "cycle"
    nodes: int = 4
    p: int = 1
    theta_lower: float = 0.0
    theta_upper: float = 1.0
    n_se: float = 3.0
    property_slack: float = 1e-7

    def __post_init__(self):
        self.horizons = tuple(int(T) for T in self.horizons)
        if len(self.horizons) == 0:
            raise PlanError("A plan needs at least one horizon")
        if min(self.horizons) < 1:
            raise PlanError(f"Horizons must be positive, got {list(self.horizons)}")
        if any(a >= b for a, b in zip(self.horizons, self.horizons[1:])):
            raise PlanError(f"Horizons must be strictly increasing, got {list(self.horizons)}")
        if self.seeds < 1:
            raise PlanError(f"At least one seed is needed, got {self.seeds}")
        if self.workers < 1:
            raise PlanError(f"At least one worker is needed, got {self.workers}")
        if self.algorithm not in ALGORITHMS:
            raise PlanError(f"Unknown algorithm `{self.algorithm}`, choose from {ALGORITHMS}")
        if self.schedule not in SCHEDULES:
            raise PlanError(f"Unknown schedule `{self.schedule}`, choose from {SCHEDULES}")
        if self.instance_path is None and self.generator not in GENERATOR_KEYS:
            raise PlanError(f"Unknown instance generator `{self.generator}`")
        if self.algorithm == "distributed" and (self.theta_lower > 0 or self.theta_upper < 0):
            raise PlanError("The shared-variable box must contain 0")
        try:
            self.config_for(self.horizons[0], self.first_seed)
        except ContractViolation as err:
            raise PlanError(f"Invalid algorithm parameters: {err}") from err

    @classmethod
    def from_params(cls, params: dict) -> "ExperimentPlan":
        """Plan from a parsed parameter dict (see config_default.yaml)"""
        instance = params["instance"]
        generator = instance["generator"]
        generator_params = {
            key: instance[key] for key in GENERATOR_KEYS.get(generator, ())
        }
        experiment = params["experiment"]
        algorithm = params["algorithm"]
        distributed = params["distributed"]
        tolerances = params["tolerances"]
        return cls(
            algorithm=algorithm["name"],
            schedule=algorithm["schedule"],
            horizons=tuple(experiment["horizons"]),
            seeds=experiment["seeds"],
            first_seed=experiment["first_seed"],
            instance_path=instance["path"] or None,
            generator=generator,
            generator_params=generator_params,
            V=algorithm["V"],
            eta=algorithm["eta"],
            beta=algorithm["beta"],
            workers=experiment["workers"],
            trace=experiment["trace"],
            timing=experiment["timing"],
            output_folder=experiment["output folder"],
            name=experiment["name"],
            graph=distributed["graph"],
            nodes=distributed["nodes"],
            p=distributed["p"],
            theta_lower=distributed["theta lower"],
            theta_upper=distributed["theta upper"],
            n_se=tolerances["standard errors"],
            property_slack=tolerances["property slack"],
        )

    def to_dict(self) -> dict:
        plan = dataclasses.asdict(self)
        plan["horizons"] = list(self.horizons)
        return plan

    def config_for(self, T: int, seed: int) -> AlgoConfig:
        if self.algorithm == "pdgrad":
            if not 0 < self.beta < 1:
                raise ContractViolation(f"beta must lie in (0, 1), got {self.beta}")
            return AlgoConfig(T=T, V=1 / self.beta, eta=self.beta, seed=seed, schedule=FIXED)
        return AlgoConfig(T=T, V=self.V, eta=self.eta, seed=seed, schedule=self.schedule)

    def cells(self) -> List[tuple]:
        return [
            (T, self.first_seed + k) for T in self.horizons for k in range(self.seeds)
        ]

    @timer("Building the plan context", log=True)
    def build_context(self) -> "PlanContext":
        graph, nodes = None, None
        if self.algorithm == "distributed":
            if self.instance_path is not None:
                edges = load_spec(self.instance_path).edges
                if not edges:
                    raise PlanError(
                        f"Instance file {self.instance_path} has no graph edges for the distributed variant"
                    )
                graph = GraphTopology.from_edges(edges)
            else:
                graph = make_graph(self.graph, self.nodes)
            params = self.generator_params
            nodes = make_consensus_nodes(
                graph.K,
                d=params.get("d", 1),
                n_states=params.get("n_states", 2),
                p=self.p,
                seed=params.get("seed", 0),
                theta_lower=self.theta_lower,
                theta_upper=self.theta_upper,
            )
            inst = stack_instance(graph, nodes, name=f"consensus_{self.graph}_{graph.K}")
        elif self.instance_path is not None:
            inst = load_instance(self.instance_path)
        else:
            inst = generate(self.generator, **self.generator_params)
        return PlanContext.create(self, inst, graph, nodes)


#######################
# Instance-level quantities shared by all cells
#######################


@dataclass
class PlanContext:
    plan: ExperimentPlan
    inst: object
    poly: MixturePolytope
    bounds: object
    graph: Optional[GraphTopology] = None
    nodes: Optional[list] = None
    f_star: Optional[float] = None
    slater: Optional[SlaterCertificate] = None
    lagrange: Optional[object] = None

    @classmethod
    def create(cls, plan, inst, graph=None, nodes=None) -> "PlanContext":
        poly = MixturePolytope.from_instance(inst)
        bounds = inst.bounds if inst.bounds is not None else compute_bounds(inst)
        context = cls(plan, inst, poly, bounds, graph, nodes)

        if inst.constraints.N > 0:
            certificate = inst.certificates.get("slater") or certify_slater(inst, poly)
            if isinstance(certificate, SlaterCertificate):
                context.slater = certificate

        if inst.objective.convex:
            if "gamma_star" in inst.certificates:
                gamma_star, context.f_star = inst.certificates["gamma_star"]
            else:
                gamma_star, context.f_star = solve_gamma_star(inst, poly)
            if inst.constraints.N > 0 and plan.schedule == SQUARE_ROOT:
                lagrange = certify_lagrange(inst, poly, gamma_star)
                if lagrange.checked_gap <= plan.property_slack:
                    context.lagrange = lagrange
                else:
                    logger.warning(
                        f"Lagrange multipliers of `{inst.name}` fail their check "
                        f"(gap {lagrange.checked_gap:.3g}), using the generic violation bound"
                    )
        return context

    @property
    def convex(self) -> bool:
        return bool(self.inst.objective.convex)

    def parameters(self, T: int):
        """(V, eta) actually used at horizon T"""
        cfg = self.plan.config_for(T, 0)
        return cfg.V_eff, cfg.eta_eff


def closed_form_bounds(context: PlanContext, T: int) -> dict:
    """
    Closed-form bound per checked quantity at horizon T. Keys are `subopt`,
    `fw_gap`, `dist2`, `tracking`, `tracking_sq` and `violation[i]` per
    constraint row.
    Baselines without a bound (dpp, frank_wolfe) get an empty dict.
    """
    plan, bc, inst = context.plan, context.bounds, context.inst
    a_norms = inst.constraints.a_norms
    schedule = plan.schedule if plan.algorithm != "pdgrad" else FIXED

    def rows(violation):
        violation = np.broadcast_to(np.asarray(violation, dtype=float), (inst.constraints.N,))
        return {f"violation[{i}]": float(v) for i, v in enumerate(violation)}

    if plan.algorithm in ("dpp", "frank_wolfe"):
        return {}
    if plan.algorithm == "two_phase":
        _, eta = context.parameters(T)
        bounds = tracking_bounds(bc, T, eta, a_norms)
        checked = {
            "tracking_sq": float(bounds["tracking_sq"]),
            "tracking": float(bounds["distance"]),
        }
        # The objective and violation forms only hold for V = T^(1/3), eta = T^(-2/3)
        if schedule == CUBE_ROOT:
            checked["fw_gap"] = float(bounds["fw_gap"])
            checked.update(rows(bounds["violation"]))
        return checked

    V, eta = context.parameters(T)
    if context.convex:
        if context.lagrange is not None:
            bounds = lagrange_bounds(bc, T, V, eta, context.lagrange.multipliers, inst.constraints.A)
        else:
            bounds = convex_bounds(bc, T, V, eta)
        return {"subopt": float(bounds["objective"]), **rows(bounds["violation"])}

    epsilon = context.slater.margin if context.slater is not None else None
    if inst.state_model.n_states == 1 and schedule in (CUBE_ROOT, SQUARE_ROOT):
        bounds = deterministic_bounds(bc, T, schedule, a_norms, epsilon)
        bounds["dist2"] = 0.0
    elif schedule == SQUARE_ROOT and epsilon is not None:
        bounds = slater_bounds(bc, T, epsilon, a_norms)
    else:
        bounds = nonconvex_bounds(bc, T, V, eta, a_norms)
    checked = {"fw_gap": float(bounds["fw_gap"]), "dist2": float(bounds["dist2"])}
    if "violation" in bounds:
        checked.update(rows(bounds["violation"]))
    return checked


#######################
# Cells
#######################


def evaluate_cell(context: PlanContext, T: int, seed: int) -> dict:
    """
    One Monte Carlo run. Convex instances are measured at x_bar_T,
    nonconvex ones at the randomized output gamma_alpha, the two-phase
    scheme at the time average of its tracking phase.
    """
    plan, inst, poly = context.plan, context.inst, context.poly
    cfg = plan.config_for(T, seed)
    cell = {
        "T": T,
        "seed": seed,
        "tracking_error": np.nan,
        "tracking_excess": np.nan,
        "beta_path": None,
    }

    if plan.algorithm == "distributed":
        result = run_distributed(context.graph, context.nodes, cfg)
        trace = result.stacked_trace()
        point = trace.x_bar if context.convex else trace.gamma_alpha
        # Path average of beta_{-1..T-2}: the expectation over alpha
        cell["beta_path"] = np.array([betas[:T].mean(axis=0) for betas in result.betas])
        wallclock, queue_norm = result.wallclock, float(np.linalg.norm(trace.queues[-1]))
        x_bar = trace.x_bar
    elif plan.algorithm == "two_phase":
        result = run_algorithm(plan.algorithm, inst, cfg)
        trace = result.phase1.trace
        point = x_bar = result.phase2_xbar
        cell["tracking_error"] = result.tracking_error
        cell["tracking_excess"] = (
            result.tracking_error**2 - dist_to_polytope(poly, result.target) ** 2
        )
        wallclock, queue_norm = result.wallclock, result.phase1.queue_norm
    else:
        result = run_algorithm(plan.algorithm, inst, cfg)
        trace = result.trace
        point = result.x_bar if context.convex else result.gamma_alpha
        x_bar = result.x_bar
        wallclock, queue_norm = result.wallclock, result.queue_norm

    violations = inst.constraints.residuals(point)
    cell.update(
        f_xbar=float(inst.objective.value(x_bar)),
        subopt=float(inst.objective.value(x_bar) - context.f_star)
        if context.f_star is not None
        else np.nan,
        violations=violations,
        max_violation=float(violations.max()) if len(violations) else 0.0,
        queue_norm=queue_norm,
        wallclock=wallclock,
        queue_norms=trace.queue_norms,
        trace=trace if plan.trace else None,
    )
    if context.convex and plan.algorithm != "two_phase":
        cell["fw_gap"], cell["dist2"] = np.nan, np.nan
    else:
        cell["fw_gap"] = fw_gap(inst, poly, point)
        cell["dist2"] = dist_to_polytope(poly, point) ** 2
    logger.debug(f"Cell T={T} seed={seed} done in {wallclock:.3g}s")
    return cell


def _run_cell(job):
    """Top-level so that worker processes can unpickle it"""
    context, T, seed = job
    return evaluate_cell(context, T, seed)


def run_cells(context: PlanContext) -> List[dict]:
    """All (T, seed) cells, sorted by (T, seed) whatever the completion order"""
    jobs = [(context, T, seed) for T, seed in context.plan.cells()]
    if context.plan.workers > 1:
        with Pool(processes=context.plan.workers) as pool:
            cells = pool.map(_run_cell, jobs)
    else:
        cells = [_run_cell(job) for job in jobs]
    return sorted(cells, key=lambda cell: (cell["T"], cell["seed"]))


#######################
# Aggregation
#######################


def measured_values(cell: dict) -> dict:
    values = {
        "subopt": cell["subopt"],
        "fw_gap": cell["fw_gap"],
        "dist2": cell["dist2"],
        "tracking": cell["tracking_error"],
        "tracking_sq": cell["tracking_excess"],
    }
    values.update({f"violation[{i}]": v for i, v in enumerate(cell["violations"])})
    return values


def consensus_residual(cells: List[dict]) -> float:
    """max over node pairs of the seed-averaged path averages of beta"""
    paths = np.mean([cell["beta_path"] for cell in cells], axis=0)
    return float(np.max(paths.max(axis=0) - paths.min(axis=0)))


def summarize(context: PlanContext, cells: List[dict]):
    """Summary rows (one per horizon) and bound-check rows"""
    plan = context.plan
    summary, report = [], []
    for T in plan.horizons:
        group = [cell for cell in cells if cell["T"] == T]
        bounds = closed_form_bounds(context, T)

        f_mean, f_se = mean_and_se([c["f_xbar"] for c in group])
        violation_bounds = [v for key, v in bounds.items() if key.startswith("violation")]
        row = {
            "instance": context.inst.name,
            "algorithm": plan.algorithm,
            "schedule": plan.schedule if plan.algorithm != "pdgrad" else FIXED,
            "T": T,
            "seeds": len(group),
            "f_xbar_mean": f_mean,
            "f_xbar_se": f_se,
            "subopt_mean": np.mean([c["subopt"] for c in group]),
            "max_violation_mean": np.mean([c["max_violation"] for c in group]),
            "fw_gap_mean": np.mean([c["fw_gap"] for c in group]),
            "dist2_mean": np.mean([c["dist2"] for c in group]),
            "bound_subopt": bounds.get("subopt", np.nan),
            "bound_violation": max(violation_bounds) if violation_bounds else np.nan,
            "wallclock_s": np.mean([c["wallclock"] for c in group]) if plan.timing else np.nan,
            "queue_norm_mean": np.mean([c["queue_norm"] for c in group]),
            "bound_fw_gap": bounds.get("fw_gap", np.nan),
            "bound_dist2": bounds.get("dist2", np.nan),
        }
        if plan.algorithm == "two_phase":
            row["tracking_error_mean"] = np.mean([c["tracking_error"] for c in group])
            row["bound_tracking"] = bounds.get("tracking", np.nan)
            row["tracking_excess_mean"] = np.mean([c["tracking_excess"] for c in group])
            row["bound_tracking_sq"] = bounds.get("tracking_sq", np.nan)
        if plan.algorithm == "distributed":
            row["consensus_residual"] = consensus_residual(group)
        summary.append(row)

        measured = [measured_values(c) for c in group]
        for quantity, bound in bounds.items():
            mean, se = mean_and_se([m[quantity] for m in measured])
            report.append(
                {
                    "T": T,
                    "quantity": quantity,
                    "mean": mean,
                    "se": se,
                    "bound": bound,
                    "passed": bool(mean <= bound + plan.n_se * se + plan.property_slack),
                }
            )
    report = pd.DataFrame(report, columns=["T", "quantity", "mean", "se", "bound", "passed"])
    return pd.DataFrame(summary), report


@dataclass
class PlanReport:
    summary: pd.DataFrame
    report: pd.DataFrame
    cells: List[dict]
    paths: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.report["passed"].all()) if len(self.report) else True

    @property
    def failures(self) -> pd.DataFrame:
        return self.report[~self.report["passed"].astype(bool)]


def run_plan(plan: ExperimentPlan, save: bool = True, context: PlanContext = None) -> PlanReport:
    """
    Runs every cell of the plan and writes `<name>_summary.csv`,
    `<name>_report.csv` and, with `plan.trace`, `<name>_trace.csv` to
    `plan.output_folder`.
    """
    context = plan.build_context() if context is None else context
    logger.info(
        f"Running `{plan.algorithm}` ({plan.schedule}) on `{context.inst.name}`: "
        f"horizons {list(plan.horizons)}, {plan.seeds} seed(s)"
    )
    cells = run_cells(context)
    summary, report = summarize(context, cells)
    plan_report = PlanReport(summary, report, cells)

    if save:
        save_plan_report(plan, plan_report)

    for failure in plan_report.failures.itertuples():
        logger.warning(
            f"T={failure.T}: {failure.quantity} mean {failure.mean:.4g} "
            f"(se {failure.se:.2g}) exceeds bound {failure.bound:.4g}"
        )
    return plan_report


def save_plan_report(plan: ExperimentPlan, plan_report: PlanReport, name: str = None) -> dict:
    """Writes the summary, the bound-check report and the optional traces"""
    name = plan.name if name is None else name
    params = plan.to_dict()
    folder = plan.output_folder
    paths = plan_report.paths
    paths["summary"] = save_summary(plan_report.summary, params, name, folder)
    paths["report"] = save_report(plan_report.report, params, name, folder)
    if plan.trace:
        traces = [(c["T"], c["seed"], c["trace"]) for c in plan_report.cells]
        paths["trace"] = save_traces(traces, params, name, folder)
    return paths
