"""
Creates the class Experiment:
This is the main class. It checks the parameter dict, turns it into an
`ExperimentPlan`, builds the problem instance with its certificates and
bound constants, runs all Monte Carlo cells and saves the summary,
bound-check report and traces.
"""

from pdfw.common import logger, utils
from pdfw.common.config.parseconfig import check_params
from pdfw.harness.plan import ExperimentPlan, run_plan, save_plan_report


class Experiment:
    """
    Args:
        params (dict): parameter values, based on `inputdata/config/config.yaml`

    Attributes:
        params (dict): checked parameters with defaults filled in
        plan (ExperimentPlan)
        context (PlanContext): instance, polytope, bound constants and certificates
        result (PlanReport or None): filled in by `solve`
    """

    def __init__(self, params: dict):
        params, parser_tree = check_params(params, True)
        self.params = params
        self.param_parser_tree = parser_tree
        self.plan = ExperimentPlan.from_params(params)
        self.context = self.plan.build_context()
        self.result = None

    @property
    def instance(self):
        return self.context.inst

    @utils.timer("Experiment run", True)
    def solve(self):
        """Runs every (T, seed) cell of the plan"""
        self.result = run_plan(self.plan, save=False, context=self.context)
        if not self.result.passed:
            logger.warning(f"{len(self.result.failures)} bound check(s) failed")
        return self.result

    def save(self, filename: str = None) -> dict:
        """
        Args:
            filename (str, optional): prefix of the output files, defaults to
                the experiment name

        Returns:
            dict: paths of the written files
        """
        if self.result is None:
            raise RuntimeError("Call solve() before save()")
        return save_plan_report(self.plan, self.result, filename)
