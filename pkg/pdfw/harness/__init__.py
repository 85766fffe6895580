"""
Experiment plans, acceptance suites and the command-line interface
"""

from pdfw.harness.plan import (
    ExperimentPlan,
    PlanContext,
    PlanReport,
    ALGORITHMS,
    run_plan,
    save_plan_report,
    closed_form_bounds,
    evaluate_cell,
)
from pdfw.harness.suites import verify_all, SuiteReport, Check, SUITES, SCALES
