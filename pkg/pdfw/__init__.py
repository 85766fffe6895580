# Include some shortcuts

from .experiment import Experiment
from .common.config.parseconfig import load_params
from .harness.plan import ExperimentPlan, run_plan
from .harness.suites import verify_all
