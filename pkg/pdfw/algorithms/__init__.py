"""
Full-horizon runners. `run_algorithm` selects one by name.
"""

from pdfw.core.types import AlgoConfig, ProblemInstance
from pdfw.algorithms.result import RunResult, TwoPhaseResult, draw_alpha
from pdfw.algorithms.pdfw import run_pdfw, run_pd_gradient, sample_states
from pdfw.algorithms.dpp import run_dpp
from pdfw.algorithms.frankwolfe import run_frank_wolfe, run_tracking_fw, tracking_trace
from pdfw.algorithms.twophase import run_two_phase


def run_algorithm(name: str, inst: ProblemInstance, cfg: AlgoConfig):
    if name == "pdfw":
        return run_pdfw(inst, cfg)
    elif name == "dpp":
        return run_dpp(inst, cfg)
    elif name == "pdgrad":
        return run_pd_gradient(inst, cfg.eta_eff, cfg.T, cfg.seed)
    elif name == "two_phase":
        return run_two_phase(inst, cfg)
    elif name == "frank_wolfe":
        return run_frank_wolfe(inst, cfg.T, seed=cfg.seed)
    else:
        raise NotImplementedError(f"Algorithm `{name}` not implemented")
