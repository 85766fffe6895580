from pdfw.problems.objectives import (
    LinearObjective,
    QuadraticObjective,
    SigmoidalUtility,
    CoupledLocalObjective,
    make_objective,
    gradient_error,
    smoothness_ratio,
)
from pdfw.problems.generators import (
    make_convex_scheduling,
    make_sigmoidal_scheduling,
    make_deterministic,
    make_random_finite,
    generate,
    GENERATORS,
)
from pdfw.problems.instancefile import InstanceSpec, load_instance, save_instance, load_spec
