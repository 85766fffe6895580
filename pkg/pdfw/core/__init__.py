from pdfw.core.types import (
    AlgoConfig,
    DecisionSet,
    LinearConstraints,
    Objective,
    ProblemInstance,
    QueueState,
    RunTrace,
    StateModel,
    StateSampler,
    rng_stream,
    STATE_STREAM,
    ALPHA_STREAM,
    TRACKING_STREAM,
    FIXED,
    CUBE_ROOT,
    SQUARE_ROOT,
    SCHEDULES,
)
from pdfw.core.oracle import (
    ambient_generators,
    decision_vertices,
    lmo,
    pdfw_cost,
    pdfw_step,
    queue_update,
)
