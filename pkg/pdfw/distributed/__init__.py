from pdfw.distributed.graph import (
    GraphTopology,
    make_cycle_graph,
    make_path_graph,
    make_graph,
)
from pdfw.distributed.nodes import NodeSpec, NodeState, StackedObjective, make_consensus_nodes
from pdfw.distributed.simulator import (
    EdgeQueues,
    DistributedResult,
    edge_queue_update,
    node_step_x,
    node_step_theta,
    run_distributed,
    stack_instance,
    consensus_constraints,
)
