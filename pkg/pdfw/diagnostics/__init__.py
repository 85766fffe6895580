from pdfw.diagnostics.lp import lp_solve, LPResult, OPTIMAL, INFEASIBLE, UNBOUNDED
from pdfw.diagnostics.polytope import (
    MixturePolytope,
    membership,
    fw_gap,
    dist_to_polytope,
    solve_gamma_star,
    feasible_lp,
)
from pdfw.diagnostics.bounds import (
    BoundConstants,
    compute_bounds,
    diameter,
    convex_bounds,
    lagrange_bounds,
    nonconvex_bounds,
    slater_constant,
    slater_bounds,
    deterministic_bounds,
    tracking_bounds,
    effective_parameters,
)
from pdfw.diagnostics.certificates import (
    SlaterCertificate,
    NoCertificate,
    LagrangeCertificate,
    certify_slater,
    certify_lagrange,
)
from pdfw.diagnostics.drift import (
    DriftTestConfig,
    DriftReport,
    drift_test,
    drift_expectation_bound,
)
from pdfw.diagnostics.rates import fit_rate
from pdfw.diagnostics.perturbation import gap_perturbation_check, PerturbationReport
from pdfw.diagnostics.bruteforce import bruteforce_dist, bruteforce_fw_gap, minkowski_points
