from addercap.capacity.coupling import (
    ClosedFormBranch,
    CouplingBox,
    JointDistribution,
    branch,
    collapsed_residual,
    collapsed_residual_identity,
    coupling_box,
    eval_m,
    joint,
    phi,
    phi_array,
    phi_prime,
    phi_prime_array,
    solve_c,
    solve_c_array,
)
from addercap.capacity.entropy import entropy, h2, h2_array, s3, s3_array, s4, s4_array, s4_cells
from addercap.capacity.feasibility import (
    FeasibilityMap,
    FeasibilityReport,
    GridMinimum,
    belokopytov_gap,
    belokopytov_gap_derivative,
    brute_min_gap,
    constraint_gap,
    feasibility_map,
    gap_at,
    gap_gradient,
    grid_minimizer,
)
from addercap.capacity.fixed_point import (
    FixedPointResult,
    Mixture,
    count_sign_changes,
    in_domain,
    is_near_boundary,
    phi_mix,
    phi_mix_array,
    phi_mix_prime,
    solve_x_star,
    solve_x_star_grid,
)
from addercap.capacity.lagrangian import (
    BoundReport,
    GradientCheck,
    LagrangianParams,
    SandwichReport,
    classify_stationary,
    grad_check,
    lagrangian_value,
    partial_derivatives,
    rho,
    rho_prime,
    solve_unit_ratio,
    theorem_bound,
    verify_sandwich,
    x1_of,
    x_star_one_value,
)
from addercap.capacity.optimize import (
    BelokopytovCertificate,
    OptimizationResult,
    RatePoint,
    WeightedResult,
    belokopytov_certificate,
    objective,
    optimize,
    weighted_optimize,
)

__all__ = [
    "BelokopytovCertificate",
    "BoundReport",
    "ClosedFormBranch",
    "CouplingBox",
    "FeasibilityMap",
    "FeasibilityReport",
    "FixedPointResult",
    "GradientCheck",
    "GridMinimum",
    "JointDistribution",
    "LagrangianParams",
    "Mixture",
    "OptimizationResult",
    "RatePoint",
    "SandwichReport",
    "WeightedResult",
    "belokopytov_certificate",
    "belokopytov_gap",
    "belokopytov_gap_derivative",
    "branch",
    "brute_min_gap",
    "classify_stationary",
    "collapsed_residual",
    "collapsed_residual_identity",
    "constraint_gap",
    "count_sign_changes",
    "coupling_box",
    "entropy",
    "eval_m",
    "feasibility_map",
    "gap_at",
    "gap_gradient",
    "grad_check",
    "grid_minimizer",
    "h2",
    "h2_array",
    "in_domain",
    "is_near_boundary",
    "joint",
    "lagrangian_value",
    "objective",
    "optimize",
    "partial_derivatives",
    "phi",
    "phi_array",
    "phi_mix",
    "phi_mix_array",
    "phi_mix_prime",
    "phi_prime",
    "phi_prime_array",
    "rho",
    "rho_prime",
    "s3",
    "s3_array",
    "s4",
    "s4_array",
    "s4_cells",
    "solve_c",
    "solve_c_array",
    "solve_unit_ratio",
    "solve_x_star",
    "solve_x_star_grid",
    "theorem_bound",
    "verify_sandwich",
    "weighted_optimize",
    "x1_of",
    "x_star_one_value",
]
