"""Matrix-valued optimal mass transport on density matrices.

Library layers (bottom up):

* hermitian  — matrix/stack types, pairings, the real vectorization
* lindblad   — gradient/divergence/laplacian calculus, kernels, heat flow
* elliptic   — weighted operator, potential solves, sharp constants
* action     — the kinetic functional and its Legendre machinery
* geodesic   — discrete geodesic solver with dual certificates
* io / cli   — problem files, reports, the ``momt`` command
"""

from ._threads import apply_thread_cap as _apply_thread_cap

# Must happen before the first numpy import anywhere in the process for the
# MOMT_THREADS cap to reach the BLAS thread pools.
_apply_thread_cap()

# Defined before the submodule imports below; io reads it back from here.
__version__ = "0.1.0"

from .action import (
    DualPoint,
    ExtendedValue,
    InfeasibleDualPoint,
    fenchel_gap,
    kinetic,
    legendre_feasible,
    path_cost,
    trace_lower_bound,
)
from .elliptic import (
    InfeasibleRHS,
    MomentumCheck,
    SingularWeight,
    WeightedOperator,
    WeightError,
    apply_weighted,
    assemble_weighted,
    best_gradient_fit,
    momentum_divergence_matrix,
    momentum_min_check,
    poincare_constant,
    poincare_constant_over,
    quadratic_form,
    solve_potential,
)
from .geodesic import (
    DiscretePath,
    DualPath,
    GeodesicResult,
    HamiltonianProfile,
    InfeasibleEndpoints,
    SolverConfig,
    continuity_residual,
    distance,
    dual_certificate,
    dual_pairing_value,
    feasibility_gap,
    hamiltonian_profile,
    hj_residuals,
    initial_path,
    optimize_geodesic,
)
from .hermitian import (
    EPS_PD,
    SYM_TOL,
    TRACE_TOL,
    DensityMatrix,
    DimensionMismatch,
    FlavorError,
    HermitianMatrix,
    NotPositive,
    NotUnitTrace,
    OperatorStack,
    SkewHermitianMatrix,
    SymmetryError,
    TangentDirection,
    adjoint_stack,
    hermitian_basis,
    inner_product,
    matrix_from_literal,
    matrix_to_literal,
    symmetric_dot,
    unvec_h,
    unvec_s,
    unvec_stack,
    validate_density,
    vec_h,
    vec_s,
    vec_stack,
)
from .io import (
    SCHEMA_VERSION,
    ParseError,
    ProblemSpec,
    build_report,
    dump_canonical,
    export_geodesic,
    geodesic_trace,
    load_geodesic,
    load_problem,
    parse_problem,
    reconstruct_path,
)
from .lindblad import (
    LindbladSet,
    StabilityError,
    divergence,
    gradient,
    heat_flow,
    kernel_basis,
    laplacian,
    project_kernel,
)
from .verify import Check, run_suites
