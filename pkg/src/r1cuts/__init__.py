"""Lifted supermodular cuts for rank-one quadratics with indicator variables.

The package splits into the discrete layer (set functions and the hull of
the underlying binary polytope), the continuous layer (lifted conic cuts
and their separation), the conic plumbing (models, extended formulations,
text I/O, relaxation solving), and the benchmark experiments.
"""

from .core import (
    INF,
    TOL,
    CapacityError,
    FractionalPoint,
    InputError,
    OracleError,
    Partition,
    RegionError,
    SolverError,
    safe_ratio,
)
from .setfunc import (
    AlphaVector,
    Region,
    check_supermodular,
    classify_alpha,
    eval_g,
    g_table,
    increment_rho,
)
from .hull import (
    DualCertificate,
    DualityReport,
    LambdaWeights,
    LinearIneq,
    dual_certificate,
    greedy_primal,
    min_linear_over_X,
    sorted_facets,
    supermodular_ineq,
    verify_strong_duality,
)
from .lifted import (
    LiftedCut,
    SeparationResult,
    Sign,
    base_value,
    eval_lifted_rhs,
    find_L_U_general,
    find_L_positive,
    hull_value_oracle,
    separate,
    xf_hull_value,
)
from .conic import (
    ConicModel,
    ExtendedCutBlock,
    RankOneRow,
    emit_extended_cut,
    eval_extended_min,
    export_model,
    import_model,
)
from .solver import (
    SolveResult,
    solve_mip_bruteforce,
    solve_relaxation,
)
from .experiments import (
    PortfolioInstance,
    build_formulation,
    compute_opt,
    cut_loop,
    generate_instance,
    instance_from_json,
    instance_to_json,
    report,
    run_batch,
    run_instance,
)

__version__ = "0.1.0"
