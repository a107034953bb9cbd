"""Cell-centered mixed finite elements for nearly incompressible plane elasticity.

The scheme builds three nested meshes from any star-shaped polygonal mesh
(primal cells, vertex-centered dual volumes, and a fanned triangular third
mesh), discretizes displacements with P1 elements on the third mesh and
pressures with one constant per dual volume, and optionally condenses the
interior dual-center unknowns into a cell-centered block system.
"""

from .geometry import polygon_area, polygon_centroid, polygon_signed_area
from .mesh import (
    DualMesh,
    MeshConstructionError,
    PrimalMesh,
    ThirdMesh,
    ValidationReport,
    build_dual,
    build_third,
    domain_loop,
    generate_structured_quads,
    generate_structured_triangles,
    make_primal,
    triangle_areas,
    validate_primal,
)
from .spaces import (
    DisplacementField,
    DofMap,
    NodeClass,
    PressureField,
    classify_nodes,
    eval_fields,
    p1_shape,
)
from .material import MaterialParams, lame_constants
from .assembly import (
    SaddleSystem,
    assemble_A,
    assemble_B,
    assemble_C,
    assemble_F,
    build_saddle_system,
)
from .condense import (
    CondensationData,
    CondensedSystem,
    compute_theta,
    condensation_data,
    condense,
    reconstruct,
)
from .solvers import SolveOptions, Solution, SolverError, residual_check, solve_saddle
from .analysis import (
    ConvergenceReport,
    InfSupResult,
    ManufacturedProblem,
    convergence_study,
    coercivity_constant,
    error_norms,
    inf_sup_constant,
    locking_baseline,
    locking_comparison,
    macroelement_nullspace_dim,
    manufactured_problem,
    patch_nullspace_dim,
    solve_manufactured,
    stability_scan,
)

__version__ = "0.1.0"
