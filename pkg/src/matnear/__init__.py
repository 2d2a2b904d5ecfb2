"""Eigenvalue optimization and matrix nearness problems.

Inner iterations follow norm- and rank-constrained gradient flows of a
target-eigenvalue functional (rank-1 complex, rank-2 real, or projected
onto a linear perturbation structure); outer iterations adjust the
perturbation size by a Newton-bisection root find.  On top of these sit
solvers for pseudospectral abscissas and boundaries, stability radii,
dissipativity radii, structured distances to singularity, and the
coprimality radius of polynomial pairs.
"""

from .errors import (
    BreakdownError,
    DefectiveTargetError,
    DegreeMismatchError,
    DimensionMismatchError,
    MatnearError,
    NearDefectiveWarning,
    NoImaginaryCrossingError,
    NotDissipativeError,
    NotOnBoundaryError,
    NotStableError,
    ParseError,
    RhoBlowupError,
    TangentUndefinedError,
    UnsupportedFieldError,
    ZeroGradientError,
    ZeroNotSimpleError,
)
from .linalg import (
    EigenTriple,
    SingularTriplet,
    TargetSelector,
    eigenvalue_derivative,
    eigenvector_derivative,
    group_inverse,
    largest_modulus,
    nearest_to,
    rightmost,
    singular_value_derivative,
    smallest_modulus,
    smallest_singular_triplet,
    target_eigentriple,
)
from .objectives import (
    Objective,
    distance_squared_to,
    modulus,
    neg_half_modulus_squared,
    neg_real_part,
)
from .structures import (
    SparsityPattern,
    StructureSpace,
    full_complex,
    full_real,
    hamiltonian_real,
    range_corange,
    sparse_complex,
    sparse_real,
    sylvester_build,
    sylvester_coefficients,
    sylvester_projection,
    sylvester_real,
    toeplitz_complex,
    toeplitz_real,
)
from .rank1 import (
    FlowConfig,
    FlowResult,
    Rank1State,
    SplittingScalars,
    decay_rate_g,
    free_gradient,
    run_rank1_flow,
    splitting_step,
    steepest_descent_state,
    tangent_project_rank1,
)
from .lowrank import (
    RankRState,
    bug_step,
    decay_rate_g_rankr,
    initial_rank2_state,
    real_gradient,
    run_rank2_flow,
    tangent_project_rankr,
)
from .structured import (
    StructuredRank1State,
    run_structured_flow,
    structured_gradient,
    structured_rank1_step,
    structured_steepest_descent,
)
from .pseudospectra import (
    BoundaryPoint,
    CrissCrossTrace,
    boundary_normal,
    boundary_point_at,
    byers_hamiltonian,
    crisscross_abscissa,
    extremal_perturbation,
    in_pseudospectrum,
    rank1_abscissa,
    trace_boundary,
)
from .twolevel import (
    OuterConfig,
    OuterRow,
    SolveReport,
    eps_stability_radius,
    initial_guess,
    newton_bisection,
    phi_derivative,
    singularity_distance_eig,
    stability_radius,
)
from .eigfree import (
    CoprimalityResult,
    OpCounter,
    coprimality_radius,
    dissipativity_radius,
    numerical_abscissa,
    singularity_distance_mvp,
)
from .mmio import MatrixData, read_matrix, write_matrix

__version__ = "0.1.0"
