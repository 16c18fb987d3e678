"""Relative perturbation bounds for Hermitian quadratic eigenvalue problems and Hermitian matrix pairs."""

from .canonical import (
    AssumptionReport,
    BlockSpec,
    EigStructure,
    Kind,
    assemble,
    build_block,
    canonical_rescale,
    modified_scaling,
    pair_from_structure,
    structure_from_pair,
    validate_assumptions,
)
from .errors import QepPerturbError
from .linalg import (
    EigenDecomposition,
    MatrixPair,
    chordal_distance,
    cond2,
    eig_pair,
    flip_matrix,
    fro_norm,
    jordan_block,
    match_spectra,
    pinv,
    shift_matrix,
    sin_theta,
    sin_theta_norm,
    spec_norm,
)
from .pair_bounds import (
    BoundEntry,
    GapParameters,
    PairPerturbation,
    certify_gap,
    eig_bound_jordan,
    eig_bound_semisimple,
    sin_theta_bound_B_nonsingular,
    sin_theta_bound_regular,
    sin_theta_bound_ui,
)
from .qep import (
    HermitianTriple,
    QepPerturbation,
    embed_eigvec,
    extract_angle,
    hyperbolic_bound,
    linearize,
    load_triple,
    qep_deltas,
    qep_deltas_frobenius,
    qep_eig_bound_jordan,
    qep_eig_bound_semisimple,
    qep_sin_bound,
    save_triple,
)
from .sylvester import (
    BoundCoefficients,
    alpha_coeffs,
    alpha_max,
    phi_minus,
    phi_plus,
    solve_structured_sylvester,
    w_matrices,
)

__version__ = "0.1.0"
