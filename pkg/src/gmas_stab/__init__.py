"""Stability analysis of complex-balanced equilibria in generalized mass-action systems."""

from .analysis import (
    AnalysisReport,
    NetworkClass,
    analyze_cycle_network,
    analyze_weakly_reversible,
    classical_certificate,
    classify,
    entropy_lyapunov,
    full_report,
    uniqueness_check,
)
from .dynamics import (
    construct_rates,
    cycle_limit_matrix,
    epsilon_family,
    integrate,
    is_complex_balanced,
    jacobian,
    kernel_lemma_check,
    rhs,
)
from .errors import (
    GmasError,
    LatticeViolationError,
    NetworkSyntaxError,
    NetworkValidationError,
    NumericalError,
    PreconditionError,
    ResourceLimitError,
    StiffnessError,
)
from .linalg import Subspace, definiteness_on, is_P0plus_matrix, is_P_matrix, sign_vectors_intersect
from .network import (
    GmasNetwork,
    enumerate_cycles,
    kinetic_subspace,
    laplacian,
    parse_network,
    serialize_network,
    stoichiometric_subspace,
    weakly_reversible,
)
from .stability import (
    Method,
    Notion,
    SearchOptions,
    Status,
    StabilityVerdict,
    is_D_semistable,
    is_D_stable,
    is_diagonally_D_stable_on,
    is_diagonally_semistable,
    is_diagonally_stable,
    is_semistable,
    is_stable,
    lyapunov_certificate,
    notion_lattice_check,
)

__version__ = "0.1.0"
