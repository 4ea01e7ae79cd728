"""Genuine multipartite entanglement of infinite quantum spin chains.

Ground states of translationally invariant spin-1/2 and spin-1 chains are
found by imaginary-time iTEBD on an infinite MPS; reduced density matrices
come from transfer-matrix fixed points; the generalized geometric measure
(GGM) is evaluated from Schmidt maxima over bipartition candidates and
cross-validated against exact diagonalization of finite rings.
"""

from .errors import (
    DegenerateTransfer,
    EntchainError,
    GaugeSingular,
    NotHermitian,
    NumericalBreakdown,
    PatternTooLarge,
    ShapeError,
    TooLarge,
    UnsupportedDimension,
)
from .operators import (
    BondHamiltonian,
    ModelSpec,
    SpinOperators,
    build_bond_hamiltonian,
    build_gate,
    build_spin_operators,
)
from .imps import (
    IMPS,
    FixedPoints,
    TransferMatrix,
    canonicalize,
    dominant_fixed_points,
    dominant_subspace,
    half_cut_spectrum,
    init_imps,
    load_imps,
    ring_amplitudes,
    save_imps,
    site_matrices,
    site_tensors,
    transfer_matrix,
)
from .itebd import (
    ConvergenceLog,
    ItebdConfig,
    apply_gate_on_bond,
    energy_per_site,
    find_ground_state,
    st2_sweep,
    transfer_gap,
)
from .rdm import (
    ReducedDensityMatrix,
    SitePattern,
    consecutive_block_rdm,
    pattern_rdm,
    single_site_rdm,
    sublattice_asymmetry,
)
from .ggm import (
    BipartitionCandidate,
    GgmResult,
    closest_product_fidelity,
    ggm_finite,
    ggm_infinite,
    max_schmidt_sq,
)
from .ed import (
    FiniteGroundState,
    build_dense_hamiltonian,
    ground_state,
    partial_trace,
)
from .references import ReferenceState, make_reference

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
