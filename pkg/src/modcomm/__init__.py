"""Modular commutators and entanglement diagnostics for free-fermion lattices."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateFillingError,
    IncompleteJunctionError,
    InvalidPartitionError,
    NumericalContractError,
    RegionOverlapError,
    SupportMismatchWarning,
)
from .gaussian import (
    CorrelationMatrix,
    ModularMatrix,
    additivity_decomposition,
    cond_mutual_info,
    delta_three,
    delta_two,
    entanglement_entropy,
    geometric_integer,
    ground_state_correlations,
    modular_commutator,
    modular_commutator_detail,
    modular_current,
    modular_matrix,
    restrict,
)
from .lattice import (
    LatticeModel,
    Site,
    add_disorder,
    build_haldane,
    build_pi_flux,
    haldane_bulk_gap,
    half_filling_gap,
)
from .regions import (
    JunctionBall,
    Partition,
    Region,
    TriJunction,
    complement_partition,
    disk,
    edge_band,
    find_trijunctions,
    hexagon_cells,
    cell_rectangle,
    intersect,
    predict_geometric_integer,
    preset,
    rectangle,
    region_all,
    region_from_indices,
    sector,
    subpartition,
    subtract,
    union,
    validate_partition,
)
