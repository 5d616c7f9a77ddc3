"""Numerical toolkit for single-letter quantum channel capacities and their
best-context (potential) bounds at desk scale."""

from .linops import (
    DensityMatrix,
    InvariantViolation,
    PureState,
    SystemDims,
    partial_trace,
    purify,
    random_density,
    random_isometry,
    tensor,
)
from .channels import (
    ChoiMatrix,
    KrausChannel,
    StinespringIsometry,
    choi_of,
    complementary,
    apply,
    apply_to_half,
    kraus_from_choi,
    kraus_rotate,
    kraus_to_stinespring,
    tensor_channels,
    validate_cptp,
)
from .entropics import (
    coherent_information,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    mutual_information,
)
from .entanglement import (
    Decomposition,
    POVM,
    c_arrow,
    entanglement_of_formation,
    g_measure,
    ppt_check,
)
from .capacities import (
    CapacityReport,
    Ensemble,
    c_e,
    holevo_capacity,
    msw_chi,
    p1,
    q1,
    q_a,
)
from .potential import (
    BoundReport,
    LiftedChannel,
    activation_witness_qa,
    canonical_lift,
    channel_eof,
    chi_p_upper,
    is_degradable,
    is_entanglement_breaking,
    is_hadamard,
    perfection_audit,
    pp_upper,
    q_a_potential,
    qp_upper,
)
from .additivity import (
    GapRecord,
    activation_search,
    additivity_gap,
    chain_check,
    subadditivity_check_potential_proxy,
)
from .structure import (
    Block,
    BlockDecomposition,
    construct_block_state,
    discover_block_decomposition,
    verify_block_form,
    verify_equality_case,
)
from .optim import OptimOptions, derive_seed
from .zoo import ChannelSpec, parse_channel_spec, zoo

__version__ = "0.1.0"
