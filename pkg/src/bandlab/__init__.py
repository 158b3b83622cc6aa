"""Desk-scale laboratory for multiplication operators on discretized function spaces.

The package discretizes L_p(mu) and sup-norm function spaces over finite
atomic measure spaces and provides the machinery to experiment with
multiplication operators: level-set bands and their invariance under the
commutant, flat detection and the rank-one commuting projection, an
averaging operator that commutes without preserving disjointness, order
bounds and norm decay under compact-role domination, and the inductive
construction of disjoint unit sequences with image norms bounded below.
"""

from .commutant import (
    DisjointnessReport,
    GrowthProbe,
    disjointness_preservation_test,
    growth_contradiction_probe,
    power_commutation_check,
)
from .compactcheck import (
    DecayReport,
    OrderBoundCertificate,
    disjoint_decay,
    dyadic_indicator_family,
    order_bound_witness,
)
from .errors import (
    BandlabError,
    FlatAtScale,
    GeometryMismatch,
    InvalidDiscretization,
    InvalidInterval,
    InvarianceViolation,
    NoClusterPoint,
    NoNonzeroImage,
    NotAFlat,
    NotDisjointImages,
    NotLevelInvariant,
    PreconditionError,
    SingleBandOnly,
    SpaceMismatch,
    StarvedSide,
)
from .levelsets import (
    Flat,
    FlatReport,
    InvarianceCheck,
    LevelBand,
    band_projection,
    detect_flats,
    enumerate_hyperinvariant_bands,
    leaves_invariant,
    level_set,
)
from .lpspace import (
    LpFunction,
    constant,
    disjoint,
    from_callable,
    indicator,
    load_values_csv,
    modulate,
    save_values_csv,
)
from .measure import (
    MeasurableSet,
    MeasureSpace,
    measure,
    product_grid,
    uniform_interval,
)
from .multipliers import make_multiplier, plateau_values
from .operators import (
    LinearOperator,
    OperatorNormEstimate,
    commutator_norm,
    dominates,
    gaussian_kernel,
    identity_operator,
    kernel_operator,
    load_matrix_csv,
    multiplication,
    operator_norm,
    rank_one_flat,
    row_averaging,
    save_matrix_csv,
)
from .witness import (
    SplitResult,
    StepVerdict,
    TraceVerdicts,
    WitnessConfig,
    WitnessStep,
    WitnessTrace,
    init_state,
    run_witness,
    split_level,
    verify_trace,
    witness_step,
)

__version__ = "0.1.0"
