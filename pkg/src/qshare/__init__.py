"""Entanglement sharing among the parties of N-qubit pure states."""
__version__ = "0.1.0"

from .errors import QShareError
from .geometry import (
    additivity_mc,
    additivity_n3,
    classify_face,
    cube_slice_hyperarea,
    excluded_simplex_volume,
    ghz_locus,
    inequality_margins,
    inhabitable_volume,
    is_inhabitable,
    polytope_volume_mc,
)
from .monotones import (
    bounds_report,
    concurrence_one_vs_rest,
    entanglement_profile,
    monogamy_residual,
    pairwise_concurrence,
    qudit_y_monotone,
    schmidt_coefficients,
    schmidt_vectors,
    schmidt_weight,
    y_monotone,
)
from .states import (
    PureState,
    StateSpec,
    apply_local_unitary,
    bell,
    from_amplitudes,
    ghz,
    haar_random,
    product,
    reduced_density_pair,
    reduced_density_single,
    w_state,
)
