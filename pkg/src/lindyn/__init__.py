"""Finite-truncation laboratory for supercyclic operators on l^p spaces,
operator ideals and projective tensor products."""

from .errors import (
    CriterionDataError,
    GridResolutionError,
    LindynError,
    LinearDependenceError,
    SpaceMismatchError,
    WindowViolationError,
)
from .spaces import (
    Functional,
    RankOne,
    SpaceDesc,
    SpaceVec,
    dual_basis,
    dual_norm,
    norm,
    pair,
    predual_basis,
    support,
)
from .operators import (
    MatOp,
    adjoint,
    direct_sum,
    forward_shift,
    op_norm,
    orbit,
    power,
    weighted_backward_shift,
)
from .ideals import (
    DyadicGrid,
    FiniteRankCombo,
    IdealDesc,
    IdealElement,
    audit_ideal_axioms,
    ideal_norm,
    lemma1_approximate,
    mult_norm_bound_check,
    schatten_norm,
)
from .criteria import (
    CriterionData,
    CriterionReport,
    check_hypercyclicity_criterion,
    check_supercyclicity_criterion,
    intertwiner_left,
    intertwiner_right,
    lift_left,
    lift_right,
    shift_data,
)
from .tensor import (
    TSCData,
    TensorElem,
    check_theorem3,
    check_tsc,
    kronecker,
    projective_norm_dual_lower,
    projective_norm_hilbert_oracle,
    projective_norm_upper,
    tensor,
    tensor_apply,
)
from .probes import best_scale, density_report, scaled_orbit_distance

__version__ = "0.1.0"
