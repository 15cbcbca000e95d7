"""Homotonic algebras of functions and their weighted sup norms."""

__version__ = "0.1.0"

from homotonic.core import (
    DEFAULT_TOL,
    Carrier,
    CarrierMismatchError,
    Element,
    OrderError,
    absolute,
    add,
    indicator,
    leq,
    neg_part,
    pos_part,
    power,
    scale,
)
from homotonic.homotonicity import (
    check_abs_closed,
    check_ii,
    check_ii_prime,
    check_ii_R,
    theorem_equivalence_suite,
)
from homotonic.norms import (
    NotHomotonicError,
    Weight,
    certify,
    check_strong_stability,
    convolution_weight_criterion,
    hadamard_inverse,
    sample_lambda,
    threshold_scale,
    weighted_sup_norm,
)
from homotonic.products import (
    AlgebraSpec,
    Convolution,
    Dilation,
    Jordan,
    MatrixProduct,
    Plane,
    Pointwise,
    TensorProduct,
    a2_algebra,
    algebra,
    dilation_algebra,
    jordanize,
    membership_A2,
    multiply,
    structure_tensor,
)
from homotonic.spectral import berger_check, numerical_radius, radius_submult_witness
