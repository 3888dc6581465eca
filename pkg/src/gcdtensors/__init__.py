"""GCD tensors: decompositions, factorizations, determinants and meet-semilattice analogues."""

from .determinant import (
    DetReport,
    PolynomialSystem,
    conjecture_scan,
    det_closed_form,
    det_matrix_exact,
    polynomial_system,
    sylvester_resultant,
    tensor_det_oracle,
)
from .errors import ClosureError, DomainError, GcdTensorError, LatticeError, UnsupportedError, UsageError
from .gcdtensor import (
    CpDecomposition,
    GcdFactorization,
    IncidenceMatrix,
    build_gcd_tensor,
    factorize,
    incidence_matrix,
    multiplicative_transform,
    reconstruct,
    scp_decompose,
    strong_cp_rank_witness,
)
from .numtheory import (
    classify_set,
    dirichlet_convolve,
    divisors,
    euler_phi,
    factor_closure,
    gcd_closure,
    gcd_many,
    generalized_totient,
    mobius,
)
from .poset import (
    MeetSemilattice,
    build_lattice,
    build_meet_tensor,
    det_closed_form_meet,
    is_meet_closed,
    meet_closure,
    meet_decompose_factorize,
    meet_many,
    poset_totient,
)
from .positivity import ExtremeFormResult, PositivityReport, extreme_form_on_sphere, psd_sample_check
from .tensor import (
    Tensor,
    eval_form,
    entrywise_map,
    general_product,
    hadamard,
    hadamard_power,
    k_mode_product,
    make_diagonal,
    multi_mode_product,
    outer_power,
    permute_congruence,
    symmetry_check,
)

__version__ = "0.1.0"
