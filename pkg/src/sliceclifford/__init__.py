"""Numerical slice Clifford analysis on axially symmetric domains."""

from .algebra import CliffordAlgebra, Multivector, Paravector
from .geometry import (
    AxialDomainQuadrature,
    Disk,
    DomainError,
    Rectangle,
    SlicePoint,
    build_domain,
    direction_multivector,
    sphere_surface_area,
)
from .functions import (
    BumpSliceFunction,
    GridField,
    PolynomialSliceFunction,
    StencilError,
    apply_G_analytic,
    apply_G_fd,
    evaluate,
    grid_G_fd,
    make_bump,
    representation_formula,
    sample_node_values,
    star_product,
)
from .kernels import (
    SingularKernelError,
    alpha_beta,
    cauchy_kernel_K,
    in_singular_sphere,
    pi_kernel,
    pi_plus_kernel,
    slice_cauchy_kernel,
)
from .operators import (
    AccuracyWarning,
    ConvergenceError,
    DiscreteOperator,
    adjoint_G_star,
    assemble,
    cauchy_boundary,
    conjugate_teodorescu,
    cprime_constant,
    lp_norm,
    operator_norm,
    pi_op,
    pi_op_slice,
    pi_plus_op,
    teodorescu,
    teodorescu_slice,
    theoretical_C,
    weighted_inner,
)
from .beltrami import (
    BeltramiProblem,
    BeltramiSolution,
    ConditionReport,
    check_contraction,
    measure_pi_norm,
    solve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
