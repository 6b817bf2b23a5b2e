"""heatshift: moment-shifted Gaussian profiles for long-time heat asymptotics.

Builds modified heat kernels whose size, centre and effective start time are
matched to the moments of an initial datum, verifies the algebraic shift
conditions, and measures long-time L^p error decay rates on self-similar
grids.
"""

from .analysis import (
    ComponentMaxima,
    DecayFit,
    GridSpec,
    error_component_coefficients,
    expected_exponent,
    fit_decay,
    lp_error_norm,
    sphere_projected_component_check,
)
from .gaussians import GaussianTermSum, active_backend
from .initialdata import (
    HermiteGaussianSum,
    MomentTable,
    SampledData,
    TensorTerm,
    as_sampled,
    axis_moment,
    compute_moment_table,
    gaussian_even_moment,
    moment_quadrature_oracle,
)
from .kernels import (
    ModifiedKernel,
    build_modified_kernel,
    heat_kernel,
    heat_kernel_derivative,
    hermite_poly,
    modified_kernel_value,
    sphere_monomial_integral,
)
from .multiindex import enumerate_order, multi_factorial
from .shifts import (
    IsotropyReport,
    ShiftDerivationError,
    ShiftSet,
    check_shift_isotropy,
    derive_shift_set,
    find_min_nondegenerate_order,
    nonzero_moment_indices,
    spatial_shifts,
    time_shifts,
    verify_shift_identities,
)
from .solution import (
    SphereQuadrature,
    convolution_oracle,
    datum_field,
    propagate_exact,
    sphere_average,
)

__version__ = "0.1.0"

__all__ = [
    "ComponentMaxima",
    "DecayFit",
    "GridSpec",
    "GaussianTermSum",
    "HermiteGaussianSum",
    "IsotropyReport",
    "ModifiedKernel",
    "MomentTable",
    "SampledData",
    "ShiftDerivationError",
    "ShiftSet",
    "SphereQuadrature",
    "TensorTerm",
    "active_backend",
    "as_sampled",
    "axis_moment",
    "build_modified_kernel",
    "check_shift_isotropy",
    "compute_moment_table",
    "convolution_oracle",
    "datum_field",
    "derive_shift_set",
    "enumerate_order",
    "error_component_coefficients",
    "expected_exponent",
    "find_min_nondegenerate_order",
    "fit_decay",
    "gaussian_even_moment",
    "heat_kernel",
    "heat_kernel_derivative",
    "hermite_poly",
    "lp_error_norm",
    "modified_kernel_value",
    "moment_quadrature_oracle",
    "multi_factorial",
    "nonzero_moment_indices",
    "propagate_exact",
    "spatial_shifts",
    "sphere_average",
    "sphere_monomial_integral",
    "sphere_projected_component_check",
    "time_shifts",
    "verify_shift_identities",
]
