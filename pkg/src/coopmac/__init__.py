"""Rate regions of multiple-access channels with cooperating transmitters.

Submodules
----------
channel
    Channel specifications, fading state sampling and CSIT quantizers.
expectation
    Monte Carlo and Gauss-Laguerre expectations over the fading state.
region
    Rate polytopes: membership, vertices, support values, structure checks.
fading
    Fading-channel regions with common messages and conferencing encoders.
equivalence
    Conversion between two parameterizations of the perfect-CSIT region.
discrete
    Exact regions and brute-force search for small discrete channels.
codingsim
    Random superposition codes with typicality decoding.
reproduce
    Boundary data and checkpoints of the two-user fading scenarios.
"""

__version__ = "0.1.0"

__all__ = [
    "CsitQuantizer",
    "FadingChannelSpec",
    "FadingDistribution",
    "apply_csit",
    "rayleigh_density",
    "sample_state",
    "BudgetError",
    "CapabilityError",
    "CoopMacError",
    "NumericalError",
    "ValidationError",
    "RateConstraintSet",
    "RatePoint",
    "check_monotone",
    "check_submodular",
    "effective_bounds",
    "membership",
    "support_value",
    "vertices",
    "ConferencingSpec",
    "PolicyGrid",
    "TransmitPolicy",
    "compensation_capacity",
    "conferencing_reduction_check",
    "correlation_coefficient",
    "frontier",
    "gaussian_signal_samples",
    "max_common_rate",
    "region_cm",
    "region_conf",
    "region_no_csit",
    "DiscreteChannelSpec",
    "InputLaw",
    "brute_force_region",
    "region_for_law",
    "willems_region",
    "MonteCarlo",
    "Quadrature",
    "capacity_fn",
    "mc_expect",
    "quad_expect",
    "CodebookSpec",
    "build_codebook",
    "error_curve",
    "transmit_and_decode",
]

from .channel import (  # noqa: E402
    CsitQuantizer,
    FadingChannelSpec,
    FadingDistribution,
    apply_csit,
    rayleigh_density,
    sample_state,
)
from .errors import (  # noqa: E402
    BudgetError,
    CapabilityError,
    CoopMacError,
    NumericalError,
    ValidationError,
)
from .expectation import MonteCarlo, Quadrature, capacity_fn, mc_expect, quad_expect  # noqa: E402
from .region import (  # noqa: E402
    RateConstraintSet,
    RatePoint,
    check_monotone,
    check_submodular,
    effective_bounds,
    membership,
    support_value,
    vertices,
)
from .fading import (  # noqa: E402
    ConferencingSpec,
    PolicyGrid,
    TransmitPolicy,
    compensation_capacity,
    conferencing_reduction_check,
    correlation_coefficient,
    frontier,
    gaussian_signal_samples,
    max_common_rate,
    region_cm,
    region_conf,
    region_no_csit,
)
from .discrete import (  # noqa: E402
    DiscreteChannelSpec,
    InputLaw,
    brute_force_region,
    region_for_law,
    willems_region,
)
from .codingsim import CodebookSpec, build_codebook, error_curve, transmit_and_decode  # noqa: E402
