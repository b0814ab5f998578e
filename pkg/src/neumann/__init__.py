"""Confluent Neumann system: constrained flow, integrals, Lax pair, reduction, bifurcations."""

from .bifurcation import Classification, EMValue, ScanGrid, classify_value, discriminant, scan, scan_values
from .dynamics import (
    PhasePoint,
    PotentialSpec,
    Tangent,
    Trajectory,
    hamiltonian,
    integrate,
    project_to_manifold,
    random_phase_point,
    rattle_step,
    vector_field,
)
from .errors import (
    ConstraintError,
    DomainError,
    FixedPointSetError,
    IntegrationError,
    NeumannError,
    NumericalError,
    SingularPotentialError,
    StructuralError,
)
from .integrals import (
    GradientPair,
    IntegralVector,
    angular_momentum,
    confluent_integrals,
    confluent_limit_check,
    energy_momentum,
    integral_gradients,
    poisson_bracket,
    uhlenbeck_generic,
)
from .lax import (
    LaxData,
    SpectralData,
    eigen_curve_check,
    eigenspace_dims,
    lax_m,
    lax_matrix,
    lax_residual,
    q_from_integrals,
    spectral_poly,
)
from .reduction import (
    ReducedPoint,
    full_rosochatius_reduce,
    reduce,
    reduced_flow,
    reduced_hamiltonian,
    rosochatius_potential,
)

__version__ = "0.1.0"
