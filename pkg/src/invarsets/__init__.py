"""invarsets: numerical certification of invariant sets built from
conserved quantities of ODE flows.

The library classifies states by the numerical rank of the Jacobian of a
vector of first integrals (rank-level sets), by the vanishing of all
higher partials up to a given order (derivative-vanishing sets), and by
agreement of derivative stacks between two quantities (agreement sets);
it then certifies along integrated trajectories that these
classifications are flow-invariant and that gradient-driven flows started
on an agreement set coincide.  Built-in models: the planar Kepler problem
and periodic / non-periodic Toda lattices.
"""

__version__ = "0.1.0"

from .core import (
    ConservedQuantitySet,
    SystemDefinition,
    as_state,
    conservation_residual,
    evaluate_field,
    stack_quantities,
    zero_quantity,
)
from .differentiate import PartialTensor, gradient, jacobian, partial_tensor
from .errors import IntegrationError, InvarsetsError, NumericError, UsageError
from .integrate import (
    DriftReport,
    IntegratorStats,
    Trajectory,
    flow_adaptive,
    flow_fixed,
    monitor_drift,
)
from .invariance import (
    InvarianceReport,
    verify_critical_invariance,
    verify_rank_invariance,
    verify_set_persistence,
    verify_vanishing_invariance,
)
from .rank_sets import (
    RankDecision,
    SetMembership,
    in_critical_set,
    in_vanishing_set,
    numerical_rank,
    rank_level,
)
from .coincidence import (
    CoincidenceReport,
    DerivativeStack,
    GradientDrivenSystem,
    agreement_residual,
    assemble_system,
    build_perturbed_pair,
    build_poisson_system,
    canonical_symplectic_matrix,
    derivative_stack,
    perturbed_pair_coincidence,
    verify_coincidence,
)

__all__ = [
    "__version__",
    "ConservedQuantitySet",
    "SystemDefinition",
    "as_state",
    "conservation_residual",
    "evaluate_field",
    "stack_quantities",
    "zero_quantity",
    "PartialTensor",
    "gradient",
    "jacobian",
    "partial_tensor",
    "InvarsetsError",
    "UsageError",
    "NumericError",
    "IntegrationError",
    "Trajectory",
    "DriftReport",
    "IntegratorStats",
    "flow_adaptive",
    "flow_fixed",
    "monitor_drift",
    "RankDecision",
    "SetMembership",
    "numerical_rank",
    "rank_level",
    "in_vanishing_set",
    "in_critical_set",
    "InvarianceReport",
    "verify_rank_invariance",
    "verify_vanishing_invariance",
    "verify_set_persistence",
    "verify_critical_invariance",
    "CoincidenceReport",
    "DerivativeStack",
    "GradientDrivenSystem",
    "derivative_stack",
    "agreement_residual",
    "assemble_system",
    "verify_coincidence",
    "build_poisson_system",
    "build_perturbed_pair",
    "perturbed_pair_coincidence",
    "canonical_symplectic_matrix",
]
