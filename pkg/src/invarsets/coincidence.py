"""Flow coincidence for gradient-driven systems.

Two systems x' = f(x, D F(x)) and x' = f(x, D G(x)) share the same base
map f but are driven by the derivative stacks of different quantities.
When F - G is conserved by the first system and the stacks of F and G
agree at a start point up to the driving order, the two flows from that
point coincide for all time.  This module assembles such systems, measures
stack agreement, and certifies coincidence by dual integration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    ConservedQuantitySet,
    SystemDefinition,
    as_state,
    conservation_residual,
    evaluate_field,
    zero_quantity,
)
from .differentiate import partial_tensor
from .errors import IntegrationError, UsageError
from .integrate import (
    DEFAULT_ABS_TOL,
    DEFAULT_REL_TOL,
    DEFAULT_SAMPLE_COUNT,
    Trajectory,
    flow_adaptive,
)

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_ERROR = "hypothesis-error"

DEFAULT_HYPOTHESIS_TOL = 1e-8
DEFAULT_DEVIATION_TOL = 1e-6
ANTISYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class DerivativeStack:
    """Derivatives of a k-vector quantity flattened order by order.

    ``blocks[l-1]`` holds all order-l partials in lexicographic
    (component, multi-index) order, with the multi-index running over the
    full product {0..n-1}^l (symmetric repeats included), so block l has
    length k * n^l.  Order 1 is the row-major flattening of the Jacobian.
    """

    k: int
    dim: int
    order: int
    blocks: tuple[np.ndarray, ...]

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks)


def derivative_stack(quantity: ConservedQuantitySet, x, order: int = 1) -> DerivativeStack:
    """Evaluate the derivative stack of ``quantity`` at ``x`` up to ``order``."""
    xv = as_state(x, quantity.dim)
    tensor = partial_tensor(quantity, xv, order)
    blocks = tuple(tensor.flatten(l) for l in range(1, order + 1))
    return DerivativeStack(k=quantity.k, dim=quantity.dim, order=order, blocks=blocks)


@dataclass(frozen=True)
class GradientDrivenSystem:
    """A system assembled as x' = base(x, stack-of-derivatives-of-quantity)."""

    base: Callable[[np.ndarray, np.ndarray], np.ndarray]
    quantity: ConservedQuantitySet
    order: int
    system: SystemDefinition


def assemble_system(
    base: Callable[[np.ndarray, np.ndarray], np.ndarray],
    quantity: ConservedQuantitySet,
    order: int = 1,
    label: str = "",
) -> GradientDrivenSystem:
    """Close a base map over the derivative stack of a driving quantity.

    ``base(x, stack)`` receives the flat stack (for a scalar quantity at
    order 1 this is just the gradient).
    """
    if order < 1:
        raise UsageError(f"driving order must be >= 1, got {order}")

    def field(x, _base=base, _q=quantity, _r=order):
        return np.asarray(_base(x, derivative_stack(_q, x, _r).flat), dtype=float)

    system = SystemDefinition(
        dim=quantity.dim,
        field=field,
        label=label or f"driven[{'/'.join(quantity.labels)}]",
    )
    return GradientDrivenSystem(base=base, quantity=quantity, order=order, system=system)


def agreement_residual(
    f_quantity: ConservedQuantitySet,
    g_quantity: ConservedQuantitySet,
    x,
    order: int = 1,
) -> float:
    """max |d^alpha F_i(x) - d^alpha G_i(x)| over all orders 1..order.

    Zero (below tolerance) means ``x`` lies in the order-``order``
    agreement set of the two quantities.
    """
    if (f_quantity.dim, f_quantity.k) != (g_quantity.dim, g_quantity.k):
        raise UsageError(
            f"quantities have mismatched shape: ({f_quantity.k}, {f_quantity.dim}) vs "
            f"({g_quantity.k}, {g_quantity.dim})"
        )
    xv = as_state(x, f_quantity.dim)
    tf = partial_tensor(f_quantity, xv, order)
    tg = partial_tensor(g_quantity, xv, order)
    worst = 0.0
    for alpha, vals in tf.entries.items():
        worst = max(worst, float(np.max(np.abs(vals - tg.entries[alpha]))))
    return worst


def _difference_quantity(
    f_quantity: ConservedQuantitySet, g_quantity: ConservedQuantitySet
) -> ConservedQuantitySet:
    grad = None
    if f_quantity.analytic_gradient is not None and g_quantity.analytic_gradient is not None:

        def grad(x):
            return np.asarray(f_quantity.analytic_gradient(x), float) - np.asarray(
                g_quantity.analytic_gradient(x), float
            )

    return ConservedQuantitySet(
        dim=f_quantity.dim,
        k=f_quantity.k,
        value=lambda x: np.atleast_1d(np.asarray(f_quantity.value(x), float))
        - np.atleast_1d(np.asarray(g_quantity.value(x), float)),
        labels=tuple(f"{a}-{b}" for a, b in zip(f_quantity.labels, g_quantity.labels)),
        analytic_gradient=grad,
        smoothness_order=min(f_quantity.smoothness_order, g_quantity.smoothness_order),
    )


@dataclass(frozen=True)
class CoincidenceReport:
    """Evidence for one dual-flow coincidence check.

    Hypothesis evidence (`stack agreement at the start`, `conservation of
    F - G along the first flow`) is reported separately from the flow
    deviation so a hypothesis violation is never confused with a genuine
    counterexample.
    """

    verdict: str
    message: str
    e_residual: float
    difference_drift: float
    deviations: np.ndarray
    max_deviation: float
    max_deviation_time: float
    trajectory_f: Trajectory | None
    trajectory_g: Trajectory | None


def verify_coincidence(
    base: Callable[[np.ndarray, np.ndarray], np.ndarray],
    f_quantity: ConservedQuantitySet,
    g_quantity: ConservedQuantitySet,
    x0,
    t_end: float,
    order: int = 1,
    deviation_tol: float = DEFAULT_DEVIATION_TOL,
    hypothesis_tol: float = DEFAULT_HYPOTHESIS_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
    sample_count: int = DEFAULT_SAMPLE_COUNT,
) -> CoincidenceReport:
    """Integrate both driven systems from ``x0`` and compare trajectories.

    Hypotheses checked first: the derivative stacks of F and G agree at
    ``x0`` up to ``order``, and F - G is conserved along the F-driven flow
    (sampled).  When they fail the verdict is a hypothesis error and the
    measured deviation is recorded as a diagnostic.
    """
    x0v = as_state(x0, f_quantity.dim)
    e_res = agreement_residual(f_quantity, g_quantity, x0v, order)
    scale = max(1.0, float(np.linalg.norm(x0v)))
    on_set = e_res <= hypothesis_tol * scale

    sys_f = assemble_system(base, f_quantity, order, label="driven-F")
    sys_g = assemble_system(base, g_quantity, order, label="driven-G")
    try:
        traj_f = flow_adaptive(sys_f.system, x0v, t_end, abs_tol, rel_tol, sample_count)
        traj_g = flow_adaptive(sys_g.system, x0v, t_end, abs_tol, rel_tol, sample_count)
    except IntegrationError as exc:
        if not on_set:
            # the start violates the agreement hypothesis and one flow left
            # the integrable region; report the violation, not the blowup
            return CoincidenceReport(
                verdict=HYPOTHESIS_ERROR,
                message=(
                    f"start is off the agreement set (residual {e_res:.3e}); "
                    f"integration additionally failed: {exc}"
                ),
                e_residual=e_res,
                difference_drift=float("nan"),
                deviations=np.array([]),
                max_deviation=float("inf"),
                max_deviation_time=float("nan"),
                trajectory_f=None,
                trajectory_g=None,
            )
        raise

    diff = _difference_quantity(f_quantity, g_quantity)
    drift = 0.0
    for s in traj_f.states:
        res = float(np.max(np.abs(conservation_residual(diff, sys_f.system, s))))
        drift = max(drift, res / max(1.0, float(np.linalg.norm(s))))
    conserved = drift <= hypothesis_tol

    deviations = np.linalg.norm(traj_f.states - traj_g.states, axis=1)
    worst_idx = int(np.argmax(deviations))
    max_dev = float(deviations[worst_idx])

    if not (on_set and conserved):
        reasons = []
        if not on_set:
            reasons.append(f"start is off the agreement set (residual {e_res:.3e})")
        if not conserved:
            reasons.append(f"F-G is not conserved along the first flow (residual {drift:.3e})")
        verdict, message = HYPOTHESIS_ERROR, "; ".join(reasons)
    elif max_dev <= deviation_tol:
        verdict, message = PASS, f"flows coincide: max deviation {max_dev:.3e}"
    else:
        verdict, message = FAIL, f"flows deviate by {max_dev:.3e} > tol {deviation_tol:.1e}"

    return CoincidenceReport(
        verdict=verdict,
        message=message,
        e_residual=e_res,
        difference_drift=drift,
        deviations=deviations,
        max_deviation=max_dev,
        max_deviation_time=float(traj_f.times[worst_idx]),
        trajectory_f=traj_f,
        trajectory_g=traj_g,
    )


def canonical_symplectic_matrix(dof: int) -> np.ndarray:
    """The constant block matrix [[0, I], [-I, 0]] on R^(2*dof)."""
    if dof < 1:
        raise UsageError(f"degrees of freedom must be >= 1, got {dof}")
    J = np.zeros((2 * dof, 2 * dof))
    J[:dof, dof:] = np.eye(dof)
    J[dof:, :dof] = -np.eye(dof)
    return J


def build_poisson_system(
    structure,
    quantity: ConservedQuantitySet,
    probes=None,
) -> GradientDrivenSystem:
    """Assemble x' = Pi(x) grad F(x) for an antisymmetric matrix map Pi.

    ``structure`` is either a constant (n, n) array or a callable state ->
    (n, n).  Antisymmetry is verified at the probe states (default: the
    origin plus eight seeded standard-normal states); a violation is a
    construction error.  By antisymmetry the driving quantity is conserved
    along the assembled field.
    """
    if quantity.k != 1:
        raise UsageError("Poisson assembly drives a scalar quantity (k = 1)")
    n = quantity.dim
    if callable(structure):
        pi_fn = structure
    else:
        const = np.asarray(structure, dtype=float)
        pi_fn = lambda x, _c=const: _c

    if probes is None:
        rng = np.random.default_rng(181181)
        probes = [np.zeros(n)] + [rng.standard_normal(n) for _ in range(8)]
    for p in probes:
        pi = np.asarray(pi_fn(np.asarray(p, dtype=float)), dtype=float)
        if pi.shape != (n, n):
            raise UsageError(f"structure matrix has shape {pi.shape}, expected ({n}, {n})")
        asym = float(np.max(np.abs(pi + pi.T)))
        if asym > ANTISYMMETRY_TOL:
            raise UsageError(
                f"structure matrix is not antisymmetric at a probe state: "
                f"max |Pi + Pi^T| = {asym:.3e}"
            )

    def base(x, g, _pi=pi_fn):
        return np.asarray(_pi(x), dtype=float) @ g

    return assemble_system(base, quantity, order=1, label=f"poisson[{quantity.labels[0]}]")


def build_perturbed_pair(
    base_system: SystemDefinition,
    perturbation: Callable[[np.ndarray], np.ndarray],
    quantity: ConservedQuantitySet,
) -> tuple[SystemDefinition, SystemDefinition]:
    """The pair x' = h(x) and x' = h(x) + g(grad G(x)).

    Requires ``g(0) = 0`` so the perturbation vanishes wherever the
    gradient of G does; flows from such points then coincide (checked via
    :func:`perturbed_pair_coincidence`).
    """
    if quantity.k != 1:
        raise UsageError("perturbed pair drives a scalar quantity (k = 1)")
    if quantity.dim != base_system.dim:
        raise UsageError("quantity and base system dimensions differ")
    g0 = np.asarray(perturbation(np.zeros(base_system.dim)), dtype=float)
    if float(np.max(np.abs(g0))) > ANTISYMMETRY_TOL:
        raise UsageError(
            f"perturbation must vanish at zero gradient: |g(0)| = {np.max(np.abs(g0)):.3e}"
        )

    from .differentiate import jacobian

    def pert_field(x, _h=base_system, _g=perturbation, _q=quantity):
        return evaluate_field(_h, x) + np.asarray(_g(jacobian(_q, x)[0]), dtype=float)

    perturbed = SystemDefinition(
        dim=base_system.dim,
        field=pert_field,
        label=f"{base_system.label}+perturbation",
        component_names=base_system.component_names,
    )
    return base_system, perturbed


def perturbed_pair_coincidence(
    base_system: SystemDefinition,
    perturbation: Callable[[np.ndarray], np.ndarray],
    quantity: ConservedQuantitySet,
    x0,
    t_end: float,
    **kwargs,
) -> CoincidenceReport:
    """Coincidence of the unperturbed and perturbed flows from a point
    where grad G vanishes, via the zero quantity as the first driver."""
    build_perturbed_pair(base_system, perturbation, quantity)  # construction-time checks

    def base(x, g):
        return evaluate_field(base_system, x) + np.asarray(perturbation(g), dtype=float)

    return verify_coincidence(
        base, zero_quantity(base_system.dim), quantity, x0, t_end, order=1, **kwargs
    )
