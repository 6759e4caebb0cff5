"""Periodic and non-periodic Toda lattices.

State layouts
-------------
periodic:      (X_1, ..., X_n, u_1, ..., u_n), indices modulo n (X_0 = X_n)
non-periodic:  (X_1, ..., X_{n-1}, u_1, ..., u_n), with X_0 = X_n = 0

Equations of motion in both cases:

    X_i' = X_i (u_i - u_{i+1}),      u_i' = X_{i-1} - X_i

The periodic lattice carries the polynomial first integrals I_m built by
summing products u_{i_1}...u_{i_k} (-X_{j_1})...(-X_{j_l}) over index
families in which i_1..i_k, j_1, j_1+1, ..., j_l, j_l+1 are pairwise
different modulo n and k + 2l = m; closed forms and analytic gradients are
supplied for m <= 3 and a brute-force enumeration covers the rest up to
n = 8.  The non-periodic lattice carries the trace invariants
F_k = tr(L^k)/k of its tridiagonal Lax matrix, with closed forms and
gradients for k <= 3.

On top of the invariants, this module ships the explicit invariant
families (rank-level sets of the invariant stacks): residual functions
measuring distance from each family, exact samplers, the provably empty
descriptors, and the reduced two-particle dynamics on the largest family
with its lift/restrict maps.

Physical note: all X_i are strictly positive for a mechanical lattice;
families with negative X_i are still valid solution sets of the equations
and are supported everywhere (boundedness of their orbits is not
guaranteed).  The mod-n index aliasing is centralized in np.roll calls so
value, gradient, and field code cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Mapping

import numpy as np

from .core import ConservedQuantitySet, SystemDefinition, stack_quantities
from .errors import UsageError

MAX_ENUMERATION_N = 8


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------


def split_periodic(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    return x[:n], x[n:]


def split_nonperiodic(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    return x[: n - 1], x[n - 1 :]


def periodic_field(n: int) -> SystemDefinition:
    """Periodic lattice of n particles; 2n-dimensional state (X, u)."""
    if n < 2:
        raise UsageError(f"periodic lattice needs n >= 2, got {n}")

    def field(z, _n=n):
        X, u = z[:_n], z[_n:]
        return np.concatenate([X * (u - np.roll(u, -1)), np.roll(X, 1) - X])

    names = tuple(f"X{i}" for i in range(1, n + 1)) + tuple(f"u{i}" for i in range(1, n + 1))
    return SystemDefinition(dim=2 * n, field=field, label=f"toda-periodic(n={n})", component_names=names)


def nonperiodic_field(n: int) -> SystemDefinition:
    """Free-end lattice of n particles; (2n-1)-dimensional state (X, u)."""
    if n < 2:
        raise UsageError(f"non-periodic lattice needs n >= 2, got {n}")

    def field(z, _n=n):
        X, u = z[: _n - 1], z[_n - 1 :]
        Xe = np.concatenate([[0.0], X, [0.0]])  # X_0 .. X_n with zero ends
        return np.concatenate([X * (u[:-1] - u[1:]), Xe[:-1] - Xe[1:]])

    names = tuple(f"X{i}" for i in range(1, n)) + tuple(f"u{i}" for i in range(1, n + 1))
    return SystemDefinition(dim=2 * n - 1, field=field, label=f"toda-nonperiodic(n={n})", component_names=names)


# ---------------------------------------------------------------------------
# periodic invariants: enumeration and closed forms
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _index_families(n: int, m: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    """All admissible (velocity-index, spring-index) families for degree m.

    A spring index j occupies both j and j+1 (mod n); families are kept in
    canonical sorted form so each product appears exactly once.
    """
    families = []
    for l in range(0, m // 2 + 1):
        k = m - 2 * l
        for J in combinations(range(n), l):
            clash = False
            for a, b in combinations(J, 2):
                if (a - b) % n in (0, 1, n - 1):
                    clash = True
                    break
            if clash:
                continue
            covered = set()
            for j in J:
                covered.add(j)
                covered.add((j + 1) % n)
            free = [i for i in range(n) if i not in covered]
            if len(free) < k:
                continue
            for I in combinations(free, k):
                families.append((I, J))
    return tuple(families)


def henon_invariant_oracle(n: int, m: int) -> ConservedQuantitySet:
    """Degree-m periodic invariant by direct enumeration (value only).

    Combinatorial guard: n <= 8.  Gradients of the result come from finite
    differences; the closed forms below are the analytic route for m <= 3.
    """
    if n > MAX_ENUMERATION_N:
        raise UsageError(f"enumeration is guarded to n <= {MAX_ENUMERATION_N}, got n={n}")
    if not 1 <= m <= n:
        raise UsageError(f"invariant degree must satisfy 1 <= m <= n, got m={m}")
    families = _index_families(n, m)

    def value(z, _n=n, _fams=families):
        X, u = z[:_n], z[_n:]
        total = 0.0
        for I, J in _fams:
            term = 1.0
            for i in I:
                term *= u[i]
            for j in J:
                term *= -X[j]
            total += term
        return np.array([total])

    return ConservedQuantitySet(
        dim=2 * n, k=1, value=value, labels=(f"I{m}[enum]",), smoothness_order=64
    )


def _i1_value(z, n):
    return np.array([z[n:].sum()])


def _i1_gradient(z, n):
    g = np.zeros((1, 2 * n))
    g[0, n:] = 1.0
    return g


def _i1_partial(z, alpha, n):
    if len(alpha) == 1:
        return np.array([1.0 if alpha[0] >= n else 0.0])
    return np.zeros(1)


def _i2_value(z, n):
    X, u = z[:n], z[n:]
    U = u.sum()
    V = 0.5 * (U * U - (u * u).sum())
    return np.array([V - X.sum()])


def _i2_gradient(z, n):
    X, u = z[:n], z[n:]
    return np.concatenate([-np.ones(n), u.sum() - u]).reshape(1, 2 * n)


def _i2_partial(z, alpha, n):
    if len(alpha) == 1:
        j = alpha[0]
        return np.array([z[n:].sum() - z[j] if j >= n else -1.0])
    if len(alpha) == 2:
        a, b = alpha
        if a >= n and b >= n and a != b:
            return np.array([1.0])
        return np.zeros(1)
    return np.zeros(1)


def _i3_value(z, n):
    X, u = z[:n], z[n:]
    U = u.sum()
    # sum over i1<i2<i3 of u u u via power sums
    p1, p2, p3 = U, (u * u).sum(), (u**3).sum()
    triples = (p1**3 - 3.0 * p1 * p2 + 2.0 * p3) / 6.0
    # mixed terms u_i X_j over j != i, j != i-1 (mod n)
    mixed = U * X.sum() - float(np.dot(u, X)) - float(np.dot(u, np.roll(X, 1)))
    return np.array([triples - mixed])


def _i3_gradient(z, n):
    X, u = z[:n], z[n:]
    U = u.sum()
    V = 0.5 * (U * U - (u * u).sum())
    Y = X.sum()
    gX = -(U - u - np.roll(u, -1))
    gu = V - u * (U - u) - (Y - np.roll(X, 1) - X)
    return np.concatenate([gX, gu]).reshape(1, 2 * n)


def henon_closed_form(n: int, m: int) -> ConservedQuantitySet:
    """Closed-form periodic invariant with analytic gradient, m in {1, 2, 3}."""
    if n < 2:
        raise UsageError(f"periodic lattice needs n >= 2, got {n}")
    if m == 1:
        return ConservedQuantitySet(
            dim=2 * n,
            k=1,
            value=lambda z: _i1_value(z, n),
            labels=("I1",),
            analytic_gradient=lambda z: _i1_gradient(z, n),
            analytic_partial=lambda z, alpha: _i1_partial(z, alpha, n),
            smoothness_order=64,
        )
    if m == 2:
        return ConservedQuantitySet(
            dim=2 * n,
            k=1,
            value=lambda z: _i2_value(z, n),
            labels=("I2",),
            analytic_gradient=lambda z: _i2_gradient(z, n),
            analytic_partial=lambda z, alpha: _i2_partial(z, alpha, n),
            smoothness_order=64,
        )
    if m == 3:
        return ConservedQuantitySet(
            dim=2 * n,
            k=1,
            value=lambda z: _i3_value(z, n),
            labels=("I3",),
            analytic_gradient=lambda z: _i3_gradient(z, n),
            smoothness_order=64,
        )
    raise UsageError(f"closed forms cover m in {{1, 2, 3}}, got m={m}; use the enumeration")


def periodic_invariants(n: int, degrees: tuple[int, ...] = (1, 2, 3)) -> ConservedQuantitySet:
    """Stack of closed-form periodic invariants, e.g. (I1, I2, I3)."""
    return stack_quantities([henon_closed_form(n, m) for m in degrees])


@dataclass(frozen=True)
class TodaAggregates:
    """Velocity sum, pairwise velocity sum, and coupling sum of a periodic state."""

    velocity_sum: float
    velocity_pair_sum: float
    coupling_sum: float


def aggregates(n: int, x) -> TodaAggregates:
    z = np.asarray(x, dtype=float)
    X, u = z[:n], z[n:]
    pair = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            pair += u[i] * u[j]
    return TodaAggregates(
        velocity_sum=float(u.sum()),
        velocity_pair_sum=float(pair),
        coupling_sum=float(X.sum()),
    )


# ---------------------------------------------------------------------------
# non-periodic invariants: Lax matrix traces and closed forms
# ---------------------------------------------------------------------------


def lax_matrices(n: int, x) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal Lax matrix L (diag u, super-diag X, sub-diag 1) and its
    strictly upper companion B (super-diag -X) for a non-periodic state."""
    z = np.asarray(x, dtype=float)
    if z.size != 2 * n - 1:
        raise UsageError(f"non-periodic state for n={n} has dimension {2 * n - 1}")
    X, u = split_nonperiodic(z, n)
    L = np.diag(u) + np.diag(X, 1) + np.diag(np.ones(n - 1), -1)
    B = np.diag(-X, 1)
    return L, B


def trace_invariant_value(n: int, k: int, x) -> float:
    """tr(L^k)/k, the oracle route for the non-periodic invariants."""
    if not 1 <= k <= n:
        raise UsageError(f"trace invariant needs 1 <= k <= n, got k={k}")
    L, _ = lax_matrices(n, x)
    return float(np.trace(np.linalg.matrix_power(L, k)) / k)


def _f1_value(z, n):
    return np.array([z[n - 1 :].sum()])


def _f1_gradient(z, n):
    g = np.zeros((1, 2 * n - 1))
    g[0, n - 1 :] = 1.0
    return g


def _f1_partial(z, alpha, n):
    if len(alpha) == 1:
        return np.array([1.0 if alpha[0] >= n - 1 else 0.0])
    return np.zeros(1)


def _f2_value(z, n):
    X, u = split_nonperiodic(z, n)
    return np.array([X.sum() + 0.5 * (u * u).sum()])


def _f2_gradient(z, n):
    X, u = split_nonperiodic(z, n)
    return np.concatenate([np.ones(n - 1), u]).reshape(1, 2 * n - 1)


def _f2_partial(z, alpha, n):
    if len(alpha) == 1:
        j = alpha[0]
        return np.array([z[j] if j >= n - 1 else 1.0])
    if len(alpha) == 2:
        a, b = alpha
        if a == b and a >= n - 1:
            return np.array([1.0])
        return np.zeros(1)
    return np.zeros(1)


def _f3_value(z, n):
    X, u = split_nonperiodic(z, n)
    return np.array([(X * (u[:-1] + u[1:])).sum() + (u**3).sum() / 3.0])


def _f3_gradient(z, n):
    X, u = split_nonperiodic(z, n)
    Xe = np.concatenate([[0.0], X, [0.0]])
    gX = u[:-1] + u[1:]
    gu = Xe[:-1] + Xe[1:] + u * u
    return np.concatenate([gX, gu]).reshape(1, 2 * n - 1)


def flaschka_invariant(n: int, k: int) -> ConservedQuantitySet:
    """Non-periodic invariant F_k.

    For k <= 3 the value is the closed form and the analytic gradient is
    attached; for larger k the value falls back to tr(L^k)/k with
    finite-difference gradients.
    """
    if n < 2:
        raise UsageError(f"non-periodic lattice needs n >= 2, got {n}")
    if not 1 <= k <= n:
        raise UsageError(f"invariant index must satisfy 1 <= k <= n, got k={k}")
    dim = 2 * n - 1
    if k == 1:
        return ConservedQuantitySet(
            dim=dim,
            k=1,
            value=lambda z: _f1_value(z, n),
            labels=("F1",),
            analytic_gradient=lambda z: _f1_gradient(z, n),
            analytic_partial=lambda z, alpha: _f1_partial(z, alpha, n),
            smoothness_order=64,
        )
    if k == 2:
        return ConservedQuantitySet(
            dim=dim,
            k=1,
            value=lambda z: _f2_value(z, n),
            labels=("F2",),
            analytic_gradient=lambda z: _f2_gradient(z, n),
            analytic_partial=lambda z, alpha: _f2_partial(z, alpha, n),
            smoothness_order=64,
        )
    if k == 3:
        return ConservedQuantitySet(
            dim=dim,
            k=1,
            value=lambda z: _f3_value(z, n),
            labels=("F3",),
            analytic_gradient=lambda z: _f3_gradient(z, n),
            smoothness_order=64,
        )
    return ConservedQuantitySet(
        dim=dim,
        k=1,
        value=lambda z, _k=k: np.array([trace_invariant_value(n, _k, z)]),
        labels=(f"F{k}",),
        smoothness_order=64,
    )


def nonperiodic_invariants(n: int, degrees: tuple[int, ...] = (1, 2, 3)) -> ConservedQuantitySet:
    """Stack of non-periodic invariants, e.g. (F1, F2, F3)."""
    return stack_quantities([flaschka_invariant(n, k) for k in degrees])


def lax_commutator_residual(n: int, x) -> float:
    """max |dL/dt - (BL - LB)| with dL/dt assembled from the vector field.

    Near zero certifies that the free-end lattice has the commutator form.
    """
    z = np.asarray(x, dtype=float)
    zdot = nonperiodic_field(n).field(z)
    Xdot, udot = split_nonperiodic(zdot, n)
    Ldot = np.diag(udot) + np.diag(Xdot, 1)
    L, B = lax_matrices(n, z)
    return float(np.max(np.abs(Ldot - (B @ L - L @ B))))


# ---------------------------------------------------------------------------
# explicit invariant families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExplicitSetDescriptor:
    set_id: str
    lattice: str  # "periodic" | "nonperiodic"
    rank: int
    degrees: tuple[int, ...]  # invariant degrees whose stack the set classifies
    empty: bool = False
    empty_reason: str = ""


_PERIODIC_INDEPENDENCE = (
    "the gradients of I1 and I2 are linearly independent at every state "
    "(the X-block rows are 0 and -1), so the stack has rank >= 2 everywhere"
)
_NONPERIODIC_INDEPENDENCE = (
    "the gradients of F1 and F2 are linearly independent at every state "
    "(the X-block rows are 0 and 1), so the stack has rank >= 2 everywhere"
)

EXPLICIT_SETS: dict[str, ExplicitSetDescriptor] = {
    d.set_id: d
    for d in [
        ExplicitSetDescriptor("M0_I3", "periodic", 0, (3,)),
        ExplicitSetDescriptor("M1_I13", "periodic", 1, (1, 3)),
        ExplicitSetDescriptor("M1_I23", "periodic", 1, (2, 3)),
        ExplicitSetDescriptor("M2_I123", "periodic", 2, (1, 2, 3)),
        ExplicitSetDescriptor("M0_F3", "nonperiodic", 0, (3,)),
        ExplicitSetDescriptor("M1_F13", "nonperiodic", 1, (1, 3)),
        ExplicitSetDescriptor("M1_F23", "nonperiodic", 1, (2, 3)),
        ExplicitSetDescriptor("M2_F123", "nonperiodic", 2, (1, 2, 3)),
        # provably empty rank-level sets
        ExplicitSetDescriptor(
            "M0_I1", "periodic", 0, (1,), True,
            "the gradient of I1 is the constant vector (0,...,0,1,...,1), which never vanishes",
        ),
        ExplicitSetDescriptor(
            "M0_I2", "periodic", 0, (2,), True,
            "the gradient of I2 has X-block identically -1, so it never vanishes",
        ),
        ExplicitSetDescriptor("M0_I12", "periodic", 0, (1, 2), True, _PERIODIC_INDEPENDENCE),
        ExplicitSetDescriptor("M1_I12", "periodic", 1, (1, 2), True, _PERIODIC_INDEPENDENCE),
        ExplicitSetDescriptor(
            "M0_I13", "periodic", 0, (1, 3), True,
            "the gradient of I1 never vanishes, so the stack cannot have rank 0",
        ),
        ExplicitSetDescriptor(
            "M0_I23", "periodic", 0, (2, 3), True,
            "the gradient of I2 never vanishes, so the stack cannot have rank 0",
        ),
        ExplicitSetDescriptor("M0_I123", "periodic", 0, (1, 2, 3), True, _PERIODIC_INDEPENDENCE),
        ExplicitSetDescriptor("M1_I123", "periodic", 1, (1, 2, 3), True, _PERIODIC_INDEPENDENCE),
        ExplicitSetDescriptor(
            "M0_F1", "nonperiodic", 0, (1,), True,
            "the gradient of F1 is the constant vector (0,...,0,1,...,1), which never vanishes",
        ),
        ExplicitSetDescriptor(
            "M0_F2", "nonperiodic", 0, (2,), True,
            "the gradient of F2 has X-block identically 1, so it never vanishes",
        ),
        ExplicitSetDescriptor("M0_F12", "nonperiodic", 0, (1, 2), True, _NONPERIODIC_INDEPENDENCE),
        ExplicitSetDescriptor("M1_F12", "nonperiodic", 1, (1, 2), True, _NONPERIODIC_INDEPENDENCE),
        ExplicitSetDescriptor(
            "M0_F13", "nonperiodic", 0, (1, 3), True,
            "the gradient of F1 never vanishes, so the stack cannot have rank 0",
        ),
        ExplicitSetDescriptor(
            "M0_F23", "nonperiodic", 0, (2, 3), True,
            "the gradient of F2 never vanishes, so the stack cannot have rank 0",
        ),
        ExplicitSetDescriptor("M0_F123", "nonperiodic", 0, (1, 2, 3), True, _NONPERIODIC_INDEPENDENCE),
        ExplicitSetDescriptor("M1_F123", "nonperiodic", 1, (1, 2, 3), True, _NONPERIODIC_INDEPENDENCE),
    ]
}


def explicit_set_ids(lattice: str | None = None, include_empty: bool = False) -> tuple[str, ...]:
    return tuple(
        d.set_id
        for d in EXPLICIT_SETS.values()
        if (lattice is None or d.lattice == lattice) and (include_empty or not d.empty)
    )


def _descriptor(set_id: str) -> ExplicitSetDescriptor:
    try:
        return EXPLICIT_SETS[set_id]
    except KeyError:
        raise UsageError(
            f"unknown explicit set id '{set_id}'; known ids: "
            f"{', '.join(sorted(EXPLICIT_SETS))}"
        ) from None


def _reject_empty(desc: ExplicitSetDescriptor) -> None:
    if desc.empty:
        raise UsageError(f"set {desc.set_id} is provably empty: {desc.empty_reason}")


def explicit_set_quantity(set_id: str, n: int) -> ConservedQuantitySet:
    """The invariant stack whose rank-level set the id describes."""
    desc = _descriptor(set_id)
    if desc.lattice == "periodic":
        return periodic_invariants(n, desc.degrees)
    return nonperiodic_invariants(n, desc.degrees)


def _alternating_deviation(v: np.ndarray) -> float:
    """Deviation from the two-periodic pattern (v1, v2, v1, v2, ...)."""
    if v.size <= 2:
        return 0.0
    return float(max(np.max(np.abs(v[2::2] - v[0])), np.max(np.abs(v[3::2] - v[1])) if v.size > 3 else 0.0))


def _constant_deviation(v: np.ndarray) -> float:
    return float(np.max(np.abs(v - v[0]))) if v.size else 0.0


def _periodic_residual(set_id: str, n: int, X: np.ndarray, u: np.ndarray) -> float:
    even = n % 2 == 0
    if even:
        pattern = max(_alternating_deviation(X), _alternating_deviation(u))
        X1, X2, u1, u2 = X[0], X[1], u[0], u[1]
        if set_id == "M2_I123":
            return pattern
        if set_id == "M1_I13":
            return max(pattern, abs(u1 + u2))
        if set_id == "M1_I23":
            return max(pattern, abs(X1 + X2 + (n / 4.0) * (u1 + u2) ** 2 - u1 * u2))
        if set_id == "M0_I3":
            return max(pattern, abs(u1 + u2), abs(X1 + X2 - u1 * u2))
    else:
        if set_id == "M2_I123":
            return max(_constant_deviation(X), _constant_deviation(u))
        if set_id == "M1_I13":
            return max(_constant_deviation(X), float(np.max(np.abs(u))))
        if set_id == "M1_I23":
            return max(
                _constant_deviation(X),
                _constant_deviation(u),
                abs(X[0] + 0.5 * (n - 1) * u[0] ** 2),
            )
        if set_id == "M0_I3":
            return float(max(np.max(np.abs(X)), np.max(np.abs(u))))
    raise UsageError(f"set {set_id} is not a periodic family")


def _zero_interleaved_deviation(X: np.ndarray) -> float:
    """Deviation from (X, 0, X, 0, ..., X) for the odd-length X block."""
    dev = np.max(np.abs(X[2::2] - X[0])) if X.size > 2 else 0.0
    if X.size > 1:
        dev = max(dev, np.max(np.abs(X[1::2])))
    return float(dev)


def _nonperiodic_residual(set_id: str, n: int, X: np.ndarray, u: np.ndarray) -> float:
    even = n % 2 == 0
    if even:
        pattern = max(_zero_interleaved_deviation(X), _alternating_deviation(u))
        Xv, u1, u2 = X[0], u[0], u[1]
        if set_id == "M2_F123":
            return pattern
        if set_id == "M1_F13":
            return max(pattern, abs(u1 + u2))
        if set_id == "M1_F23":
            return max(pattern, abs(Xv - u1 * u2))
        if set_id == "M0_F3":
            return max(pattern, abs(u1 + u2), abs(Xv - u1 * u2))
    else:
        zero_X = float(np.max(np.abs(X))) if X.size else 0.0
        if set_id == "M2_F123":
            return max(zero_X, _alternating_deviation(u))
        if set_id == "M1_F23":
            branch1 = max(zero_X, float(np.max(np.abs(u[1::2]))), _constant_deviation(u[0::2]))
            branch2 = max(zero_X, float(np.max(np.abs(u[0::2]))), _constant_deviation(u[1::2]))
            return min(branch1, branch2)
        if set_id in ("M1_F13", "M0_F3"):
            return float(max(zero_X, np.max(np.abs(u))))
    raise UsageError(f"set {set_id} is not a non-periodic family")


def explicit_set_residual(set_id: str, n: int, x) -> float:
    """Maximum absolute violation of the family's defining equalities.

    Zero (to round-off) certifies exact membership; the pattern part
    measures deviation from the repeating template and the rest measures
    the algebraic constraints among the template parameters.
    """
    desc = _descriptor(set_id)
    _reject_empty(desc)
    z = np.asarray(x, dtype=float)
    if desc.lattice == "periodic":
        if z.size != 2 * n:
            raise UsageError(f"periodic state for n={n} has dimension {2 * n}")
        X, u = split_periodic(z, n)
        return _periodic_residual(set_id, n, X, u)
    if z.size != 2 * n - 1:
        raise UsageError(f"non-periodic state for n={n} has dimension {2 * n - 1}")
    X, u = split_nonperiodic(z, n)
    return _nonperiodic_residual(set_id, n, X, u)


_SAMPLE_PARAMS: dict[tuple[str, bool], tuple[str, ...]] = {
    # (set_id, n_is_even) -> required parameter names
    ("M0_I3", True): ("X1", "u"),
    ("M1_I13", True): ("X1", "X2", "u"),
    ("M1_I23", True): ("X1", "u1", "u2"),
    ("M2_I123", True): ("X1", "X2", "u1", "u2"),
    ("M0_I3", False): (),
    ("M1_I13", False): ("X",),
    ("M1_I23", False): ("u",),
    ("M2_I123", False): ("X", "u"),
    ("M0_F3", True): ("u",),
    ("M1_F13", True): ("X", "u"),
    ("M1_F23", True): ("u1", "u2"),
    ("M2_F123", True): ("X", "u1", "u2"),
    ("M0_F3", False): (),
    ("M1_F13", False): (),
    ("M2_F123", False): ("u1", "u2"),
}


def explicit_set_sample(set_id: str, n: int, params: Mapping[str, float] | None = None) -> np.ndarray:
    """A state lying exactly (to round-off) on the named family.

    ``params`` supplies the family's free coordinates; constrained
    coordinates are solved.  The odd-n M1_F23 family is a union of two
    branches selected by passing either ``u1`` or ``u2``.
    """
    desc = _descriptor(set_id)
    _reject_empty(desc)
    params = dict(params or {})
    even = n % 2 == 0

    if set_id == "M1_F23" and not even:
        if set(params) == {"u1"}:
            u = np.zeros(n)
            u[0::2] = params["u1"]
        elif set(params) == {"u2"}:
            u = np.zeros(n)
            u[1::2] = params["u2"]
        else:
            raise UsageError("odd-n M1_F23 takes exactly one of the parameters u1 or u2")
        return np.concatenate([np.zeros(n - 1), u])

    try:
        expected = _SAMPLE_PARAMS[(set_id, even)]
    except KeyError:
        raise UsageError(f"set {set_id} has no sampler") from None
    if set(params) != set(expected):
        raise UsageError(
            f"sampler for {set_id} with {'even' if even else 'odd'} n expects "
            f"parameters {expected}, got {tuple(sorted(params))}"
        )

    if desc.lattice == "periodic":
        if set_id == "M0_I3" and even:
            u1 = params["u"]
            X1 = params["X1"]
            X2 = u1 * (-u1) - X1
            X, u = np.array([X1, X2]), np.array([u1, -u1])
        elif set_id == "M1_I13" and even:
            X, u = np.array([params["X1"], params["X2"]]), np.array([params["u"], -params["u"]])
        elif set_id == "M1_I23" and even:
            u1, u2, X1 = params["u1"], params["u2"], params["X1"]
            X2 = -(n / 4.0) * (u1 + u2) ** 2 + u1 * u2 - X1
            X, u = np.array([X1, X2]), np.array([u1, u2])
        elif set_id == "M2_I123" and even:
            X, u = np.array([params["X1"], params["X2"]]), np.array([params["u1"], params["u2"]])
        elif set_id == "M0_I3":
            return np.zeros(2 * n)
        elif set_id == "M1_I13":
            return np.concatenate([np.full(n, params["X"]), np.zeros(n)])
        elif set_id == "M1_I23":
            u1 = params["u"]
            return np.concatenate([np.full(n, -0.5 * (n - 1) * u1 * u1), np.full(n, u1)])
        else:  # M2_I123 odd
            return np.concatenate([np.full(n, params["X"]), np.full(n, params["u"])])
        return np.concatenate([np.tile(X, n // 2), np.tile(u, n // 2)])

    # non-periodic
    if even:
        if set_id == "M0_F3":
            u1 = params["u"]
            Xv, u = u1 * (-u1), np.array([u1, -u1])
        elif set_id == "M1_F13":
            Xv, u = params["X"], np.array([params["u"], -params["u"]])
        elif set_id == "M1_F23":
            u1, u2 = params["u1"], params["u2"]
            Xv, u = u1 * u2, np.array([u1, u2])
        else:  # M2_F123
            Xv, u = params["X"], np.array([params["u1"], params["u2"]])
        X = np.zeros(n - 1)
        X[0::2] = Xv
        return np.concatenate([X, np.tile(u, n // 2)])
    if set_id in ("M0_F3", "M1_F13"):
        return np.zeros(2 * n - 1)
    # M2_F123 odd
    u = np.empty(n)
    u[0::2] = params["u1"]
    u[1::2] = params["u2"]
    return np.concatenate([np.zeros(n - 1), u])


# ---------------------------------------------------------------------------
# reduced dynamics on the largest families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedDynamics:
    """Reduced system on a repeating family, with lift/restrict maps.

    ``lift(z, n)`` replicates reduced coordinates into the full lattice
    pattern; the same map carries reduced tangent vectors to full ones,
    and ``restrict(lift(z, n)) == z`` exactly.
    """

    system: SystemDefinition
    lift: Callable[[np.ndarray, int], np.ndarray]
    restrict: Callable[[np.ndarray], np.ndarray]


def reduced_dynamics(set_id: str) -> ReducedDynamics:
    """Two-particle dynamics on M2_I123 (periodic) or M2_F123 (non-periodic)."""
    if set_id == "M2_I123":

        def red_field(z):
            X1, X2, u1, u2 = z
            return np.array([X1 * (u1 - u2), X2 * (u2 - u1), X2 - X1, X1 - X2])

        def lift(z, n):
            if n % 2 or n < 2:
                raise UsageError(f"periodic pattern lift needs even n >= 2, got {n}")
            z = np.asarray(z, dtype=float)
            return np.concatenate([np.tile(z[:2], n // 2), np.tile(z[2:], n // 2)])

        def restrict(x):
            x = np.asarray(x, dtype=float)
            n = x.size // 2
            return np.array([x[0], x[1], x[n], x[n + 1]])

        return ReducedDynamics(
            system=SystemDefinition(
                dim=4,
                field=red_field,
                label="toda-periodic-reduced",
                component_names=("X1", "X2", "u1", "u2"),
            ),
            lift=lift,
            restrict=restrict,
        )
    if set_id == "M2_F123":

        def red_field(z):
            X, u1, u2 = z
            return np.array([X * (u1 - u2), -X, X])

        def lift(z, n):
            if n % 2 or n < 2:
                raise UsageError(f"non-periodic pattern lift needs even n >= 2, got {n}")
            z = np.asarray(z, dtype=float)
            X = np.zeros(n - 1)
            X[0::2] = z[0]
            return np.concatenate([X, np.tile(z[1:], n // 2)])

        def restrict(x):
            x = np.asarray(x, dtype=float)
            n = (x.size + 1) // 2
            return np.array([x[0], x[n - 1], x[n]])

        return ReducedDynamics(
            system=SystemDefinition(
                dim=3,
                field=red_field,
                label="toda-nonperiodic-reduced",
                component_names=("X", "u1", "u2"),
            ),
            lift=lift,
            restrict=restrict,
        )
    raise UsageError(f"no reduced dynamics for set '{set_id}' (supported: M2_I123, M2_F123)")


# ---------------------------------------------------------------------------
# physical coordinates
# ---------------------------------------------------------------------------


def physical_to_lattice(
    displacements,
    velocities,
    mass: float,
    spacing: float,
    periodic: bool = True,
) -> np.ndarray:
    """Convert displacement/velocity coordinates into lattice variables.

    ``X_i = (exp(-spacing)/mass) * exp(-(y_{i+1} - y_i))`` with the wrap
    ``y_{n+1} = y_1`` for the periodic lattice and free ends otherwise.
    The outputs are strictly positive, i.e. in the physical regime.
    (The equilibrium spacing is nonzero for a genuine mechanical chain;
    the conversion itself is defined for any real value.)
    """
    if mass <= 0:
        raise UsageError(f"mass must be positive, got {mass}")
    y = np.asarray(displacements, dtype=float)
    u = np.asarray(velocities, dtype=float)
    if y.ndim != 1 or y.shape != u.shape or y.size < 2:
        raise UsageError("displacements and velocities must be equal-length vectors, n >= 2")
    front = np.exp(-float(spacing)) / float(mass)
    if periodic:
        X = front * np.exp(-(np.roll(y, -1) - y))
    else:
        X = front * np.exp(-(y[1:] - y[:-1]))
    return np.concatenate([X, u])
