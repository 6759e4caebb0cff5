import numpy as np
import pytest

from invarsets import UsageError, conservation_residual, evaluate_field, jacobian, rank_level
from invarsets import toda

from conftest import random_states


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


def test_periodic_field_small_lattice():
    out = evaluate_field(toda.periodic_field(2), [1.0, 0.0, 1.0, -1.0])
    assert np.array_equal(out, [2.0, 0.0, -1.0, 1.0])


def test_periodic_field_rejects_tiny_n():
    with pytest.raises(UsageError):
        toda.periodic_field(1)


def test_nonperiodic_field_small_lattice():
    out = evaluate_field(toda.nonperiodic_field(2), [1.0, 0.0, 0.0])
    assert np.array_equal(out, [0.0, -1.0, 1.0])


def test_nonperiodic_field_pattern_state():
    X, u1, u2 = 0.5, 0.2, -0.1
    out = evaluate_field(toda.nonperiodic_field(4), [X, 0.0, X, u1, u2, u1, u2])
    expected = [X * (u1 - u2), 0.0, X * (u1 - u2), -X, X, -X, X]
    assert np.allclose(out, expected, rtol=0, atol=0)


def test_nonperiodic_zero_couplings_freeze_velocities():
    out = evaluate_field(toda.nonperiodic_field(5), [0, 0, 0, 0, 0.3, -0.2, 0.9, 0.1, -0.5])
    assert np.array_equal(out, np.zeros(9))


# ---------------------------------------------------------------------------
# periodic invariants
# ---------------------------------------------------------------------------


def test_enumeration_matches_stated_values():
    z3 = np.array([1.0, 1.0, 1.0, 1.0, 2.0, 3.0])
    assert toda.henon_invariant_oracle(3, 1).values_at(z3)[0] == pytest.approx(6.0)
    assert toda.henon_invariant_oracle(3, 2).values_at(z3)[0] == pytest.approx(8.0)
    z4 = np.ones(8)
    assert toda.henon_invariant_oracle(4, 3).values_at(z4)[0] == pytest.approx(-4.0)


def test_enumeration_guards():
    with pytest.raises(UsageError):
        toda.henon_invariant_oracle(9, 1)
    with pytest.raises(UsageError):
        toda.henon_invariant_oracle(4, 0)
    with pytest.raises(UsageError):
        toda.henon_invariant_oracle(4, 5)
    with pytest.raises(UsageError):
        toda.henon_closed_form(4, 4)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_closed_forms_equal_enumeration(n, m):
    closed = toda.henon_closed_form(n, m)
    enum = toda.henon_invariant_oracle(n, m)
    for x in random_states(2 * n, 100, 100 * n + m):
        a = closed.values_at(x)[0]
        b = enum.values_at(x)[0]
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_high_degree_enumerated_invariants_are_conserved():
    # degrees beyond the closed forms still conserve (finite-difference gradients)
    for n, m in ((4, 4), (5, 4), (5, 5)):
        sys_n = toda.periodic_field(n)
        q = toda.henon_invariant_oracle(n, m)
        for x in random_states(2 * n, 5, 7 * n + m):
            res = conservation_residual(q, sys_n, x)[0]
            assert abs(res) < 1e-7 * max(1.0, np.linalg.norm(x))


def test_i2_closed_form_value():
    z = np.array([1.0, 1.0, 1.0, 1.0, 2.0, 3.0])
    assert toda.henon_closed_form(3, 2).values_at(z)[0] == pytest.approx(8.0)


def test_gradient_i2_at_uniform_state():
    g = jacobian(toda.henon_closed_form(3, 2), np.ones(6))
    assert np.array_equal(g, [[-1, -1, -1, 2, 2, 2]])


def test_aggregates_identity():
    for n in (3, 4, 5):
        for x in random_states(2 * n, 20, 51 + n):
            agg = toda.aggregates(n, x)
            u = x[n:]
            direct = 0.5 * (agg.velocity_sum**2 - float(np.dot(u, u)))
            assert abs(2 * agg.velocity_pair_sum - 2 * direct) <= 1e-12 * max(
                1.0, abs(agg.velocity_pair_sum)
            )


# ---------------------------------------------------------------------------
# non-periodic invariants and the commutator form
# ---------------------------------------------------------------------------


def test_flaschka_closed_form_equals_trace():
    z = np.array([1.0, 2.0, 1.0, 2.0, 3.0])
    q2 = toda.flaschka_invariant(3, 2)
    assert q2.values_at(z)[0] == pytest.approx(10.0)
    assert toda.trace_invariant_value(3, 2, z) == pytest.approx(10.0)


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_trace_equality_at_random_states(n, k):
    q = toda.flaschka_invariant(n, k)
    for x in random_states(2 * n - 1, 100, 200 * n + k):
        a = q.values_at(x)[0]
        b = toda.trace_invariant_value(n, k, x)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_flaschka_above_closed_forms_uses_trace():
    q4 = toda.flaschka_invariant(4, 4)
    z = random_states(7, 1, 61)[0]
    assert q4.values_at(z)[0] == pytest.approx(toda.trace_invariant_value(4, 4, z))
    sys4 = toda.nonperiodic_field(4)
    assert abs(conservation_residual(q4, sys4, z)[0]) < 1e-7 * max(1.0, np.linalg.norm(z))


def test_flaschka_guards():
    with pytest.raises(UsageError):
        toda.flaschka_invariant(4, 0)
    with pytest.raises(UsageError):
        toda.flaschka_invariant(4, 5)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_lax_commutator_residual_vanishes(n):
    for x in random_states(2 * n - 1, 20, 71 + n):
        assert toda.lax_commutator_residual(n, x) < 1e-12
    # zero couplings: both sides vanish identically
    x = np.concatenate([np.zeros(n - 1), random_states(n, 1, 73)[0]])
    assert toda.lax_commutator_residual(n, x) == 0.0


def test_lax_matrix_shapes():
    L, B = toda.lax_matrices(4, random_states(7, 1, 79)[0])
    assert L.shape == (4, 4) and B.shape == (4, 4)
    assert np.array_equal(np.tril(B), np.zeros((4, 4)))


# ---------------------------------------------------------------------------
# explicit families: residuals, samplers, classification
# ---------------------------------------------------------------------------

EVEN_SAMPLE_PARAMS = {
    "M0_I3": {"X1": 0.0, "u": 0.8},
    "M1_I13": {"X1": 0.4, "X2": 0.9, "u": 0.6},
    "M1_I23": {"X1": -0.16, "u1": -0.4, "u2": 0.4},
    "M2_I123": {"X1": 0.3, "X2": 0.7, "u1": 0.5, "u2": -0.2},
    "M0_F3": {"u": -0.6},
    "M1_F13": {"X": 0.5, "u": 0.6},
    "M1_F23": {"u1": 0.3, "u2": 0.2},
    "M2_F123": {"X": 0.5, "u1": 0.2, "u2": -0.1},
}

ODD_SAMPLE_PARAMS = {
    "M0_I3": {},
    "M1_I13": {"X": 0.7},
    "M1_I23": {"u": 0.4},
    "M2_I123": {"X": 0.6, "u": 0.3},
    "M0_F3": {},
    "M1_F13": {},
    "M1_F23": {"u1": 0.7},
    "M2_F123": {"u1": 0.5, "u2": -0.3},
}


def _n_for(set_id, even):
    return (4 if even else 5)


@pytest.mark.parametrize("set_id", sorted(EVEN_SAMPLE_PARAMS))
@pytest.mark.parametrize("even", [True, False])
def test_samples_lie_on_their_family(set_id, even):
    n = _n_for(set_id, even)
    params = (EVEN_SAMPLE_PARAMS if even else ODD_SAMPLE_PARAMS)[set_id]
    x = toda.explicit_set_sample(set_id, n, params)
    assert toda.explicit_set_residual(set_id, n, x) < 1e-15


def test_sample_examples_match_stated_states():
    x = toda.explicit_set_sample("M1_I23", 5, {"u": 0.4})
    assert np.allclose(x, [-0.32] * 5 + [0.4] * 5)
    x = toda.explicit_set_sample("M2_F123", 4, {"X": 0.5, "u1": 0.2, "u2": -0.1})
    assert np.array_equal(x, [0.5, 0.0, 0.5, 0.2, -0.1, 0.2, -0.1])
    x = toda.explicit_set_sample("M1_I13", 4, {"X1": 0.4, "X2": 0.9, "u": 0.6})
    assert np.array_equal(x, [0.4, 0.9, 0.4, 0.9, 0.6, -0.6, 0.6, -0.6])
    x = toda.explicit_set_sample("M1_F23", 5, {"u1": 0.7})
    assert np.array_equal(x, [0, 0, 0, 0, 0.7, 0, 0.7, 0, 0.7])


def test_membership_example_even_rank0_family():
    x = np.array([0.1, -0.74, 0.1, -0.74, 0.8, -0.8, 0.8, -0.8])
    assert toda.explicit_set_residual("M0_I3", 4, x) < 1e-15


def test_residual_positive_off_family():
    x = random_states(8, 1, 83)[0]
    assert toda.explicit_set_residual("M2_I123", 4, x) > 1e-3


def test_union_family_takes_nearest_branch():
    b2 = toda.explicit_set_sample("M1_F23", 5, {"u2": -0.9})
    assert np.array_equal(b2, [0, 0, 0, 0, 0, -0.9, 0, -0.9, 0])
    assert toda.explicit_set_residual("M1_F23", 5, b2) == 0.0
    with pytest.raises(UsageError):
        toda.explicit_set_sample("M1_F23", 5, {"u1": 0.1, "u2": 0.2})


def test_empty_families_are_rejected_with_reason():
    with pytest.raises(UsageError, match="provably empty"):
        toda.explicit_set_sample("M0_I1", 4, {})
    with pytest.raises(UsageError, match="never vanishes"):
        toda.explicit_set_residual("M0_I1", 4, np.zeros(8))
    with pytest.raises(UsageError, match="rank >= 2"):
        toda.explicit_set_sample("M1_I123", 4, {})
    with pytest.raises(UsageError, match="unknown explicit set id"):
        toda.explicit_set_residual("M9_I9", 4, np.zeros(8))


def test_sampler_rejects_malformed_params():
    with pytest.raises(UsageError, match="expects parameters"):
        toda.explicit_set_sample("M2_I123", 4, {"X1": 0.1})
    with pytest.raises(UsageError, match="expects parameters"):
        toda.explicit_set_sample("M0_I3", 5, {"u": 0.4})


@pytest.mark.parametrize("set_id", sorted(EVEN_SAMPLE_PARAMS))
@pytest.mark.parametrize("even", [True, False])
def test_samples_classify_to_their_nominal_rank(set_id, even):
    n = _n_for(set_id, even)
    params = (EVEN_SAMPLE_PARAMS if even else ODD_SAMPLE_PARAMS)[set_id]
    x = toda.explicit_set_sample(set_id, n, params)
    quantity = toda.explicit_set_quantity(set_id, n)
    decision = rank_level(quantity, x, 1e-8)
    desc = toda.EXPLICIT_SETS[set_id]
    assert decision.rank == desc.rank
    assert decision.margin >= 10


@pytest.mark.parametrize("n", [4, 5])
@pytest.mark.parametrize("lattice", ["periodic", "nonperiodic"])
def test_emptiness_probes_never_hit_forbidden_rank(n, lattice):
    dim = 2 * n if lattice == "periodic" else 2 * n - 1
    probes = list(random_states(dim, 300, 1000 + n))
    sample_params = EVEN_SAMPLE_PARAMS if n % 2 == 0 else ODD_SAMPLE_PARAMS
    for set_id, params in sample_params.items():
        if toda.EXPLICIT_SETS[set_id].lattice == lattice:
            probes.append(toda.explicit_set_sample(set_id, n, params))
    for desc in toda.EXPLICIT_SETS.values():
        if not desc.empty or desc.lattice != lattice:
            continue
        quantity = toda.explicit_set_quantity(desc.set_id, n)
        for x in probes:
            assert rank_level(quantity, x, 1e-8).rank != desc.rank, desc.set_id


# ---------------------------------------------------------------------------
# reduced dynamics
# ---------------------------------------------------------------------------


def test_periodic_reduced_field_value():
    red = toda.reduced_dynamics("M2_I123")
    out = evaluate_field(red.system, [0.3, 0.7, 0.5, -0.2])
    assert np.allclose(out, [0.21, -0.49, 0.4, -0.4])


def test_nonperiodic_reduced_field_value():
    red = toda.reduced_dynamics("M2_F123")
    out = evaluate_field(red.system, [1.0, 0.0, 0.0])
    assert np.array_equal(out, [0.0, -1.0, 1.0])


def test_lift_restrict_roundtrip_and_pattern():
    red = toda.reduced_dynamics("M2_I123")
    z = np.array([0.3, 0.7, 0.5, -0.2])
    lifted = red.lift(z, 4)
    assert np.array_equal(lifted, [0.3, 0.7, 0.3, 0.7, 0.5, -0.2, 0.5, -0.2])
    assert np.array_equal(red.restrict(lifted), z)
    with pytest.raises(UsageError):
        red.lift(z, 5)


def test_reduced_field_commutes_with_lift_exactly():
    for set_id, dim, n in (("M2_I123", 4, 6), ("M2_F123", 3, 6)):
        red = toda.reduced_dynamics(set_id)
        full = toda.periodic_field(n) if set_id == "M2_I123" else toda.nonperiodic_field(n)
        for z in random_states(dim, 10, 91):
            lifted_tangent = red.lift(evaluate_field(red.system, z), n)
            full_tangent = evaluate_field(full, red.lift(z, n))
            assert np.array_equal(lifted_tangent, full_tangent)


def test_reduced_dynamics_unknown_family():
    with pytest.raises(UsageError):
        toda.reduced_dynamics("M1_I13")


# ---------------------------------------------------------------------------
# physical coordinates
# ---------------------------------------------------------------------------


def test_physical_to_lattice_identity_case():
    state = toda.physical_to_lattice(np.zeros(3), np.zeros(3), mass=1.0, spacing=0.0)
    assert np.array_equal(state[:3], np.ones(3))


def test_physical_to_lattice_spacing_scaling():
    state = toda.physical_to_lattice(np.zeros(3), np.zeros(3), mass=1.0, spacing=np.log(2.0))
    assert np.allclose(state[:3], 0.5)


def test_physical_to_lattice_displacement():
    state = toda.physical_to_lattice(
        np.array([0.0, np.log(2.0)]), np.zeros(2), mass=2.0, spacing=0.0, periodic=False
    )
    assert state[0] == pytest.approx(0.25)
    assert state.shape == (3,)


def test_physical_to_lattice_positive_and_guarded():
    rng = np.random.default_rng(97)
    y, v = rng.standard_normal(5), rng.standard_normal(5)
    state = toda.physical_to_lattice(y, v, mass=1.3, spacing=0.4)
    assert np.all(state[:5] > 0)
    with pytest.raises(UsageError):
        toda.physical_to_lattice(y, v, mass=0.0, spacing=0.4)
