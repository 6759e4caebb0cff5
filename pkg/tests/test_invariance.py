import numpy as np

from invarsets import (
    ConservedQuantitySet,
    verify_critical_invariance,
    verify_rank_invariance,
    verify_set_persistence,
    verify_vanishing_invariance,
)
from invarsets import kepler, oscillator, toda

from conftest import random_toda_physical

PATTERN_START = np.array([0.3, 0.7, 0.3, 0.7, 0.5, -0.2, 0.5, -0.2])


def test_rank_invariance_on_pattern_family():
    report = verify_rank_invariance(
        toda.periodic_field(4), toda.periodic_invariants(4), PATTERN_START, 10.0,
        sample_count=101,
    )
    assert report.verdict == "pass"
    assert report.initial_rank == 2
    assert np.all(report.sample_values == 2)
    assert report.min_margin >= 10
    assert report.drift.worst < 1e-8


def test_rank_invariance_generic_start():
    x0 = random_toda_physical(4, 1, 3)[0]
    report = verify_rank_invariance(
        toda.periodic_field(4), toda.periodic_invariants(4), x0, 10.0, sample_count=101
    )
    assert report.verdict == "pass"
    assert report.initial_rank == 3
    assert np.all(report.sample_values == 3)


def test_rank_invariance_kepler_circular_rank_zero():
    report = verify_rank_invariance(
        kepler.kepler_field(),
        kepler.combined_invariant(1.0),
        kepler.circular_sample(1.0, 0.0),
        2 * np.pi,
        abs_tol=1e-12,
        rel_tol=1e-12,
        sample_count=101,
    )
    assert report.verdict == "pass"
    assert report.initial_rank == 0
    assert np.all(report.sample_values == 0)
    assert report.min_margin >= 10


def test_rank_invariance_nonconserved_probe_is_hypothesis_error():
    probe = ConservedQuantitySet.scalar(
        8, lambda z: z[0], "x1", gradient=lambda z: np.eye(8)[0]
    )
    report = verify_rank_invariance(toda.periodic_field(4), probe, PATTERN_START, 10.0)
    assert report.verdict == "hypothesis-error"
    assert "not conserved" in report.message
    assert report.trajectory is None


def test_vanishing_invariance_circle_order_two():
    report = verify_vanishing_invariance(
        oscillator.harmonic_oscillator(),
        oscillator.unit_circle_power(3),
        [1.0, 0.0],
        order=2,
        t_end=2 * np.pi,
        abs_tol=1e-4,
        sample_count=101,
    )
    assert report.verdict == "pass"
    assert report.worst_value <= 0.0  # residuals stay below threshold


def test_vanishing_invariance_order_three_hypothesis_error():
    report = verify_vanishing_invariance(
        oscillator.harmonic_oscillator(),
        oscillator.unit_circle_power(3),
        [1.0, 0.0],
        order=3,
        t_end=2 * np.pi,
        abs_tol=1e-4,
    )
    assert report.verdict == "hypothesis-error"
    assert "not in the order-3" in report.message


def test_vanishing_invariance_constant_quantity_trivially_passes():
    const = ConservedQuantitySet(
        dim=2,
        k=1,
        value=lambda z: np.array([2.5]),
        labels=("c",),
        analytic_gradient=lambda z: np.zeros((1, 2)),
        analytic_partial=lambda z, alpha: np.zeros(1),
    )
    report = verify_vanishing_invariance(
        oscillator.harmonic_oscillator(), const, [0.4, -0.2], order=4, t_end=3.0,
        sample_count=51,
    )
    assert report.verdict == "pass"


def test_set_persistence_even_pattern_families():
    report = verify_set_persistence(
        toda.periodic_field(4),
        lambda s: toda.explicit_set_residual("M1_I13", 4, s),
        toda.explicit_set_sample("M1_I13", 4, {"X1": 0.4, "X2": 0.9, "u": 0.6}),
        10.0,
        tol=1e-7,
        quantity=toda.periodic_invariants(4, (1, 3)),
    )
    assert report.verdict == "pass"
    assert report.worst_value < 1e-7
    assert report.drift.worst < 1e-8


def test_set_persistence_nonperiodic_pattern():
    report = verify_set_persistence(
        toda.nonperiodic_field(4),
        lambda s: toda.explicit_set_residual("M2_F123", 4, s),
        np.array([0.5, 0.0, 0.5, 0.2, -0.1, 0.2, -0.1]),
        10.0,
        tol=1e-7,
    )
    assert report.verdict == "pass"


def test_set_persistence_trivial_residual():
    report = verify_set_persistence(
        oscillator.harmonic_oscillator(), lambda s: 0.0, [1.0, 0.0], 5.0, tol=1e-9
    )
    assert report.verdict == "pass"
    assert report.min_margin == np.inf


def test_set_persistence_off_family_start_is_hypothesis_error():
    report = verify_set_persistence(
        toda.periodic_field(4),
        lambda s: toda.explicit_set_residual("M2_I123", 4, s),
        random_toda_physical(4, 1, 11)[0],
        5.0,
        tol=1e-7,
    )
    assert report.verdict == "hypothesis-error"


def test_set_persistence_residual_shrinks_with_tolerance():
    x0 = toda.explicit_set_sample("M0_I3", 4, {"X1": 0.0, "u": 0.8})
    resid = lambda s: toda.explicit_set_residual("M0_I3", 4, s)
    loose = verify_set_persistence(
        toda.periodic_field(4), resid, x0, 10.0, tol=1e-4, abs_tol=1e-6, rel_tol=1e-6
    )
    tight = verify_set_persistence(
        toda.periodic_field(4), resid, x0, 10.0, tol=1e-4, abs_tol=1e-8, rel_tol=1e-8
    )
    assert loose.verdict == "pass" and tight.verdict == "pass"
    assert tight.worst_value <= loose.worst_value / 10.0


def test_critical_invariance_pattern_family():
    report = verify_critical_invariance(
        toda.periodic_field(4), toda.periodic_invariants(4), PATTERN_START, 10.0,
        sample_count=101,
    )
    assert report.verdict == "pass"
    assert report.initial_rank == 2


def test_critical_invariance_generic_start_is_hypothesis_error():
    report = verify_critical_invariance(
        toda.periodic_field(4),
        toda.periodic_invariants(4),
        random_toda_physical(4, 1, 13)[0],
        5.0,
    )
    assert report.verdict == "hypothesis-error"
    assert "not a critical point" in report.message


def test_critical_invariance_kepler_energy_momentum_pair():
    from invarsets import stack_quantities

    pair = stack_quantities([kepler.hamiltonian(), kepler.angular_momentum()])
    report = verify_critical_invariance(
        kepler.kepler_field(),
        pair,
        kepler.circular_sample(1.0, 0.0),
        2 * np.pi,
        abs_tol=1e-12,
        rel_tol=1e-12,
        sample_count=101,
    )
    assert report.verdict == "pass"
    assert report.initial_rank == 1  # gradients are parallel on the circle
    assert np.all(report.sample_values == 1)


def _half_square_probe():
    # residual x1*x2 vanishes at (1, 0), so this non-conserved quantity
    # slips past the pointwise hypothesis gate
    return ConservedQuantitySet.scalar(
        2, lambda z: 0.5 * z[0] ** 2, "x1^2/2", gradient=lambda z: np.array([z[0], 0.0])
    )


def test_rank_change_along_flow_is_reported_as_fail():
    # the gradient (x1, 0) has rank 1 at the start but rank 0 exactly at
    # the quarter turn; with a sample landing there the verifier must fail
    report = verify_rank_invariance(
        oscillator.harmonic_oscillator(), _half_square_probe(), [1.0, 0.0], np.pi,
        sample_count=3,
    )
    assert report.verdict == "fail"
    assert list(report.sample_values) == [1, 0, 1]
    assert report.min_margin >= 10  # the drop is decisive, not a tolerance artifact


def test_near_threshold_rank_is_reported_borderline():
    # stop just short of the quarter turn: the surviving singular value
    # sits within a factor 10 of the rank threshold
    report = verify_rank_invariance(
        oscillator.harmonic_oscillator(),
        _half_square_probe(),
        [1.0, 0.0],
        np.pi / 2 - 5e-8,
        sample_count=2,
    )
    assert report.verdict == "borderline"
    assert report.min_margin < 10


def test_nonconserved_probe_never_silently_passes():
    # every verifier must refuse a verdict when the "conserved" quantity is not
    probe = ConservedQuantitySet.scalar(
        8, lambda z: z[0], "x1", gradient=lambda z: np.eye(8)[0]
    )
    sys4 = toda.periodic_field(4)
    reports = [
        verify_rank_invariance(sys4, probe, PATTERN_START, 5.0),
        verify_vanishing_invariance(sys4, probe, PATTERN_START, 1, 5.0),
        verify_critical_invariance(sys4, probe, PATTERN_START, 5.0),
    ]
    for report in reports:
        assert report.verdict == "hypothesis-error"


def test_equilibrium_is_flagged_and_trivially_invariant():
    x0 = toda.explicit_set_sample("M2_I123", 5, {"X": 0.6, "u": 0.3})
    report = verify_rank_invariance(
        toda.periodic_field(5), toda.periodic_invariants(5), x0, 5.0, sample_count=51
    )
    assert report.verdict == "pass"
    assert report.equilibrium is True
