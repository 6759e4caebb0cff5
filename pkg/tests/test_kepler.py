import numpy as np
import pytest

from invarsets import (
    NumericError,
    UsageError,
    agreement_residual,
    evaluate_field,
    flow_adaptive,
    rank_level,
)
from invarsets import kepler

from conftest import random_kepler_states


def test_field_values():
    sysk = kepler.kepler_field()
    assert np.allclose(evaluate_field(sysk, [0, 1, 1, 0]), [1, 0, 0, -1], atol=0)
    assert np.allclose(evaluate_field(sysk, [1, 0, 0, 1]), [0, 1, -1, 0], atol=0)
    assert np.allclose(evaluate_field(sysk, [2, 0, 0, 0]), [0, 0, -0.25, 0], atol=0)


def test_field_singular_at_origin():
    with pytest.raises(NumericError):
        evaluate_field(kepler.kepler_field(), [0.0, 0.0, 1.0, 0.0])


def test_invariant_values_at_reference_state():
    x = np.array([0.0, 1.0, 1.0, 0.0])
    assert kepler.hamiltonian().values_at(x)[0] == pytest.approx(-0.5)
    assert kepler.angular_momentum().values_at(x)[0] == pytest.approx(-1.0)
    assert kepler.combined_invariant(1.0).values_at(x)[0] == pytest.approx(-1.5)
    assert kepler.angular_momentum().values_at([1.0, 0.0, 0.0, 1.0])[0] == pytest.approx(1.0)


def test_combined_invariant_gradient_vanishes_on_circle():
    q = kepler.combined_invariant(1.0)
    g = q.analytic_gradient(np.array([0.0, 1.0, 1.0, 0.0]))
    assert np.max(np.abs(g)) < 1e-15


def test_circular_samples_and_rank():
    for a in (0.5, 1.0, 2.0):
        q = kepler.combined_invariant(a)
        H = kepler.hamiltonian()
        G = kepler.linear_pair_hamiltonian(a)
        for theta in np.linspace(0.0, 2 * np.pi, 16, endpoint=False):
            x = kepler.circular_sample(a, theta)
            assert np.hypot(x[0], x[1]) == pytest.approx(a * a, rel=1e-14)
            assert np.hypot(x[2], x[3]) == pytest.approx(1.0 / a, rel=1e-14)
            assert abs(x[0] * x[2] + x[1] * x[3]) < 1e-14 * max(1.0, a * a / a)
            assert agreement_residual(H, G, x, 1) < 1e-9
            assert rank_level(q, x).rank == 0


def test_circular_sample_examples():
    assert np.allclose(kepler.circular_sample(1.0, 0.0), [0, 1, 1, 0], atol=0)
    assert np.allclose(kepler.circular_sample(2.0, 0.0), [0, 4, 0.5, 0], atol=0)
    assert np.allclose(kepler.circular_sample(1.0, np.pi / 2), [1, 0, 0, -1], atol=1e-16)


def test_orbits_close_with_cubed_period():
    sysk = kepler.kepler_field()
    for a in (0.5, 1.0, 2.0):
        x0 = kepler.circular_sample(a, 0.3)
        traj = flow_adaptive(sysk, x0, 2 * np.pi * a**3, 1e-10, 1e-10, sample_count=2)
        assert np.linalg.norm(traj.final_state - x0) < 1e-6


def test_linear_pair_field_matches_kepler_on_circle_only():
    lin = kepler.linear_pair_field(1.0)
    sysk = kepler.kepler_field()
    on = np.array([0.0, 1.0, 1.0, 0.0])
    assert np.allclose(evaluate_field(lin, on), evaluate_field(sysk, on), atol=0)
    off = np.array([0.0, 2.0, 1.0, 0.0])
    assert np.allclose(evaluate_field(lin, off), [2, 0, 0, -1], atol=0)
    assert np.allclose(evaluate_field(sysk, off), [1, 0, 0, -0.25], atol=0)


def test_linear_pair_field_is_linear():
    lin = kepler.linear_pair_field(1.3)
    z = random_kepler_states(1, 3)[0]
    w = random_kepler_states(1, 5)[0]
    f = lambda s: evaluate_field(lin, s)
    assert np.allclose(f(3.0 * z), 3.0 * f(z), rtol=1e-14)
    assert np.allclose(f(z + w), f(z) + f(w), rtol=1e-13, atol=1e-15)


def test_parameter_guards():
    with pytest.raises(UsageError):
        kepler.combined_invariant(0.0)
    with pytest.raises(UsageError):
        kepler.circular_sample(-1.0, 0.0)
    with pytest.raises(UsageError):
        kepler.linear_pair_field(0.0)
