import numpy as np
import pytest

from invarsets import kepler, oscillator, toda


def random_states(dim, count, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return scale * rng.standard_normal((count, dim))


def random_toda_physical(n, count, seed, periodic=True):
    """Seeded lattice states in the physical regime (all X_i > 0).

    Orbits from such states stay bounded, which matters for integration
    runs; rank/derivative probes are free to use sign-unrestricted states.
    """
    rng = np.random.default_rng(seed)
    n_x = n if periodic else n - 1
    X = rng.uniform(0.2, 1.2, size=(count, n_x))
    u = 0.6 * rng.standard_normal((count, n))
    return np.concatenate([X, u], axis=1)


def random_kepler_states(count, seed, min_radius=0.4):
    """Seeded Kepler states with positions bounded away from the origin."""
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < count:
        z = rng.standard_normal(4)
        if np.hypot(z[0], z[1]) >= min_radius:
            states.append(z)
    return np.array(states)


def builtin_gradient_cases():
    """(label, quantity, state sampler) for every built-in analytic gradient."""
    cases = []
    for n in (3, 4, 5):
        for m in (1, 2, 3):
            cases.append(
                (
                    f"periodic-I{m}-n{n}",
                    toda.henon_closed_form(n, m),
                    lambda count, seed, _n=n: random_states(2 * _n, count, seed),
                )
            )
            cases.append(
                (
                    f"nonperiodic-F{m}-n{n}",
                    toda.flaschka_invariant(n, m),
                    lambda count, seed, _n=n: random_states(2 * _n - 1, count, seed),
                )
            )
    cases.append(("kepler-H", kepler.hamiltonian(), lambda c, s: random_kepler_states(c, s)))
    cases.append(("kepler-A", kepler.angular_momentum(), lambda c, s: random_kepler_states(c, s)))
    cases.append(
        ("kepler-K", kepler.combined_invariant(1.0), lambda c, s: random_kepler_states(c, s))
    )
    cases.append(
        ("oscillator-r2", oscillator.squared_radius(), lambda c, s: random_states(2, c, s))
    )
    cases.append(
        (
            "oscillator-circle3",
            oscillator.unit_circle_power(3),
            lambda c, s: random_states(2, c, s),
        )
    )
    return cases


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
