"""Planar harmonic oscillator and companion quantities used in examples
and tests of the vanishing-set machinery."""

from __future__ import annotations

import numpy as np

from .core import ConservedQuantitySet, SystemDefinition
from .errors import UsageError


def harmonic_oscillator() -> SystemDefinition:
    """(x1', x2') = (x2, -x1): uniform rotation of the plane."""
    return SystemDefinition(
        dim=2,
        field=lambda z: np.array([z[1], -z[0]]),
        label="harmonic-oscillator",
        component_names=("x1", "x2"),
    )


def squared_radius() -> ConservedQuantitySet:
    """F = x1^2 + x2^2, conserved by the rotation."""

    def partial(z, alpha):
        if len(alpha) == 1:
            return np.array([2.0 * z[alpha[0]]])
        if len(alpha) == 2:
            return np.array([2.0 if alpha[0] == alpha[1] else 0.0])
        return np.zeros(1)

    return ConservedQuantitySet.scalar(
        2,
        lambda z: z[0] * z[0] + z[1] * z[1],
        "r^2",
        gradient=lambda z: 2.0 * z,
        partial=partial,
        smoothness_order=64,
    )


def unit_circle_power(power: int = 3) -> ConservedQuantitySet:
    """F = (x1^2 + x2^2 - 1)^power, conserved by the rotation.

    All partial derivatives up to order power - 1 vanish on the unit
    circle, while some order-power partials do not, which makes this the
    canonical probe for derivative-vanishing sets.
    """
    if power < 1:
        raise UsageError(f"power must be >= 1, got {power}")

    def value(z, _p=power):
        g = z[0] * z[0] + z[1] * z[1] - 1.0
        return g**_p

    def grad(z, _p=power):
        g = z[0] * z[0] + z[1] * z[1] - 1.0
        return 2.0 * _p * g ** (_p - 1) * z

    return ConservedQuantitySet.scalar(
        2, value, f"(r^2-1)^{power}", gradient=grad, smoothness_order=64
    )
