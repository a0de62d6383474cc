"""Parametrizations of the Fermat curves x^2 + y^2 = 1 and x^3 + y^3 = 1."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import DEFAULT_SETTINGS, WpValue, wp_array, wp_eval

SQRT3 = np.sqrt(3.0)
ZERO_GUARD = 1e-6
MAX_CLI_DEGREE = 8


class PoleOfParametrization(ValueError):
    """wp(z) vanishes (to within the zero guard), so f and g have a pole at z."""


class DegenerateParameter(ValueError):
    """The rational parametrization is undefined at this parameter (w = +-i)."""


@dataclass(frozen=True)
class PolynomialH:
    """Polynomial inner function h, coefficients in ascending degree."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("h needs at least one coefficient")
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, z):
        return np.polyval(self.coefficients[::-1], z)

    def derivative(self, z):
        if self.degree == 0:
            return np.zeros_like(np.asarray(z, dtype=complex))
        d = [k * c for k, c in enumerate(self.coefficients)][1:]
        return np.polyval(d[::-1], z)


@dataclass(frozen=True)
class CubeRootOfUnity:
    index: int = 0

    def __post_init__(self):
        if self.index not in (0, 1, 2):
            raise ValueError("index must be 0, 1 or 2")

    @property
    def eta(self):
        if self.index == 0:
            return 1 + 0j
        return complex(np.exp(2j * np.pi * self.index / 3))


def _pair_from_wp(p, dp):
    return (1 + dp / SQRT3) / (2 * p), (1 - dp / SQRT3) / (2 * p)


def gross_pair_n3(z, lattice, settings=DEFAULT_SETTINGS):
    """Elliptic solution (f, g) of f^3 + g^3 = 1 at z.

    f = (1 + wp'/sqrt3) / (2 wp),  g = (1 - wp'/sqrt3) / (2 wp).
    """
    w = wp_eval(z, lattice, settings)
    if abs(w.p) < ZERO_GUARD:
        raise PoleOfParametrization(f"|wp({z!r})| = {abs(w.p):.2e} below zero guard")
    return _pair_from_wp(w.p, w.p_prime)


def gross_pair_n3_array(z, lattice, settings=DEFAULT_SETTINGS):
    """Vectorized gross_pair_n3; points at poles of f, g come back as inf/nan."""
    p, dp = wp_array(z, lattice, settings)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _pair_from_wp(p, dp)


def gross_pair_n2(w):
    """Rational solution of f^2 + g^2 = 1: (2w/(1+w^2), (1-w^2)/(1+w^2))."""
    w = complex(w)
    den = 1 + w * w
    if den == 0:
        raise DegenerateParameter(f"1 + w^2 = 0 at w = {w!r}")
    return 2 * w / den, (1 - w * w) / den


def baker_compose(h, eta, z, lattice, settings=DEFAULT_SETTINGS):
    """F = f(h(z)), G = eta * g(h(z)) for the elliptic pair (f, g)."""
    u = complex(h(z))
    f, g = gross_pair_n3(u, lattice, settings)
    return f, eta.eta * g


def identity_residuals(F, wp_at_h: WpValue):
    """Residuals of the cubic relation between F and wp(h).

    Returns (|wp^3 - (3F^2 wp^2 - 3F wp + 1)|, |wp' - sqrt3 (2F wp - 1)|).
    Both vanish when F was built from the same wp, wp'.
    """
    p, dp = wp_at_h.p, wp_at_h.p_prime
    cubic = abs(p**3 - (3 * F**2 * p**2 - 3 * F * p + 1))
    relation = abs(dp - SQRT3 * (2 * F * p - 1))
    return float(cubic), float(relation)
