"""Equianharmonic Weierstrass function with (wp')**2 = 4*wp**3 - 1.

The lattice is built from the real period of the defining elliptic
integral, evaluation reduces the argument into the fundamental cell and
sums the Laurent series about the origin.  Far corners of the cell are
handled with one duplication step so the series stays short.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

G2 = 0.0
G3 = 1.0
E1 = 4.0 ** (-1.0 / 3.0)  # real root of 4t^3 - 1
N_LAURENT = 40
DUPLICATION_RADIUS = 0.45  # in units of |omega1|


class PoleProximity(ValueError):
    """Raised when an argument is closer to a lattice point than the guard."""

    def __init__(self, z, lattice_point, distance):
        self.z = z
        self.lattice_point = lattice_point
        self.distance = distance
        super().__init__(
            f"z={z!r} is {distance:.3e} from lattice point {lattice_point!r}"
        )


class EllipticError(RuntimeError):
    """Internal numerical failure (quadrature, series, root search)."""


@dataclass(frozen=True)
class Lattice:
    omega1: complex
    omega2: complex
    area: float = field(init=False)

    def __post_init__(self):
        if (self.omega2 / self.omega1).imag <= 0:
            raise ValueError("basis must satisfy Im(omega2/omega1) > 0")
        area = abs((np.conj(self.omega1) * self.omega2).imag)
        if not area > 0:
            raise ValueError("degenerate lattice")
        object.__setattr__(self, "area", float(area))

    @property
    def half_periods(self):
        return (self.omega1 / 2, self.omega2 / 2, (self.omega1 + self.omega2) / 2)

    @property
    def scale(self):
        return abs(self.omega1)

    def coordinates(self, z):
        """Real lattice coordinates (x, y) with z = x*omega1 + y*omega2."""
        z = np.asarray(z, dtype=complex)
        w1, w2 = self.omega1, self.omega2
        det = (np.conj(w1) * w2).imag
        x = (np.conj(w2) * z).imag / -det
        y = (np.conj(w1) * z).imag / det
        return x, y


@dataclass(frozen=True)
class EvaluationSettings:
    series_tolerance: float = 1e-17
    max_terms: int = N_LAURENT
    pole_guard: float | None = None  # defaults to 1e-3*|omega1|

    def __post_init__(self):
        if self.series_tolerance < np.finfo(float).eps ** 2:
            # term-size cutoff relative to the leading term; below eps^2 is meaningless
            raise ValueError("series_tolerance too small")
        if self.max_terms < 4:
            raise ValueError("max_terms must be at least 4")
        if self.pole_guard is not None and not self.pole_guard > 0:
            raise ValueError("pole_guard must be positive")

    def guard_for(self, lattice):
        if self.pole_guard is None:
            return 1e-3 * lattice.scale
        return self.pole_guard


DEFAULT_SETTINGS = EvaluationSettings()


@dataclass(frozen=True)
class WpValue:
    p: complex
    p_prime: complex

    @property
    def ode_residual(self):
        return abs(self.p_prime**2 - (4 * self.p**3 - 1))


def _period_integrand(s):
    # t = E1 + s^2 removes the inverse-square-root endpoint singularity
    t = E1 + s * s
    return 1.0 / np.sqrt(t * t + E1 * t + E1 * E1)


@lru_cache(maxsize=1)
def real_period():
    """2 * integral_{e1}^{inf} dt / sqrt(4t^3 - 1), by adaptive quadrature."""
    res = quad(_period_integrand, 0.0, np.inf, epsabs=1e-14, epsrel=1e-13,
               limit=200, full_output=1)
    val, err = res[0], res[1]
    # a fourth element is quadpack's warning message
    if len(res) > 3 or err > 1e-12:
        msg = res[3] if len(res) > 3 else ""
        raise EllipticError(f"period quadrature did not converge: value={val}, err={err} {msg}")
    return 2.0 * val


def compute_lattice():
    """Lattice with real period omega1 and omega2 = omega1*exp(i*pi/3)."""
    w1 = complex(real_period())
    return Lattice(w1, w1 * np.exp(1j * np.pi / 3))


@lru_cache(maxsize=8)
def laurent_coefficients(n_terms=N_LAURENT):
    """c_k for k = 2..n_terms+1 in wp(z) = z^-2 + sum c_k z^(2k-2)."""
    c = {2: G2 / 20.0, 3: G3 / 28.0}
    for k in range(4, n_terms + 2):
        s = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3.0 * s / ((2 * k + 1) * (k - 3))
    return tuple(c[k] for k in range(2, n_terms + 2))


def _truncated_coefficients(rho, settings):
    """Laurent coefficients up to the last term above tolerance relative to z^-2.

    rho is max|z| in units of |omega1|; c_k scales like |omega1|^(-2k).
    """
    coeffs = np.array(laurent_coefficients(settings.max_terms))
    k = np.arange(2, len(coeffs) + 2)
    with np.errstate(divide="ignore"):
        terms = np.abs(coeffs) * (real_period() * rho) ** (2 * k)
    nonzero = np.flatnonzero(coeffs)
    if rho > 0 and terms[nonzero[-1]] > settings.series_tolerance:
        raise EllipticError(
            f"Laurent series needs more than {settings.max_terms} terms "
            f"at |z|/|omega1| = {rho:.3f}"
        )
    big = np.flatnonzero(terms > settings.series_tolerance)
    n = big[-1] + 1 if big.size else 1
    return coeffs[:n]


def _series(z, coeffs):
    z2 = z * z
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    # Horner in z^2, highest power first
    for j in range(len(coeffs) - 1, -1, -1):
        k = j + 2
        p = p * z2 + coeffs[j]
        dp = dp * z2 + (2 * k - 2) * coeffs[j]
    # p holds sum c_k z^(2k-4) and dp holds sum (2k-2) c_k z^(2k-4)
    p = p * z2
    dp = dp * z
    return 1.0 / z2 + p, -2.0 / (z2 * z) + dp


def reduce_to_cell(z, lattice):
    """Split z = z_red + m*omega1 + n*omega2 with coordinates of z_red in [-1/2, 1/2)."""
    x, y = lattice.coordinates(z)
    m = np.floor(x + 0.5)
    n = np.floor(y + 0.5)
    z_red = np.asarray(z, dtype=complex) - m * lattice.omega1 - n * lattice.omega2
    if np.ndim(z_red) == 0:
        return complex(z_red), int(m), int(n)
    return z_red, m.astype(int), n.astype(int)


def nearest_lattice_point(z, lattice):
    """Nearest lattice point to z and its distance."""
    z = np.asarray(z, dtype=complex)
    z_red, m, n = reduce_to_cell(z, lattice)
    base = z - z_red
    best = np.full(z.shape, np.inf)
    best_pt = np.zeros(z.shape, dtype=complex)
    for dm in (-1, 0, 1):
        for dn in (-1, 0, 1):
            off = dm * lattice.omega1 + dn * lattice.omega2
            d = np.abs(z_red - off)
            better = d < best
            best = np.where(better, d, best)
            best_pt = np.where(better, base + off, best_pt)
    if best.ndim == 0:
        return complex(best_pt), float(best)
    return best_pt, best


def wp_array(z, lattice, settings=DEFAULT_SETTINGS):
    """Vectorized (wp, wp') without the pole guard; lattice points give inf/nan."""
    z = np.asarray(z, dtype=complex)
    z_red, _, _ = reduce_to_cell(z, lattice)
    z_red = np.atleast_1d(z_red)
    far = np.abs(z_red) > DUPLICATION_RADIUS * lattice.scale
    rho = float(np.max(np.where(far, np.abs(z_red) / 2, np.abs(z_red)), initial=0.0))
    coeffs = _truncated_coefficients(rho / lattice.scale, settings)
    p = np.empty_like(z_red)
    dp = np.empty_like(z_red)
    with np.errstate(divide="ignore", invalid="ignore"):
        near_p, near_dp = _series(z_red[~far], coeffs)
        p[~far], dp[~far] = near_p, near_dp
        if far.any():
            u_p, u_dp = _series(z_red[far] / 2, coeffs)
            # duplication: wp(2u) = -2 wp + (wp'')^2/(4 wp'^2), wp'' = 6 wp^2
            q = u_p**3 / u_dp**2
            p[far] = -2.0 * u_p + 9.0 * u_p * q
            dp[far] = -u_dp + 18.0 * q * u_dp - 54.0 * q * q * u_dp
    if z.ndim == 0:
        return complex(p[0]), complex(dp[0])
    return p.reshape(z.shape), dp.reshape(z.shape)


def wp_eval(z, lattice, settings=DEFAULT_SETTINGS):
    """Evaluate wp and wp' at a single point.

    Raises PoleProximity if z lies within ``settings.pole_guard`` of a
    lattice point.
    """
    z = complex(z)
    if not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise ValueError("z must be finite")
    pt, dist = nearest_lattice_point(z, lattice)
    if dist < settings.guard_for(lattice):
        raise PoleProximity(z, pt, dist)
    p, dp = wp_array(z, lattice, settings)
    if not (np.isfinite(p) and np.isfinite(dp)):
        raise EllipticError(f"series evaluation failed at z={z!r}")
    return WpValue(p, dp)


def wp_second_derivative(z, lattice, step=1e-5):
    """wp'' by a centered difference of wp'; used only as a cross-check."""
    _, fwd = wp_array(z + step, lattice)
    _, bwd = wp_array(z - step, lattice)
    return (fwd - bwd) / (2 * step)


def enumerate_poles(radius, lattice):
    """Lattice points of modulus <= radius, each a double pole of wp.

    Returned sorted by (modulus, argument) so the order is reproducible.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    # |x*w1 + y*w2| >= |w1|*sin(pi/3)*max(|x|,|y|) for the hexagonal basis
    bound = int(np.ceil(radius / (lattice.scale * np.sin(np.pi / 3)))) + 1
    idx = np.arange(-bound, bound + 1)
    mm, nn = np.meshgrid(idx, idx, indexing="ij")
    pts = (mm * lattice.omega1 + nn * lattice.omega2).ravel()
    mods = np.abs(pts)
    # tolerance so points exactly on the circle are kept
    keep = mods <= radius * (1 + 1e-12)
    pts, mods = pts[keep], mods[keep]
    pts = np.where(mods < 1e-9 * lattice.scale, 0j, pts)
    args = np.round(np.angle(pts), 12)
    order = np.lexsort((args, np.round(mods, 12)))
    return [(complex(p), 2) for p in pts[order]]


def find_zeros_in_cell(lattice, settings=DEFAULT_SETTINGS, seeds_per_side=8,
                       max_iter=50, tol=1e-14):
    """Zeros of wp in the fundamental cell via Newton from a seed grid.

    Exactly two simple zeros are expected; anything else raises EllipticError.
    """
    s = (np.arange(seeds_per_side) + 0.5) / seeds_per_side - 0.5
    xx, yy = np.meshgrid(s, s)
    z = (xx * lattice.omega1 + yy * lattice.omega2).ravel()
    guard = settings.guard_for(lattice)
    z = z[np.abs(z) > 0.1 * lattice.scale]
    converged = np.zeros(z.shape, dtype=bool)
    for _ in range(max_iter):
        p, dp = wp_array(z, lattice, settings)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = p / dp
        step = np.where(np.isfinite(step), step, 0)
        # damp steps that would jump across the cell
        big = np.abs(step) > 0.25 * lattice.scale
        step = np.where(big, step * 0.25 * lattice.scale / np.abs(step), step)
        z = z - step
        converged = np.abs(step) < tol * lattice.scale
        if converged.all():
            break
    p, dp = wp_array(z, lattice, settings)
    _, dist = nearest_lattice_point(z, lattice)
    ok = (np.abs(p) < 1e-10) & (dist > guard)
    roots = []
    for r in reduce_to_cell(z[ok], lattice)[0]:
        if all(abs(r - q) > 1e-8 * lattice.scale for q in roots):
            roots.append(complex(r))
    if len(roots) != 2:
        raise EllipticError(f"expected 2 zeros of wp in the cell, found {len(roots)}")
    for r in roots:
        if abs(wp_array(r, lattice, settings)[1]) < 1e-3:
            raise EllipticError(f"zero at {r!r} is not simple")
    roots.sort(key=lambda r: (round(r.real, 10), round(r.imag, 10)))
    return roots
