"""Numerical Nevanlinna functionals m(r, f), N(r, f), T(r, f) and growth order.

Poles must be supplied analytically.  Poles close to the circle |z| = r are
removed from the integrand before quadrature: k*log|z - p| is added to
log+|f| and its exact circle mean, k*log(max(r, |p|)), subtracted again.
This keeps the trapezoid rule well behaved when a pole sits next to the
circle instead of rejecting such radii outright.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .elliptic import enumerate_poles

LEMMA_EPSILON = 0.1
SHIFT_BOUND = 10.0
COMPOSITION_TOL = 0.15


class CircleNearPole(ValueError):
    def __init__(self, r, pole, distance):
        self.r = r
        self.pole = pole
        self.distance = distance
        super().__init__(f"circle |z|={r} passes {distance:.3e} from pole {pole!r}")


class QuadratureNotConverged(RuntimeError):
    pass


@dataclass
class MeromorphicEvaluator:
    """A meromorphic function plus its poles.

    ``known_poles(R)`` returns (point, multiplicity) for every pole with
    modulus <= R.  ``log_abs`` may be given where |f| would overflow.
    ``guard`` is the distance below which a pole makes a circle unusable;
    ``band`` is how close a pole must be before it is subtracted.
    """

    evaluate: Callable
    known_poles: Callable
    label: str = "f"
    log_abs: Callable | None = None
    guard: float = 1e-9
    band: float = 1.0

    def log_modulus(self, z):
        if self.log_abs is not None:
            return self.log_abs(z)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.log(np.abs(self.evaluate(z)))


@dataclass
class NevanlinnaCurve:
    r: np.ndarray
    m: np.ndarray
    N: np.ndarray
    label: str = "f"
    diagnostics: list = field(default_factory=list)

    @property
    def T(self):
        return self.m + self.N

    @property
    def samples(self):
        return list(zip(self.r.tolist(), self.m.tolist(), self.N.tolist(), self.T.tolist()))


@dataclass
class OrderEstimate:
    rho_hat: float
    fit_range: tuple
    fit_quality: float
    notes: list = field(default_factory=list)


# ---------------------------------------------------------------- evaluators

def wp_evaluator(lattice):
    from .elliptic import wp_array

    return MeromorphicEvaluator(
        evaluate=lambda z: wp_array(z, lattice)[0],
        known_poles=lambda R: enumerate_poles(R, lattice),
        label="wp",
        guard=1e-6 * lattice.scale,
        band=0.5 * lattice.scale,
    )


def exp_evaluator():
    return MeromorphicEvaluator(
        evaluate=np.exp,
        known_poles=lambda R: [],
        label="exp",
        log_abs=lambda z: np.real(z),
    )


def constant_evaluator(value):
    value = complex(value)
    return MeromorphicEvaluator(
        evaluate=lambda z: np.full(np.shape(z), value),
        known_poles=lambda R: [],
        label=f"const({value})",
    )


def rational_evaluator(numerator, denominator, label="rational"):
    """P/Q with coefficient lists in ascending degree; poles are the roots of Q."""
    num = np.asarray(numerator, dtype=complex)[::-1]
    den = np.asarray(denominator, dtype=complex)[::-1]
    roots = np.roots(den) if len(den) > 1 else np.array([], dtype=complex)
    # group repeated roots into multiplicities
    poles = []
    for rt in roots:
        for i, (p, k) in enumerate(poles):
            if abs(p - rt) < 1e-8 * max(1.0, abs(p)):
                poles[i] = (p, k + 1)
                break
        else:
            poles.append((complex(rt), 1))
    poles.sort(key=lambda pk: (abs(pk[0]), np.angle(pk[0])))

    return MeromorphicEvaluator(
        evaluate=lambda z: np.polyval(num, z) / np.polyval(den, z),
        known_poles=lambda R: [(p, k) for p, k in poles if abs(p) <= R],
        label=label,
    )


def shifted_evaluator(f, c):
    """z -> f(z + c); its poles are those of f moved by -c."""
    c = complex(c)

    def poles(R):
        return [(p - c, k) for p, k in f.known_poles(R + abs(c)) if abs(p - c) <= R]

    log_abs = None if f.log_abs is None else (lambda z: f.log_abs(np.asarray(z) + c))
    return MeromorphicEvaluator(
        evaluate=lambda z: f.evaluate(np.asarray(z) + c),
        known_poles=poles,
        label=f"{f.label}(z+{c})",
        log_abs=log_abs,
        guard=f.guard,
        band=f.band,
    )


def polynomial_in_f(f, coefficients):
    """z -> sum a_j f(z)^j for constants a_0..a_p, a_p != 0."""
    coeffs = [complex(a) for a in coefficients]
    if len(coeffs) < 2 or coeffs[-1] == 0:
        raise ValueError("need a_p != 0 with p >= 1")
    p = len(coeffs) - 1
    rev = coeffs[::-1]
    return MeromorphicEvaluator(
        evaluate=lambda z: np.polyval(rev, f.evaluate(z)),
        known_poles=lambda R: [(q, p * k) for q, k in f.known_poles(R)],
        label=f"P_{p}({f.label})",
        guard=f.guard,
        band=f.band,
    )


# ---------------------------------------------------------------- functionals

def _near_poles(f, r):
    near = []
    for p, k in f.known_poles(r + f.band):
        d = abs(abs(p) - r)
        if d < f.guard:
            raise CircleNearPole(r, p, d)
        if d < f.band:
            near.append((p, k))
    return near


def _regularized(f, r, near, theta):
    z = r * np.exp(1j * theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.maximum(f.log_modulus(z), 0.0)
        for p, k in near:
            v = v + k * np.log(np.abs(z - p))
    return v


def proximity(f, r, n_theta=256, rtol=1e-4, atol=1e-8, max_points=2**20):
    """m(r, f) = (1/2pi) * integral of log+|f(r e^{i theta})| over the circle.

    Periodic trapezoid rule, doubled until two successive estimates agree
    to ``rtol`` (relative) or ``atol`` (absolute).
    """
    if n_theta < 256:
        raise ValueError("n_theta must be >= 256")
    if not r > 0:
        raise ValueError("r must be positive")
    near = _near_poles(f, r)
    correction = sum(k * math.log(max(r, abs(p))) for p, k in near)

    n = n_theta
    theta = 2 * np.pi * np.arange(n) / n
    mean = float(np.mean(_regularized(f, r, near, theta)))
    while True:
        mid = theta + np.pi / n
        new = 0.5 * (mean + float(np.mean(_regularized(f, r, near, mid))))
        theta = np.sort(np.concatenate([theta, mid]))
        n *= 2
        if not math.isfinite(new):
            raise QuadratureNotConverged(f"non-finite integrand on |z|={r}")
        if abs(new - mean) < max(rtol * abs(new - correction), atol):
            mean = new
            break
        mean = new
        if n >= max_points:
            raise QuadratureNotConverged(f"m(r={r}) not converged with {n} nodes")
    return max(mean - correction, 0.0)


def counting(f, r):
    """N(r, f) = n(0) log r + sum over poles 0 < |p| <= r of k log(r/|p|)."""
    total = 0.0
    for p, k in f.known_poles(r):
        ap = abs(p)
        total += k * (math.log(r) if ap == 0 else math.log(r / ap))
    return total


def characteristic_curve(f, r_grid, n_theta=256):
    """T = m + N on a radius grid; unusable radii are dropped with a note."""
    rs, ms, Ns, notes = [], [], [], []
    for r in sorted(set(float(x) for x in r_grid)):
        try:
            m = proximity(f, r, n_theta)
        except CircleNearPole as exc:
            notes.append(f"r={r} removed: {exc}")
            continue
        rs.append(r)
        ms.append(m)
        Ns.append(counting(f, r))
    curve = NevanlinnaCurve(np.array(rs), np.array(ms), np.array(Ns), f.label, notes)
    T = curve.T
    for i in range(1, len(T)):
        if T[i] < T[i - 1] - 1e-6:
            notes.append(f"T decreases between r={rs[i-1]} and r={rs[i]} by {T[i-1]-T[i]:.3e}")
    return curve


def wp_asymptotic_check(curve, lattice):
    """(r, T(r) * area / (pi r^2)) for each sample."""
    return [(float(r), float(t * lattice.area / (math.pi * r * r)))
            for r, t in zip(curve.r, curve.T)]


def trend_nonincreasing(values, slack=0.02, window=3):
    """Whether the moving average of |value - 1| never rises by more than slack."""
    dev = np.abs(np.asarray(values, dtype=float) - 1.0)
    if len(dev) > window:
        dev = np.convolve(dev, np.ones(window) / window, mode="valid")
    return bool(np.all(np.diff(dev) <= slack))


def order_estimate(curve):
    """Slope of log T against log r on the larger-r half of the samples."""
    T = curve.T
    pos = T > 0
    if not pos.any():
        return OrderEstimate(0.0, (float(curve.r[0]), float(curve.r[-1])), 1.0,
                             ["T <= 0 everywhere: bounded function, order 0"])
    r, T = curve.r[pos], T[pos]
    if len(r) < 6:
        raise ValueError("order estimate needs at least 6 samples with T > 0")
    half = len(r) // 2
    x, y = np.log(r[half:]), np.log(T[half:])
    fit = stats.linregress(x, y)
    notes = []
    rho = float(fit.slope)
    if rho < 0:
        notes.append(f"negative slope {rho:.3e} clipped to 0")
        rho = 0.0
    quality = float(fit.rvalue**2) if np.ptp(y) > 0 else 1.0
    return OrderEstimate(rho, (float(r[half]), float(r[-1])), quality, notes)


def probe_poles(f, radius, delta=1e-4, limit=8):
    """Check declared poles against the evaluator: |f(p + delta)| should grow like delta^-k."""
    issues = []
    for p, k in f.known_poles(radius)[:limit]:
        z = np.array([p + delta, p - delta, p + 1j * delta])
        growth = float(np.median(f.log_modulus(z))) / math.log(1 / delta)
        if not abs(growth - k) < 0.5:
            issues.append(f"pole {p!r}: declared multiplicity {k}, observed growth {growth:.2f}")
    return issues


def lemma_checks(f, mode, params):
    """Desk-check the shift and polynomial-composition growth lemmas on f.

    shift: params = {"c", "r_grid"[, "rho"]}; reports
        max |T(r, f(.+c)) - T(r, f)| / r^(rho - 1 + 0.1).
    polynomial_comp: params = {"coefficients", "r_grid"}; reports
        max |T(r, sum a_j f^j) - p T(r, f)| / T(r, f) over the top half of the grid.
    """
    r_grid = sorted(params["r_grid"])
    base = characteristic_curve(f, r_grid)
    diagnostics = list(base.diagnostics) + probe_poles(f, max(r_grid))
    if mode == "shift":
        c = complex(params["c"])
        rho = params.get("rho")
        if rho is None:
            rho = order_estimate(base).rho_hat
        g = shifted_evaluator(f, c)
        shifted = characteristic_curve(g, base.r)
        diagnostics += shifted.diagnostics
        r = np.intersect1d(base.r, shifted.r)
        d = np.abs(shifted.T[np.isin(shifted.r, r)] - base.T[np.isin(base.r, r)])
        scaled = d / r ** (rho - 1 + LEMMA_EPSILON)
        value = float(np.max(scaled))
        return {"mode": mode, "r": r.tolist(), "abs_diff": d.tolist(), "rho": float(rho),
                "epsilon": LEMMA_EPSILON, "value": value, "threshold": SHIFT_BOUND,
                "passed": value <= SHIFT_BOUND, "diagnostics": diagnostics}
    if mode == "polynomial_comp":
        coeffs = params["coefficients"]
        p = len(coeffs) - 1
        g = polynomial_in_f(f, coeffs)
        comp = characteristic_curve(g, base.r)
        diagnostics += comp.diagnostics
        r = np.intersect1d(base.r, comp.r)
        Tf = base.T[np.isin(base.r, r)]
        Tg = comp.T[np.isin(comp.r, r)]
        top = slice(len(r) // 2, None)
        rel = np.abs(Tg - p * Tf) / Tf
        value = float(np.max(rel[top]))
        return {"mode": mode, "r": r.tolist(), "rel_diff": rel.tolist(), "degree": p,
                "value": value, "threshold": COMPOSITION_TOL,
                "passed": value <= COMPOSITION_TOL, "diagnostics": diagnostics}
    raise ValueError(f"unknown mode {mode!r}")
