"""Exponential solutions of the Fermat-type shift/differential equation

    {a0 f(z) + a1 f(z+c) + a2 f'(z)}^3 + {b0 f(z) + b1 f(z+c) + b2 f'(z)}^3 = exp(alpha z + beta)

Candidates have the shape f(z) = A exp((alpha z + beta)/3) + C exp(D z).
Substituting the first term turns each bracket into a constant times
exp((alpha z + beta)/3); those constants (mu*A, nu*A) must form a Fermat
pair.  The closed-form constants for the three coefficient cases are
computed independently and cross-checked against that substitution.
"""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field, replace

import numpy as np

MINOR_TOL = 1e-12
PAIR_TOL = 1e-10
FREEDOM_TOL = 1e-10
EXACT_TOL = 1e-8
DEGENERATE_CASE3_TOL = 1e-12
MAX_EXPONENT = 300.0  # keep exp() well inside double range on the grid
ETA = cmath.exp(2j * cmath.pi / 3)


class AssumptionViolated(ValueError):
    """The 2x3 coefficient matrix does not have rank 2."""


class DegenerateCase3(ValueError):
    """Case 3 with alpha = 3D: the closed form divides by zero."""


class Case(enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"


class Verdict(enum.Enum):
    EXACT = "Exact"
    FAILS_UNLESS_C_ZERO = "FailsUnlessCZero"
    NO_EXPONENTIAL_SOLUTION = "NoExponentialSolution"
    INEXACT = "Inexact"


@dataclass(frozen=True)
class EquationInstance:
    a0: complex
    a1: complex
    a2: complex
    b0: complex
    b1: complex
    b2: complex
    alpha: complex
    beta: complex
    shift_c: complex

    def __post_init__(self):
        for name in ("a0", "a1", "a2", "b0", "b1", "b2", "alpha", "beta", "shift_c"):
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.shift_c == 0:
            raise ValueError("shift c must be nonzero")

    @classmethod
    def from_rows(cls, a, b, alpha, beta, c):
        return cls(*a, *b, alpha=alpha, beta=beta, shift_c=c)

    @property
    def a(self):
        return (self.a0, self.a1, self.a2)

    @property
    def b(self):
        return (self.b0, self.b1, self.b2)

    @property
    def scale(self):
        return max(abs(v) for v in self.a + self.b)

    def minors(self):
        """(a0 b1 - a1 b0, b1 a2 - a1 b2, a0 b2 - a2 b0)."""
        return (
            self.a0 * self.b1 - self.a1 * self.b0,
            self.b1 * self.a2 - self.a1 * self.b2,
            self.a0 * self.b2 - self.a2 * self.b0,
        )

    def scaled(self, lam):
        lam = complex(lam)
        return replace(self, **{k: lam * getattr(self, k)
                                for k in ("a0", "a1", "a2", "b0", "b1", "b2")})


@dataclass(frozen=True)
class FermatPair:
    c0: complex
    c1: complex

    def __post_init__(self):
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "c1", complex(self.c1))
        if self.residual > PAIR_TOL:
            raise ValueError(f"|c0^3 + c1^3 - 1| = {self.residual:.3e} exceeds {PAIR_TOL}")

    @property
    def residual(self):
        return abs(self.c0**3 + self.c1**3 - 1)


@dataclass
class CandidateSolution:
    case: Case
    amp_A: complex
    free_C: complex
    rate_D: complex
    pair: FermatPair | None
    mu: complex
    nu: complex
    c_freedom: bool
    notes: list = field(default_factory=list)
    beta: complex = 0j  # carried for evaluation convenience
    alpha: complex = 0j

    def evaluate(self, z):
        """(f(z), f'(z)) for f = A exp((alpha z + beta)/3) + C exp(D z)."""
        z = np.asarray(z, dtype=complex)
        e = np.exp((self.alpha * z + self.beta) / 3)
        h = np.exp(self.rate_D * z) if self.free_C != 0 else np.zeros_like(z)
        f = self.amp_A * e + self.free_C * h
        df = self.amp_A * self.alpha / 3 * e + self.free_C * self.rate_D * h
        return f, df


@dataclass
class VerificationReport:
    grid: np.ndarray
    max_abs_residual: float
    max_rel_residual: float
    constraint_flags: dict
    verdict: Verdict
    diagnostics: list = field(default_factory=list)


def _tol(inst):
    return MINOR_TOL * inst.scale


def validate_rank(inst):
    """True iff some 2x2 minor of the coefficient matrix is nonzero."""
    tol = _tol(inst)
    return any(abs(m) > tol for m in inst.minors())


def classify(inst):
    if not validate_rank(inst):
        raise AssumptionViolated("coefficient matrix has rank < 2")
    m01, m12, m02 = inst.minors()
    tol = _tol(inst)
    if abs(m12) > tol:
        return Case.CASE3
    if abs(m01) > tol:
        return Case.CASE2
    # rank 2 with both minors zero forces a1 = b1 = 0, so a0 b2 - a2 b0 != 0
    if not abs(m02) > tol:
        raise AssumptionViolated("Case1 requires a0 b2 - a2 b0 != 0")
    return Case.CASE1


def case3_rate(inst):
    m01, m12, _ = inst.minors()
    return -m01 / m12


def c_freedom_check(inst, D):
    """Whether C exp(Dz) drops out of both brackets: a0 + a1 e^{Dc} + a2 D = 0 (and b)."""
    w = cmath.exp(D * inst.shift_c)
    res_a = abs(inst.a0 + inst.a1 * w + inst.a2 * D)
    res_b = abs(inst.b0 + inst.b1 * w + inst.b2 * D)
    tol = FREEDOM_TOL * inst.scale
    return (res_a <= tol and res_b <= tol), res_a, res_b


def bracket_constants(inst):
    """mu, nu with a0 f + a1 f(z+c) + a2 f' = mu A exp((alpha z + beta)/3) for C = 0."""
    w = cmath.exp(inst.alpha * inst.shift_c / 3)
    mu = inst.a0 + inst.a1 * w + inst.a2 * inst.alpha / 3
    nu = inst.b0 + inst.b1 * w + inst.b2 * inst.alpha / 3
    return mu, nu


def principal_cbrt(x):
    return complex(x) ** (1.0 / 3.0) if x != 0 else 0j


def forward_constants(inst):
    """(mu, nu, A, pair) from direct substitution; A and pair are None when mu^3 + nu^3 = 0."""
    if not validate_rank(inst):
        raise AssumptionViolated("coefficient matrix has rank < 2")
    mu, nu = bracket_constants(inst)
    s = mu**3 + nu**3
    if abs(s) <= MINOR_TOL * max(inst.scale, 1.0) ** 3:
        return mu, nu, None, None
    A = 1 / principal_cbrt(s)
    return mu, nu, A, FermatPair(A * mu, A * nu)


def formula_amplitude(inst, pair, case=None):
    """A from the closed-form expression for the given case; also returns D (0 outside Case3)."""
    case = case or classify(inst)
    c0, c1 = pair.c0, pair.c1
    m01, m12, m02 = inst.minors()
    if case is Case.CASE1:
        return (inst.b2 * c0 - inst.a2 * c1) / m02, 0j
    if case is Case.CASE2:
        return (inst.b1 * c0 - inst.a1 * c1) / m01, 0j
    D = case3_rate(inst)
    gap = inst.alpha - 3 * D
    if abs(gap) <= DEGENERATE_CASE3_TOL * max(1.0, abs(inst.alpha)):
        raise DegenerateCase3(f"alpha - 3D = {gap!r}")
    return 3 * (inst.b1 * c0 - inst.a1 * c1) / (m12 * gap), D


def solve_theorem(inst, pair, C=0):
    """Candidate solution for a given Fermat pair.

    A nonzero C is kept only in Case3 when the homogeneous term really
    cancels (c_freedom); otherwise the C = 0 member is returned with a note.
    """
    case = classify(inst)
    A, D = formula_amplitude(inst, pair, case)
    mu, nu = bracket_constants(inst)
    notes = []
    free = False
    if case is Case.CASE3:
        free, res_a, res_b = c_freedom_check(inst, D)
        notes.append(f"c_freedom residual_a={res_a:.3e} residual_b={res_b:.3e}")
    C = complex(C)
    if C != 0 and not free:
        notes.append(f"requested C={C!r} rejected: homogeneous term does not cancel; using C=0")
        C = 0j
    for k in (1, 2):
        notes.append(f"alternate A (times eta^{k}) = {A * ETA**k!r}")
    return CandidateSolution(case=case, amp_A=A, free_C=C, rate_D=D, pair=pair,
                             mu=mu, nu=nu, c_freedom=free, notes=notes,
                             beta=inst.beta, alpha=inst.alpha)


def paper_formula_crosscheck(inst):
    """|A_formula - A_forward| / |A_forward| using the forward pair."""
    _, _, A_fwd, pair = forward_constants(inst)
    if pair is None:
        raise ValueError("no forward pair: mu^3 + nu^3 = 0")
    A_formula, _ = formula_amplitude(inst, pair)
    return abs(A_formula - A_fwd) / abs(A_fwd)


def default_grid(grid_size=64, radii=(1.0, 5.0), phase=0.0):
    theta = 2 * np.pi * (np.arange(grid_size) + phase) / grid_size
    return np.concatenate([r * np.exp(1j * theta) for r in radii])


def _lhs_rhs(inst, sol, z):
    f, df = sol.evaluate(z)
    fc, _ = sol.evaluate(z + inst.shift_c)
    P = inst.a0 * f + inst.a1 * fc + inst.a2 * df
    Q = inst.b0 * f + inst.b1 * fc + inst.b2 * df
    return P**3 + Q**3, np.exp(inst.alpha * z + inst.beta)


def _max_exponent(inst, sol, z):
    zz = np.concatenate([z, z + inst.shift_c])
    e = np.abs((inst.alpha * zz + inst.beta).real)
    if sol.free_C != 0:
        e = np.maximum(e, 3 * np.abs((sol.rate_D * zz).real))
    return float(np.max(e))


def _residuals(inst, sol, z):
    lhs, rhs = _lhs_rhs(inst, sol, z)
    err = np.abs(lhs - rhs)
    return float(np.max(err)), float(np.max(err / np.abs(rhs)))


def verify_solution(inst, sol, grid_size=64, radii=(1.0, 5.0), phase=0.0):
    """Sample the equation residual on circles and decide a verdict."""
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    diagnostics = []
    z = default_grid(grid_size, radii, phase)
    top = _max_exponent(inst, sol, z)
    if top > MAX_EXPONENT:
        shrink = MAX_EXPONENT / top
        z = z * shrink
        diagnostics.append(f"grid rescaled by {shrink:.3e} to avoid overflow")
    abs_res, rel_res = _residuals(inst, sol, z)
    flags = {}
    if sol.case is Case.CASE3:
        _, res_a, res_b = c_freedom_check(inst, sol.rate_D)
        flags["residual_a"] = res_a
        flags["residual_b"] = res_b
    if sol.pair is not None:
        flags["pair_residual"] = sol.pair.residual
    verdict = Verdict.EXACT if rel_res <= EXACT_TOL else Verdict.INEXACT
    if sol.free_C != 0 and not sol.c_freedom:
        zero = replace(sol, free_C=0j)
        _, rel0 = _residuals(inst, zero, z)
        flags["c_zero_rel_residual"] = rel0
        if verdict is not Verdict.EXACT and rel0 <= EXACT_TOL:
            verdict = Verdict.FAILS_UNLESS_C_ZERO
            diagnostics.append(
                "C*exp(Dz) does not cancel: residual_a="
                f"{flags.get('residual_a', float('nan')):.3e}; C = 0 member is exact"
            )
    return VerificationReport(grid=z, max_abs_residual=abs_res, max_rel_residual=rel_res,
                              constraint_flags=flags, verdict=verdict, diagnostics=diagnostics)


def solve(inst, pair=None, C=0, grid_size=64):
    """Forward pair (or the given one) -> (candidate or None, report).

    The report always judges the requested C; the returned candidate is
    the member solve_theorem settled on (C = 0 when C is not free).
    """
    if pair is None:
        _, _, _, pair = forward_constants(inst)
        if pair is None:
            report = VerificationReport(grid=np.empty(0, dtype=complex), max_abs_residual=float("nan"),
                                        max_rel_residual=float("nan"), constraint_flags={},
                                        verdict=Verdict.NO_EXPONENTIAL_SOLUTION,
                                        diagnostics=["mu^3 + nu^3 = 0: no exponential solution"])
            return None, report
    sol = solve_theorem(inst, pair, C)
    requested = replace(sol, free_C=complex(C)) if C != 0 else sol
    return sol, verify_solution(inst, requested, grid_size)
