import cmath
import math
from dataclasses import replace

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings, strategies as st

from instances import GENERATORS, random_case3
from fermat_eq.solver import (
    AssumptionViolated,
    Case,
    DegenerateCase3,
    EquationInstance,
    FermatPair,
    Verdict,
    c_freedom_check,
    case3_rate,
    classify,
    forward_constants,
    paper_formula_crosscheck,
    solve,
    solve_theorem,
    validate_rank,
    verify_solution,
)

ETA = cmath.exp(2j * math.pi / 3)


def inst(a, b, alpha=1, beta=0, c=0.7 + 0.3j):
    return EquationInstance.from_rows(a, b, alpha, beta, c)


def equal_up_to_eta(x, y, tol=1e-12):
    return min(abs(x - y * ETA**k) for k in range(3)) <= tol * max(1, abs(x))


# ---------------------------------------------------------------- instances

def test_shift_must_be_nonzero():
    with pytest.raises(ValueError):
        inst((1, 0, 0), (0, 1, 0), c=0)


def test_fermat_pair_invariant():
    FermatPair(1, 0)
    with pytest.raises(ValueError):
        FermatPair(1, 0.1)


@pytest.mark.parametrize("a, b, expected", [
    ((1, 0, 0), (0, 1, 0), True),
    ((1, 1, 1), (2, 2, 2), False),
    ((1, 0, 0), (0, 0, 1), True),
])
def test_validate_rank(a, b, expected):
    assert validate_rank(inst(a, b)) is expected


@pytest.mark.parametrize("a, b, case", [
    ((1, 0, 0), (0, 1, 0), Case.CASE2),
    ((1, 0, 0), (0, 0, 1), Case.CASE1),
    ((0, 1, 0), (0, 0, 1), Case.CASE3),
])
def test_classify_examples(a, b, case):
    assert classify(inst(a, b)) is case


def test_classify_rejects_rank_one():
    with pytest.raises(AssumptionViolated):
        classify(inst((1, 1, 1), (2, 2, 2)))


coef = st.sampled_from([0, 1, -1, 2, 1j, 0.5 - 0.25j, 3 + 1j])


@given(st.tuples(coef, coef, coef), st.tuples(coef, coef, coef))
def test_case_partition(a, b):
    i = inst(a, b)
    assume(validate_rank(i))
    m01, m12, m02 = i.minors()
    tol = 1e-12 * i.scale
    preds = {
        Case.CASE1: abs(m01) <= tol and abs(m12) <= tol,
        Case.CASE2: abs(m01) > tol and abs(m12) <= tol,
        Case.CASE3: abs(m12) > tol,
    }
    assert sum(preds.values()) == 1
    case = classify(i)
    assert preds[case]
    if case is Case.CASE1:
        assert abs(m02) > tol


# ---------------------------------------------------------------- forward constants

def test_forward_han_lu_root_of_unity_shift():
    i = inst((1, 0, 0), (0, 1, 0), alpha=1, c=2j * math.pi)
    mu, nu, A, pair = forward_constants(i)
    assert mu == 1
    assert nu == pytest.approx(cmath.exp(2j * math.pi / 3))
    assert abs(2 * A**3 - 1) < 1e-14
    assert equal_up_to_eta(A, 2 ** (-1 / 3))


def test_forward_differential_alpha_three():
    i = inst((1, 0, 0), (0, 0, 1), alpha=3, c=0.4)
    mu, nu, A, _ = forward_constants(i)
    assert (mu, nu) == (1, 1)
    assert A == pytest.approx(2 ** (-1 / 3), rel=1e-15)


def test_forward_no_exponential_solution():
    # e^{alpha c / 3} = -1 makes nu = -mu
    i = inst((1, 0, 0), (0, 1, 0), alpha=1, c=3j * math.pi)
    mu, nu, A, pair = forward_constants(i)
    assert A is None and pair is None
    sol, report = solve(i)
    assert sol is None
    assert report.verdict is Verdict.NO_EXPONENTIAL_SOLUTION


def test_forward_pair_is_fermat():
    rng = np.random.default_rng(21)
    for gen in GENERATORS.values():
        for _ in range(50):
            _, _, A, pair = forward_constants(gen(rng))
            assert pair.residual <= 1e-10


# ---------------------------------------------------------------- closed forms

def test_case2_han_lu_recovers_amplitude():
    alpha, c = 0.8 - 0.1j, 1.3 + 0.4j
    i = inst((1, 0, 0), (0, 1, 0), alpha=alpha, c=c)
    A0 = (1 + cmath.exp(alpha * c)) ** (-1 / 3)
    pair = FermatPair(A0, A0 * cmath.exp(alpha * c / 3))
    sol = solve_theorem(i, pair)
    assert sol.case is Case.CASE2
    assert sol.amp_A == pytest.approx(A0, rel=1e-14)
    assert abs(sol.amp_A**3 * (1 + cmath.exp(alpha * c)) - 1) <= 1e-12


def test_case3_unit_rows():
    alpha = 1.7 + 0.2j
    i = inst((0, 1, 0), (0, 0, 1), alpha=alpha)
    _, _, A_fwd, pair = forward_constants(i)
    sol = solve_theorem(i, pair)
    assert sol.rate_D == 0
    assert sol.amp_A == pytest.approx(3 * pair.c1 / alpha, rel=1e-14)
    assert sol.amp_A == pytest.approx(A_fwd, rel=1e-14)


def test_case1_amplitude_is_c0():
    alpha = 0.9 + 0.5j
    i = inst((1, 0, 0), (0, 0, 1), alpha=alpha)
    _, _, A_fwd, pair = forward_constants(i)
    sol = solve_theorem(i, pair)
    assert sol.case is Case.CASE1
    assert sol.amp_A == pytest.approx(pair.c0, rel=1e-15)
    assert abs(sol.amp_A**3 * (1 + alpha**3 / 27) - 1) <= 1e-12
    assert paper_formula_crosscheck(i) <= 1e-12


@pytest.mark.parametrize("case", sorted(GENERATORS))
def test_formula_crosscheck_sweep(case):
    rng = np.random.default_rng(int(case[-1]))
    worst = max(paper_formula_crosscheck(GENERATORS[case](rng)) for _ in range(300))
    assert worst <= 1e-10


def test_degenerate_case3():
    i = inst((1, 1, 0), (0, 1, 1), alpha=3)  # D = 1, so alpha = 3D
    assert case3_rate(i) == 1
    pair = FermatPair(1, 0)
    with pytest.raises(DegenerateCase3):
        solve_theorem(i, pair)


def test_alternate_roots_in_notes():
    i = inst((1, 0, 0), (0, 1, 0), alpha=1, c=2j * math.pi)
    sol, _ = solve(i)
    assert sum("alternate A" in n for n in sol.notes) == 2


# ---------------------------------------------------------------- C freedom

def test_c_freedom_unit_rows_never_free():
    for c in (0.3, 1 + 2j, -4j):
        free, res_a, res_b = c_freedom_check(inst((0, 1, 0), (0, 0, 1), c=c), 0)
        assert not free and res_a == pytest.approx(1)


def constructed_free_instance(rng):
    """Case3 instance whose shift satisfies e^{Dc} = -(a0 + a2 D)/a1."""
    while True:
        base = random_case3(rng)
        D = case3_rate(base)
        target = -(base.a0 + base.a2 * D) / base.a1
        if abs(D) < 1e-2 or abs(target) < 1e-6:
            continue
        c = cmath.log(target) / D
        i = replace(base, shift_c=c)
        if abs(i.alpha - 3 * D) > 1e-3:
            return i


def test_c_freedom_constructed():
    rng = np.random.default_rng(31)
    for _ in range(20):
        i = constructed_free_instance(rng)
        free, res_a, res_b = c_freedom_check(i, case3_rate(i))
        assert free, (res_a, res_b)


def test_c_freedom_hand_instance():
    i = inst((1, 1, 0), (0, 1, 1), alpha=1, c=1j * math.pi)
    assert case3_rate(i) == 1
    assert c_freedom_check(i, 1)[0]


def test_c_freedom_proportionality_identity():
    rng = np.random.default_rng(32)
    for _ in range(500):
        i = random_case3(rng)
        D = case3_rate(i)
        w = cmath.exp(D * i.shift_c)
        ra = i.a0 + i.a1 * w + i.a2 * D
        rb = i.b0 + i.b1 * w + i.b2 * D
        assert abs(i.b1 * ra - i.a1 * rb) <= 1e-10 * max(1, abs(w)) * i.scale**2


def test_cross_terms_survive_symbolically():
    # a=(0,1,0), b=(0,0,1), D=0: expand f(z+c)^3 + f'(z)^3 with f = A e + C
    z, A, C, al, be, c = sp.symbols("z A C alpha beta c")
    f = A * sp.exp((al * z + be) / 3) + C
    lhs = sp.expand(f.subs(z, z + c) ** 3 + sp.diff(f, z) ** 3)
    # substitute the amplitude relation A^3 (e^{alpha c} + alpha^3/27) = 1
    rest = sp.simplify(lhs - A**3 * (sp.exp(al * c) + al**3 / 27) * sp.exp(al * z + be))
    assert rest != 0
    assert rest.has(C)
    assert sp.simplify(rest.subs(C, 0)) == 0


# ---------------------------------------------------------------- verification

def test_verify_han_lu_exact():
    i = inst((1, 0, 0), (0, 1, 0), alpha=1, beta=0, c=2j * math.pi)
    sol, report = solve(i)
    assert report.verdict is Verdict.EXACT
    assert report.max_rel_residual <= 1e-9
    assert len(report.grid) == 128


def test_verify_case3_fails_unless_c_zero():
    i = inst((0, 1, 0), (0, 0, 1), alpha=1, c=0.7 + 0.3j)
    sol, report = solve(i, C=1)
    assert not sol.c_freedom
    assert sol.free_C == 0
    assert report.verdict is Verdict.FAILS_UNLESS_C_ZERO
    assert report.constraint_flags["residual_a"] == pytest.approx(1)
    assert any("residual_a" in d for d in report.diagnostics)


def test_verify_free_c_exact():
    rng = np.random.default_rng(33)
    for _ in range(5):
        i = constructed_free_instance(rng)
        sol, report = solve(i, C=1 - 0.5j)
        assert sol.c_freedom and sol.free_C == 1 - 0.5j
        assert report.verdict is Verdict.EXACT


def test_verify_perturbed_amplitude_not_exact():
    i = inst((1, 0, 0), (0, 1, 0), alpha=1, c=2j * math.pi)
    sol, _ = solve(i)
    bad = replace(sol, amp_A=sol.amp_A * (1 + 1e-2))
    assert verify_solution(i, bad).verdict is Verdict.INEXACT


def test_verify_grid_size_minimum():
    i = inst((1, 0, 0), (0, 1, 0))
    sol, _ = solve(i)
    with pytest.raises(ValueError):
        verify_solution(i, sol, grid_size=8)


def test_verify_rescales_on_overflow():
    i = inst((1, 0, 0), (0, 1, 0), alpha=400, c=0.01j)
    sol, report = solve(i)
    assert any("rescaled" in d for d in report.diagnostics)
    assert np.isfinite(report.max_rel_residual)
    assert report.verdict is Verdict.EXACT


@pytest.mark.parametrize("case", sorted(GENERATORS))
def test_exact_on_fresh_grid(case):
    rng = np.random.default_rng(41)
    for _ in range(20):
        i = GENERATORS[case](rng)
        sol, report = solve(i)
        assert report.verdict is Verdict.EXACT
        fresh = verify_solution(i, sol, grid_size=37, radii=(2.0, 3.5), phase=0.5)
        assert not np.intersect1d(fresh.grid, report.grid).size
        assert fresh.max_rel_residual <= 1e-8


def test_order_independent_report():
    i = inst((1, 0, 0), (0, 1, 0), alpha=0.3, c=1)
    sol, _ = solve(i)
    a = verify_solution(i, sol)
    b = verify_solution(i, sol)
    assert a.max_rel_residual == b.max_rel_residual


# ---------------------------------------------------------------- properties

def test_scaling_by_cube_root_of_unity():
    rng = np.random.default_rng(51)
    for gen in GENERATORS.values():
        i = gen(rng)
        sol, _ = solve(i)
        scaled = i.scaled(ETA)
        _, _, A_scaled, _ = forward_constants(scaled)
        assert equal_up_to_eta(A_scaled * ETA, sol.amp_A, tol=1e-10)
        # the same f solves the scaled equation because eta^3 = 1
        assert verify_solution(scaled, sol).verdict is Verdict.EXACT
        assert verify_solution(i.scaled(2.0), sol).verdict is Verdict.INEXACT


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_han_lu_family(alpha, c):
    i = inst((1, 0, 0), (0, 1, 0), alpha=alpha, c=c)
    assume(abs(1 + cmath.exp(alpha * c)) > 1e-3)
    sol, report = solve(i)
    assert abs(sol.amp_A**3 * (1 + cmath.exp(alpha * c)) - 1) <= 1e-10
    assert report.verdict is Verdict.EXACT


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False))
def test_differential_family(alpha):
    assume(abs(1 + alpha**3 / 27) > 1e-3)
    i = inst((1, 0, 0), (0, 0, 1), alpha=alpha, c=1)
    sol, report = solve(i)
    assert abs(sol.amp_A**3 * (1 + alpha**3 / 27) - 1) <= 1e-10
    assert report.verdict is Verdict.EXACT
