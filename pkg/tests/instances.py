"""Random rank-2 equation instances for each coefficient case."""

from fermat_eq.solver import EquationInstance, case3_rate


def _c(rng, size=None):
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def random_case1(rng):
    # both minors vanish with rank 2 only when a1 = b1 = 0
    while True:
        a0, a2, b0, b2 = _c(rng, 4)
        if abs(a0 * b2 - a2 * b0) > 1e-3:
            break
    return EquationInstance(a0, 0, a2, b0, 0, b2, alpha=_c(rng), beta=_c(rng), shift_c=_c(rng))


def random_case2(rng):
    while True:
        a0, a1, a2, b0, b1 = _c(rng, 5)
        b2 = b1 * a2 / a1  # makes b1 a2 - a1 b2 = 0
        if abs(a0 * b1 - a1 * b0) > 1e-3:
            break
    return EquationInstance(a0, a1, a2, b0, b1, b2, alpha=_c(rng), beta=_c(rng), shift_c=_c(rng))


def random_case3(rng, min_gap=1e-6):
    while True:
        a0, a1, a2, b0, b1, b2 = _c(rng, 6)
        inst = EquationInstance(a0, a1, a2, b0, b1, b2, alpha=_c(rng), beta=_c(rng), shift_c=_c(rng))
        if abs(b1 * a2 - a1 * b2) > 1e-3 and abs(inst.alpha - 3 * case3_rate(inst)) >= min_gap:
            return inst


GENERATORS = {"Case1": random_case1, "Case2": random_case2, "Case3": random_case3}
