from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wdcplane.dc1 import (
    ConvexPL,
    DCFun1,
    TotalPL,
    dc_combine,
    dc_eval,
    dc_from_pl,
    dc_restrict,
    dump_dcfun1,
    extend_clamped,
    lipschitz_constant,
    load_dcfun1,
    radial_monotonicity,
)

from conftest import pl_tables, random_pl

U = dc_from_pl([0], [0], 1, 1)
ABS = dc_from_pl([0], [0], -1, 1)


def nondecreasing(c: ConvexPL) -> bool:
    s = c.all_slopes()
    return all(a <= b for a, b in zip(s, s[1:]))


def test_eval_identity():
    assert dc_eval(DCFun1(ConvexPL.affine(1, 0), ConvexPL.zero()), -2) == -2


def test_eval_abs_witness():
    g = ConvexPL.make([0], [0], 0, 2)
    f = DCFun1(g, ConvexPL.affine(1, 0))
    assert dc_eval(f, -3) == 3


def test_eval_equal_pair_is_zero():
    g = ConvexPL.make([-1, 0, 2], [3, 0, 1])
    f = DCFun1(g, g)
    assert all(dc_eval(f, u) == 0 for u in (-1, Fraction(-1, 3), 0, 2))


def test_eval_outside_domain():
    with pytest.raises(ValueError):
        dc_eval(dc_from_pl([0, 1], [0, 1]), 2)


def test_abs_of_identity():
    f = dc_combine("abs", U)
    assert f(-2) == 2
    assert f.g(Fraction(-2)) == 0 and f.g(Fraction(3)) == 6
    assert f.h(Fraction(5)) == 5


def test_max_of_u_and_minus_u():
    f = dc_combine("max", U, dc_combine("scale_add", U, a=-1))
    for u in (-1, Fraction(-1, 2), 0, Fraction(1, 2), 1):
        assert f(u) == abs(Fraction(u))


@pytest.mark.parametrize("op", ["scale_add", "abs", "max", "min"])
def test_combine_matches_pointwise(rng, op):
    for _ in range(50):
        f1, f2 = random_pl(rng), random_pl(rng)
        a, b = Fraction(int(rng.integers(-5, 6)), 4), Fraction(int(rng.integers(-5, 6)), 4)
        h = dc_combine(op, f1, f2, a, b)
        assert nondecreasing(h.g) and nondecreasing(h.h)
        for u in [Fraction(k, 16) for k in range(-32, 33, 3)]:
            x, y = f1(u), f2(u)
            want = {"scale_add": a * x + b * y, "abs": abs(x), "max": max(x, y), "min": min(x, y)}[op]
            assert h(u) == want


def test_combine_rejects_missing_operand():
    with pytest.raises(ValueError):
        dc_combine("max", U)
    with pytest.raises(ValueError):
        dc_combine("median", U, U)


@given(pl_tables())
@settings(max_examples=60, deadline=None)
def test_witness_reproduces_table(table):
    xs, ys = table
    f = dc_from_pl(xs, ys)
    assert nondecreasing(f.g) and nondecreasing(f.h)
    assert [f(x) for x in xs] == ys


@given(pl_tables(), st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=32), min_size=2, max_size=8))
@settings(max_examples=60, deadline=None)
def test_lipschitz_bounds_quotients(table, pts):
    f = dc_from_pl(*table)
    L = lipschitz_constant(f)
    for s in pts:
        for t in pts:
            if s != t:
                assert abs(f(s) - f(t)) <= L * abs(s - t)


def test_lipschitz_examples():
    assert lipschitz_constant(ABS) == 1
    f = dc_combine("scale_add", dc_restrict(U, -1, 1), dc_restrict(ABS, -1, 1), 3, -1)
    assert lipschitz_constant(f) == 4
    assert lipschitz_constant(dc_from_pl([0, 1], [5, 5])) == 0


def test_lipschitz_on_subinterval():
    f = dc_from_pl([0, 1, 2], [0, 3, 4])
    assert lipschitz_constant(f, 1, 2) == 1
    assert lipschitz_constant(f, 0, 2) == 3


def test_radial_monotonicity_examples():
    zero = dc_from_pl([-1, 1], [0, 0])
    assert radial_monotonicity(zero, "right_increasing")
    assert radial_monotonicity(zero, "left_decreasing")
    assert not radial_monotonicity(dc_from_pl([0, 2], [1, -1]), "right_increasing")
    assert radial_monotonicity(dc_restrict(ABS, -1, 1), "right_increasing")
    with pytest.raises(ValueError):
        radial_monotonicity(zero, "up")


def test_radial_monotonicity_matches_grid(rng):
    for _ in range(100):
        f = random_pl(rng)
        us = [Fraction(k, 64) for k in range(0, 129)]
        r2 = [u * u + f(u) ** 2 for u in us]
        grid_ok = all(a < b for a, b in zip(r2, r2[1:]))
        if grid_ok != radial_monotonicity(f, "right_increasing"):
            # a grid of spacing 1/64 misses decreases only on very short pieces
            assert radial_monotonicity(f, "right_increasing") is False


def test_extend_clamped_examples():
    zero = dc_from_pl([0, 1], [0, 0])
    assert extend_clamped(zero, "lower_sector", 1)(-1) == 2
    assert extend_clamped(zero, "upper_sector", 1)(-1) == -2
    ident = dc_from_pl([-1, 1], [-1, 1])
    assert extend_clamped(ident, "constant_both")(2) == 1


def test_extend_clamped_rejects_small_L():
    with pytest.raises(ValueError):
        extend_clamped(dc_from_pl([0, 1], [0, 2]), "upper_sector", 1)
    with pytest.raises(ValueError):
        extend_clamped(dc_from_pl([-1, 1], [0, 0]), "upper_sector", 1)


def test_extensions_are_lipschitz(rng):
    for _ in range(50):
        f = random_pl(rng, 0, 1)
        L = max(lipschitz_constant(f), Fraction(1, 4))
        for mode in ("upper_sector", "lower_sector"):
            t = extend_clamped(f, mode, L)
            assert isinstance(t, TotalPL)
            assert lipschitz_constant(t) <= 2 * L
        assert lipschitz_constant(extend_clamped(f, "constant_both")) <= L


def test_serialization_round_trip(rng):
    for _ in range(20):
        f = random_pl(rng, total=bool(rng.integers(2)))
        back = load_dcfun1(dump_dcfun1(f))
        assert back.g == f.g and back.h == f.h


def test_load_rejects_missing_section():
    with pytest.raises(ValueError):
        load_dcfun1("# dcfun1 v1\n[g]\n0 0\n1 1\n")


def test_convex_validation():
    with pytest.raises(ValueError):
        ConvexPL.make([0, 1, 2], [0, 1, 1])


def test_float_evaluation_matches_exact(rng):
    f = random_pl(rng, total=True)
    us = np.linspace(-4, 4, 101)
    exact = np.array([float(f(Fraction(u).limit_denominator(10 ** 9))) for u in us])
    assert np.allclose(f.evaluate(us), exact, atol=1e-8)
