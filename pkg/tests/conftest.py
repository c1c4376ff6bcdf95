from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from wdcplane.dc1 import dc_from_pl

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "wdcplane" / "fixtures"
PRZ_FIXTURES = ["isolated", "degenerate_flat", "degenerate_kinked",
                "complement_1", "complement_2", "complement_3"]


def random_pl(rng, lo=-2, hi=2, k=None, total=False, denom=8):
    """Random PL DCFun1 on [lo, hi] (or the whole line) with dyadic data."""
    k = int(rng.integers(2, 6)) if k is None else k
    inner = sorted({Fraction(int(rng.integers(lo * denom + 1, hi * denom)), denom) for _ in range(k)})
    xs = [Fraction(lo)] + [x for x in inner if lo < x < hi] + [Fraction(hi)]
    ys = [Fraction(int(rng.integers(-3 * denom, 3 * denom + 1)), denom) for _ in xs]
    if total:
        ls, rs = (Fraction(int(rng.integers(-2 * denom, 2 * denom + 1)), denom) for _ in range(2))
        return dc_from_pl(xs, ys, ls, rs)
    return dc_from_pl(xs, ys)


@st.composite
def pl_tables(draw, lo=-2, hi=2, max_inner=4):
    inner = draw(st.lists(st.fractions(min_value=lo, max_value=hi, max_denominator=16),
                          max_size=max_inner, unique=True))
    xs = sorted({Fraction(lo), Fraction(hi), *inner})
    ys = draw(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=16),
                       min_size=len(xs), max_size=len(xs)))
    return xs, ys


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
