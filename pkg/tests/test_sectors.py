import math
from fractions import Fraction

import numpy as np
import pytest

from wdcplane.dc1 import dc_from_pl, lipschitz_constant
from wdcplane.geometry import distance_field, to_local
from wdcplane.sectors import (
    BasicOpenSector,
    DegenerateClosedSector,
    PRZLocalModel,
    build_local_set,
    disjointness_check,
    radius_crossing,
    sector_contains,
    validate_model,
    validate_sector,
)

ZERO = dc_from_pl([-2, 2], [0, 0])
HALF = Fraction(1, 2)


def flat(theta=0.0, r=1, omega=2):
    return BasicOpenSector(theta, r, omega, ZERO)


def wedge(theta, slope=2, r=HALF):
    return BasicOpenSector(theta, r, 1, dc_from_pl([-1, 0, 1], [slope, 0, slope]))


def test_validate_examples():
    assert validate_sector(flat()) == []
    assert "f(0) ≠ 0" in validate_sector(BasicOpenSector(0, 1, 2, dc_from_pl([-2, 2], [3, -1])))
    ramp = dc_from_pl([0, 2], [0, 2])
    assert "f′₊(0) ≠ 0" in validate_sector(DegenerateClosedSector(0, 1, 2, ramp, dc_from_pl([0, 2], [0, 0])))


def test_validate_radius_and_order():
    assert validate_sector(flat(r=3)) != []
    g_above = DegenerateClosedSector(0, 1, 2, dc_from_pl([0, 2], [0, 0]), dc_from_pl([0, 1, 2], [0, 0, 1]))
    assert any("g > f" in v for v in validate_sector(g_above))


def test_validate_radial_monotonicity():
    # a steep drop that still moves away from the origin
    f = dc_from_pl([-2, 0, Fraction(1, 2), 2], [0, 0, 0, -4])
    assert validate_sector(BasicOpenSector(0, 1, 2, f)) == []
    g = dc_from_pl([-2, 0, 2], [0, 0, 4])
    f2 = dc_from_pl([-2, 0, 1, 2], [0, 0, 5, -5])
    assert any("increasing" in v for v in validate_sector(BasicOpenSector(0, 1, 2, f2)))
    assert validate_sector(BasicOpenSector(0, 1, 2, g)) == []


def test_contains_examples():
    s = flat()
    assert sector_contains(s, (0, 0.5)) is True
    assert sector_contains(s, (0, -0.5)) is False
    assert sector_contains(s, (0, 2)) is False


def test_contains_is_rotation_covariant(rng):
    s0, s1 = wedge(0.0), wedge(1.1)
    P = rng.uniform(-0.6, 0.6, (500, 2))
    c, s = math.cos(1.1), math.sin(1.1)
    Q = P @ np.array([[c, s], [-s, c]])
    assert np.array_equal(sector_contains(s0, P), sector_contains(s1, Q))


def test_contained_points_stay_in_profile_domain(rng):
    s = wedge(0.4)
    P = rng.uniform(-1, 1, (2000, 2))
    inside = sector_contains(s, P)
    u, _ = to_local(P[inside], (0, 0), s.cs)
    assert np.all(np.abs(u) < float(s.omega))


def test_build_isolated():
    A = build_local_set(PRZLocalModel((1, 2), HALF, "isolated"))
    assert A.points == ((1.0, 2.0),) and not A.segments and not A.pl_graphs


def test_build_degenerate_flat_is_radial_segment():
    zero = dc_from_pl([0, 1], [0, 0])
    m = PRZLocalModel((0.1, 0.2), HALF, "degenerate", DegenerateClosedSector(math.pi / 2, HALF, 1, zero, zero))
    A = build_local_set(m)
    segs = A.flat_segments
    assert len(segs) == 1
    assert np.allclose(sorted([segs[0, 1], segs[0, 3]]), [0.2, 0.2 + 0.5 * (1 - 1e-3)])
    assert np.allclose(segs[0, [0, 2]], 0.1)


def test_build_two_flat_sectors_is_diameter():
    m = PRZLocalModel((0, 0), HALF, "complement", sectors=(flat(0, HALF, 1), flat(math.pi, HALF, 1)))
    A = build_local_set(m)
    t = np.linspace(-0.6, 0.6, 200)
    X, Y = np.meshgrid(t, t)
    P = np.column_stack([X.ravel(), Y.ravel()])
    R = 0.5 * (1 - 1e-3)
    member = distance_field(A, P) <= 1e-12
    on_diameter = (np.abs(P[:, 1]) <= 1e-12) & (np.abs(P[:, 0]) <= R)
    assert np.array_equal(member, on_diameter)
    assert distance_field(A, [(0.1, 0.05)])[0] == pytest.approx(0.05)


def test_complement_membership_agrees_with_definition(rng):
    sectors = tuple(wedge(t) for t in (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6))
    m = PRZLocalModel((0.2, -0.1), HALF, "complement", sectors=sectors)
    A = build_local_set(m)
    P = (0.2, -0.1) + rng.uniform(-0.55, 0.55, (4000, 2))
    R = 0.5 * (1 - 1e-3)
    in_ball = np.hypot(P[:, 0] - 0.2, P[:, 1] + 0.1) <= R
    in_sector = np.zeros(len(P), bool)
    for s in sectors:
        in_sector |= sector_contains(s, P, (0.2, -0.1))
    assert np.array_equal(A.contains(P, tol=0.0) | (distance_field(A, P) == 0), in_ball & ~in_sector)


def test_degenerate_inside_cone(rng):
    for _ in range(20):
        a, b = (Fraction(int(k), 8) for k in rng.integers(1, 9, 2))
        f = dc_from_pl([0, Fraction(1, 8), 1], [0, 0, a * Fraction(7, 8)])
        g = dc_from_pl([0, Fraction(1, 4), 1], [0, 0, -b * Fraction(3, 4)])
        s = DegenerateClosedSector(float(rng.uniform(0, 2 * math.pi)), HALF, 1, f, g)
        assert validate_sector(s) == []
        A = build_local_set(PRZLocalModel((0, 0), HALF, "degenerate", s))
        P = rng.uniform(-0.6, 0.6, (3000, 2))
        P = P[distance_field(A, P) == 0]
        assert len(P)
        u, v = to_local(P, (0, 0), s.cs)
        L = float(max(lipschitz_constant(f), lipschitz_constant(g)))
        assert np.all(u >= -1e-12)
        assert np.all(np.abs(v) <= L * u + 1e-12)


def test_disjointness_examples():
    assert disjointness_check([wedge(math.pi / 2), wedge(-math.pi / 2)])
    assert not disjointness_check([wedge(0.3), wedge(0.3)])
    assert disjointness_check([flat(0, HALF, 1), flat(math.pi, HALF, 1)])


def test_disjointness_sampled_path():
    # overlapping angular supports send the check to the grid search
    a = BasicOpenSector(0, HALF, 1, dc_from_pl([-1, 0, 1], [Fraction(1, 10), 0, Fraction(1, 10)]))
    b = BasicOpenSector(0.05, HALF, 1, dc_from_pl([-1, 0, 1], [Fraction(1, 10), 0, Fraction(1, 10)]))
    assert not disjointness_check([a, b])


def test_validate_model_flags_overlap_and_radius():
    bad = PRZLocalModel((0, 0), HALF, "complement", sectors=(wedge(0.3), wedge(0.3)))
    assert "sectors are not pairwise disjoint" in validate_model(bad)
    off = PRZLocalModel((0, 0), 1, "complement", sectors=(wedge(0.3),))
    assert any("radius" in v for v in validate_model(off))
    with pytest.raises(ValueError):
        build_local_set(bad)


def test_radius_crossing():
    f = dc_from_pl([-1, 0, 1], [1, 0, 1])
    u = radius_crossing(f, 0.5, 1)
    assert u == pytest.approx(0.5 / math.sqrt(2))
    assert radius_crossing(f, 0.5, -1) == pytest.approx(-0.5 / math.sqrt(2))
    with pytest.raises(ValueError):
        radius_crossing(f, 5.0, 1)
