import math
from fractions import Fraction

import numpy as np
import pytest

from wdcplane.aura import (
    DegenerateAuraData,
    RegionTag,
    aura_distance,
    graph_distance,
    graph_lemma_margins,
    m0_model,
    region_classify,
    tilde_distance,
    verify_graph_lemma,
    weak_regularity_certificate,
)
from wdcplane.config import load_model
from wdcplane.dc1 import dc_from_pl
from wdcplane.geometry import CompactSetModel, PLGraph
from wdcplane.oracle import brute_distance, densify
from wdcplane.sectors import BasicOpenSector, PRZLocalModel, build_local_set

from conftest import FIXTURES, PRZ_FIXTURES, random_pl

ZERO = dc_from_pl([0, 1], [0, 0])


def flat_data(L=1, rho=1):
    return DegenerateAuraData.from_profiles(ZERO, ZERO, rho, L)


def test_region_examples():
    d = flat_data()
    assert region_classify((1, 10), d) == RegionTag.M1
    assert region_classify((-1, 0), d) == RegionTag.M3
    assert region_classify((0.5, 0.0), d) == RegionTag.M0
    assert region_classify((0.5, -1.0), d) == RegionTag.M2


def test_tilde_examples():
    d = flat_data(L=Fraction(1, 2))
    assert tilde_distance((-1, 2), d) == pytest.approx(math.sqrt(5), abs=1e-12)
    assert tilde_distance((0, 0), d) == 0.0
    assert tilde_distance((-3, 0), d) == pytest.approx(3.0)


def test_tilde_is_one_of_its_pieces(rng):
    # the glued function agrees with one candidate at every point
    for _ in range(10):
        d = DegenerateAuraData.from_profiles(random_pl(rng, 0, 1), random_pl(rng, 0, 1), 1)
        Y = rng.uniform(-2, 2, (500, 2))
        cands = np.stack([np.zeros(len(Y)), graph_distance(Y, d.upper), graph_distance(Y, d.lower),
                          np.hypot(*Y.T)])
        val = tilde_distance(Y, d)
        assert np.all(np.min(np.abs(cands - val), axis=0) == 0.0)


def _raw_memberships(Y, d):
    u, v = Y.T
    F, G = d.upper.evaluate(u), d.lower.evaluate(u)
    L = float(d.L)
    return [
        (u >= 0) & (G <= v) & (v <= F),
        ((u >= 0) & (v >= F)) | ((u <= 0) & (v >= -u / (2 * L))),
        ((u >= 0) & (v <= G)) | ((u <= 0) & (v <= u / (2 * L))),
        (u <= 0) & (u / L <= v) & (v <= -u / L),
    ]


def test_region_overlaps_agree(rng):
    d = DegenerateAuraData.from_profiles(dc_from_pl([0, Fraction(1, 5), 1], [0, 0, Fraction(2, 5)]),
                                         dc_from_pl([0, Fraction(3, 10), 1], [0, 0, Fraction(-7, 10)]),
                                         Fraction(1, 2))
    Y = np.concatenate([rng.uniform(-0.2, 0.2, (20000, 2)),
                        np.column_stack([np.linspace(-0.2, 0, 200), np.linspace(0.2, 0, 200) / 2 / float(d.L)])])
    pieces = np.stack([np.zeros(len(Y)), graph_distance(Y, d.upper), graph_distance(Y, d.lower), np.hypot(*Y.T)])
    members = np.stack(_raw_memberships(Y, d))
    for i in range(4):
        for j in range(i + 1, 4):
            both = members[i] & members[j]
            assert np.all(np.abs(pieces[i, both] - pieces[j, both]) <= 1e-9), (i, j)


def test_aura_examples():
    one = PRZLocalModel((0, 0), 1, "complement", sectors=(BasicOpenSector(0, 1, 2, dc_from_pl([-2, 2], [0, 0])),))
    assert aura_distance(one, (0, 0.2)) == pytest.approx(0.2)
    iso = PRZLocalModel((1, 1), 1, "isolated")
    assert aura_distance(iso, (1.1, 0.9)) == pytest.approx(math.hypot(0.1, 0.1))
    two = load_model(FIXTURES / "complement_2.toml").local
    assert aura_distance(two, (0.1, 0.05)) == pytest.approx(0.05)


def test_aura_domain_check():
    iso = PRZLocalModel((0, 0), 1, "isolated")
    with pytest.raises(ValueError):
        aura_distance(iso, (0.5, 0))
    assert aura_distance(iso, (0.5, 0), restrict=False) == pytest.approx(0.5)


@pytest.mark.parametrize("name", PRZ_FIXTURES)
def test_aura_matches_brute_distance(name):
    loaded = load_model(FIXTURES / f"{name}.toml")
    m = loaded.local
    s = densify(loaded.compact, 1e-4)
    r = float(m.rho) / 3
    t = np.linspace(-r, r, 61)
    X, Y = np.meshgrid(t, t)
    P = np.column_stack([X.ravel(), Y.ravel()])
    P = P[np.hypot(*P.T) < r * (1 - 1e-9)] + np.asarray(m.center)
    assert np.max(np.abs(aura_distance(m, P) - brute_distance(P, s, polish=True))) <= 1e-6


def test_m0_model_contains_its_region():
    d = flat_data(L=1, rho=Fraction(1, 2))
    A = m0_model(d)
    assert A.contains(np.array([(0.3, 0.0)]))[0]
    assert not A.contains(np.array([(-0.1, 0.0)]))[0]


def test_certificate_single_point():
    c = weak_regularity_certificate(CompactSetModel.from_points([(0, 0)]))
    assert c.eps == Fraction(1, 2)
    assert c.min_hull_distance == pytest.approx(1.0)


def test_certificate_lipschitz_graph():
    f = dc_from_pl([-1, -Fraction(1, 3), Fraction(1, 4), 1], [0, Fraction(2, 3), Fraction(1, 12), Fraction(5, 6)])
    A = CompactSetModel(pl_graphs=[PLGraph(f, (-1, 1))])
    c = weak_regularity_certificate(A)
    assert c.eps == Fraction(1, 2)
    assert c.min_hull_distance >= 1 / math.sqrt(2) - 1e-9


def test_dyadic_twelve_points_no_certificate_down_to_its_gap():
    A = CompactSetModel.from_points([(0, 0)] + [(2.0 ** -n, 0) for n in range(1, 13)])
    eps = [Fraction(1, 2 ** k) for k in range(1, 13)]
    assert weak_regularity_certificate(A, eps) is None


def test_certificate_report_format():
    c = weak_regularity_certificate(CompactSetModel.from_points([(0, 0)]), [Fraction(1, 2)], n=500, seed=7)
    lines = c.report().splitlines()
    assert lines[0] == "# wdcplane-certificate v1"
    assert "eps = 1/2" in lines and "seed = 7" in lines


def test_certificate_deterministic():
    A = load_model(FIXTURES / "complement_3.toml").compact
    a = weak_regularity_certificate(A, [Fraction(1, 4)], n=1000, seed=3)
    b = weak_regularity_certificate(A, [Fraction(1, 4)], n=1000, seed=3)
    assert a.report() == b.report()


def test_graph_lemma_tight_abs():
    xi, u_ratio, v_ratio = graph_lemma_margins(dc_from_pl([0], [0], -1, 1), (0, 1), 1)
    assert xi == pytest.approx(1.0, abs=1e-12)
    assert u_ratio == pytest.approx(1.0, abs=1e-12)
    assert v_ratio == pytest.approx(1.0, abs=1e-12)


def test_graph_lemma_zero_function():
    rep = verify_graph_lemma(dc_from_pl([0], [0], 0, 0), trials=50, seed=1, L=0)
    assert rep.holds and rep.min_xi_ratio == pytest.approx(1.0)


def test_graph_lemma_random(rng):
    bad = 0
    for _ in range(200):
        L = Fraction(int(rng.integers(1, 41)), 10)
        f = random_pl(rng, total=True)
        f = _clip_slopes(f, L)
        bad += verify_graph_lemma(f, trials=1, seed=int(rng.integers(1 << 30)), L=L).violations
    assert bad == 0


def _clip_slopes(f, L):
    pl = f.pl
    slopes = [max(-L, min(L, s)) for s in pl.all_slopes()]
    ys = [pl.ys[0]]
    for x0, x1, s in zip(pl.xs, pl.xs[1:], slopes[1:]):
        ys.append(ys[-1] + s * (x1 - x0))
    return dc_from_pl(pl.xs, ys, slopes[0], slopes[-1])


def test_graph_lemma_rejects_small_L():
    with pytest.raises(ValueError):
        verify_graph_lemma(dc_from_pl([0], [0], -2, 2), L=1)
    with pytest.raises(ValueError):
        verify_graph_lemma(dc_from_pl([0, 1], [0, 0]))
