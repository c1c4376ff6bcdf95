import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wdcplane.clarke import (
    LipschitzEvaluator2,
    directional_upper_derivative,
    find_decrease_direction,
    fu_subdifferential,
    sampled_clarke,
)
from wdcplane.dc1 import dc_from_pl
from wdcplane.geometry import (
    CompactSetModel,
    PLGraph,
    SubdiffHull,
    distance_origin_to_hull,
    distance_point_to_hull,
    hull_hausdorff,
)

ABS_GRAPH = CompactSetModel(pl_graphs=[PLGraph(dc_from_pl([-2, 0, 2], [2, 0, 2]), (-2, 2))])
AXES = [(1, 0), (0, 1), (-1, 0), (0, -1)]
R2 = math.sqrt(0.5)


def test_fu_single_point():
    H = fu_subdifferential((3, 4), CompactSetModel.from_points([(0, 0)]))
    assert np.allclose(H.array, [(0.6, 0.8)])
    assert distance_origin_to_hull(H) == pytest.approx(1.0)


def test_fu_abs_graph():
    H = fu_subdifferential((0, 1), ABS_GRAPH)
    assert hull_hausdorff(H, SubdiffHull.from_points([(-R2, R2), (R2, R2)])) < 1e-12


def test_fu_segment():
    H = fu_subdifferential((0, 1), CompactSetModel(segments=[((-2, 0), (2, 0))]))
    assert np.allclose(H.array, [(0, 1)])


def test_fu_rejects_points_of_the_set():
    with pytest.raises(ValueError):
        fu_subdifferential((1, 1), ABS_GRAPH)


def test_sampled_smooth_norm():
    # gradients vary by about h/|x| over the disc, so h must be small here
    H = sampled_clarke(LipschitzEvaluator2.norm(), (3, 4), 1e-6)
    assert hull_hausdorff(H, SubdiffHull.from_points([(0.6, 0.8)])) < 1e-6


def test_sampled_abs_graph_near_fu():
    f = LipschitzEvaluator2.distance_to(ABS_GRAPH)
    H = sampled_clarke(f, (0, 1), 1e-4)
    assert hull_hausdorff(H, fu_subdifferential((0, 1), ABS_GRAPH)) < 1e-2


def test_sampled_linear():
    H = sampled_clarke(LipschitzEvaluator2.linear((2, -1)), (0.3, 0.1), 1e-3)
    assert hull_hausdorff(H, SubdiffHull.from_points([(2, -1)])) < 1e-9


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 2 * math.pi))
@settings(max_examples=50, deadline=None)
def test_upper_derivative_linear(c1, c2, t):
    v = (math.cos(t), math.sin(t))
    q = directional_upper_derivative(LipschitzEvaluator2.linear((c1, c2)), (0.2, -0.4), v)
    assert q == pytest.approx(c1 * v[0] + c2 * v[1], abs=1e-9)


def test_upper_derivative_norm_and_negative_norm():
    assert directional_upper_derivative(LipschitzEvaluator2.norm(), (0, 0), (1, 0)) == pytest.approx(1, abs=1e-6)
    assert directional_upper_derivative(LipschitzEvaluator2.norm(-1), (0, 0), (1, 0)) == pytest.approx(1, abs=1e-3)


def test_decrease_direction_examples():
    p = find_decrease_direction(LipschitzEvaluator2.norm(), (1, 0), 0.5, AXES, [0.5, 0.25])
    assert p is not None and p.direction == (-1.0, 0.0)
    const = LipschitzEvaluator2(lambda P: np.ones(len(P)), 0.0)
    assert find_decrease_direction(const, (0, 0), 1e-3, AXES, [0.5, 0.1]) is None
    p = find_decrease_direction(LipschitzEvaluator2.distance_to(ABS_GRAPH), (0, 1), 0.5, AXES, [0.25, 0.1])
    assert p is not None and p.direction == (0.0, -1.0)


def test_fu_vertices_are_unit(rng):
    A = CompactSetModel(points=[(0.5, 0.5), (-0.5, 0.5)], pl_graphs=ABS_GRAPH.pl_graphs)
    for z in rng.uniform(-3, 3, (200, 2)):
        try:
            H = fu_subdifferential(z, A)
        except ValueError:
            continue
        assert np.allclose(np.hypot(*H.array.T), 1.0, atol=1e-9)


def test_upper_semicontinuity():
    A = CompactSetModel.from_points([(-1, 0), (1, 0)])
    H0 = fu_subdifferential((0, 0.5), A)
    errs = []
    for r in (1e-1, 1e-2, 1e-3, 1e-4):
        Hi = fu_subdifferential((r, 0.5 + r), A)
        errs.append(max(distance_point_to_hull(v, H0) for v in Hi.vertices))
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 1e-3


@pytest.mark.parametrize("alpha", [0.5, 2.0, -1.5])
def test_scaling(alpha):
    f = LipschitzEvaluator2.distance_to(ABS_GRAPH)
    x = (0.7, -0.3)
    H = sampled_clarke(f, x, 1e-4)
    Ha = sampled_clarke(f.scaled(alpha), x, 1e-4)
    assert hull_hausdorff(Ha, H.scaled(alpha)) < 1e-9
    Fu = fu_subdifferential(x, ABS_GRAPH)
    assert np.allclose(Fu.scaled(alpha).array, alpha * Fu.array)
