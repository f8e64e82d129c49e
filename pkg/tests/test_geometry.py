import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flexfor.geometry import (
    DegenerateRegionError,
    ForPolygon,
    area,
    convex_hull,
    intersect,
    jaccard,
)

UNIT_SQUARE = ForPolygon(vertices=((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))


def _random_convex(rng, scale=1.0, offset=(0.0, 0.0)):
    pts = rng.uniform(size=(30, 2)) * scale + np.asarray(offset)
    return convex_hull(pts)


def test_hull_of_square_with_interior_points():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5), (0.2, 0.7), (0.9, 0.1)]
    hull = convex_hull(pts)
    assert len(hull.vertices) == 4
    assert area(hull) == pytest.approx(1.0)


def test_hull_of_triangle():
    hull = convex_hull([(0, 0), (2, 0), (0, 2)])
    assert len(hull.vertices) == 3
    assert area(hull) == pytest.approx(2.0)


def test_hull_is_counter_clockwise():
    rng = np.random.default_rng(1)
    hull = _random_convex(rng)
    v = hull.as_array()
    n = len(v)
    for i in range(n):
        o, a, b = v[i], v[(i + 1) % n], v[(i + 2) % n]
        cross = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
        assert cross > 0.0  # strictly convex: no collinear triples kept


def test_hull_contains_all_inputs_disc():
    rng = np.random.default_rng(2)
    angles = rng.uniform(0, 2 * np.pi, size=10000)
    radii = np.sqrt(rng.uniform(size=10000))
    pts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    hull = convex_hull(pts)
    assert area(hull) <= np.pi
    # containment oracle: every point left of every directed hull edge
    v = hull.as_array()
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        assert (cross >= -1e-9).all()
    # every hull vertex is an input point
    input_set = set(map(tuple, pts.tolist()))
    assert all(tuple(p) in input_set for p in hull.vertices)


def test_degenerate_hulls_rejected():
    with pytest.raises(DegenerateRegionError):
        convex_hull([(0, 0), (1, 1)])
    with pytest.raises(DegenerateRegionError):
        convex_hull([(0, 0), (1, 1), (2, 2), (3, 3)])


def test_monte_carlo_area_of_uniform_hull():
    rng = np.random.default_rng(3)
    hull = convex_hull(rng.uniform(size=(100000, 2)))
    assert 0.98 < area(hull) < 1.0


def test_intersection_of_offset_squares():
    b = ForPolygon(vertices=((0.5, 0.0), (1.5, 0.0), (1.5, 1.0), (0.5, 1.0)))
    inter = intersect(UNIT_SQUARE, b)
    assert area(inter) == pytest.approx(0.5, abs=1e-12)


def test_disjoint_squares_empty():
    b = ForPolygon(vertices=((5.0, 5.0), (6.0, 5.0), (6.0, 6.0), (5.0, 6.0)))
    assert intersect(UNIT_SQUARE, b) is None
    assert jaccard(UNIT_SQUARE, b) == 0.0


def test_self_intersection_exact():
    rng = np.random.default_rng(4)
    for _ in range(10):
        poly = _random_convex(rng, scale=rng.uniform(0.5, 200.0))
        inter = intersect(poly, poly)
        assert area(inter) == pytest.approx(area(poly), abs=1e-9)
        assert jaccard(poly, poly) == pytest.approx(1.0, abs=1e-9)


def test_overlapping_squares_one_third():
    b = ForPolygon(vertices=((0.5, 0.0), (1.5, 0.0), (1.5, 1.0), (0.5, 1.0)))
    assert jaccard(UNIT_SQUARE, b) == pytest.approx(1.0 / 3.0, abs=1e-9)


@given(seed=st.integers(0, 10**6))
@settings(max_examples=50)
def test_jaccard_symmetry_and_bounds(seed):
    rng = np.random.default_rng(seed)
    a = _random_convex(rng)
    b = _random_convex(rng, offset=(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)))
    j_ab = jaccard(a, b)
    j_ba = jaccard(b, a)
    assert abs(j_ab - j_ba) < 1e-12
    assert 0.0 <= j_ab <= 1.0


@given(seed=st.integers(0, 10**6), scale=st.floats(1e-3, 1e6))
@settings(max_examples=50)
def test_jaccard_scale_invariance(seed, scale):
    rng = np.random.default_rng(seed)
    a = _random_convex(rng)
    b = _random_convex(rng, offset=(0.3, 0.2))
    scaled_a = ForPolygon(tuple((x * scale, y * scale) for x, y in a.vertices))
    scaled_b = ForPolygon(tuple((x * scale, y * scale) for x, y in b.vertices))
    assert jaccard(scaled_a, scaled_b) == pytest.approx(jaccard(a, b), abs=1e-9)


def test_both_degenerate_is_error():
    # ForPolygon construction itself refuses < 3 vertices
    with pytest.raises(DegenerateRegionError):
        ForPolygon(vertices=((0.0, 0.0), (1.0, 1.0)))


def test_hull_json_round_trip():
    hull = convex_hull([(0, 0), (3, 0), (3, 2), (0, 2), (1, 1)])
    restored = ForPolygon.from_json(hull.to_json())
    assert restored.vertices == hull.vertices
