import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parkwalk.errors import DegenerateGeometryError
from parkwalk.geometry import ConvexPolygon, Polygon, Region, clip_to_convex, convex_hull, polygon_area

from conftest import mc_inside, random_star, square


def brute_force_hull_vertices(pts):
    """A point is a hull vertex iff it is not inside/on any triangle of the others
    and not strictly between two others on a segment. O(n^4) but small n."""
    out = set()
    n = len(pts)
    for i in range(n):
        p = pts[i]
        extreme = True
        others = [j for j in range(n) if j != i]
        for a, b, c in itertools.combinations(others, 3):
            A, B, C = pts[a], pts[b], pts[c]
            d1 = (B[0] - A[0]) * (p[1] - A[1]) - (B[1] - A[1]) * (p[0] - A[0])
            d2 = (C[0] - B[0]) * (p[1] - B[1]) - (C[1] - B[1]) * (p[0] - B[0])
            d3 = (A[0] - C[0]) * (p[1] - C[1]) - (A[1] - C[1]) * (p[0] - C[0])
            if (d1 >= 0 and d2 >= 0 and d3 >= 0) or (d1 <= 0 and d2 <= 0 and d3 <= 0):
                extreme = False
                break
        if extreme:
            out.add(i)
    return out


def extreme_point_oracle(pts):
    """Direction sampling is not exhaustive; use the O(n^3) supporting-line test:
    p is a hull vertex iff some line through p has every other point strictly on one side.
    Equivalently, the angular gap around p between directions to other points exceeds pi."""
    out = set()
    for i, p in enumerate(pts):
        d = np.delete(pts, i, axis=0) - p
        ang = np.sort(np.arctan2(d[:, 1], d[:, 0]))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        if gaps.max() > np.pi + 1e-12:
            out.add(i)
    return out


class TestArea:
    def test_unit_square(self):
        assert polygon_area(square(0, 0)) == 1.0

    def test_right_triangle(self):
        assert polygon_area([(0, 0), (4, 0), (0, 3)]) == 6.0

    def test_clockwise_input_is_reoriented(self):
        assert polygon_area(square(0, 0)[::-1]) == 1.0

    def test_collinear_is_degenerate(self):
        with pytest.raises(DegenerateGeometryError):
            polygon_area([(0, 0), (1, 1), (2, 2)])

    def test_non_finite_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            Polygon([(0, 0), (1, np.nan), (0, 1)])


class TestHull:
    def test_interior_point_dropped(self):
        h = convex_hull(np.vstack([square(0, 0), [[0.5, 0.5]]]))
        assert len(h) == 4
        assert h.area == pytest.approx(1.0, abs=1e-15)

    def test_triangle_is_itself(self):
        tri = np.array([(0, 0), (3, 1), (1, 2)], dtype=float)
        h = convex_hull(tri)
        assert {tuple(v) for v in h.vertices} == {tuple(v) for v in tri}

    def test_collinear_raises(self):
        with pytest.raises(DegenerateGeometryError):
            convex_hull([(0, 0), (1, 1), (2, 2), (3, 3)])

    def test_too_few_points(self):
        with pytest.raises(DegenerateGeometryError):
            convex_hull([(0, 0), (1, 1)])
        with pytest.raises(DegenerateGeometryError):
            convex_hull([(0, 0), (1, 1), (0, 0)])

    def test_matches_extreme_point_oracle_in_disk(self, rng):
        r = np.sqrt(rng.uniform(0, 1, 200))
        t = rng.uniform(0, 2 * np.pi, 200)
        pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
        h = convex_hull(pts)
        got = {tuple(v) for v in h.vertices}
        want = {tuple(pts[i]) for i in extreme_point_oracle(pts)}
        assert got == want

    def test_oracles_agree_on_small_sets(self, rng):
        for _ in range(5):
            pts = rng.uniform(0, 1, (12, 2))
            assert brute_force_hull_vertices(pts) == extreme_point_oracle(pts)
            assert {tuple(v) for v in convex_hull(pts).vertices} == {tuple(pts[i]) for i in extreme_point_oracle(pts)}

    def test_ccw_and_convex(self, rng):
        h = convex_hull(rng.normal(size=(100, 2)))
        assert isinstance(h, ConvexPolygon)
        v = h.vertices
        e1 = np.roll(v, -1, 0) - v
        e2 = np.roll(v, -2, 0) - np.roll(v, -1, 0)
        assert np.all(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] > 0)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=4, max_size=40),
           st.integers(1, 3))
    def test_monotone_under_subsets(self, pts, drop):
        pts = np.array(pts)
        try:
            big = convex_hull(pts).area
        except DegenerateGeometryError:
            return
        try:
            small = convex_hull(pts[:-drop]).area
        except DegenerateGeometryError:
            return
        assert small <= big * (1 + 1e-12) + 1e-9


class TestClip:
    def test_quarter_overlap(self):
        area, ring = clip_to_convex(square(0, 0), ConvexPolygon(square(0.5, 0.5)))
        assert abs(area - 0.25) < 1e-12
        assert ring is not None and len(ring) == 4

    def test_disjoint(self):
        area, ring = clip_to_convex(square(0, 0), ConvexPolygon(square(5, 5)))
        assert area == 0.0 and ring is None

    def test_subject_inside_clip(self):
        sub = square(0.2, 0.2, 0.3)
        area, _ = clip_to_convex(sub, ConvexPolygon(square(0, 0)))
        assert area == pytest.approx(polygon_area(sub), rel=1e-14)

    def test_touching_edge_only(self):
        area, _ = clip_to_convex(square(1, 0), ConvexPolygon(square(0, 0)))
        assert area == 0.0

    def test_concave_subject_against_monte_carlo(self, rng):
        for _ in range(10):
            sub = random_star(rng, 11)
            clip = convex_hull(rng.uniform(-0.8, 0.8, (8, 2)))
            area, _ = clip_to_convex(sub, clip)
            pts = rng.uniform(-1, 1, (200_000, 2))
            est = 4.0 * np.mean(mc_inside(pts, sub) & mc_inside(pts, clip.vertices))
            assert area == pytest.approx(est, abs=0.02)

    def test_area_bounded_by_both(self, rng):
        for _ in range(50):
            sub = random_star(rng, 9, center=rng.uniform(-1, 1, 2))
            clip = convex_hull(rng.uniform(-1, 1, (7, 2)))
            a, _ = clip_to_convex(sub, clip)
            assert a <= min(polygon_area(sub), clip.area) * (1 + 1e-12)

    def test_translation_invariance(self, rng):
        for _ in range(20):
            sub = random_star(rng, 9)
            clip = convex_hull(rng.uniform(-1, 1, (7, 2)))
            a0, _ = clip_to_convex(sub, clip)
            shift = rng.uniform(-5e5, 5e5, 2)
            a1, _ = clip_to_convex(sub + shift, ConvexPolygon(clip.vertices + shift))
            assert abs(a1 - a0) <= 1e-9 * max(a0, 1e-300) or a0 == a1 == 0.0

    def test_vertex_order_independence(self, rng):
        sub = random_star(rng, 9)
        clip = convex_hull(rng.uniform(-1, 1, (7, 2)))
        a0, _ = clip_to_convex(sub, clip)
        a1, _ = clip_to_convex(np.roll(sub, 3, axis=0), ConvexPolygon(np.roll(clip.vertices, 2, axis=0)))
        assert a1 == pytest.approx(a0, rel=1e-12)

    def test_partition_additivity(self, rng):
        # a 4x3 grid of tracts, jittered interior vertices keep it a tiling
        xs = np.linspace(0, 4, 5)
        ys = np.linspace(0, 3, 4)
        grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), -1)
        grid[1:-1, 1:-1] += rng.uniform(-0.3, 0.3, grid[1:-1, 1:-1].shape)
        tracts = [np.array([grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1]])
                  for i in range(4) for j in range(3)]
        for _ in range(20):
            w = convex_hull(rng.uniform([0.1, 0.1], [3.9, 2.9], (10, 2)))
            total = sum(clip_to_convex(t, w)[0] for t in tracts)
            assert total == pytest.approx(w.area, rel=1e-6)


class TestRegion:
    def test_hole_is_subtracted(self):
        outer = Polygon(square(0, 0, 4))
        hole = Polygon(square(1, 1, 2))
        region = Region(((outer, (hole,)),))
        assert region.area == 12.0
        a, _ = clip_to_convex(region, ConvexPolygon(square(0, 0, 2)))
        assert a == pytest.approx(3.0, abs=1e-12)

    def test_multipart_sums(self):
        region = Region(((Polygon(square(0, 0)), ()), (Polygon(square(3, 0)), ())))
        assert region.area == 2.0
        a, _ = clip_to_convex(region, ConvexPolygon(square(0.5, 0, 3)))
        assert a == pytest.approx(1.0, abs=1e-12)
