import random

import pytest

from zebra import errors
from zebra.connect import (DOUBLE_LEAF, Cover, PolygonCorner, polygon_convexity_check,
                           propagate_rays, trail_between, trail_to)
from zebra.exact import Rational, lerp, q, vec
from zebra.invariants import verify_trail


def centroid(tri):
    return tuple(sum(p[i] for p in tri) / 3 for i in range(2))


def test_budget_zero_at_a_cone_covers_its_fan(surface):
    s = surface("octagon")
    cov = propagate_rays(s, 0, s.triangles[0][0], budget=0)
    assert cov.covered == len(s.cones[0].corners)
    assert {st.kind for st in cov.status.values()} == {DOUBLE_LEAF}


def test_budget_zero_in_a_triangle_covers_only_it(surface):
    s = surface("octagon")
    cov = propagate_rays(s, 0, centroid(s.triangles[0]), budget=0)
    assert cov.covered == 1


def test_octagon_from_the_cone_has_no_invariant_errors(surface):
    s = surface("octagon")
    cov = propagate_rays(s, 0, s.triangles[0][0], budget=200)
    assert cov.covered >= 200
    assert cov.errors == []


def test_coverage_is_monotone_in_budget(surface):
    s = surface("l_shaped")
    x = centroid(s.triangles[2])
    sizes = [propagate_rays(s, 2, x, budget=b).covered for b in (50, 100, 200, 400)]
    assert sizes == sorted(sizes)


def _inside(small, big):
    for n in small.status:
        m = big.cover.follow(big.base_node, small.cover.path_to(small.base_node, n))
        if m is None or m not in big.status:
            return False
    return True


def test_coverage_independent_of_base_enqueue_order(surface):
    # orders may differ at the budget frontier, so compare against a larger run
    s = surface("octagon")
    x = centroid(s.triangles[0])
    for order in ([2, 1, 0], [1, 0, 2]):
        a = propagate_rays(s, 0, x, budget=300)
        b = propagate_rays(s, 0, x, budget=300, base_order=order)
        big_a = propagate_rays(s, 0, x, budget=2000)
        big_b = propagate_rays(s, 0, x, budget=2000, base_order=order)
        assert b.errors == [] and big_b.errors == []
        assert _inside(b, big_a)
        assert _inside(a, big_b)


def test_non_leaf_triangulation_is_refused(surface):
    s = surface("square_torus")
    with pytest.raises(errors.NotLeafTriangulation):
        propagate_rays(s, 0, centroid(s.triangles[0]))


def test_square_torus_plane_gives_the_straight_segment(surface):
    s = surface("square_torus")
    p, qq = (q("1/4"), q("1/2")), (q("3/4"), q("1/2"))
    tp = 0 if s.locate(p, 0)[0] == "interior" else 1
    tq = 0 if s.locate(qq, 0)[0] == "interior" else 1
    path = [] if tp == tq else [next(e for e in range(3) if s.twin(tp, e)[0] == tq)]
    ans = trail_between(s, tp, p, path, qq)
    assert ans.trail.bends == []
    pts = [ans.trail.pieces[0].a, ans.trail.pieces[-1].b]
    assert pts[0] == p and pts[1] == qq


def test_same_point_gives_a_point_trail(surface):
    s = surface("octagon")
    x = centroid(s.triangles[0])
    ans = trail_between(s, 0, x, [], x)
    assert ans.trail.is_point or all(pc.a == pc.b for pc in ans.trail.pieces)


def test_trail_around_the_cone_bends_once(surface):
    s = surface("octagon")
    cover = Cover(s)
    root = cover.root(0)
    ring = cover.ring_around(root, 0)
    x = centroid(s.triangles[0])
    found = False
    for j in range(4, len(ring) - 4):
        n, _ = ring[j]
        target = centroid(s.triangles[cover.nodes[n].tri])
        ans = trail_between(s, 0, x, cover.path_to(root, n), target)
        if len(ans.trail.bends) == 1:
            b = ans.trail.bends[0]
            assert b.left.at_least_pi and b.right.at_least_pi
            total = b.left.n + b.right.n + (0 if b.left.exact else 1)
            assert total == 6
            assert verify_trail(s, ans.trail).ok
            found = True
    assert found


def test_reverse_query_agrees(surface):
    s = surface("l_shaped")
    rng = random.Random(3)
    x = centroid(s.triangles[1])
    near = propagate_rays(s, 1, x, budget=150)
    for n in rng.sample(sorted(near.status), 10):
        tq = near.cover.nodes[n].tri
        y = centroid(s.triangles[tq])
        path = near.cover.path_to(near.base_node, n)
        fwd = trail_between(s, 1, x, path, y)
        back = near.cover.path_to(n, near.base_node)
        rev = trail_between(s, tq, y, back, x)
        assert fwd.trail.key() == rev.trail.reversed_key()


def test_uncovered_target_reports_not_covered(surface):
    s = surface("octagon")
    cover = Cover(s)
    r = cover.root(0)
    far = cover.walk(r, [0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2] * 3)
    path = cover.path_to(r, far)
    with pytest.raises(errors.NotCovered):
        trail_between(s, 0, centroid(s.triangles[0]), path,
                      centroid(s.triangles[cover.nodes[far].tri]), budget=10)


def corners(pts):
    return [PolygonCorner(vec(*p)) for p in pts]


def test_rectangle_is_convex():
    assert polygon_convexity_check(corners([(0, 0), (2, 0), (2, 1), (0, 1)])).convex


def test_l_hexagon_is_not_convex():
    rep = polygon_convexity_check(corners([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]))
    assert not rep.convex
    assert rep.witness["corner"] == 3


def _cone_triangle(interior_fan):
    return [PolygonCorner(vec(0, 0), 3, interior_fan), PolygonCorner(vec(4, 0)),
            PolygonCorner(vec(0, 4))]


X, Y, NX, NY = vec(1, 0), vec(0, 1), vec(-1, 0), vec(0, -1)


def test_boundary_cone_point_beyond_2pi_breaks_convexity():
    # interior angle 5pi/2 at a 3pi cone point leaves an exterior angle pi/2
    fan = [(X, Y), (Y, NX), (NX, NY), (NY, X), (X, Y)]
    rep = polygon_convexity_check(_cone_triangle(fan))
    assert not rep.convex
    assert rep.witness["corner"] == 0
    assert rep.witness["interior_half_turns"] == 2


def test_boundary_cone_point_at_2pi_is_the_convex_limit():
    # interior angle 2pi at a 3pi cone point leaves an exterior angle of exactly pi
    fan = [(X, Y), (Y, NX), (NX, NY), (NY, X)]
    assert polygon_convexity_check(_cone_triangle(fan)).convex


def test_self_intersecting_polygon_rejected():
    with pytest.raises(errors.NotAPolygon):
        polygon_convexity_check(corners([(0, 0), (2, 2), (2, 0), (0, 2)]))


def test_points_on_every_edge_of_covered_triangles(surface):
    s = surface("octagon")
    tri = s.triangles[0]
    p = tuple(sum(x[i] for x in tri) / 3 for i in range(2))
    cov = propagate_rays(s, 0, p, budget=200)
    for n in sorted(cov.status)[::5]:
        pts = s.triangles[cov.cover.nodes[n].tri]
        for e in range(3):
            x = lerp(pts[e], pts[(e + 1) % 3], Rational(1, 3))
            assert verify_trail(s, trail_to(cov, n, x)).ok
