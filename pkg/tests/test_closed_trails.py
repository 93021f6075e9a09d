import math
import random

import pytest

from classes import distinct_classes
from zebra import errors
from zebra.affine import AffineMap
from zebra.closed_trails import (CYL, INCONCLUSIVE, NR, TF, UT, HomotopyClass,
                                 class_from_vector, classify, detect_full_cylinder_crossing,
                                 extend_cylinder, full_cylinders, named_classes, tighten)
from zebra.exact import Rational, cross, q, sub
from zebra.invariants import verify_trail


def test_square_torus_class_1_0_is_tf(surface):
    s = surface("square_torus")
    res = classify(s, class_from_vector(s, 0, (q(1), q(0))))
    assert res.verdict == TF
    assert res.certificate["slope"] == [1, 0]
    assert res.trail.is_leaf


def test_tighten_on_the_square_torus_gives_the_leaf_through_p(surface):
    s = surface("square_torus")
    cls = class_from_vector(s, 0, (q(1), q(0)))
    p = (q("1/4"), q("1/2"))
    if s.locate(p, cls.seed)[0] != "interior":
        p = (q("3/4"), q("1/2"))
    res = tighten(s, cls, start=p)
    assert res.status == "closed"
    assert res.trail.bends == []
    assert all(pc.a[1] == pc.b[1] for pc in res.trail.pieces)


def test_power_rejected(surface):
    s = surface("square_torus")
    cls = class_from_vector(s, 0, (q(1), q(0)))
    with pytest.raises(errors.ClassIsPower):
        HomotopyClass.from_loop(s, cls.seed, list(cls.loop) * 2)


def test_trivial_loop_rejected(surface):
    s = surface("octagon")
    t2, e2 = s.twin(0, 0)
    with pytest.raises(errors.ClassTrivial):
        HomotopyClass.from_loop(s, 0, [(0, 0), (t2, e2)])
    with pytest.raises(errors.ClassTrivial):
        HomotopyClass.from_loop(s, 0, [])


def test_open_walk_rejected(surface):
    s = surface("octagon")
    with pytest.raises(errors.NotALoop):
        HomotopyClass.from_loop(s, 0, [(0, 0)])


def test_surfaces_with_poles_rejected(surface):
    s = surface("pillowcase")
    # a sphere has no nontrivial class, so build the record by hand
    t2, e2 = s.twin(0, 0)
    cls = HomotopyClass(0, ((0, 0), (t2, e2)), AffineMap.identity())
    with pytest.raises(errors.SurfaceHasPoles):
        classify(s, cls)


def test_octagon_handle_class_trail_has_bends_of_at_least_pi(surface):
    s = surface("octagon")
    for cls in distinct_classes(s, 6):
        res = classify(s, cls)
        assert res.verdict in (CYL, UT)
        for b in res.trail.bends:
            assert b.left.at_least_pi and b.right.at_least_pi
        assert verify_trail(s, res.trail, closed=True).ok


def test_l_shaped_classes_are_cylinders_or_unique(surface):
    s = surface("l_shaped")
    verdicts = {classify(s, cls).verdict for cls in distinct_classes(s, 9)}
    assert verdicts <= {CYL, UT}
    assert UT in verdicts and CYL in verdicts


def test_ut_certificate_bends_on_both_sides(surface):
    s = surface("octagon")
    for cls in distinct_classes(s, 9):
        res = classify(s, cls)
        if res.verdict == UT:
            assert res.trail.left_more and res.trail.right_more


def test_cylinder_boundaries_are_closed_trails(surface):
    s = surface("octagon")
    for cls in distinct_classes(s, 4):
        res = classify(s, cls)
        if res.verdict != CYL:
            continue
        for b in res.cylinder.boundary:
            assert verify_trail(s, b, closed=True).ok
            assert b.left_all_pi or b.right_all_pi


def test_fig2_crossing_class_is_nr(surface):
    s = surface("fig2_amalgam")
    res = classify(s, named_classes("fig2_amalgam", s)["crossing"])
    assert res.verdict == NR
    assert res.certificate["kind"] == "full-cylinder"
    assert sorted(res.certificate["cylinder"]["kinds"]) == ["dilation", "dilation", "flat"]


def test_fig2_core_class_is_a_full_cylinder(surface):
    s = surface("fig2_amalgam")
    res = classify(s, named_classes("fig2_amalgam", s)["core"])
    assert res.verdict == CYL
    cyl = res.cylinder
    assert cyl.full
    assert sorted(c.kind for c in cyl.components) == ["dilation", "dilation", "flat"]


def test_fig2_core_does_not_cross_a_full_cylinder(surface):
    s = surface("fig2_amalgam")
    assert detect_full_cylinder_crossing(s, named_classes("fig2_amalgam", s)["core"]) is None


def test_translation_surfaces_have_no_full_cylinders(surface):
    assert full_cylinders(surface("octagon")) == []
    assert full_cylinders(surface("l_shaped")) == []


def test_component_leaves(surface):
    s = surface("fig2_amalgam")
    cyl = classify(s, named_classes("fig2_amalgam", s)["core"]).cylinder
    for c in cyl.components:
        if c.kind == "dilation":
            # the developed leaf passes through the fixed point
            assert cross(c.direction, sub(c.fixed_point, c.point)) == 0
        else:
            assert cross(c.direction, c.holonomy.b) == 0


def test_square_torus_flat_cylinder_wraps(surface):
    s = surface("square_torus")
    res = classify(s, class_from_vector(s, 0, (q(1), q(0))))
    cyl = extend_cylinder(s, res.trail)
    assert cyl.wraps and not cyl.full
    assert cyl.boundary == []
    assert [c.kind for c in cyl.components] == ["flat"]


def test_hopf_core_is_radially_foliated(surface):
    s = surface("hopf_like_dilation_torus")
    res = classify(s, named_classes("hopf_like_dilation_torus", s)["core"])
    assert res.verdict == TF
    assert res.certificate["foliation"] == "radial"
    cyl = extend_cylinder(s, res.trail)
    assert cyl.wraps
    assert {c.kind for c in cyl.components} == {"dilation"}
    # each component sweeps the sector seen from the fixed point between two
    # corners of the inner square
    corners = [(1, 1), (-1, 1), (-1, -1), (1, -1)]
    for d in cyl.sweep[1:]:
        assert any(cross(d, (Rational(x), Rational(y))) == 0 for x, y in corners)
    width = [math.atan2(float(cross(a, b)), float(a[0] * b[0] + a[1] * b[1]))
             for a, b in zip(cyl.sweep[1:], cyl.sweep[2:])]
    assert all(abs(abs(w) - math.pi / 2) < 1e-12 for w in width)


def test_verdicts_are_budget_monotone(surface):
    s = surface("octagon")
    for cls in distinct_classes(s, 5):
        big = classify(s, cls, budget=2000).verdict
        small = classify(s, cls, budget=50).verdict
        assert small in (big, INCONCLUSIVE)


def test_classification_is_deterministic(surface):
    s = surface("l_shaped")
    cls = distinct_classes(s, 7)[-1]
    assert classify(s, cls).to_json() == classify(s, cls).to_json()


def test_ut_is_start_point_independent(surface):
    s = surface("octagon")
    rng = random.Random(11)
    checked = 0
    for cls in distinct_classes(s, 9):
        res = classify(s, cls)
        if res.verdict != UT:
            continue
        a, b, c = s.triangles[cls.seed]
        for _ in range(10):
            w = [rng.randint(1, 50) for _ in range(3)]
            x = tuple((w[0] * a[i] + w[1] * b[i] + w[2] * c[i]) / sum(w) for i in range(2))
            again = tighten(s, cls, start=x)
            assert again.trail.normalized().key() == res.trail.normalized().key()
        checked += 1
    assert checked >= 1
