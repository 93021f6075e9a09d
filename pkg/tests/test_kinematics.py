import math

import pytest

import oracles
from zebra import errors
from zebra.exact import Rational, q, vec
from zebra.kinematics import (EQUAL, GREATER, LESS, TrailAddress, address_of, angle_cmp_pi,
                              continuation_interval, continuation_param, develop,
                              direction_from_param, loop_holonomy, realize_address,
                              trace_leaf, walk_half_turns)

X, Y, NX, NY = vec(1, 0), vec(0, 1), vec(-1, 0), vec(0, -1)


def test_single_flat_wedge_exactly_pi():
    r = angle_cmp_pi([(X, NX)], X, NX)
    assert r.result == EQUAL


def test_single_wedge_less_than_pi():
    assert angle_cmp_pi([(X, Y)], X, Y).result == LESS


def test_three_right_angle_wedges():
    fan = [(X, Y), (Y, NX), (NX, NY)]
    r = angle_cmp_pi(fan, X, NY)
    assert r.result == GREATER
    assert abs(oracles.chain_angle([X, Y, NX, NY]) - 1.5 * math.pi) < 1e-12


def test_fan_must_be_consecutive():
    with pytest.raises(errors.DirectionNotInWedge):
        angle_cmp_pi([(X, Y), (NX, NY)], X, NY)


def test_direction_outside_wedge():
    with pytest.raises(errors.DirectionNotInWedge):
        angle_cmp_pi([(X, Y)], NY, Y)


def test_walk_half_turns_counts_exact_multiples():
    assert walk_half_turns([X, Y, NX]) == (1, True)
    assert walk_half_turns([X, Y, NX, NY, X]) == (2, True)
    assert walk_half_turns([X, Y]) == (0, False)


def test_develop_empty_walk(surface):
    strip = develop(surface("square_torus"), 0, [])
    assert len(strip.placed) == 1
    assert strip.placed[0][1].a == 1 and strip.placed[0][1].b == (0, 0)


def test_develop_square_torus_across_right_edge(surface):
    s = surface("square_torus")
    # the edge of triangle 0 on the line x = 1
    e = next(e for e in range(3) if all(p[0] == 1 for p in s.edge_points(0, e)))
    strip = develop(s, 0, [e])
    t, m = strip.placed[1]
    placed = [m(p) for p in s.triangles[t]]
    assert all(p[0] >= 1 for p in placed)
    assert m.a == 1


def test_hopf_holonomy_is_a_dilation_by_two(surface):
    from zebra.closed_trails import named_classes
    s = surface("hopf_like_dilation_torus")
    core = named_classes("hopf_like_dilation_torus", s)["core"]
    assert core.holonomy.a in (2, Rational(1, 2))
    # independent composition of the gluing derivatives along the loop
    prod = Rational(1)
    for t, e in core.loop:
        prod *= s.derivative(t, e)
    assert core.holonomy.a == 1 / prod


def test_square_torus_holonomy(surface):
    from zebra.closed_trails import class_from_vector
    s = surface("square_torus")
    h = class_from_vector(s, 0, (q(1), q(0))).holonomy
    assert h.a == 1 and h.b == (1, 0)
    h = loop_holonomy(s, 0, class_from_vector(s, 0, (q(0), q(1))).loop * 2)
    assert h.a == 1 and h.b == (0, 2)


def test_trace_closes_horizontally(surface):
    s = surface("square_torus")
    t = 0 if s.locate((q("1/4"), q("1/4")), 0)[0] == "interior" else 1
    tr = trace_leaf(s, t, (q("1/4"), q("1/4")), X, 20)
    assert tr.kind == "closes"
    assert tr.holonomy.a == 1 and tr.holonomy.b == (1, 0)


def test_trace_slope_one_closes(surface):
    # (1/4, 1/4) lies on the diagonal edge, so start just above it
    s = surface("square_torus")
    x = (q("1/4"), q("1/2"))
    t = 0 if s.locate(x, 0)[0] == "interior" else 1
    tr = trace_leaf(s, t, x, vec(1, 1), 20)
    assert tr.kind == "closes"
    assert tr.holonomy.b == (1, 1)


def test_trace_hits_the_octagon_cone(surface):
    s = surface("octagon")
    tri = s.triangles[0]
    x = tuple(sum(p[i] for p in tri) / 3 for i in range(2))
    d = (tri[1][0] - x[0], tri[1][1] - x[1])
    tr = trace_leaf(s, 0, x, d, 10)
    assert tr.kind == "singularity"
    (t, c), arr = tr.arrival
    assert s.triangles[t][c] == tri[1]
    assert arr[0] * d[1] - arr[1] * d[0] == 0


def test_trace_from_a_vertex_is_rejected(surface):
    s = surface("octagon")
    with pytest.raises(errors.StartAtVertex):
        trace_leaf(s, 0, s.triangles[0][0], X, 5)


def _corner_at(s, k):
    cd = next(c for c in s.cones if c.half_turns == k)
    return cd.corners[0]


def _incoming(s, corner):
    u, v = s.corner_wedge(*corner)
    # arriving along the bisector of the corner, pointing into the vertex
    return (-(u[0] + v[0]), -(u[1] + v[1]))


def test_continuation_width_at_3pi(surface):
    s = surface("doubled_l")
    corner = _corner_at(s, 3)
    ci = continuation_interval(s, corner, _incoming(s, corner))
    assert ci.alpha == 1 and not ci.bounce


def test_continuation_at_a_pole_bounces(surface):
    s = surface("pillowcase")
    corner = _corner_at(s, 1)
    ci = continuation_interval(s, corner, _incoming(s, corner))
    assert ci.bounce


def test_continuation_at_the_octagon_cone(surface):
    s = surface("octagon")
    corner = _corner_at(s, 6)
    inc = _incoming(s, corner)
    ci = continuation_interval(s, corner, inc)
    assert ci.alpha == 4
    from zebra.kinematics import back_direction, bend_sides
    back = back_direction(s, corner, inc)
    straight = direction_from_param(s, back, Rational(1, 2))
    left, right = bend_sides(s, back, straight)
    assert (left.n, left.exact, right.n, right.exact) == (3, True, 3, True)


def test_symmetric_bend_at_3pi(surface):
    s = surface("doubled_l")
    corner = _corner_at(s, 3)
    from zebra.kinematics import back_direction, bend_sides
    back = back_direction(s, corner, _incoming(s, corner))
    for t, expected in ((Rational(0), (2, True, 1, True)), (Rational(1), (1, True, 2, True)),
                        (Rational(1, 2), (1, False, 1, False))):
        out = direction_from_param(s, back, t)
        left, right = bend_sides(s, back, out)
        assert (left.n, left.exact, right.n, right.exact) == expected
        assert continuation_param(s, back, out) == t


def test_address_without_bends(surface):
    s = surface("square_torus")
    t = 0 if s.locate((q("1/4"), q("1/4")), 0)[0] == "interior" else 1
    tr = realize_address(s, t, (q("1/4"), q("1/4")), TrailAddress(vec(2, 1), ()), 6)
    addr = address_of(s, tr)
    assert addr.ts == ()
    assert addr.theta0[0] * 1 - addr.theta0[1] * 2 == 0 and addr.theta0[0] > 0


def test_address_round_trip(surface):
    s = surface("octagon")
    tri = s.triangles[0]
    x = tuple(sum(p[i] for p in tri) / 3 for i in range(2))
    d = (tri[1][0] - x[0], tri[1][1] - x[1])
    addr = TrailAddress(d, (Rational(1, 3), Rational(3, 4)))
    tr = realize_address(s, 0, x, addr, 40)
    assert len(tr.bends) == 2
    back = address_of(s, tr)
    assert back.ts == addr.ts
    again = realize_address(s, 0, x, back, 40)
    assert again.key() == tr.key()


def test_address_parameter_out_of_range(surface):
    s = surface("octagon")
    with pytest.raises(errors.AddressInvalid):
        realize_address(s, 0, s.triangles[0][0], TrailAddress(X, (Rational(2),)), 5)
