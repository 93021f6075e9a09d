import pytest

import oracles
from zebra import errors
from zebra.builder import standard_example
from zebra.surface_core import SurfaceDescription, euler_poincare_report, validate_surface


def test_square_torus_has_one_regular_vertex(surface):
    s = surface("square_torus")
    assert len(s.cones) == 1
    assert s.cones[0].half_turns == 2
    assert s.cones[0].alpha == 0
    assert s.singular_vertices == []


def test_octagon_has_one_6pi_cone(surface):
    s = surface("octagon")
    assert [c.half_turns for c in s.cones] == [6]
    assert s.cones[0].alpha == 4


def test_octagon_cone_angle_matches_float_corner_sum():
    desc = standard_example("octagon")
    assert oracles.cone_half_turns(desc) == [6]


def test_cone_angles_match_float_oracle(any_surface):
    name, s = any_surface
    assert sorted(c.half_turns for c in s.cones) == oracles.cone_half_turns(s.desc)


def test_euler_poincare_values(surface):
    assert euler_poincare_report(surface("square_torus")) == {
        "chi": 0, "alpha_sum": 0, "holds": True}
    assert euler_poincare_report(surface("octagon")) == {
        "chi": -2, "alpha_sum": 4, "holds": True}
    assert euler_poincare_report(surface("pillowcase")) == {
        "chi": 2, "alpha_sum": -4, "holds": True}


def test_euler_characteristic_matches_independent_count(any_surface):
    name, s = any_surface
    assert euler_poincare_report(s)["chi"] == oracles.euler_characteristic(s.desc)


def test_non_parallel_gluing_rejected():
    tri_a = [("0", "0"), ("1", "0"), ("0", "1")]
    tri_b = [("0", "0"), ("1", "1"), ("0", "1")]
    desc = SurfaceDescription.from_raw([tri_a, tri_b],
                                       [((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))])
    with pytest.raises(errors.NonParallelGluing):
        validate_surface(desc)


def test_clockwise_triangle_rejected():
    desc = SurfaceDescription.from_raw([[(0, 0), (0, 1), (1, 0)]], [((0, 0), (0, 1))])
    with pytest.raises(errors.DegenerateTriangle):
        validate_surface(desc)


def test_unpaired_edge_rejected():
    desc = standard_example("square_torus")
    desc = SurfaceDescription(desc.triangles, desc.gluings[:-1], desc.mode)
    with pytest.raises(errors.UnpairedEdge):
        validate_surface(desc)


def test_self_glued_edge_rejected():
    desc = standard_example("square_torus")
    desc = SurfaceDescription(desc.triangles, [((0, 0), (0, 0))] + desc.gluings[1:],
                              desc.mode)
    with pytest.raises(errors.SelfGluedEdge):
        validate_surface(desc)


def test_translation_mode_rejects_dilation():
    with pytest.raises(errors.SemanticError):
        validate_surface(standard_example("hopf_like_dilation_torus"), "translation")


def test_dilation_mode_rejects_half_turns():
    with pytest.raises(errors.NegativeDerivativeOnDilationSurface):
        validate_surface(standard_example("pillowcase"), "dilation")


def test_mode_inference(any_surface):
    name, s = any_surface
    derivs = {s.derivative(t, e) for t in range(s.n_triangles) for e in range(3)}
    if derivs == {1}:
        assert s.mode == "translation"
    elif all(a > 0 for a in derivs):
        assert s.mode == "dilation"
    else:
        assert s.mode == "half-dilation"


def test_half_edge_algebra(any_surface):
    name, s = any_surface
    for h in range(3 * s.n_triangles):
        assert s.twin_he(s.twin_he(h)) == h
        assert s.next(s.next(s.next(h))) == h
        assert s.face(s.twin_he(h)) != s.face(h) or s.twin_he(h) != h


def test_glue_maps_are_inverse_pairs(any_surface):
    name, s = any_surface
    for t in range(s.n_triangles):
        for e in range(3):
            t2, e2 = s.twin(t, e)
            g, h = s.glue_map(t, e), s.glue_map(t2, e2)
            p0, p1 = s.edge_points(t, e)
            assert h(g(p0)) == p0 and h(g(p1)) == p1
            q0, q1 = s.edge_points(t2, e2)
            assert g(p0) == q1 and g(p1) == q0


def test_locate():
    s = validate_surface(standard_example("square_torus"))
    tri = s.triangles[0]
    assert s.locate(tri[0], 0) == ("vertex", 0)
    mid = tuple((tri[0][i] + tri[1][i]) / 2 for i in range(2))
    assert s.locate(mid, 0) == ("edge", 0)
    cen = tuple(sum(p[i] for p in tri) / 3 for i in range(2))
    assert s.locate(cen, 0) == ("interior", -1)


def test_marked_removable_must_have_angle_2pi():
    desc = standard_example("octagon")
    desc.marked_removable = [0]
    with pytest.raises(errors.SemanticError):
        validate_surface(desc)
