import json

import pytest

from zebra import errors
from zebra.builder import (EXAMPLE_NAMES, GluingScheme, NotCompletelyGlued, PolygonPatch,
                           assemble, parse_surface, serialize_surface, standard_example)
from zebra.exact import q, vec
from zebra.kinematics import corner_cycle_half_turns
from zebra.surface_core import euler_poincare_report, validate_surface


def unit_square():
    return PolygonPatch([vec(0, 0), vec(1, 0), vec(1, 1), vec(0, 1)])


def test_square_torus_shape():
    desc = standard_example("square_torus")
    assert len(desc.triangles) == 2
    assert len(desc.gluings) == 3


def test_unit_square_assembles_to_the_square_torus():
    desc = assemble([unit_square()], GluingScheme([((0, 0), (0, 2)), ((0, 1), (0, 3))]))
    assert desc.triangles == standard_example("square_torus").triangles
    s = validate_surface(desc)
    assert s.mode == "translation"


def test_self_glued_side_rejected():
    with pytest.raises(errors.SelfGluedEdge):
        GluingScheme([((0, 1), (0, 1))])


def test_non_parallel_sides_rejected():
    tri = PolygonPatch([vec(0, 0), vec(1, 0), vec(0, 1)])
    with pytest.raises(errors.ConditionEViolated):
        assemble([tri], GluingScheme([((0, 0), (0, 1))]))


def test_unglued_sides_warn():
    with pytest.warns(NotCompletelyGlued):
        assemble([unit_square()], GluingScheme([((0, 0), (0, 2))]))


def test_bad_diagonals_rejected():
    patch = PolygonPatch([vec(0, 0), vec(1, 0), vec(1, 1), vec(0, 1)], diagonals=[(0, 1)])
    with pytest.raises(errors.SemanticError):
        patch.triangulate()


def test_unknown_example():
    with pytest.raises(errors.UnknownExample):
        standard_example("klein_bottle")


@pytest.mark.parametrize("name", EXAMPLE_NAMES)
def test_examples_satisfy_euler_poincare(name):
    assert euler_poincare_report(validate_surface(standard_example(name)))["holds"]


@pytest.mark.parametrize("name", EXAMPLE_NAMES)
def test_vertex_angles_equal_wedge_walk(name):
    s = validate_surface(standard_example(name))
    for cd in s.cones:
        assert corner_cycle_half_turns(s, cd.corners) == cd.half_turns


def test_pillowcase_is_a_sphere_with_four_poles():
    s = validate_surface(standard_example("pillowcase"))
    poles = [c for c in s.cones if c.is_pole]
    assert len(poles) == 4
    assert euler_poincare_report(s)["chi"] == 2


def test_hopf_like_torus_has_no_singularities():
    s = validate_surface(standard_example("hopf_like_dilation_torus"))
    assert s.mode == "dilation"
    assert s.singular_vertices == []
    assert euler_poincare_report(s)["chi"] == 0


def test_fig2_is_a_genus_two_dilation_surface():
    s = validate_surface(standard_example("fig2_amalgam"))
    assert s.mode == "dilation"
    assert euler_poincare_report(s)["chi"] == -2


def test_doubled_l_has_a_3pi_point():
    s = validate_surface(standard_example("doubled_l"))
    assert sorted(c.half_turns for c in s.cones).count(3) == 1
    assert euler_poincare_report(s)["chi"] == 2


@pytest.mark.parametrize("name", EXAMPLE_NAMES)
def test_round_trip(name):
    desc = standard_example(name)
    data = serialize_surface(desc)
    back = parse_surface(data)
    assert back.triangles == desc.triangles
    assert back.gluings == desc.gluings
    assert serialize_surface(back) == data


def test_thirds_survive_round_trip():
    doc = {"triangles": [[["0", "0"], ["1", "0"], ["1/3", "2/3"]]], "gluings": []}
    desc = parse_surface(json.dumps(doc).encode())
    assert desc.triangles[0][2] == (q("1/3"), q("2/3"))
    assert '"1/3"' in serialize_surface(desc).decode()


def test_malformed_gluing_index():
    doc = b'{"triangles": [[["0","0"],["1","0"],["0","1"]]],\n "gluings": [[[0, 5], [0, 1]]]}'
    with pytest.raises(errors.SurfaceSyntaxError) as info:
        parse_surface(doc)
    assert info.value.line == 2


def test_malformed_json_reports_position():
    with pytest.raises(errors.SurfaceSyntaxError) as info:
        parse_surface(b'{"triangles": [\n  [}')
    assert info.value.line == 2


def test_shipped_surface_files_match_examples():
    from pathlib import Path
    root = Path(__file__).resolve().parent.parent / "surfaces"
    for name in EXAMPLE_NAMES:
        desc = parse_surface((root / f"{name}.json").read_bytes())
        ref = standard_example(name)
        assert desc.triangles == ref.triangles and desc.gluings == ref.gluings
