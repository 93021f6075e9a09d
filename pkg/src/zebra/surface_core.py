"""Validated half-edge complex of a closed piecewise-affine surface.

A surface is a list of counterclockwise triangles with rational vertices and a
perfect matching on their edges.  Edge ``e`` of triangle ``t`` runs from vertex
``e`` to vertex ``e + 1``; corner ``c`` sits at vertex ``c``.  Each gluing is
the orientation-reversing affine map determined by endpoint matching, and
its scalar derivative is what makes the surface a translation, dilation or
half-dilation surface.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import errors
from .affine import AffineMap, map_from_edges
from .exact import Rational, Vec, cross, q, sub

Edge = Tuple[int, int]
Corner = Tuple[int, int]
Triangle = Tuple[Vec, Vec, Vec]

MODES = ("translation", "dilation", "half-dilation")


@dataclass
class SurfaceDescription:
    triangles: List[Triangle]
    gluings: List[Tuple[Edge, Edge]]
    mode: Optional[str] = None
    marked_removable: List[int] = field(default_factory=list)

    @staticmethod
    def from_raw(triangles: Sequence, gluings: Sequence, mode: Optional[str] = None,
                 marked_removable: Sequence[int] = ()) -> "SurfaceDescription":
        tris = [tuple((q(p[0]), q(p[1])) for p in tri) for tri in triangles]
        glus = [((int(a[0]), int(a[1])), (int(b[0]), int(b[1]))) for a, b in gluings]
        return SurfaceDescription(tris, glus, mode, list(marked_removable))  # type: ignore[arg-type]


@dataclass(frozen=True)
class ConeData:
    vertex: int
    half_turns: int
    corners: Tuple[Corner, ...]
    marked: bool = False

    @property
    def alpha(self) -> int:
        return self.half_turns - 2

    @property
    def is_pole(self) -> bool:
        return self.half_turns == 1

    @property
    def removable(self) -> bool:
        return self.half_turns == 2


class Surface:
    """Immutable validated surface.  Build it with :func:`validate_surface`."""

    def __init__(self, desc: SurfaceDescription, twin: Dict[Edge, Edge],
                 maps: Dict[Edge, AffineMap], mode: str) -> None:
        self.desc = desc
        self.triangles: List[Triangle] = list(desc.triangles)
        self._twin = twin
        self._maps = maps
        self.mode = mode
        self.vertex_of: Dict[Corner, int] = {}
        self.slot_of: Dict[Corner, int] = {}
        self.cones: List[ConeData] = []
        self._wedges: Dict[Corner, Tuple[Vec, Vec]] = {}

    # -- half-edge algebra -------------------------------------------------
    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def half_edge(self, t: int, e: int) -> int:
        return 3 * t + e

    def next(self, h: int) -> int:
        return 3 * (h // 3) + (h % 3 + 1) % 3

    def twin_he(self, h: int) -> int:
        t, e = self._twin[(h // 3, h % 3)]
        return 3 * t + e

    def face(self, h: int) -> int:
        return h // 3

    def twin(self, t: int, e: int) -> Edge:
        return self._twin[(t, e)]

    def glue_map(self, t: int, e: int) -> AffineMap:
        """Map from the frame of triangle t to the frame of the triangle across edge e."""
        return self._maps[(t, e)]

    def derivative(self, t: int, e: int) -> Rational:
        return self._maps[(t, e)].a

    def edge_points(self, t: int, e: int) -> Tuple[Vec, Vec]:
        tri = self.triangles[t]
        return tri[e], tri[(e + 1) % 3]

    def corner_wedge(self, t: int, c: int) -> Tuple[Vec, Vec]:
        """Counterclockwise wedge (start, end) of corner c in the frame of t."""
        w = self._wedges.get((t, c))
        if w is None:
            tri = self.triangles[t]
            p = tri[c]
            w = self._wedges[(t, c)] = (sub(tri[(c + 1) % 3], p), sub(tri[(c + 2) % 3], p))
        return w

    def ccw_next_corner(self, t: int, c: int) -> Tuple[Corner, Rational]:
        """Next corner counterclockwise around the same vertex, with the frame derivative."""
        e = (c + 2) % 3
        t2, e2 = self._twin[(t, e)]
        return (t2, e2), self._maps[(t, e)].a

    def cw_next_corner(self, t: int, c: int) -> Tuple[Corner, Rational]:
        t2, e2 = self._twin[(t, c)]
        return (t2, (e2 + 1) % 3), self._maps[(t, c)].a

    def cone(self, t: int, c: int) -> ConeData:
        return self.cones[self.vertex_of[(t, c)]]

    @property
    def singular_vertices(self) -> List[int]:
        return [cd.vertex for cd in self.cones if not cd.removable]

    @property
    def has_poles(self) -> bool:
        return any(cd.is_pole for cd in self.cones)

    @property
    def is_leaf_triangulation(self) -> bool:
        return all(cd.half_turns >= 3 for cd in self.cones)

    @property
    def flags(self) -> List[str]:
        out = []
        chi = euler_poincare_report(self)["chi"]
        if chi == 0 and not self.singular_vertices:
            out.append("torus, Σ = ∅")
        if any(cd.removable for cd in self.cones):
            out.append("removable vertices present")
        return out

    def locate(self, p: Vec, t: int) -> Tuple[str, int]:
        """Classify p relative to triangle t: ('interior', -1), ('edge', e), ('vertex', c)."""
        from .exact import orient
        tri = self.triangles[t]
        s = [orient(tri[i], tri[(i + 1) % 3], p) for i in range(3)]
        if min(s) < 0:
            return ("outside", -1)
        zeros = [i for i in range(3) if s[i] == 0]
        if not zeros:
            return ("interior", -1)
        if len(zeros) == 1:
            return ("edge", zeros[0])
        # two zero edges meet at their shared vertex
        a, b = zeros
        c = b if (a + 1) % 3 == b else a
        return ("vertex", c)


def _check_triangle(i: int, tri: Triangle) -> None:
    if len(tri) != 3:
        raise errors.DegenerateTriangle(f"triangle {i} does not have three vertices", triangle=i)
    if cross(sub(tri[1], tri[0]), sub(tri[2], tri[0])) <= 0:
        raise errors.DegenerateTriangle(
            f"triangle {i} is degenerate or clockwise", triangle=i)


def validate_surface(desc: SurfaceDescription, mode: Optional[str] = None) -> Surface:
    """Check a description and build its half-edge complex and cone data."""
    mode = mode or desc.mode
    if mode is not None and mode not in MODES:
        raise errors.SemanticError(f"unknown mode {mode!r}")
    for i, tri in enumerate(desc.triangles):
        _check_triangle(i, tri)
    n = len(desc.triangles)
    twin: Dict[Edge, Edge] = {}
    for pair in desc.gluings:
        a, b = pair
        for t, e in (a, b):
            if not (0 <= t < n and 0 <= e < 3):
                raise errors.SemanticError(f"gluing refers to missing edge {(t, e)}")
        if a == b:
            raise errors.SelfGluedEdge(f"edge {a} is glued to itself", edge=a)
        for x in (a, b):
            if x in twin:
                raise errors.SemanticError(f"edge {x} appears in two gluings", edge=x)
        twin[a], twin[b] = b, a
    for t in range(n):
        for e in range(3):
            if (t, e) not in twin:
                raise errors.UnpairedEdge(f"edge {(t, e)} is not glued", edge=(t, e))
    maps: Dict[Edge, AffineMap] = {}
    for (t, e), (t2, e2) in twin.items():
        p0, p1 = desc.triangles[t][e], desc.triangles[t][(e + 1) % 3]
        q0, q1 = desc.triangles[t2][e2], desc.triangles[t2][(e2 + 1) % 3]
        if cross(sub(p1, p0), sub(q1, q0)) != 0:
            raise errors.NonParallelGluing(
                f"edges {(t, e)} and {(t2, e2)} are not parallel", edges=((t, e), (t2, e2)))
        maps[(t, e)] = map_from_edges(p0, p1, q1, q0)
    derivs = [m.a for m in maps.values()]
    if mode is None:
        if all(a == 1 for a in derivs):
            mode = "translation"
        elif all(a > 0 for a in derivs):
            mode = "dilation"
        else:
            mode = "half-dilation"
    elif mode in ("translation", "dilation") and any(a < 0 for a in derivs):
        raise errors.NegativeDerivativeOnDilationSurface(
            "a gluing reverses direction on a dilation surface")
    elif mode == "translation" and any(a != 1 for a in derivs):
        raise errors.SemanticError("a gluing is not a translation")
    surf = Surface(desc, twin, maps, mode)
    _build_cones(surf)
    report = euler_poincare_report(surf)
    if not report["holds"]:
        raise errors.InternalInvariantError("Euler-Poincare self-audit failed", **report)
    return surf


def _build_cones(surf: Surface) -> None:
    from .kinematics import corner_cycle_half_turns

    seen: Dict[Corner, int] = {}
    cones: List[ConeData] = []
    for t in range(surf.n_triangles):
        for c in range(3):
            if (t, c) in seen:
                continue
            vid = len(cones)
            cycle: List[Corner] = []
            cur: Corner = (t, c)
            limit = 3 * surf.n_triangles + 1
            while True:
                if len(cycle) > limit:
                    raise errors.ConditionDViolated("vertex class does not close")
                cycle.append(cur)
                seen[cur] = vid
                cur, _ = surf.ccw_next_corner(*cur)
                if cur == (t, c):
                    break
            k = corner_cycle_half_turns(surf, cycle)
            marked = vid in surf.desc.marked_removable
            if marked and k != 2:
                raise errors.SemanticError(f"vertex {vid} is marked removable but has angle {k}π")
            cones.append(ConeData(vid, k, tuple(cycle), marked))
            for i, cn in enumerate(cycle):
                surf.slot_of[cn] = i
    surf.vertex_of = seen
    surf.cones = cones


def euler_poincare_report(s: Surface) -> dict:
    v = len(s.cones)
    e = len(s.desc.gluings)
    f = s.n_triangles
    chi = v - e + f
    alpha_sum = sum(cd.alpha for cd in s.cones)
    return {"chi": chi, "alpha_sum": alpha_sum, "holds": alpha_sum == -2 * chi}
