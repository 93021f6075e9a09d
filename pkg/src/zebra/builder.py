"""Surface construction by gluing polygons, the standard corpus, and the file format."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import errors
from .exact import Vec, cross, fmt_vec, orient, q, sub, vec
from .surface_core import SurfaceDescription

BoundaryEdge = Tuple[int, int]  # (patch index, polygon side index)


class NotCompletelyGlued(UserWarning):
    """Assembly left boundary edges unglued."""

    def __init__(self, edges: Sequence[BoundaryEdge]) -> None:
        super().__init__(f"{len(edges)} boundary edges remain unglued")
        self.edges = list(edges)


@dataclass
class PolygonPatch:
    """Counterclockwise simple polygon; side i runs from vertex i to vertex i+1."""

    vertices: List[Vec]
    diagonals: Optional[List[Tuple[int, int]]] = None
    labels: Optional[List[str]] = None

    def __post_init__(self) -> None:
        self.vertices = [(q(p[0]), q(p[1])) for p in self.vertices]

    def triangulate(self) -> List[Tuple[int, int, int]]:
        n = len(self.vertices)
        if n < 3:
            raise errors.DegenerateTriangle("polygon needs at least three vertices")
        if self.diagonals is None:
            tris = [(0, i, i + 1) for i in range(1, n - 1)]
        else:
            tris = _split(list(range(n)), {tuple(sorted(d)) for d in self.diagonals})
        for t in tris:
            if orient(*(self.vertices[i] for i in t)) <= 0:
                raise errors.DegenerateTriangle(
                    f"triangulation of patch produces a degenerate triangle {t}")
        return tris


def _split(poly: List[int], diags: set) -> List[Tuple[int, int, int]]:
    if len(poly) == 3:
        return [tuple(poly)]  # type: ignore[list-item]
    m = len(poly)
    for i in range(m):
        for j in range(i + 2, m):
            if i == 0 and j == m - 1:
                continue
            if tuple(sorted((poly[i], poly[j]))) in diags:
                return _split(poly[i:j + 1], diags) + _split(poly[j:] + poly[:i + 1], diags)
    raise errors.SemanticError("supplied diagonals do not triangulate the polygon")


@dataclass
class GluingScheme:
    """Fixed-point-free involution on boundary edges, given as unordered pairs."""

    pairs: List[Tuple[BoundaryEdge, BoundaryEdge]] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen = set()
        for a, b in self.pairs:
            a, b = tuple(a), tuple(b)
            if a == b:
                raise errors.SelfGluedEdge(f"boundary edge {a} is glued to itself", edge=a)
            for x in (a, b):
                if x in seen:
                    raise errors.SemanticError(f"boundary edge {x} is glued twice", edge=x)
                seen.add(x)


def assemble(patches: Sequence[PolygonPatch], scheme: GluingScheme,
             mode: Optional[str] = None, marked_removable: Sequence[int] = ()
             ) -> SurfaceDescription:
    """Triangulate the patches and glue them into one description.

    Unglued boundary edges are reported with a :class:`NotCompletelyGlued` warning.
    """
    triangles: List[Tuple[Vec, Vec, Vec]] = []
    where: Dict[Tuple[int, int, int], Tuple[int, int]] = {}
    for pi, patch in enumerate(patches):
        for a, b, c in patch.triangulate():
            t = len(triangles)
            triangles.append(tuple(patch.vertices[i] for i in (a, b, c)))  # type: ignore[arg-type]
            for e, (u, v) in enumerate(((a, b), (b, c), (c, a))):
                where[(pi, u, v)] = (t, e)
    gluings: List[Tuple[Tuple[int, int], Tuple[int, int]]] = []
    used = set()
    for (pi, u, v), he in sorted(where.items()):
        if (pi, v, u) in where and (pi, v, u) not in used:
            gluings.append((he, where[(pi, v, u)]))
            used.update({(pi, u, v), (pi, v, u)})
    glued = set()
    for a, b in scheme.pairs:
        ha, hb = _side(patches, where, a), _side(patches, where, b)
        pa, pb = _side_points(patches, a), _side_points(patches, b)
        if cross(sub(pa[1], pa[0]), sub(pb[1], pb[0])) != 0:
            raise errors.ConditionEViolated(f"sides {a} and {b} are not parallel",
                                            sides=(a, b))
        gluings.append((ha, hb))
        glued.update({tuple(a), tuple(b)})
    open_sides = [(pi, i) for pi, p in enumerate(patches) for i in range(len(p.vertices))
                  if (pi, i) not in glued]
    if open_sides:
        warnings.warn(NotCompletelyGlued(open_sides), stacklevel=2)
    return SurfaceDescription(triangles, gluings, mode, list(marked_removable))


def _side(patches: Sequence[PolygonPatch], where: dict, side: BoundaryEdge) -> Tuple[int, int]:
    pi, i = side
    if not (0 <= pi < len(patches)) or not (0 <= i < len(patches[pi].vertices)):
        raise errors.SemanticError(f"no boundary side {side}")
    n = len(patches[pi].vertices)
    return where[(pi, i, (i + 1) % n)]


def _side_points(patches: Sequence[PolygonPatch], side: BoundaryEdge) -> Tuple[Vec, Vec]:
    pi, i = side
    vs = patches[pi].vertices
    return vs[i], vs[(i + 1) % len(vs)]


# ---------------------------------------------------------------------------
# Standard corpus
# ---------------------------------------------------------------------------

def _square(x: int, y: int) -> PolygonPatch:
    return PolygonPatch([vec(x, y), vec(x + 1, y), vec(x + 1, y + 1), vec(x, y + 1)])


def _square_torus() -> SurfaceDescription:
    return assemble([_square(0, 0)], GluingScheme([((0, 0), (0, 2)), ((0, 1), (0, 3))]),
                    "translation", [0])


def _octagon() -> SurfaceDescription:
    pts = [(1, 0), (2, 0), (3, 1), (3, 2), (2, 3), (1, 3), (0, 2), (0, 1)]
    patch = PolygonPatch([vec(*p) for p in pts])
    return assemble([patch], GluingScheme([((0, i), (0, i + 4)) for i in range(4)]),
                    "translation")


def _l_shaped() -> SurfaceDescription:
    # squares A = [0,1]^2, B to its right, C above it; sides 0 bottom, 1 right, 2 top, 3 left
    a, b, c = _square(0, 0), _square(1, 0), _square(0, 1)
    pairs = [((0, 1), (1, 3)), ((0, 2), (2, 0)), ((0, 0), (2, 2)),
             ((0, 3), (1, 1)), ((1, 0), (1, 2)), ((2, 1), (2, 3))]
    return assemble([a, b, c], GluingScheme(pairs), "translation")


def _pillowcase() -> SurfaceDescription:
    # unit square with every side folded at its midpoint by a half-turn
    pts = [("1/2", 0), (1, 0), (1, "1/2"), (1, 1), ("1/2", 1), (0, 1), (0, "1/2"), (0, 0)]
    patch = PolygonPatch([vec(*p) for p in pts])
    pairs = [((0, 0), (0, 7)), ((0, 1), (0, 2)), ((0, 3), (0, 4)), ((0, 5), (0, 6))]
    return assemble([patch], GluingScheme(pairs), "half-dilation")


def _hopf_like() -> SurfaceDescription:
    # annulus between the squares of half-side 1 and 2, inner side glued to outer by z -> 2z
    outer = [vec(-2, -2), vec(2, -2), vec(2, 2), vec(-2, 2)]
    inner = [vec(-1, -1), vec(1, -1), vec(1, 1), vec(-1, 1)]
    patches = []
    for i in range(4):
        j = (i + 1) % 4
        patches.append(PolygonPatch([outer[i], outer[j], inner[j], inner[i]]))
    pairs = [((i, 0), (i, 2)) for i in range(4)]
    pairs += [((i, 1), ((i + 1) % 4, 3)) for i in range(4)]
    return assemble(patches, GluingScheme(pairs), "dilation", [0, 1, 2, 3])


def _fig2_amalgam() -> SurfaceDescription:
    # two dilation cylinders (quadrants I and IV, factors 2 and 3) joined along
    # a flat horizontal cylinder; the remaining vertical boundaries close up
    # through a C-shaped handle
    d1 = PolygonPatch([vec(1, 0), vec(2, 0), vec(0, 2), vec(0, 1)])
    d2 = PolygonPatch([vec(0, -3), vec(3, 0), vec(1, 0), vec(0, -1)])
    band = PolygonPatch([vec(1, -1), vec(2, -1), vec(2, 0), vec(1, 0)])
    handle = PolygonPatch([vec(0, 0), vec(2, 0), vec(2, 1), vec(1, 1), vec(1, 2), vec(2, 2),
                           vec(2, 3), vec(0, 3)],
                          diagonals=[(0, 2), (0, 3), (3, 7), (4, 7), (4, 6)])
    pairs = [
        ((0, 1), (0, 3)),  # z -> z/2 closes the first dilation cylinder
        ((1, 0), (1, 2)),  # z -> z/3 closes the second
        ((0, 0), (2, 2)),  # first cylinder on top of the band
        ((1, 1), (2, 0)),  # band on top of the second cylinder
        ((2, 1), (2, 3)),  # band closes horizontally
        ((0, 2), (3, 1)),  # vertical boundary of the first cylinder into the handle
        ((1, 3), (3, 5)),  # vertical boundary of the second cylinder into the handle
        ((3, 0), (3, 6)),
        ((3, 2), (3, 4)),
        ((3, 3), (3, 7)),
    ]
    return assemble([d1, d2, band, handle], GluingScheme(pairs), "dilation")


def _doubled_l() -> SurfaceDescription:
    # an L-shaped octagon and its mirror image glued side to side: a sphere
    # with one 3pi point at the reflex corner and five poles
    a = [vec(0, 0), vec(1, 0), vec(2, 0), vec(2, 1), vec(1, 1), vec(1, 2), vec(0, 2), vec(0, 1)]
    diags = [(1, 3), (1, 4), (4, 6), (4, 7), (0, 4)]
    front = PolygonPatch(a, diagonals=diags)
    back = PolygonPatch([(p[0], -p[1]) for p in reversed(a)],
                        diagonals=[(7 - i, 7 - j) for i, j in diags])
    pairs = [((0, i), (1, (6 - i) % 8)) for i in range(8)]
    return assemble([front, back], GluingScheme(pairs), "half-dilation")


_EXAMPLES = {
    "square_torus": _square_torus,
    "octagon": _octagon,
    "l_shaped": _l_shaped,
    "pillowcase": _pillowcase,
    "hopf_like_dilation_torus": _hopf_like,
    "fig2_amalgam": _fig2_amalgam,
    "doubled_l": _doubled_l,
}

EXAMPLE_NAMES = tuple(_EXAMPLES)


def standard_example(name: str) -> SurfaceDescription:
    try:
        return _EXAMPLES[name]()
    except KeyError:
        raise errors.UnknownExample(f"no standard example named {name!r}") from None


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

def serialize_surface(desc: SurfaceDescription) -> bytes:
    doc: dict = {
        "triangles": [[fmt_vec(p) for p in tri] for tri in desc.triangles],
        "gluings": [[list(a), list(b)] for a, b in desc.gluings],
    }
    if desc.mode is not None:
        doc["mode"] = desc.mode
    if desc.marked_removable:
        doc["marked_removable"] = list(desc.marked_removable)
    return (json.dumps(doc, indent=1) + "\n").encode()


def parse_surface(data: bytes) -> SurfaceDescription:
    text = data.decode() if isinstance(data, (bytes, bytearray)) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise errors.SurfaceSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise errors.SurfaceSyntaxError("top level must be an object", 1, 1)
    for key in ("triangles", "gluings"):
        if key not in doc:
            raise errors.SurfaceSyntaxError(f"missing field {key!r}", *_locate(text, "{"))
    tris = []
    for i, tri in enumerate(doc["triangles"]):
        if not (isinstance(tri, list) and len(tri) == 3 and all(
                isinstance(p, list) and len(p) == 2 for p in tri)):
            raise errors.SurfaceSyntaxError(f"triangle {i} must be three points",
                                            *_locate_nth(text, '"triangles"', i))
        try:
            tris.append(tuple(_rational_point(p) for p in tri))
        except (ValueError, TypeError, ZeroDivisionError):
            raise errors.SurfaceSyntaxError(f"triangle {i} has a malformed coordinate",
                                            *_locate_nth(text, '"triangles"', i)) from None
    glus = []
    for i, g in enumerate(doc["gluings"]):
        ok = (isinstance(g, list) and len(g) == 2 and all(
            isinstance(h, list) and len(h) == 2 and all(
                isinstance(x, int) and not isinstance(x, bool) for x in h) for h in g))
        if not ok or not all(0 <= h[1] < 3 for h in g):
            raise errors.SurfaceSyntaxError(f"gluing {i} is malformed",
                                            *_locate_nth(text, '"gluings"', i))
        glus.append(((g[0][0], g[0][1]), (g[1][0], g[1][1])))
    mode = doc.get("mode")
    if mode is not None and mode not in ("translation", "dilation", "half-dilation"):
        raise errors.SemanticError(f"unknown mode {mode!r}")
    marked = doc.get("marked_removable", [])
    if not (isinstance(marked, list) and all(isinstance(x, int) for x in marked)):
        raise errors.SurfaceSyntaxError("marked_removable must be a list of integers",
                                        *_locate(text, '"marked_removable"'))
    return SurfaceDescription(tris, glus, mode, list(marked))  # type: ignore[arg-type]


def _rational_point(p: list) -> Vec:
    return (_rational(p[0]), _rational(p[1]))


def _rational(x) -> "q":
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise TypeError("coordinates must be integers or \"p/q\" strings")
    return q(x)


def _locate(text: str, needle: str) -> Tuple[int, int]:
    idx = max(text.find(needle), 0)
    line = text.count("\n", 0, idx) + 1
    col = idx - (text.rfind("\n", 0, idx) + 1) + 1
    return line, col


def _locate_nth(text: str, key: str, n: int) -> Tuple[int, int]:
    """Position of the n-th element of the array stored under ``key``."""
    start = text.find(key)
    if start < 0:
        return 1, 1
    i = text.find("[", start) + 1
    depth, count = 0, 0
    while i < len(text):
        ch = text[i]
        if ch == "[" and depth == 0:
            if count == n:
                break
            count += 1
        if ch == "[":
            depth += 1
        elif ch == "]":
            if depth == 0:
                break
            depth -= 1
        elif ch == '"':
            i = text.find('"', i + 1)
        i += 1
    line = text.count("\n", 0, i) + 1
    col = i - (text.rfind("\n", 0, i) + 1) + 1
    return line, col
