"""Independent checks: Gauss-Bonnet, loop angle sums, trail verification and a
brute-force enumeration of closed trails.

Angles never become numbers.  A corner angle is an opaque positive symbol;
the only facts used are that the three corners of a triangle sum to pi and
that the corners around a vertex sum to its cone angle.
"""
from __future__ import annotations

import functools
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import errors
from .connect import Cover, propagate_rays
from .exact import (Rational, Vec, add, cross, dot, orient, parallel_ratio, primitive,
                    same_direction, scale, sub)
from .kinematics import (Piece, Trail, back_direction, canonical_piece, exit_point, make_bend,
                         rotate_half_turns, seat_direction, walk_half_turns)
from .surface_core import Surface

Corner = Tuple[int, int]


# ---------------------------------------------------------------------------
# Regions and Gauss-Bonnet
# ---------------------------------------------------------------------------

@dataclass
class Region:
    """A finite set of triangle nodes of a developed cover."""

    cover: Cover
    nodes: List[int]
    interior: List[int] = field(default_factory=list)
    boundary: List[int] = field(default_factory=list)
    chi: int = 0

    @staticmethod
    def from_nodes(cover: Cover, nodes: Sequence[int]) -> "Region":
        reg = Region(cover, sorted(set(nodes)))
        reg._analyse()
        return reg

    @staticmethod
    def from_path(surf: Surface, tri: int, path: Sequence[int] = ()) -> "Region":
        """Region made of the triangles visited by a dual path from ``tri``."""
        if not (0 <= tri < surf.n_triangles):
            raise errors.InvalidRegion(f"no triangle {tri}")
        cover = Cover(surf)
        n = cover.root(tri)
        nodes = [n]
        for e in path:
            if not (0 <= e < 3):
                raise errors.InvalidRegion(f"edge index {e} out of range")
            n = cover.step(n, e)
            nodes.append(n)
        return Region.from_nodes(cover, nodes)

    @staticmethod
    def star(surf: Surface, vertex: int) -> "Region":
        """All triangles around one lift of a vertex."""
        t, c = surf.cones[vertex].corners[0]
        cover = Cover(surf)
        ring = cover.ring_around(cover.root(t), c)
        return Region.from_nodes(cover, [n for n, _ in ring])

    def _edges(self) -> Tuple[set, List[Tuple[int, int]]]:
        inside = set(self.nodes)
        edges = set()
        bnd = []
        for n in self.nodes:
            for e in range(3):
                m = self.cover.nodes[n].nbr[e]
                if m is None or m not in inside:
                    bnd.append((n, e))
                    continue
                edges.add(frozenset(((n, e), (m, self.cover.surf.twin(
                    self.cover.nodes[n].tri, e)[1]))))
        return edges, bnd

    def _analyse(self) -> None:
        cov, surf = self.cover, self.cover.surf
        inside = set(self.nodes)
        # links between region nodes that are neighbours in the cover
        for n in self.nodes:
            for e in range(3):
                m = cov.peek(n, e)
                if m is not None and m in inside:
                    cov.step(n, e)
        edges, bnd = self._edges()
        verts = {cov.vert(n, c) for n in self.nodes for c in range(3)}
        self.chi = len(verts) - len(edges) - len(bnd) + len(self.nodes)
        if self.chi != 1:
            raise errors.InvalidRegion("region is not a disk", chi=self.chi)
        interior, boundary = [], []
        for v in sorted(verts):
            k = len(surf.cones[cov.vertex_class(v)].corners)
            slots = sorted(s for s, m in cov.ring(v).items() if m in inside)
            if len(slots) == k:
                interior.append(v)
                continue
            runs = sum(1 for i, s in enumerate(slots) if (s - 1) % k not in slots)
            if runs != 1:
                raise errors.InvalidRegion("region is pinched at a vertex", vertex=v)
            boundary.append(v)
        self.interior, self.boundary = interior, boundary

    def corners_at(self, v: int) -> List[Tuple[int, int]]:
        inside = set(self.nodes)
        return [(n, c) for n in self.nodes for c in range(3)
                if n in inside and self.cover.vert(n, c) == v]

    def alpha(self, v: int) -> int:
        return self.cover.surf.cones[self.cover.vertex_class(v)].alpha

    def to_json(self) -> dict:
        return {"triangles": [self.cover.nodes[n].tri for n in self.nodes],
                "interior_vertices": [{"vertex": self.cover.vertex_class(v),
                                       "alpha": self.alpha(v)} for v in self.interior],
                "boundary_vertices": len(self.boundary), "chi": self.chi}


def random_region(surf: Surface, size: int, rng: random.Random, tries: int = 50) -> Region:
    """Grow a disk of at most ``size`` triangles by adding random neighbours."""
    for _ in range(tries):
        try:
            return _grow(surf, size, rng)
        except (errors.InvalidRegion, errors.InternalInvariantError):
            # the growth closed up on itself; start again with a fresh cover
            continue
    raise errors.InvalidRegion("could not grow a disk region")


def _grow(surf: Surface, size: int, rng: random.Random) -> Region:
    cover = Cover(surf)
    nodes = [cover.root(rng.randrange(surf.n_triangles))]
    target = rng.randint(1, size)
    for _ in range(4 * size):
        if len(nodes) >= target:
            break
        m = cover.step(rng.choice(nodes), rng.randrange(3))
        if m in nodes:
            continue
        try:
            Region.from_nodes(cover, nodes + [m])
        except errors.InvalidRegion:
            continue
        nodes.append(m)
    return Region.from_nodes(cover, nodes)


def _solve(rows: List[Dict[object, Rational]], target: Dict[object, Rational]
           ) -> Optional[List[Rational]]:
    """Coefficients c with sum c_i rows_i == target, by exact elimination."""
    keys = sorted({k for r in rows for k in r} | set(target), key=repr)
    idx = {k: i for i, k in enumerate(keys)}
    m = len(rows)
    # augmented matrix: one equation per symbol, one unknown per row
    mat = [[Rational(0)] * (m + 1) for _ in keys]
    for j, r in enumerate(rows):
        for k, v in r.items():
            mat[idx[k]][j] = Rational(v)
    for k, v in target.items():
        mat[idx[k]][m] = Rational(v)
    piv_cols = []
    r0 = 0
    for col in range(m):
        p = next((i for i in range(r0, len(mat)) if mat[i][col] != 0), None)
        if p is None:
            continue
        mat[r0], mat[p] = mat[p], mat[r0]
        inv = 1 / mat[r0][col]
        mat[r0] = [x * inv for x in mat[r0]]
        for i in range(len(mat)):
            if i != r0 and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r0])]
        piv_cols.append(col)
        r0 += 1
    for i in range(r0, len(mat)):
        if mat[i][m] != 0:
            return None
    sol = [Rational(0)] * m
    for i, col in enumerate(piv_cols):
        sol[col] = mat[i][m]
    return sol


@dataclass
class GaussBonnetReport:
    lhs: Rational  # in units of pi
    rhs: Rational
    holds: bool
    region: Region

    def to_json(self) -> dict:
        from .exact import fmt
        return {"lhs_pi": fmt(self.lhs), "rhs_pi": fmt(self.rhs), "holds": self.holds,
                "region": self.region.to_json()}


def gauss_bonnet(region: Region) -> GaussBonnetReport:
    """Sum over boundary vertices of (pi - angle) minus pi*alpha over interior
    singularities, against 2*pi*chi, with corner angles kept symbolic."""
    cov = region.cover
    # linear forms: symbol -> coefficient, with the key "pi" for the constant
    lhs: Dict[object, Rational] = {"pi": Rational(0)}
    for v in region.boundary:
        lhs["pi"] += 1
        for n, c in region.corners_at(v):
            lhs[(n, c)] = lhs.get((n, c), Rational(0)) - 1
    for v in region.interior:
        lhs["pi"] -= region.alpha(v)
    rows: List[Dict[object, Rational]] = []
    for n in region.nodes:
        rows.append({(n, 0): 1, (n, 1): 1, (n, 2): 1, "pi": -1})
    for v in region.interior:
        k = cov.surf.cones[cov.vertex_class(v)].half_turns
        row: Dict[object, Rational] = {"pi": Rational(-k)}
        for n, c in region.corners_at(v):
            row[(n, c)] = row.get((n, c), Rational(0)) + 1
        rows.append(row)
    symbols = {k: v for k, v in lhs.items() if k != "pi" and v != 0}
    sym_rows = [{k: v for k, v in r.items() if k != "pi"} for r in rows]
    coef = _solve(sym_rows, symbols)
    if coef is None:
        raise errors.InternalInvariantError("boundary angles do not reduce to multiples of pi")
    value = lhs["pi"] - sum((c * r["pi"] for c, r in zip(coef, rows)), Rational(0))
    rhs = Rational(2 * region.chi)
    return GaussBonnetReport(value, rhs, value == rhs, region)


# ---------------------------------------------------------------------------
# Angle sums along loops
# ---------------------------------------------------------------------------

Fan = Sequence[Tuple[Vec, Vec]]


def _perp(v: Vec) -> Vec:
    return (-v[1], v[0])


def loop_angle_defect(corners: Sequence[Tuple[Fan, Vec, Vec]]) -> int:
    """Sum of the corner angles of a closed loop of leaf segments, in units of pi.

    Each corner is ``(fan, frm, to)``: the counterclockwise angle from ``frm``
    to ``to`` through the wedges of ``fan`` (one frame per corner).  ``to``
    of a corner points along the segment to the next corner, whose ``frm``
    points back along it.
    """
    if not corners:
        raise errors.NotClosed("empty loop")
    chain: List[Vec] = []
    sigma = Rational(1)
    prev_to: Optional[Vec] = None
    for fan, frm, to in corners:
        if prev_to is not None:
            r = parallel_ratio(frm, prev_to) if cross(frm, prev_to) == 0 else None
            if r is None or r == 0:
                raise errors.NotClosed("consecutive corners are not joined by a segment")
            if r > 0:
                sigma = -sigma
        fan = list(fan)
        local = [frm] + [w[1] for w in fan[:-1]] + [to]
        seg = [scale(sigma, d) for d in local]
        if chain:
            x = chain[-1]
            chain.extend([_perp(x), scale(Rational(-1), x)])
            if not same_direction(chain[-1], seg[0]):
                raise errors.NotClosed("corner does not start where the previous segment ends")
            chain.extend(seg[1:])
        else:
            chain.extend(seg)
        prev_to = to
    # close the loop back to the first corner
    fan0, frm0, _ = corners[0]
    r = parallel_ratio(frm0, prev_to) if cross(frm0, prev_to) == 0 else None
    if r is None or r == 0:
        raise errors.NotClosed("loop does not close")
    end_sigma = sigma if r < 0 else -sigma
    x = chain[-1]
    chain.extend([_perp(x), scale(Rational(-1), x)])
    if not same_direction(chain[-1], scale(end_sigma, frm0)):
        raise errors.NotClosed("loop does not close")
    if end_sigma != 1:
        raise errors.NotClosed("loop reverses orientation")
    n, exact = walk_half_turns(chain)
    if not exact:
        raise errors.NotClosed("angle sum is not a multiple of pi")
    return n - len(corners)


def _vertex_fan(surf: Surface, c0: Corner, d0: Vec, c1: Corner, d1: Vec,
                allow_zero: bool) -> Tuple[List[Tuple[Vec, Vec]], Vec]:
    """Wedges counterclockwise from (c0, d0) to (c1, d1) in the frame of c0,
    with d1 expressed in that frame."""
    c0, d0 = seat_direction(surf, c0, d0)
    c1, d1 = seat_direction(surf, c1, d1)
    sigma = Rational(1)
    cur = c0
    fan = [surf.corner_wedge(*cur)]
    if c0 == c1 and allow_zero and cross(d0, d1) >= 0 and not (
            cross(d0, d1) == 0 and dot(d0, d1) < 0):
        return fan, d1
    for _ in range(len(surf.cone(*c0).corners) + 1):
        nxt, a = surf.ccw_next_corner(*cur)
        sigma *= 1 if a > 0 else -1
        cur = nxt
        u, v = surf.corner_wedge(*cur)
        fan.append((scale(sigma, u), scale(sigma, v)))
        if cur == c1:
            return fan, scale(sigma, d1)
    raise errors.InternalInvariantError("corner walk did not reach the target corner")


def trail_side_corners(surf: Surface, trail: "ClosedTrailLike", left: bool = True
                       ) -> List[Tuple[Fan, Vec, Vec]]:
    """Corners of a closed trail on one side, in the order expected by
    :func:`loop_angle_defect`."""
    corners = []
    for b in trail.bends:
        (cb, db), (co, do) = b.back, b.out
        if left:
            fan, to = _vertex_fan(surf, co, do, cb, db, False)
            corners.append((fan, do, to))
        else:
            fan, to = _vertex_fan(surf, cb, db, co, do, False)
            corners.append((fan, db, to))
    if left:
        corners.reverse()
    return corners


class ClosedTrailLike:  # pragma: no cover - typing helper
    pieces: List[Piece]
    bends: list


# ---------------------------------------------------------------------------
# Trail verification
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    ok: bool
    index: int = -1
    reason: str = ""

    def to_json(self) -> dict:
        return {"ok": self.ok, "index": self.index, "reason": self.reason}


def _corner_at(surf: Surface, t: int, x: Vec) -> Optional[int]:
    for c in range(3):
        if surf.triangles[t][c] == x:
            return c
    return None


def _joins(surf: Surface, p: Piece, q: Piece) -> Optional[str]:
    """How piece q continues piece p: 'vertex', 'edge', 'point' or None."""
    cp = _corner_at(surf, p.tri, p.b)
    if cp is not None:
        cq = _corner_at(surf, q.tri, q.a)
        if cq is None or surf.vertex_of[(p.tri, cp)] != surf.vertex_of[(q.tri, cq)]:
            return None
        return "vertex"
    where, e = surf.locate(p.b, p.tri)
    if where == "edge":
        t2, _ = surf.twin(p.tri, e)
        g = surf.glue_map(p.tri, e)
        if q.tri == t2 and g(p.b) == q.a:
            r = parallel_ratio(sub(q.b, q.a), g.linear(sub(p.b, p.a)))
            return "edge" if r is not None and r > 0 else None
        return None
    if where == "interior" and q.tri == p.tri and q.a == p.b:
        r = parallel_ratio(sub(q.b, q.a), sub(p.b, p.a))
        return "point" if r is not None and r > 0 else None
    return None


def verify_trail(surf: Surface, trail, closed: Optional[bool] = None) -> Verdict:
    """Check pieces, straightness, bend angles and simplicity of the lift."""
    pieces: List[Piece] = list(trail.pieces)
    if closed is None:
        closed = not isinstance(trail, Trail)
    if not pieces:
        return Verdict(True)
    for i, p in enumerate(pieces):
        if p.a == p.b:
            return Verdict(False, i, "empty piece")
        if not (0 <= p.tri < surf.n_triangles):
            return Verdict(False, i, "unknown triangle")
        for x in (p.a, p.b):
            if surf.locate(x, p.tri)[0] == "outside":
                return Verdict(False, i, "piece leaves its triangle")
    n = len(pieces)
    pairs = range(n) if closed else range(n - 1)
    for i in pairs:
        p, q = pieces[i], pieces[(i + 1) % n]
        how = _joins(surf, p, q)
        if how is None:
            return Verdict(False, i, "pieces do not continue each other")
        if how != "vertex":
            continue
        cin = (p.tri, _corner_at(surf, p.tri, p.b))
        cout = (q.tri, _corner_at(surf, q.tri, q.a))
        b = make_bend(surf, i, cin, sub(p.b, p.a), cout, sub(q.b, q.a))
        cd = surf.cones[b.vertex]
        if cd.is_pole:
            if not b.is_bounce:
                return Verdict(False, i, "trail does not bounce off a pole")
            continue
        if not (b.left.at_least_pi and b.right.at_least_pi):
            return Verdict(False, i, "bend angle below pi")
        if cd.removable and not (b.left.is_pi and b.right.is_pi):
            return Verdict(False, i, "trail bends at a removable point")
    return _check_lift(surf, pieces, closed)


def _check_lift(surf: Surface, pieces: List[Piece], closed: bool) -> Verdict:
    """Walk the pieces through a developed cover and look for overlaps."""
    cover = Cover(surf)
    node = cover.root(pieces[0].tri)
    n = len(pieces)
    seq = pieces * 2 if closed else pieces
    placed: Dict[int, List[Tuple[int, Vec, Vec]]] = {}
    seen_vertices: Dict[int, int] = {}
    for j, p in enumerate(seq):
        if j > 0:
            prev = seq[j - 1]
            how = _joins(surf, prev, p)
            if how == "edge":
                e = surf.locate(prev.b, prev.tri)[1]
                node = cover.step(node, e)
            elif how == "vertex":
                c0 = _corner_at(surf, prev.tri, prev.b)
                node = _ring_node(cover, node, c0, p.tri, _corner_at(surf, p.tri, p.a),
                                  prev, p)
                v = cover.vert(node, _corner_at(surf, p.tri, p.a))
                if v in seen_vertices and not (closed and j - seen_vertices[v] == n):
                    return Verdict(False, j % n, "trail passes a vertex twice")
                seen_vertices.setdefault(v, j)
        if cover.nodes[node].tri != p.tri:
            node = _edge_mate(cover, node, p)
        for k, a, b in placed.get(node, []):
            if abs(j - k) == 1 or (closed and abs(j - k) == n):
                continue
            if _segments_overlap(a, b, p.a, p.b):
                return Verdict(False, j % n, "trail is not simple")
        placed.setdefault(node, []).append((j, p.a, p.b))
    return Verdict(True)


def _ring_node(cover: Cover, node: int, c0: int, t1: int, c1: int, prev: Piece, nxt: Piece
               ) -> int:
    """Node of the outgoing piece: turn counterclockwise from the arrival by
    the right-hand bend angle."""
    surf = cover.surf
    tri = cover.nodes[node].tri
    if tri != prev.tri:
        node = _edge_mate(cover, node, prev)
        tri = prev.tri
    b = make_bend(surf, 0, (tri, c0), sub(prev.b, prev.a), (t1, c1), sub(nxt.b, nxt.a))
    (bt, bc), _ = b.back
    (ot, oc), _ = b.out
    ring = cover.ring_around(node, c0)
    start = next(i for i, (m, c) in enumerate(ring) if (cover.nodes[m].tri, c) == (bt, bc))
    k = len(ring)
    for s in range(k):
        m, c = ring[(start + s) % k]
        if (cover.nodes[m].tri, c) == (ot, oc):
            if (t1, c1) == (ot, oc):
                return m
            return _edge_mate(cover, m, nxt)
    raise errors.InternalInvariantError("outgoing corner not found around the vertex")


def _edge_mate(cover: Cover, node: int, p: Piece) -> int:
    """Neighbour of node holding the piece p that runs along a shared edge."""
    surf = cover.surf
    t = cover.nodes[node].tri
    if t == p.tri:
        return node
    for e in range(3):
        if surf.twin(t, e)[0] == p.tri:
            m = cover.step(node, e)
            g = surf.glue_map(t, e)
            p0, p1 = surf.edge_points(t, e)
            if {g(p0), g(p1)} >= {p.a, p.b} or _on_segment(g(p0), g(p1), p.a):
                return m
    return node


def _on_segment(a: Vec, b: Vec, x: Vec) -> bool:
    return orient(a, b, x) == 0 and dot(sub(x, a), sub(x, b)) <= 0


def _segments_overlap(a: Vec, b: Vec, c: Vec, d: Vec) -> bool:
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and o2 == 0:
        # collinear: overlap of positive length
        u = sub(b, a)
        s = sorted([dot(sub(a, a), u), dot(sub(b, a), u)])
        t = sorted([dot(sub(c, a), u), dot(sub(d, a), u)])
        return min(s[1], t[1]) > max(s[0], t[0])
    return any(_on_segment(c, d, x) and x not in (c, d) for x in (a, b)) or any(
        _on_segment(a, b, x) and x not in (a, b) for x in (c, d))


# ---------------------------------------------------------------------------
# Brute-force enumeration of closed trails
# ---------------------------------------------------------------------------

@dataclass
class Connection:
    """A straight segment from one vertex to another, with no vertex inside."""

    start: Corner
    out: Vec
    end: Corner
    arrival: Vec
    pieces: List[Piece]

    @property
    def length(self) -> int:
        return len(self.pieces)

    @property
    def displacement(self) -> Vec:
        """Sum of the piece vectors; frame independent on translation surfaces."""
        d = (Rational(0), Rational(0))
        for p in self.pieces:
            d = add(d, sub(p.b, p.a))
        return d


def _trace_to_vertex(surf: Surface, corner: Corner, d: Vec, max_pieces: int
                     ) -> Optional[Connection]:
    (t, c), d = seat_direction(surf, corner, d)
    S = surf.triangles[t][c]
    u, _ = surf.corner_wedge(t, c)
    if cross(u, d) == 0:
        P = surf.triangles[t][(c + 1) % 3]
        return Connection((t, c), d, (t, (c + 1) % 3), sub(P, S),
                          [canonical_piece(surf, t, S, P)])
    pieces: List[Piece] = []
    tt, x, dd, skip = t, S, d, -1
    while len(pieces) < max_pieces:
        kind, k, pt, _ = exit_point(surf.triangles[tt], x, dd, skip)
        pieces.append(canonical_piece(surf, tt, x, pt))
        if kind == "vertex":
            return Connection((t, c), d, (tt, k), sub(pt, x), pieces)
        g = surf.glue_map(tt, k)
        t2, e2 = surf.twin(tt, k)
        tt, x, dd, skip = t2, g(pt), g.linear(dd), e2
    return None


def saddle_connections(surf: Surface, max_pieces: int) -> List[Connection]:
    """Every vertex-to-vertex segment of at most ``max_pieces`` pieces.

    From each corner the opposite edge is a window of rays; windows are
    unfolded across edges and split at every vertex seen strictly inside.
    The start edge of each corner is included and its end edge is not, so
    each segment is found once.
    """
    from .affine import AffineMap
    out: List[Connection] = []
    for t in range(surf.n_triangles):
        for c in range(3):
            S = surf.triangles[t][c]
            A, B = surf.triangles[t][(c + 1) % 3], surf.triangles[t][(c + 2) % 3]
            out.append(_trace_to_vertex(surf, (t, c), sub(A, S), 1))
            stack = [(t, (c + 1) % 3, AffineMap.identity(), A, B, 1)]
            while stack:
                tri, e, M, lo, hi, depth = stack.pop()
                if depth >= max_pieces:
                    continue
                g = surf.glue_map(tri, e)
                t2, e2 = surf.twin(tri, e)
                M2 = g.compose(M)
                s2, lo2, hi2 = M2(S), g(lo), g(hi)
                pts = surf.triangles[t2]
                C = pts[(e2 + 2) % 3]
                if orient(s2, lo2, C) > 0 and orient(s2, C, hi2) > 0:
                    cn = _trace_to_vertex(surf, (t, c), sub(M2.inverse()(C), S), depth + 1)
                    if cn is None or cn.length != depth + 1:
                        raise errors.InternalInvariantError("unfolded segment misses its vertex")
                    out.append(cn)
                for f in ((e2 + 1) % 3, (e2 + 2) % 3):
                    P0, P1 = pts[f], pts[(f + 1) % 3]
                    a, b = (P0, P1) if orient(s2, P0, P1) > 0 else (P1, P0)
                    nlo = a if orient(s2, lo2, a) > 0 else lo2
                    nhi = b if orient(s2, b, hi2) > 0 else hi2
                    if orient(s2, nlo, nhi) > 0:
                        stack.append((t2, f, M2, nlo, nhi, depth + 1))
    return [cn for cn in out if cn is not None]


def _angle_key(surf: Surface, corner: Corner, d: Vec) -> Tuple[int, Rational]:
    """Position of a direction around its vertex: slot, then a monotone
    parameter in [0, 1) inside the corner."""
    corner, d = seat_direction(surf, corner, d)
    u, v = surf.corner_wedge(*corner)
    a, b = cross(u, d), cross(d, v)
    return surf.slot_of[corner], a / (a + b)


def _in_arc(x, lo, hi) -> bool:
    if lo <= hi:
        return lo <= x <= hi
    return x >= lo or x <= hi


def _dual_loop_length(surf: Surface, cls) -> float:
    """Length of a curve in the class: triangle centroids joined through edge midpoints."""
    from .kinematics import develop
    strip = develop(surf, cls.seed, cls.loop)
    total = 0.0

    def cen(tri):
        return tuple(sum(float(p[i]) for p in tri) / 3 for i in range(2))

    for i, (t, e) in enumerate(strip.crossings):
        tri = strip.placed_triangle(i)
        nxt = strip.placed_triangle(i + 1)
        m = tuple((float(tri[e][k]) + float(tri[(e + 1) % 3][k])) / 2 for k in range(2))
        for a, b in ((cen(tri), m), (m, cen(nxt))):
            total += ((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) ** 0.5
    return total


@functools.lru_cache(maxsize=8)
def _region_coverage(surf: Surface, budget: int):
    """Ray coverage from the centroid of triangle 0, shared by all classes."""
    tri = surf.triangles[0]
    x = tuple(sum(p[i] for p in tri) / 3 for i in range(2))
    return propagate_rays(surf, 0, x, budget=budget)


class _ClassRegion:
    """A consistently developed disk of the cover with the deck map of the
    class known on it."""

    def __init__(self, surf: Surface, cls, budget: int) -> None:
        cov = _region_coverage(surf, budget)
        self.cover = cover = cov.cover
        self.delta: Dict[int, int] = {}
        # anchor the deck map at the lift of the seed nearest the base
        root, image = None, None
        queue, seen = [cov.base_node], {cov.base_node}
        for n in queue:
            if cover.nodes[n].tri == cls.seed:
                image = cover.follow(n, cls.loop)
                if image is not None:
                    root = n
                    break
            for m in cover.nodes[n].nbr:
                if m is not None and m not in seen:
                    seen.add(m)
                    queue.append(m)
        if root is None:
            return
        self.delta[root] = image
        queue = [root]
        for n in queue:
            for e, m in enumerate(cover.nodes[n].nbr):
                if m is None or m in self.delta:
                    continue
                dm = cover.peek(self.delta[n], e)
                if dm is not None:
                    self.delta[m] = dm
                    queue.append(m)

    def contains(self, base_tri: int, loop: Sequence) -> bool:
        for X, dX in self.delta.items():
            if self.cover.nodes[X].tri != base_tri:
                continue
            if self.cover.follow(X, loop) == dX:
                return True
        return False


class _Membership:
    """Class test for closed dual loops: some lift X of the base triangle
    with X followed by the loop equal to delta(X).  Regions grow until the
    answer is positive or the largest one says no."""

    def __init__(self, surf: Surface, cls, budgets: Sequence[int]) -> None:
        self.surf, self.cls, self.budgets = surf, cls, list(budgets)
        self.regions: List[_ClassRegion] = []

    def __call__(self, base_tri: int, loop: Sequence) -> bool:
        for i, b in enumerate(self.budgets):
            if i == len(self.regions):
                self.regions.append(_ClassRegion(self.surf, self.cls, b))
            if self.regions[i].contains(base_tri, loop):
                return True
        return False


def _word_member(surf: Surface, cls, base_tri: int, loop: Sequence, depth: int) -> bool:
    """Positive-only conjugacy test: some dual path P of length at most
    ``depth`` from the class seed makes P loop P^-1 class^-1 close up in a
    developed cover.  Used where ray coverage is unavailable."""
    from .closed_trails import _cyclic_reduce, canonical_loop
    a = canonical_loop(_cyclic_reduce(surf, base_tri, list(loop))[1])
    b = canonical_loop(list(cls.loop))
    if a == b:
        return True
    inv_c = _inverse_path(surf, list(cls.loop))
    frontier: List[Tuple[int, List]] = [(cls.seed, [])]
    for _ in range(depth + 1):
        nxt = []
        for t, path in frontier:
            if t == base_tri:
                word = path + list(loop) + _inverse_path(surf, path) + inv_c
                cover = Cover(surf)
                r = cover.root(cls.seed)
                try:
                    if cover.walk(r, word) == r:
                        return True
                except errors.InternalInvariantError:
                    pass
            for e in range(3):
                if path and surf.twin(t, e) == path[-1]:
                    continue
                nxt.append((surf.twin(t, e)[0], path + [(t, e)]))
        frontier = nxt
    return False


def _inverse_path(surf: Surface, path: Sequence) -> List:
    return [surf.twin(*s) for s in reversed(path)]


def _vertex_holonomy_trivial(surf: Surface) -> bool:
    """Whether going once around every vertex composes to the identity, so
    that holonomy is an invariant of free homotopy classes of the surface."""
    if surf.mode == "translation":
        return True
    for cd in surf.cones:
        a = Rational(1)
        for t, c in cd.corners:
            a *= surf.derivative(t, (c + 2) % 3)
        if a != 1:
            return False
    return True


def _holonomy_compatible(h, k) -> bool:
    """Necessary condition for conjugate deck maps z -> az + b."""
    if h.a != k.a:
        return False
    if h.a != 1:
        return True
    if cross(h.b, k.b) != 0:
        return False
    return dot(h.b, k.b) > 0


@dataclass
class BruteForceResult:
    trails: List  # closed trails with a singular bend, normalized, sorted by key
    leaves: List  # closed leaves through removable vertices: one per leaf family met
    connections: int
    chains: int

    @property
    def keys(self) -> List[Tuple]:
        return [t.key() for t in self.trails]

    def to_json(self) -> dict:
        return {"trails": [t.to_json() for t in self.trails],
                "leaf_families": [t.to_json() for t in self.leaves],
                "connections": self.connections, "chains": self.chains}


UNCUT_BOUND = 8


def brute_force_closed_trails(surf: Surface, cls, max_crossings: int = 12,
                              region_budgets: Sequence[int] = (8000, 32000),
                              max_chains: int = 2_000_000, conjugator_depth: int = 6
                              ) -> BruteForceResult:
    """All closed trails through a vertex in the class with at most
    ``max_crossings`` pieces, by exhaustive search over cycles of saddle
    connections whose bends are at least pi on both sides (exactly pi at
    removable points).

    On translation surfaces the search is cut at the length of an explicit
    curve in the class, which bounds the length of any closed trail in it.
    Class membership is decided in a ray-covered region of the universal
    cover on leaf triangulations, by the translation vector on flat tori,
    and otherwise by a holonomy filter plus a search for a short conjugator.
    """
    from .closed_trails import LEFT, ClosedTrail, _pushed, _period
    if surf.has_poles:
        raise errors.SurfaceHasPoles("brute force needs a pole-free surface")
    if max_crossings > 40:
        raise errors.BoundTooLarge("bound is too large for exhaustive search",
                                   bound=max_crossings)
    if surf.mode != "translation" and max_crossings > UNCUT_BOUND:
        raise errors.BoundTooLarge(
            f"without a length cut the search is limited to {UNCUT_BOUND} pieces",
            bound=max_crossings)
    conns = saddle_connections(surf, max_crossings)
    flat = surf.mode == "translation"
    cap = _dual_loop_length(surf, cls) * (1 + 1e-9) + 1e-9 if flat else float("inf")
    lengths = [sum(float(x) ** 2 for x in cn.displacement) ** 0.5 if flat else 0.0
               for cn in conns]
    outs: Dict[int, List[Tuple[Tuple[int, Rational], int]]] = {}
    for j, cn in enumerate(conns):
        outs.setdefault(surf.vertex_of[cn.start], []).append(
            (_angle_key(surf, cn.start, cn.out), j))
    compat: List[List[int]] = []
    for cn in conns:
        bc, bd = back_direction(surf, cn.end, cn.arrival)
        k = surf.cone(*bc).half_turns
        lo = _angle_key(surf, *rotate_half_turns(surf, bc, bd, 1))
        hi = _angle_key(surf, *rotate_half_turns(surf, bc, bd, k - 1))
        cands = outs.get(surf.vertex_of[bc], [])
        compat.append(sorted(j for key, j in cands if _in_arc(key, lo, hi)))
    torus = not surf.singular_vertices
    invariant_holonomy = _vertex_holonomy_trivial(surf)
    leafy = surf.is_leaf_triangulation
    member = _Membership(surf, cls, region_budgets) if leafy else None
    found: Dict[Tuple, object] = {}
    leaves: Dict[Tuple, object] = {}
    seen_cycles = set()
    chains = 0

    def accept(cyc: List[int]) -> None:
        canon = min(tuple(cyc[i:] + cyc[:i]) for i in range(len(cyc)))
        if canon in seen_cycles:
            return
        seen_cycles.add(canon)
        if _period(canon) < len(canon):
            return
        if flat:
            d = (Rational(0), Rational(0))
            for i in cyc:
                d = add(d, conns[i].displacement)
            if d != cls.holonomy.b:
                return
        pieces: List[Piece] = []
        bends = []
        for a, i in enumerate(cyc):
            pieces.extend(conns[i].pieces)
            j = cyc[(a + 1) % len(cyc)]
            if surf.cone(*conns[i].end).removable:
                continue
            bends.append(make_bend(surf, len(pieces) - 1, conns[i].end, conns[i].arrival,
                                   conns[j].start, conns[j].out))
        tris, loop = _pushed(surf, pieces, LEFT)
        if not (flat and torus):
            from .kinematics import loop_holonomy
            if invariant_holonomy and not _holonomy_compatible(
                    loop_holonomy(surf, tris[0], loop), cls.holonomy):
                return
            if leafy:
                if not member(tris[0], loop):
                    return
            elif not _word_member(surf, cls, tris[0], loop, conjugator_depth):
                return
        trail = ClosedTrail(pieces, bends).normalized()
        (found if bends else leaves).setdefault(trail.key(), trail)

    for i0 in range(len(conns)):
        stack = [(i0, conns[i0].length, lengths[i0], [i0])]
        while stack:
            cur, used, ln, path = stack.pop()
            for j in compat[cur]:
                if j < i0:
                    continue
                if j == i0:
                    accept(path)
                    continue
                u2, l2 = used + conns[j].length, ln + lengths[j]
                if u2 > max_crossings or l2 > cap:
                    continue
                chains += 1
                if chains > max_chains:
                    raise errors.BoundTooLarge("too many chains for exhaustive search",
                                               bound=max_crossings)
                stack.append((j, u2, l2, path + [j]))
    return BruteForceResult([found[k] for k in sorted(found)],
                            [leaves[k] for k in sorted(leaves)], len(conns), chains)
