"""Exact directional geometry on a validated surface.

Angles are never computed as real numbers.  A counterclockwise angle is
summarised by ``(n, exact)``: it lies in ``[n*pi, (n+1)*pi)`` and ``exact`` says
whether it equals ``n*pi``.  Both values come from walking corner wedges and
watching the running direction cross the line spanned by the start
direction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

from . import errors
from .affine import AffineMap
from .exact import (Rational, Vec, add, cross, dot, fmt, fmt_vec, is_zero, line_intersection, neg,
                    primitive, same_direction, scale, slope_key, sub)

if TYPE_CHECKING:
    from .surface_core import Corner, Surface

LESS, EQUAL, GREATER = "Less", "Equal", "Greater"


# ---------------------------------------------------------------------------
# Directions and the half-turn walk
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Direction:
    x: Rational
    y: Rational

    @staticmethod
    def of(v: Vec) -> "Direction":
        if is_zero(v):
            raise ValueError("zero vector is not a direction")
        px, py = primitive(v)
        return Direction(Rational(px), Rational(py))

    @property
    def vec(self) -> Vec:
        return (self.x, self.y)

    @property
    def slope(self) -> Tuple[int, int]:
        return slope_key(self.vec)

    def to_json(self) -> list:
        return fmt_vec(self.vec)


def _upper(f: Vec, d: Vec) -> bool:
    c = cross(f, d)
    return c > 0 or (c == 0 and dot(f, d) > 0)


def walk_half_turns(chain: Sequence[Vec]) -> Tuple[int, bool]:
    """Angle swept by a chain of directions, each step counterclockwise and < pi.

    Returns (n, exact) with the total in [n*pi, (n+1)*pi).
    """
    f = chain[0]
    n = 0
    side = True
    for d in chain[1:]:
        s = _upper(f, d)
        if s != side:
            n += 1
            side = s
    last = chain[-1]
    exact = cross(f, last) == 0
    return n, exact


@dataclass(frozen=True)
class AngleComparison:
    result: str
    half_turns: int
    exact: bool


def _in_closed_wedge(w: Tuple[Vec, Vec], d: Vec) -> bool:
    if same_direction(d, w[0]) or same_direction(d, w[1]):
        return True
    if cross(w[0], w[1]) == 0:
        # a flat wedge is the closed upper half-plane of its start
        return cross(w[0], d) > 0
    return cross(w[0], d) > 0 and cross(d, w[1]) > 0


def angle_cmp_pi(fan: Sequence[Tuple[Vec, Vec]], frm: Vec, to: Vec) -> AngleComparison:
    """Compare with pi the counterclockwise angle from ``frm`` to ``to`` through a fan.

    ``fan`` is a list of wedges ``(start, end)`` in one common frame, each with
    counterclockwise opening below pi, consecutive wedges sharing a boundary
    direction.  ``frm`` must lie in the first wedge and ``to`` in the last.
    """
    if not fan:
        raise errors.DirectionNotInWedge("empty fan")
    if not _in_closed_wedge(fan[0], frm):
        raise errors.DirectionNotInWedge("start direction is outside the first wedge")
    if not _in_closed_wedge(fan[-1], to):
        raise errors.DirectionNotInWedge("end direction is outside the last wedge")
    for (a, b), (c, d) in zip(fan, fan[1:]):
        if not same_direction(b, c):
            raise errors.DirectionNotInWedge("fan wedges are not consecutive")
    if len(fan) == 1:
        chain = [frm, to]
    else:
        chain = [frm, fan[0][1]]
        for w in fan[1:-1]:
            chain.extend([w[0], w[1]])
        chain.extend([fan[-1][0], to])
    n, exact = walk_half_turns(chain)
    return AngleComparison(_verdict(n, exact), n, exact)


def _verdict(n: int, exact: bool) -> str:
    if n == 0:
        return LESS
    if n == 1 and exact:
        return EQUAL
    return GREATER


def corner_cycle_half_turns(surf: "Surface", cycle: Sequence["Corner"]) -> int:
    """Total angle, in half turns, of a full corner cycle around a vertex."""
    sigma = Rational(1)
    t, c = cycle[0]
    u0, _ = surf.corner_wedge(t, c)
    chain: List[Vec] = [u0]
    for i, (t, c) in enumerate(cycle):
        u, v = surf.corner_wedge(t, c)
        chain.append(scale(sigma, v))
        _, a = surf.ccw_next_corner(t, c)
        sigma = sigma / a if a > 0 else -sigma / (-a)
        sigma = Rational(1) if sigma > 0 else Rational(-1)
    # the walk closes on the start direction or its opposite
    n, exact = walk_half_turns(chain)
    if not exact:
        raise errors.InternalInvariantError("corner cycle does not close up")
    return n


# ---------------------------------------------------------------------------
# Directions at vertices
# ---------------------------------------------------------------------------

def _sgn(a: Rational) -> Rational:
    return Rational(1) if a > 0 else Rational(-1)


def in_half_open_wedge(surf: "Surface", corner: "Corner", d: Vec) -> bool:
    u, v = surf.corner_wedge(*corner)
    cu = cross(u, d)
    if cu == 0:
        return dot(u, d) > 0
    return cu > 0 and cross(d, v) > 0


def seat_direction(surf: "Surface", corner: "Corner", d: Vec) -> Tuple["Corner", Vec]:
    """Move a direction given in the frame of ``corner`` to the corner whose
    half-open wedge contains it, walking counterclockwise from ``corner``."""
    cur, dd = corner, d
    k = len(surf.cone(*corner).corners)
    for _ in range(k + 1):
        if in_half_open_wedge(surf, cur, dd):
            return cur, dd
        nxt, a = surf.ccw_next_corner(*cur)
        cur, dd = nxt, scale(_sgn(a), dd)
    raise errors.DirectionNotInWedge("direction could not be seated at the vertex")


def ccw_angle(surf: "Surface", c0: "Corner", d0: Vec, c1: "Corner", d1: Vec,
              allow_zero: bool = True) -> Tuple[int, bool]:
    """Counterclockwise angle at a vertex from (c0, d0) to (c1, d1).

    Both directions must be seated (see :func:`seat_direction`).  When both
    coincide the angle is 0 if ``allow_zero`` and a full turn otherwise.
    """
    if c0 == c1 and cross(d0, d1) >= 0 and not (cross(d0, d1) == 0 and dot(d0, d1) < 0):
        if not (cross(d0, d1) == 0 and not allow_zero):
            return walk_half_turns([d0, d1])
    chain: List[Vec] = [d0]
    sigma = Rational(1)
    cur = c0
    _, v = surf.corner_wedge(*cur)
    chain.append(v)
    k = len(surf.cone(*c0).corners)
    for _ in range(k + 1):
        nxt, a = surf.ccw_next_corner(*cur)
        sigma = sigma * _sgn(a)
        cur = nxt
        u, v = surf.corner_wedge(*cur)
        chain.append(scale(sigma, u))
        if cur == c1:
            chain.append(scale(sigma, d1))
            return walk_half_turns(chain)
        chain.append(scale(sigma, v))
    raise errors.InternalInvariantError("corner walk did not reach the target corner")


@dataclass(frozen=True)
class SideAngle:
    """Angle in [n*pi, (n+1)*pi); exact means it equals n*pi."""

    n: int
    exact: bool

    @property
    def at_least_pi(self) -> bool:
        return self.n >= 1

    @property
    def is_pi(self) -> bool:
        return self.n == 1 and self.exact

    @property
    def more_than_pi(self) -> bool:
        return self.n >= 1 and not self.is_pi

    def to_json(self) -> dict:
        return {"half_turns": self.n, "exact": self.exact}


def rotate_half_turns(surf: "Surface", corner: "Corner", d: Vec, n: int) -> Tuple["Corner", Vec]:
    """Seated direction at angle exactly n*pi counterclockwise from (corner, d)."""
    cur, dd = corner, d
    for _ in range(n):
        cur, dd = _rotate_pi(surf, cur, dd)
    return cur, dd


def _rotate_pi(surf: "Surface", corner: "Corner", d: Vec) -> Tuple["Corner", Vec]:
    target = neg(d)
    cur, sigma = corner, Rational(1)
    k = len(surf.cone(*corner).corners)
    first = True
    for _ in range(k + 2):
        local = scale(sigma, target)
        if in_half_open_wedge(surf, cur, local):
            if not (first and not _strictly_after(d, local)):
                return cur, local
        nxt, a = surf.ccw_next_corner(*cur)
        sigma *= _sgn(a)
        cur = nxt
        first = False
    raise errors.InternalInvariantError("half-turn rotation failed")


def _strictly_after(d: Vec, e: Vec) -> bool:
    return cross(d, e) > 0


def diamond(base: Vec, w: Vec) -> Rational:
    """Rational monotone proxy for the angle in [0, pi] from base to w (w in the upper half)."""
    x = dot(base, w)
    y = cross(base, w)
    if y < 0 or (y == 0 and x == 0):
        raise ValueError("direction is not in the closed upper half-plane")
    return (1 - x / (abs(x) + y)) / 2


def undiamond(base: Vec, tau: Rational) -> Vec:
    """Inverse of :func:`diamond` for tau in [0, 1)."""
    c = 1 - 2 * tau
    x, y = c, 1 - abs(c)
    perp = (-base[1], base[0])
    return add(scale(x, base), scale(y, perp))


# ---------------------------------------------------------------------------
# Bends and continuations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuationInterval:
    vertex: int
    bounce: bool
    alpha: int
    lo: Tuple["Corner", Vec]
    hi: Tuple["Corner", Vec]

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "bounce": self.bounce, "width_half_turns": self.alpha,
                "lo": {"corner": list(self.lo[0]), "dir": fmt_vec(self.lo[1])},
                "hi": {"corner": list(self.hi[0]), "dir": fmt_vec(self.hi[1])}}


def back_direction(surf: "Surface", corner: "Corner", incoming: Vec) -> Tuple["Corner", Vec]:
    """Seat the reversed arrival direction.  ``corner`` names any corner of the
    vertex in whose frame ``incoming`` is expressed."""
    return seat_direction(surf, corner, neg(incoming))


def continuation_interval(surf: "Surface", corner: "Corner", incoming: Vec) -> ContinuationInterval:
    """Outgoing directions allowed after arriving at a vertex along ``incoming``."""
    cd = surf.cone(*corner)
    bc, b = back_direction(surf, corner, incoming)
    if cd.removable:
        raise errors.RemovableVertex("vertex with angle 2π is not a singularity")
    if cd.is_pole:
        return ContinuationInterval(cd.vertex, True, -1, (bc, b), (bc, b))
    lo = rotate_half_turns(surf, bc, b, 1)
    hi = rotate_half_turns(surf, bc, b, cd.half_turns - 1)
    return ContinuationInterval(cd.vertex, False, cd.alpha, lo, hi)


def bend_sides(surf: "Surface", back: Tuple["Corner", Vec], out: Tuple["Corner", Vec]
               ) -> Tuple[SideAngle, SideAngle]:
    """(left, right) side angles of a bend with seated back and out directions."""
    k = surf.cone(*back[0]).half_turns
    right_n, right_exact = ccw_angle(surf, back[0], back[1], out[0], out[1])
    if right_n == 0 and right_exact:
        # outgoing equals the back direction: a full bounce
        return SideAngle(k, True), SideAngle(0, True)
    if right_exact:
        left = SideAngle(k - right_n, True)
    else:
        left = SideAngle(k - right_n - 1, False)
    return left, SideAngle(right_n, right_exact)


def continuation_param(surf: "Surface", back: Tuple["Corner", Vec],
                       out: Tuple["Corner", Vec]) -> Rational:
    """Address parameter t in [0, 1] of an outgoing direction."""
    cd = surf.cone(*back[0])
    if cd.is_pole:
        return Rational(0)
    n, exact = ccw_angle(surf, back[0], back[1], out[0], out[1])
    if n < 1 or n > cd.half_turns - 1 or (n == cd.half_turns - 1 and not exact):
        raise errors.AddressInvalid("outgoing direction violates the angle condition")
    if exact:
        return Rational(n - 1, cd.alpha)
    base_c, base = rotate_half_turns(surf, back[0], back[1], n)
    _, local = _express_in(surf, base_c, out)
    tau = diamond(base, local)
    return (n - 1 + tau) / cd.alpha


def _express_in(surf: "Surface", corner: "Corner", target: Tuple["Corner", Vec]
                ) -> Tuple["Corner", Vec]:
    """Express a seated direction in the frame of ``corner`` walking counterclockwise."""
    cur, sigma = corner, Rational(1)
    k = len(surf.cone(*corner).corners)
    for _ in range(k + 1):
        if cur == target[0]:
            return cur, scale(sigma, target[1])
        nxt, a = surf.ccw_next_corner(*cur)
        sigma *= _sgn(a)
        cur = nxt
    raise errors.InternalInvariantError("corner not found around vertex")


def direction_from_param(surf: "Surface", back: Tuple["Corner", Vec], t: Rational
                         ) -> Tuple["Corner", Vec]:
    cd = surf.cone(*back[0])
    if not (0 <= t <= 1):
        raise errors.AddressInvalid(f"address parameter {t} outside [0, 1]")
    if cd.is_pole:
        return back
    s = t * cd.alpha
    n = int(s // 1)
    tau = s - n
    if n == cd.alpha:
        n, tau = cd.alpha - 1, Rational(1)
    base_c, base = rotate_half_turns(surf, back[0], back[1], n + 1)
    if tau == 0:
        return base_c, base
    if tau == 1:
        return rotate_half_turns(surf, base_c, base, 1)
    w = undiamond(base, tau)
    return seat_direction(surf, base_c, w)


# ---------------------------------------------------------------------------
# Trails
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """Straight piece of a trail inside one triangle, in that triangle's frame."""

    tri: int
    a: Vec
    b: Vec

    def reversed(self) -> "Piece":
        return Piece(self.tri, self.b, self.a)

    def to_json(self) -> dict:
        return {"tri": self.tri, "from": fmt_vec(self.a), "to": fmt_vec(self.b)}


@dataclass(frozen=True)
class Bend:
    """A turn at a vertex between piece ``index`` and piece ``index + 1``."""

    index: int
    vertex: int
    back: Tuple["Corner", Vec]
    out: Tuple["Corner", Vec]
    left: SideAngle
    right: SideAngle

    @property
    def is_bounce(self) -> bool:
        return self.right.n == 0 and self.right.exact

    def to_json(self) -> dict:
        return {"after_piece": self.index, "vertex": self.vertex,
                "left": self.left.to_json(), "right": self.right.to_json()}


@dataclass
class Trail:
    pieces: List[Piece]
    bends: List[Bend] = field(default_factory=list)
    start: Optional[Tuple[int, Vec]] = None

    @property
    def is_point(self) -> bool:
        return not self.pieces

    def key(self) -> Tuple:
        return tuple((p.tri, p.a, p.b) for p in self.pieces)

    def reversed_key(self) -> Tuple:
        return tuple((p.tri, p.b, p.a) for p in reversed(self.pieces))

    def to_json(self) -> dict:
        return {"pieces": [p.to_json() for p in self.pieces],
                "bends": [b.to_json() for b in self.bends]}


def canonical_piece(surf: "Surface", tri: int, a: Vec, b: Vec) -> Piece:
    """Pieces lying on an edge are stored on the lexicographically smaller side."""
    pts = surf.triangles[tri]
    for e in range(3):
        p0, p1 = pts[e], pts[(e + 1) % 3]
        d = sub(p1, p0)
        if cross(d, sub(a, p0)) == 0 and cross(d, sub(b, p0)) == 0:
            t2, e2 = surf.twin(tri, e)
            if (t2, e2) < (tri, e):
                g = surf.glue_map(tri, e)
                return Piece(t2, g(a), g(b))
            return Piece(tri, a, b)
    return Piece(tri, a, b)


def make_bend(surf: "Surface", index: int, in_corner: "Corner", incoming: Vec,
              out_corner: "Corner", outgoing: Vec) -> Bend:
    back = back_direction(surf, in_corner, incoming)
    out = seat_direction(surf, out_corner, outgoing)
    left, right = bend_sides(surf, back, out)
    return Bend(index, surf.vertex_of[back[0]], back, out, left, right)


# ---------------------------------------------------------------------------
# Developing and holonomy
# ---------------------------------------------------------------------------

@dataclass
class DevelopedStrip:
    seed: int
    placed: List[Tuple[int, AffineMap]]
    crossings: List[Tuple[int, int]]

    def placed_triangle(self, i: int) -> Tuple[Vec, Vec, Vec]:
        t, m = self.placed[i]
        return tuple(m(p) for p in self._surf_tris[t])  # type: ignore[return-value]

    _surf_tris: List = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"seed": self.seed, "crossings": [list(c) for c in self.crossings],
                "placements": [{"tri": t, **m.to_json()} for t, m in self.placed]}


def _edge_index(cur: int, step) -> int:
    if isinstance(step, int):
        return step
    t, e = step
    if t != cur:
        raise errors.InvalidCrossing(f"edge {(t, e)} is not on triangle {cur}")
    return e


def develop(surf: "Surface", seed: int, crossings: Sequence) -> DevelopedStrip:
    """Place triangles along a dual-graph walk; steps are edge indices or (t, e) pairs."""
    if not (0 <= seed < surf.n_triangles):
        raise errors.InvalidCrossing(f"no triangle {seed}")
    placement = AffineMap.identity()
    placed = [(seed, placement)]
    cur = seed
    used: List[Tuple[int, int]] = []
    for step in crossings:
        e = _edge_index(cur, step)
        if not (0 <= e < 3):
            raise errors.InvalidCrossing(f"edge index {e} out of range")
        t2, _ = surf.twin(cur, e)
        placement = placement.compose(surf.glue_map(cur, e).inverse())
        used.append((cur, e))
        cur = t2
        placed.append((cur, placement))
    return DevelopedStrip(seed, placed, used, list(surf.triangles))


def loop_holonomy(surf: "Surface", seed: int, loop: Sequence) -> AffineMap:
    """Deck map of the developed infinite strip of a dual loop based at ``seed``."""
    strip = develop(surf, seed, loop)
    if strip.placed[-1][0] != seed or not loop:
        raise errors.NotALoop("crossing sequence does not return to the seed triangle")
    return strip.placed[-1][1]


# ---------------------------------------------------------------------------
# Straight leaves
# ---------------------------------------------------------------------------

@dataclass
class LeafTrace:
    kind: str  # "singularity" | "closes" | "budget"
    pieces: List[Piece]
    crossings: List[Tuple[int, int]]
    start: Tuple[int, Vec]
    direction: Vec
    vertex: Optional[int] = None
    arrival: Optional[Tuple["Corner", Vec]] = None
    holonomy: Optional[AffineMap] = None
    period: int = 0
    strip: Optional[DevelopedStrip] = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "crossings": [list(c) for c in self.crossings],
               "pieces": [p.to_json() for p in self.pieces]}
        if self.vertex is not None:
            out["vertex"] = self.vertex
            out["arrival"] = {"corner": list(self.arrival[0]), "dir": fmt_vec(self.arrival[1])}
        if self.holonomy is not None:
            out["holonomy"] = self.holonomy.to_json()
            out["period"] = self.period
        return out


def exit_point(tri: Sequence[Vec], x: Vec, d: Vec, skip: int = -1
               ) -> Tuple[str, int, Vec, Rational]:
    """Where the ray x + s d (s > 0) leaves a triangle containing x.

    Returns ("vertex", corner, point, s) or ("edge", edge, point, s).
    """
    best = None
    for e in range(3):
        if e == skip:
            continue
        p0, p1 = tri[e], tri[(e + 1) % 3]
        ed = sub(p1, p0)
        den = cross(d, ed)
        if den == 0:
            continue
        s, t = line_intersection(x, d, p0, p1)
        if s <= 0 or t < 0 or t > 1:
            continue
        if best is None or s < best[3]:
            best = (e, t, add(x, scale(s, d)), s)
    if best is None:
        raise errors.InternalInvariantError("ray does not leave the triangle")
    e, t, pt, s = best
    if t == 0:
        return ("vertex", e, pt, s)
    if t == 1:
        return ("vertex", (e + 1) % 3, pt, s)
    return ("edge", e, pt, s)


def trace_leaf(surf: "Surface", tri: int, start: Vec, direction: Vec, budget: int) -> LeafTrace:
    """Follow the straight leaf from ``start`` (in triangle ``tri``) in ``direction``."""
    where, _ = surf.locate(start, tri)
    if where == "vertex":
        raise errors.StartAtVertex("leaf tracing must start away from vertices")
    if where == "outside":
        raise errors.InvalidCrossing("start point is not in the given triangle")
    if is_zero(direction):
        raise ValueError("zero direction")
    t, x, d = tri, start, direction
    skip = -1
    if where == "edge":
        # move into the triangle on the side the direction points to
        e = surf.locate(start, tri)[1]
        p0, p1 = surf.edge_points(tri, e)
        if cross(sub(p1, p0), d) < 0:
            g = surf.glue_map(tri, e)
            t, e2 = surf.twin(tri, e)
            x, d = g(x), g.linear(d)
            skip = e2
        elif cross(sub(p1, p0), d) > 0:
            skip = e
    pieces: List[Piece] = []
    crossings: List[Tuple[int, int]] = []
    states: dict = {}
    hol = AffineMap.identity()
    holonomies = [hol]
    while True:
        kind, idx, pt, _ = exit_point(surf.triangles[t], x, d, skip)
        pieces.append(canonical_piece(surf, t, x, pt))
        if kind == "vertex":
            cd = surf.cone(t, idx)
            if cd.removable:
                bc, b = back_direction(surf, (t, idx), d)
                oc, o = rotate_half_turns(surf, bc, b, 1)
                # continue straight from the vertex inside the corner oc
                t, c = oc
                x, d = surf.triangles[t][c], o
                kind2, idx2, pt2, _ = exit_point(surf.triangles[t], x, d, -1)
                skip = -1
                if len(crossings) >= budget:
                    return LeafTrace("budget", pieces, crossings, (tri, start), direction)
                crossings.append((-1, cd.vertex))
                continue
            arrival = ((t, idx), d)
            return LeafTrace("singularity", pieces, crossings, (tri, start), direction,
                             vertex=cd.vertex, arrival=arrival)
        state = (t, idx, pt, primitive(d))
        if state in states:
            i0 = states[state]
            period = len(crossings) - i0
            h = hol.compose(holonomies[i0].inverse())
            return LeafTrace("closes", pieces, crossings, (tri, start), direction,
                             holonomy=h, period=period)
        if len(crossings) >= budget:
            return LeafTrace("budget", pieces, crossings, (tri, start), direction)
        states[state] = len(crossings)
        g = surf.glue_map(t, idx)
        crossings.append((t, idx))
        t2, e2 = surf.twin(t, idx)
        hol = hol.compose(g.inverse())
        holonomies.append(hol)
        t, x, d, skip = t2, g(pt), g.linear(d), e2


def leaf_crossing_loop(trace: LeafTrace) -> List[Tuple[int, int]]:
    """The periodic crossing sequence of a closed leaf, starting at its first crossing."""
    if trace.kind != "closes":
        raise errors.NotALoop("leaf does not close")
    return trace.crossings[len(trace.crossings) - trace.period:]


# ---------------------------------------------------------------------------
# Trail addresses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrailAddress:
    theta0: Vec
    ts: Tuple[Rational, ...]

    def to_json(self) -> dict:
        return {"theta0": fmt_vec(self.theta0), "t": [fmt(t) for t in self.ts]}


def realize_address(surf: "Surface", tri: int, base: Vec, addr: TrailAddress, budget: int
                    ) -> Trail:
    """Build the trail ray with the given address, truncated after the last
    listed bend (at the next singularity) or when the crossing budget runs out."""
    for t in addr.ts:
        if not (0 <= t <= 1):
            raise errors.AddressInvalid(f"parameter {t} outside [0, 1]")
    pieces: List[Piece] = []
    bends: List[Bend] = []
    used = 0
    lt = trace_leaf(surf, tri, base, addr.theta0, budget)
    pieces.extend(lt.pieces)
    used += len(lt.crossings)
    for t in addr.ts:
        if lt.kind != "singularity":
            raise errors.BudgetExhausted("ray ended before realizing the full address")
        corner, inc = lt.arrival
        back = back_direction(surf, corner, inc)
        oc, o = direction_from_param(surf, back, t)
        bends.append(make_bend(surf, len(pieces) - 1, corner, inc, oc, o))
        lt = _trace_from_vertex(surf, oc, o, max(budget - used, 0))
        pieces.extend(lt.pieces)
        used += len(lt.crossings)
    return Trail(pieces, bends, (tri, base))


def _trace_from_vertex(surf: "Surface", corner: "Corner", o: Vec, budget: int) -> LeafTrace:
    """Leaf leaving a vertex along a seated direction."""
    t, c = corner
    x = surf.triangles[t][c]
    kind, idx, pt, _ = exit_point(surf.triangles[t], x, o, -1)
    first = canonical_piece(surf, t, x, pt)
    if kind == "vertex":
        return LeafTrace("singularity", [first], [], (t, x), o, vertex=surf.vertex_of[(t, idx)],
                         arrival=((t, idx), o))
    g = surf.glue_map(t, idx)
    t2, _ = surf.twin(t, idx)
    if budget <= 0:
        return LeafTrace("budget", [first], [(t, idx)], (t, x), o)
    rest = trace_leaf(surf, t2, g(pt), g.linear(o), budget - 1)
    return LeafTrace(rest.kind, [first] + rest.pieces, [(t, idx)] + rest.crossings, (t, x), o,
                     vertex=rest.vertex, arrival=rest.arrival, holonomy=rest.holonomy,
                     period=rest.period)


def address_of(surf: "Surface", trail: Trail) -> TrailAddress:
    if not trail.pieces:
        raise errors.AddressInvalid("empty trail")
    p0 = trail.pieces[0]
    theta0 = sub(p0.b, p0.a)
    ts = tuple(continuation_param(surf, b.back, b.out) for b in trail.bends)
    return TrailAddress(theta0, ts)
