"""Free homotopy classes and the closed trails in them.

A class is a closed walk in the dual graph, based at a seed triangle.
:func:`classify` decides which case holds for it: no closed trail (NR), a
torus foliated by closed leaves (TF), a cylinder of closed trails (Cyl) or a
unique closed trail bending by more than pi on both sides (UT).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import errors
from .affine import AffineMap
from .connect import Cover, require_leaf_triangulation, trail_along
from .exact import (Rational, Vec, add, cross, dot, fmt_vec, orient, primitive, scale,
                    sub)
from .kinematics import (Bend, Piece, Trail, back_direction, canonical_piece, develop,
                         exit_point, loop_holonomy, make_bend, rotate_half_turns,
                         seat_direction, walk_half_turns)
from .surface_core import Surface, euler_poincare_report

Step = Tuple[int, int]
Corner = Tuple[int, int]

NR, TF, CYL, UT, INCONCLUSIVE = "NR", "TF", "Cyl", "UT", "Inconclusive"
LEFT, RIGHT = 1, -1

_SAMPLE_WEIGHTS = [(1, 1, 1), (7, 5, 4), (11, 13, 17), (29, 23, 31)]


# ---------------------------------------------------------------------------
# Classes
# ---------------------------------------------------------------------------

def _inverse(surf: Surface, a: Step, b: Step) -> bool:
    return surf.twin(*a) == b


def _cyclic_reduce(surf: Surface, seed: int, loop: List[Step]) -> Tuple[int, List[Step]]:
    out: List[Step] = []
    for st in loop:
        if out and _inverse(surf, out[-1], st):
            out.pop()
        else:
            out.append(st)
    i, j = 0, len(out)
    while j - i >= 2 and _inverse(surf, out[j - 1], out[i]):
        i += 1
        j -= 1
    red = out[i:j]
    if i > 0:
        seed = red[0][0]
    return seed, red


def _period(word: Sequence) -> int:
    n = len(word)
    for p in range(1, n):
        if n % p == 0 and all(word[i] == word[i % p] for i in range(n)):
            return p
    return n


def canonical_loop(loop: Sequence[Step]) -> Tuple[Step, ...]:
    """Smallest rotation of a cyclic dual loop."""
    t = tuple(loop)
    return min(t[i:] + t[:i] for i in range(len(t))) if t else t


@dataclass(frozen=True)
class HomotopyClass:
    seed: int
    loop: Tuple[Step, ...]
    holonomy: AffineMap

    @staticmethod
    def from_loop(surf: Surface, seed: int, steps: Sequence) -> "HomotopyClass":
        """Validate a dual loop; steps are edge indices or (triangle, edge) pairs."""
        if not steps:
            raise errors.ClassTrivial("empty loop")
        strip = develop(surf, seed, steps)
        if strip.placed[-1][0] != seed:
            raise errors.NotALoop("crossing sequence does not return to the seed triangle")
        seed, red = _cyclic_reduce(surf, seed, list(strip.crossings))
        if not red:
            raise errors.ClassTrivial("loop reduces to a point")
        p = _period(red)
        if p < len(red):
            raise errors.ClassIsPower(f"loop is a {len(red) // p}-fold repetition",
                                      power=len(red) // p)
        try:
            cover = Cover(surf)
            r = cover.root(seed)
            trivial = cover.walk(r, red) == r
        except errors.InternalInvariantError:
            trivial = False
        if trivial:
            raise errors.ClassTrivial("loop is null-homotopic")
        return HomotopyClass(seed, tuple(red), loop_holonomy(surf, seed, red))

    def to_json(self) -> dict:
        return {"seed": self.seed, "loop": [list(s) for s in self.loop],
                "holonomy": self.holonomy.to_json()}


def class_from_vector(surf: Surface, seed: int, v: Vec, budget: int = 400) -> HomotopyClass:
    """Class of the closed leaf in direction v through a generic point of the seed."""
    for x in _sample_points(surf, seed):
        lp = _leaf_loop(surf, seed, x, v, budget)
        if lp is not None:
            return HomotopyClass.from_loop(surf, seed, lp[1])
    raise errors.NotALoop(f"no closed leaf in direction {fmt_vec(v)} from triangle {seed}")


def _sample_points(surf: Surface, t: int) -> List[Vec]:
    tri = surf.triangles[t]
    out = []
    for w in _SAMPLE_WEIGHTS:
        s = sum(w)
        out.append(tuple(sum(Rational(w[i], s) * tri[i][k] for i in range(3))
                         for k in range(2)))
    return out  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Closed trails
# ---------------------------------------------------------------------------

@dataclass
class ClosedTrail:
    """One period of a closed trail; bend ``i`` sits after piece ``bends[i].index``
    and the last piece runs back into the first."""

    pieces: List[Piece]
    bends: List[Bend] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.bends

    @property
    def left_more(self) -> bool:
        return any(b.left.more_than_pi for b in self.bends)

    @property
    def right_more(self) -> bool:
        return any(b.right.more_than_pi for b in self.bends)

    @property
    def left_all_pi(self) -> bool:
        return all(b.left.is_pi for b in self.bends)

    @property
    def right_all_pi(self) -> bool:
        return all(b.right.is_pi for b in self.bends)

    @property
    def direction(self) -> Vec:
        p = self.pieces[0]
        return sub(p.b, p.a)

    def as_trail(self) -> Trail:
        p = self.pieces[0]
        return Trail(list(self.pieces), list(self.bends), (p.tri, p.a))

    def rotated(self, i: int) -> "ClosedTrail":
        n = len(self.pieces)
        pieces = self.pieces[i:] + self.pieces[:i]
        bends = sorted((_rebend(b, (b.index - i) % n) for b in self.bends),
                       key=lambda b: b.index)
        return ClosedTrail(pieces, bends)

    def starts(self) -> List[int]:
        n = len(self.pieces)
        if self.bends:
            return sorted({(b.index + 1) % n for b in self.bends})
        return list(range(n))

    def key(self) -> Tuple:
        n = len(self.pieces)
        t = tuple((p.tri, p.a, p.b) for p in self.pieces)
        return min(t[i:] + t[:i] for i in self.starts()) if n else t

    def normalized(self) -> "ClosedTrail":
        """Rotation starting at the piece after a bend that gives the smallest key."""
        t = tuple((p.tri, p.a, p.b) for p in self.pieces)
        best = min(self.starts(), key=lambda i: t[i:] + t[:i])
        return self.rotated(best)

    def to_json(self) -> dict:
        return {"pieces": [p.to_json() for p in self.pieces],
                "bends": [b.to_json() for b in self.bends],
                "left_more_than_pi": self.left_more, "right_more_than_pi": self.right_more}


def _rebend(b: Bend, index: int) -> Bend:
    return Bend(index, b.vertex, b.back, b.out, b.left, b.right)


def _corner_at(tri: Sequence[Vec], x: Vec) -> Optional[int]:
    for c in range(3):
        if tri[c] == x:
            return c
    return None


def _merge_at_point(pieces: List[Piece], bends: List[Bend]) -> ClosedTrail:
    """Close a trail from a regular point p to its own copy by joining the
    pieces on both sides of p."""
    n = len(pieces)
    first, last = pieces[0], pieces[-1]
    if n == 1:
        return ClosedTrail([first], [])
    merged = Piece(last.tri, last.a, first.b) if last.tri == first.tri else None
    if merged is None:
        return ClosedTrail(pieces[1:] + [last], [_rebend(b, (b.index - 1) % n) for b in bends])
    out = pieces[1:-1] + [merged]
    m = len(out)
    nb = [_rebend(b, m - 1 if b.index == 0 else b.index - 1) for b in bends]
    return ClosedTrail(out, sorted(nb, key=lambda b: b.index))


def _closing_bend(surf: Surface, pieces: List[Piece]) -> Bend:
    last, first = pieces[-1], pieces[0]
    cin = _corner_at(surf.triangles[last.tri], last.b)
    cout = _corner_at(surf.triangles[first.tri], first.a)
    if cin is None or cout is None:
        raise errors.InternalInvariantError("closing point is not a vertex")
    return make_bend(surf, len(pieces) - 1, (last.tri, cin), sub(last.b, last.a),
                     (first.tri, cout), sub(first.b, first.a))


# ---------------------------------------------------------------------------
# Straight leaves and leaf-following along trails
# ---------------------------------------------------------------------------

def _around(surf: Surface, frm: Corner, to: Corner, ccw: bool) -> List[Step]:
    """Dual steps turning around a vertex from one corner to another."""
    steps: List[Step] = []
    cur = frm
    for _ in range(len(surf.cone(*frm).corners) + 1):
        if cur == to:
            return steps
        t, c = cur
        if ccw:
            steps.append((t, (c + 2) % 3))
            cur, _ = surf.ccw_next_corner(t, c)
        else:
            steps.append((t, c))
            cur, _ = surf.cw_next_corner(t, c)
    raise errors.InternalInvariantError("corner not found around vertex")


def _leaf_loop(surf: Surface, t0: int, x0: Vec, d0: Vec, budget: int
               ) -> Optional[Tuple[List[Piece], List[Step]]]:
    """Follow the leaf from x0 until it comes back to x0, or None if it hits a
    singularity or exceeds the budget.  Removable vertices are passed straight."""
    if d0 == (0, 0):
        return None
    t, x, d, skip = t0, x0, d0, -1
    pieces: List[Piece] = []
    steps: List[Step] = []
    for _ in range(budget + 1):
        kind, idx, pt, _ = exit_point(surf.triangles[t], x, d, skip)
        if t == t0 and pieces and cross(d, sub(x0, x)) == 0:
            a, b = dot(sub(x0, x), d), dot(sub(pt, x), d)
            if 0 < a <= b:
                pieces.append(Piece(t, x, x0))
                return [canonical_piece(surf, p.tri, p.a, p.b) for p in pieces], steps
        pieces.append(Piece(t, x, pt))
        if kind == "vertex":
            cin = (t, idx)
            if not surf.cone(*cin).removable:
                return None
            bc, b = back_direction(surf, cin, d)
            oc, o = rotate_half_turns(surf, bc, b, 1)
            steps.extend(_around(surf, cin, oc, True))
            t, x, d, skip = oc[0], surf.triangles[oc[0]][oc[1]], o, -1
            continue
        g = surf.glue_map(t, idx)
        steps.append((t, idx))
        t2, e2 = surf.twin(t, idx)
        t, x, d, skip = t2, g(pt), g.linear(d), e2
    return None


def follow_closed(surf: Surface, corner: Corner, d: Vec, pi_side: int, budget: int = 2000
                  ) -> Optional[ClosedTrail]:
    """Closed trail leaving a vertex along d that bends by exactly pi on
    ``pi_side`` at every singularity, or None if it does not come back."""
    corner, d = seat_direction(surf, corner, d)
    start = (corner, primitive(d))
    pieces: List[Piece] = []
    bends: List[Bend] = []
    t, c = corner
    x, skip = surf.triangles[t][c], -1
    for _ in range(budget):
        kind, idx, pt, _ = exit_point(surf.triangles[t], x, d, skip)
        pieces.append(canonical_piece(surf, t, x, pt))
        if kind == "edge":
            g = surf.glue_map(t, idx)
            t2, e2 = surf.twin(t, idx)
            t, x, d, skip = t2, g(pt), g.linear(d), e2
            continue
        cin = (t, idx)
        cd = surf.cone(*cin)
        if cd.is_pole:
            return None
        bc, b = back_direction(surf, cin, d)
        if cd.removable or pi_side == RIGHT:
            n = 1
        else:
            n = cd.half_turns - 1
        oc, o = rotate_half_turns(surf, bc, b, n)
        if not cd.removable:
            bends.append(make_bend(surf, len(pieces) - 1, cin, d, oc, o))
        if (oc, primitive(o)) == start:
            return ClosedTrail(pieces, bends)
        t, x, d, skip = oc[0], surf.triangles[oc[0]][oc[1]], o, -1
    return None


def _transitions(surf: Surface, pieces: List[Piece]) -> List[tuple]:
    out = []
    n = len(pieces)
    for i, p in enumerate(pieces):
        nx = pieces[(i + 1) % n]
        c = _corner_at(surf.triangles[p.tri], p.b)
        if c is not None:
            cn = _corner_at(surf.triangles[nx.tri], nx.a)
            if cn is None:
                raise errors.InternalInvariantError("pieces do not meet at a vertex")
            out.append(("vertex", (p.tri, c), sub(p.b, p.a), (nx.tri, cn), sub(nx.b, nx.a)))
            continue
        where, e = surf.locate(p.b, p.tri)
        out.append(("edge", (p.tri, e)) if where == "edge" else ("point",))
    return out


def _just_cw(surf: Surface, corner: Corner, d: Vec) -> Corner:
    u, _ = surf.corner_wedge(*corner)
    if cross(u, d) == 0:
        return surf.cw_next_corner(*corner)[0]
    return corner


def _pushed(surf: Surface, pieces: List[Piece], side: int, start: int = 0
            ) -> Tuple[List[int], List[Step]]:
    """Dual loop of a closed path pushed slightly to one side, starting at
    piece ``start``, with the triangle holding each pushed piece."""
    n = len(pieces)
    trans = _transitions(surf, pieces)
    tris: List[int] = []
    for i, p in enumerate(pieces):
        tr = trans[i - 1]
        if tr[0] == "vertex":
            oc, od = seat_direction(surf, tr[3], tr[4])
            tris.append((oc if side == LEFT else _just_cw(surf, oc, od))[0])
        else:
            tris.append(p.tri)
    loop: List[Step] = []
    for j in range(n):
        i = (start + j) % n
        tr = trans[i]
        if tr[0] == "edge":
            loop.append(tr[1])
        elif tr[0] == "vertex":
            bc, b = back_direction(surf, tr[1], tr[2])
            cin = _just_cw(surf, bc, b) if side == LEFT else bc
            oc, od = seat_direction(surf, tr[3], tr[4])
            cout = oc if side == LEFT else _just_cw(surf, oc, od)
            if cin[0] != tris[i] or cout[0] != tris[(i + 1) % n]:
                raise errors.InternalInvariantError("pushed path leaves its triangles")
            loop.extend(_around(surf, cin, cout, side == RIGHT))
    return tris, loop


# ---------------------------------------------------------------------------
# Cylinders
# ---------------------------------------------------------------------------

@dataclass
class Component:
    """A family of closed leaves with one combinatorics; ``point`` and
    ``direction`` describe one member in the frame of ``seed``."""

    kind: str  # "flat" | "dilation"
    seed: int
    loop: Tuple[Step, ...]
    holonomy: AffineMap
    point: Vec
    direction: Vec
    fixed_point: Optional[Vec] = None
    sweep: List[Vec] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed, "loop": [list(s) for s in self.loop],
               "holonomy": self.holonomy.to_json(), "point": fmt_vec(self.point),
               "direction": fmt_vec(self.direction),
               "sweep": [fmt_vec(d) for d in self.sweep]}
        if self.fixed_point is not None:
            out["fixed_point"] = fmt_vec(self.fixed_point)
        return out


def _component_at(surf: Surface, seed: int, y: Vec, loop: Sequence[Step], budget: int
                  ) -> Optional[Component]:
    """The closed leaf through y following ``loop``, if it exists."""
    h = loop_holonomy(surf, seed, loop)
    d = sub(h(y), y)
    if d == (0, 0):
        return None
    lp = _leaf_loop(surf, seed, y, d, budget)
    if lp is None or tuple(lp[1]) != tuple(loop):
        return None
    if h.a == 1:
        return Component("flat", seed, tuple(loop), h, y, d)
    return Component("dilation", seed, tuple(loop), h, y, d, h.fixed_point())


def _piece_in(surf: Surface, p: Piece, t: int) -> Tuple[Vec, Vec]:
    """Endpoints of a piece in the frame of t (the piece's triangle or the
    neighbour across the edge the piece runs along)."""
    if p.tri == t:
        return p.a, p.b
    for e in range(3):
        if surf.twin(p.tri, e)[0] != t:
            continue
        p0, p1 = surf.edge_points(p.tri, e)
        if cross(sub(p1, p0), sub(p.a, p0)) == 0 and cross(sub(p1, p0), sub(p.b, p0)) == 0:
            g = surf.glue_map(p.tri, e)
            return g(p.a), g(p.b)
    raise errors.InternalInvariantError("piece is not next to the pushed triangle")


def _component_beyond(surf: Surface, pieces: List[Piece], side: int, budget: int
                      ) -> Optional[Component]:
    """Closed-leaf family just beside a closed path, on the given side."""
    n = len(pieces)
    order = sorted(range(n), key=lambda i: 0 if surf.locate(
        _mid(pieces[i]), pieces[i].tri)[0] == "interior" else 1)
    for i in order[:4]:
        tris, loop = _pushed(surf, pieces, side, i)
        t = tris[i]
        a, b = _piece_in(surf, pieces[i], t)
        m = _mid((None, a, b))
        d = sub(b, a)
        nrm = scale(Rational(side), (-d[1], d[0]))
        eta = Rational(1, 4)
        for _ in range(64):
            y = add(m, scale(eta, nrm))
            eta /= 2
            if surf.locate(y, t)[0] != "interior":
                continue
            comp = _component_at(surf, t, y, loop, budget)
            if comp is not None:
                return comp
    return None


def _mid(p) -> Vec:
    a, b = (p.a, p.b) if isinstance(p, Piece) else (p[1], p[2])
    return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)


def _sigma(comp: Component) -> int:
    c = comp.fixed_point
    return 1 if dot(comp.direction, sub(comp.point, c)) > 0 else -1


def _next_event(surf: Surface, comp: Component, side: int
                ) -> Tuple[List[Tuple[int, int, Vec]], Vec, object]:
    """Nearest vertices met when sweeping the family toward ``side``, and the
    direction of the leaf through them (in the frame of the component seed)."""
    strip = develop(surf, comp.seed, comp.loop)
    y, d = comp.point, comp.direction
    best: List[Tuple[int, int, Vec]] = []
    best_v: Optional[Vec] = None
    c = comp.fixed_point
    sg = _sigma(comp) if c is not None else 1
    for k, (t, m) in enumerate(strip.placed):
        for corner in range(3):
            v = m(surf.triangles[t][corner])
            if side * cross(d, sub(v, y)) <= 0:
                continue
            if best_v is None:
                cmp = -1
            elif c is None:
                cmp = _sgn(side * cross(d, sub(v, y)) - side * cross(d, sub(best_v, y)))
            else:
                cmp = -_sgn(side * sg * cross(sub(v, c), sub(best_v, c)))
            if cmp < 0:
                best, best_v = [(k, corner, v)], v
            elif cmp == 0:
                best.append((k, corner, v))
    if best_v is None:
        raise errors.InternalInvariantError("strip has no vertex on the sweep side")
    ed = d if c is None else scale(Rational(sg), sub(best_v, c))
    return best, ed, strip


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


@dataclass
class Cylinder:
    core: ClosedTrail
    components: List[Component]
    boundary: List[ClosedTrail]
    sweep: List[Vec]
    full: bool
    wraps: bool

    def to_json(self) -> dict:
        return {"components": [c.to_json() for c in self.components],
                "n_components": len(self.components),
                "kinds": [c.kind for c in self.components],
                "boundary": [b.to_json() for b in self.boundary],
                "sweep": [fmt_vec(d) for d in self.sweep],
                "full": self.full, "wraps": self.wraps}


def _sweep(surf: Surface, comp: Component, side: int, seen: set, budget: int,
           max_components: int = 32) -> Tuple[List[Component], Optional[ClosedTrail], List[Vec], bool]:
    comps: List[Component] = []
    chain: List[Vec] = []
    cur = comp
    for _ in range(max_components):
        events, ed, strip = _next_event(surf, cur, side)
        cur.sweep.append(ed)
        chain.append(ed)
        sing = [ev for ev in events if not surf.cone(strip.placed[ev[0]][0], ev[1]).removable]
        k, c, _ = (sing or events)[0]
        t, m = strip.placed[k]
        oc, o = _boundary_start(surf, (t, c), m.inverse().linear(ed), side)
        path = follow_closed(surf, oc, o, -side, budget)
        if path is None:
            raise errors.BudgetExhausted("boundary leaf does not close within budget")
        if sing:
            return comps, path.normalized(), chain, False
        nxt = _component_beyond(surf, path.pieces, side, budget)
        if nxt is None:
            raise errors.BudgetExhausted("no closed leaves beyond a removable vertex")
        key = canonical_loop(nxt.loop)
        if key in seen:
            return comps, None, chain, True
        seen.add(key)
        _, entry, _ = _next_event(surf, nxt, -side)
        nxt.sweep.append(entry)
        comps.append(nxt)
        cur = nxt
    raise errors.BudgetExhausted("too many cylinder components")


def _boundary_start(surf: Surface, corner: Corner, d: Vec, side: int) -> Tuple[Corner, Vec]:
    """Copy of d at the vertex of ``corner`` that runs along the swept family.

    The corner lies on the family's side of the boundary line, so d is less
    than pi counterclockwise from it when sweeping left.  Sweeping right the
    backward direction is, and d is pi clockwise from that.
    """
    if side == LEFT:
        return seat_direction(surf, corner, d)
    bc, b = seat_direction(surf, corner, scale(Rational(-1), d))
    return rotate_half_turns(surf, bc, b, surf.cone(*bc).half_turns - 1)


def _entry(surf: Surface, comp: Component, side: int) -> Vec:
    _, ed, _ = _next_event(surf, comp, -side)
    return ed


def extend_from_component(surf: Surface, comp: Component, core: ClosedTrail,
                          budget: int = 2000) -> Cylinder:
    """Cylinder swept in both directions from a family of closed leaves."""
    seen = {canonical_loop(comp.loop)}
    comp.sweep = []
    lc, lb, lchain, wraps = _sweep(surf, comp, LEFT, seen, budget)
    if wraps:
        chain = [comp.direction] + lchain
        comps = [comp] + lc
        bounds: List[ClosedTrail] = []
    else:
        rc, rb, rchain, wraps = _sweep(surf, comp, RIGHT, seen, budget)
        chain = list(reversed(rchain)) + [comp.direction] + lchain
        comps = list(reversed(rc)) + [comp] + lc
        bounds = [b for b in (rb, lb) if b is not None]
        if wraps:
            bounds = []
    comp.sweep = [chain[0], chain[-1]] if not wraps else comp.sweep
    return _cylinder(core, comps, bounds, chain, wraps)


def _cylinder(core: ClosedTrail, comps: List[Component], bounds: List[ClosedTrail],
              chain: List[Vec], wraps: bool) -> Cylinder:
    n, _ = walk_half_turns(chain) if len(chain) > 1 else (0, True)
    return Cylinder(core, comps, bounds, chain, n >= 1, wraps)


def extend_cylinder(surf: Surface, t: ClosedTrail, side: Optional[int] = None,
                    budget: int = 2000) -> Cylinder:
    """Cylinder of closed trails next to t on a side where every bend is exactly pi."""
    if surf.has_poles:
        raise errors.SurfaceHasPoles("surface has poles")
    if t.is_leaf:
        p = t.pieces[0]
        tris, loop = _pushed(surf, t.pieces, LEFT, 0)
        comp = _component_at(surf, tris[0], _point_on(surf, p, tris[0]), loop, budget)
        if comp is None:
            comp = _component_beyond(surf, t.pieces, LEFT, budget)
        if comp is None:
            raise errors.NotClosed("leaf does not close")
        return extend_from_component(surf, comp, t, budget)
    ok = {LEFT: t.left_all_pi, RIGHT: t.right_all_pi}
    if side is None:
        sides = [s for s in (LEFT, RIGHT) if ok[s]]
        if not sides:
            raise errors.NotAllPiSide("no side of the trail has all bends equal to pi")
        side = sides[0]
    elif not ok[side]:
        raise errors.NotAllPiSide("the chosen side has a bend larger than pi")
    comp = _component_beyond(surf, t.pieces, side, budget)
    if comp is None:
        raise errors.BudgetExhausted("no closed leaves next to the trail")
    seen = {canonical_loop(comp.loop)}
    comp.sweep = [_entry(surf, comp, side)]
    comps, far, chain, wraps = _sweep(surf, comp, side, seen, budget)
    chain = [comp.sweep[0]] + chain
    if side == RIGHT:
        chain = list(reversed(chain))
    bounds = [] if wraps else [t.normalized()] + ([far] if far is not None else [])
    return _cylinder(t, [comp] + comps, bounds, chain, wraps)


def _point_on(surf: Surface, p: Piece, t: int) -> Vec:
    a, _ = _piece_in(surf, p, t)
    return a


# ---------------------------------------------------------------------------
# Full cylinders and intersection numbers
# ---------------------------------------------------------------------------

def short_dual_cycles(surf: Surface, max_len: int) -> List[Tuple[int, Tuple[Step, ...]]]:
    """Dual cycles visiting distinct triangles, started at their smallest triangle."""
    out = []
    n = surf.n_triangles
    for s in range(n):
        stack = [(s, [], {s})]
        while stack:
            t, path, used = stack.pop()
            for e in range(3):
                t2, e2 = surf.twin(t, e)
                if path and _inverse(surf, path[-1], (t, e)):
                    continue
                if t2 == s and path is not None:
                    if not (len(path) == 1 and _inverse(surf, path[0], (t, e))):
                        out.append((s, tuple(path + [(t, e)])))
                    continue
                if t2 < s or t2 in used or len(path) + 1 >= max_len:
                    continue
                stack.append((t2, path + [(t, e)], used | {t2}))
    return out


def intersection_number(surf: Surface, a: Tuple[int, Sequence[Step]],
                        b: Tuple[int, Sequence[Step]]) -> int:
    """Algebraic intersection number of two dual loops.

    Both loops are realized by chords joining distinct points on the crossed
    edges; crossings of chords in a common triangle are summed with sign.
    """
    loops = [list(a[1]), list(b[1])]
    uses: Dict[Step, List[Tuple[int, int]]] = defaultdict(list)
    for li, loop in enumerate(loops):
        for si, (t, e) in enumerate(loop):
            uses[min((t, e), surf.twin(t, e))].append((li, si))
    param: Dict[Tuple[int, int], Rational] = {}
    for ce, lst in uses.items():
        for j, key in enumerate(lst):
            param[key] = Rational(j + 1, len(lst) + 1)

    def point(t: int, e: int, tau: Rational) -> Vec:
        p0, p1 = surf.edge_points(t, e)
        if min((t, e), surf.twin(t, e)) != (t, e):
            tau = 1 - tau
        return add(p0, scale(tau, sub(p1, p0)))

    chords: Dict[int, List[List[Tuple[Vec, Vec]]]] = defaultdict(lambda: [[], []])
    for li, loop in enumerate(loops):
        n = len(loop)
        for si in range(n):
            t, e = loop[si]
            pt, pe = loop[si - 1]
            ti, ei = surf.twin(pt, pe)
            if ti != t:
                raise errors.NotALoop("dual loop is not connected")
            x0 = point(ti, ei, param[(li, (si - 1) % n)])
            x1 = point(t, e, param[(li, si)])
            chords[t][li].append((x0, x1))
    total = 0
    for ca, cb in chords.values():
        for a0, a1 in ca:
            for b0, b1 in cb:
                if orient(a0, a1, b0) * orient(a0, a1, b1) < 0 and \
                        orient(b0, b1, a0) * orient(b0, b1, a1) < 0:
                    total += _sgn(cross(sub(a1, a0), sub(b1, b0)))
    return total


def _leaf_trail(surf: Surface, comp: Component) -> ClosedTrail:
    lp = _leaf_loop(surf, comp.seed, comp.point, comp.direction, 4 * len(comp.loop) + 8)
    if lp is None:
        raise errors.InternalInvariantError("component leaf does not close")
    return _merge_at_point(lp[0], [])


def full_cylinders(surf: Surface, max_len: int = 8, budget: int = 2000,
                   max_tries: int = 400) -> List[Cylinder]:
    """Full cylinders found from closed leaves of short dual cycles."""
    if surf.mode == "translation" or surf.has_poles:
        return []
    seen: set = set()
    out: List[Cylinder] = []
    tries = 0
    for seed, cyc in short_dual_cycles(surf, max_len):
        key = canonical_loop(cyc)
        if key in seen:
            continue
        seen.add(key)
        tries += 1
        if tries > max_tries:
            break
        comp = None
        for y in _sample_points(surf, seed)[:2]:
            comp = _component_at(surf, seed, y, cyc, 4 * len(cyc) + 8)
            if comp is not None:
                break
        if comp is None:
            continue
        try:
            cyl = extend_from_component(surf, comp, _leaf_trail(surf, comp), budget)
        except errors.ZebraError:
            continue
        for c in cyl.components:
            seen.add(canonical_loop(c.loop))
            seen.add(canonical_loop([surf.twin(*st) for st in reversed(c.loop)]))
        if cyl.full:
            out.append(cyl)
    return out


def detect_full_cylinder_crossing(surf: Surface, cls: HomotopyClass, budget: int = 2000,
                                  max_len: int = 8) -> Optional[dict]:
    """A full cylinder whose core has nonzero intersection with the class."""
    for cyl in full_cylinders(surf, max_len, budget):
        core = cyl.components[0]
        n = intersection_number(surf, (cls.seed, cls.loop), (core.seed, core.loop))
        if n != 0:
            return {"kind": "full-cylinder", "intersection": n,
                    "core": {"seed": core.seed, "loop": [list(s) for s in core.loop]},
                    "cylinder": cyl.to_json()}
    return None


# ---------------------------------------------------------------------------
# Tightening
# ---------------------------------------------------------------------------

@dataclass
class TightenResult:
    status: str  # "closed" | "not-closed" | "diverged"
    trail: Optional[ClosedTrail]
    iterations: List[dict]

    def to_json(self) -> dict:
        return {"status": self.status, "iterations": self.iterations,
                "trail": None if self.trail is None else self.trail.to_json()}


def _require_pole_free(surf: Surface) -> None:
    if surf.has_poles:
        raise errors.SurfaceHasPoles("surface has poles", poles=[
            cd.vertex for cd in surf.cones if cd.is_pole])


def _class_leaf(surf: Surface, cls: HomotopyClass, points: Sequence[Vec],
                budget: int = 400) -> Optional[ClosedTrail]:
    """A closed leaf in the class through one of the given points of the seed."""
    cover = None
    for x in points:
        d = sub(cls.holonomy(x), x)
        lp = _leaf_loop(surf, cls.seed, x, d, max(budget, 4 * len(cls.loop) + 8))
        if lp is None:
            continue
        if cover is None:
            cover = Cover(surf)
            r = cover.root(cls.seed)
            target = cover.walk(r, cls.loop)
        if cover.walk(r, lp[1]) == target:
            return _merge_at_point(lp[0], [])
    return None


def _node_path(cover: Cover, src: int, dst: int) -> List[Step]:
    out: List[Step] = []
    n = src
    for e in cover.path_to(src, dst):
        out.append((cover.nodes[n].tri, e))
        n = cover.nodes[n].nbr[e]
    return out


def _conjugate(surf: Surface, loop: Sequence[Step], path: List[Step]) -> List[Step]:
    """The loop based at the end of ``path``: path reversed, loop, path."""
    back = [surf.twin(t, e) for t, e in reversed(path)]
    out: List[Step] = []
    for st in back + list(loop) + path:
        if out and _inverse(surf, out[-1], st):
            out.pop()
        else:
            out.append(st)
    return out


def _connect_escalating(surf: Surface, tri: int, x: Vec, loop: List[Step], budget: int,
                        growth: int = 4, rounds: int = 3):
    """Connect x to its deck image, retrying with larger budgets."""
    b = budget
    for i in range(rounds):
        cover = Cover(surf)
        root = cover.root(tri)
        try:
            return cover, root, trail_along(cover, root, x, loop, x, b)
        except errors.NotCovered as exc:
            if i == rounds - 1:
                raise errors.ConnectFailed("trail to the deck image is not covered",
                                           **exc.info) from None
        b *= growth
    raise errors.ConnectFailed("trail to the deck image is not covered")


def tighten(surf: Surface, cls: HomotopyClass, start: Optional[Vec] = None,
            budget: int = 2000, max_iter: int = 12) -> TightenResult:
    """Closed trail in the class, found by repeatedly connecting a base point
    to its image under the deck map and moving the base point to a bend."""
    _require_pole_free(surf)
    points = [start] if start is not None else _sample_points(surf, cls.seed)[:1]
    where = surf.locate(points[0], cls.seed)[0]
    if where == "outside":
        raise errors.InvalidCrossing("start point is not in the seed triangle")
    if where == "interior":
        leaf = _class_leaf(surf, cls, points)
        if leaf is not None:
            return TightenResult("closed", leaf, [{"kind": "closed-leaf"}])
    require_leaf_triangulation(surf)
    tri, x, loop = cls.seed, points[0], list(cls.loop)
    iters: List[dict] = []
    visited: set = set()
    for _ in range(max_iter):
        cover, root, ans = _connect_escalating(surf, tri, x, loop, budget)
        trail = ans.trail
        at_vertex = _corner_at(surf.triangles[tri], x) is not None
        rec = {"tri": tri, "point": fmt_vec(x), "vertex": at_vertex,
               "pieces": len(trail.pieces), "bends": len(trail.bends)}
        iters.append(rec)
        if at_vertex:
            close = _closing_bend(surf, trail.pieces)
            ct = ClosedTrail(list(trail.pieces), list(trail.bends) + [close])
            if close.left.at_least_pi and close.right.at_least_pi:
                return TightenResult("closed", ct.normalized(), iters)
            rec["closing"] = {"left": close.left.to_json(), "right": close.right.to_json()}
        else:
            first, last = trail.pieces[0], trail.pieces[-1]
            if cross(sub(first.b, first.a), sub(last.b, last.a)) == 0 and \
                    dot(sub(first.b, first.a), sub(last.b, last.a)) > 0:
                return TightenResult("closed", _merge_at_point(list(trail.pieces),
                                                                list(trail.bends)).normalized(),
                                     iters)
        key = (tri, x, trail.key())
        if not ans.lifts:
            p = trail.pieces[0]
            m = _mid(p)
            if p.tri != tri or surf.locate(m, tri)[0] != "interior":
                return TightenResult("not-closed", None, iters)
            x = m
            continue
        node, c = ans.lifts[0] if key not in visited else ans.lifts[-1]
        visited.add(key)
        loop = _conjugate(surf, loop, _node_path(cover, root, node))
        tri = cover.nodes[node].tri
        x = surf.triangles[tri][c]
    return TightenResult("diverged", None, iters)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass
class Classification:
    verdict: str
    certificate: dict
    cls: HomotopyClass
    trail: Optional[ClosedTrail] = None
    cylinder: Optional[Cylinder] = None

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "class": self.cls.to_json(),
                "certificate": self.certificate}


def is_flat_torus_without_singularities(surf: Surface) -> bool:
    return euler_poincare_report(surf)["chi"] == 0 and not surf.singular_vertices


def classify(surf: Surface, cls: HomotopyClass, budget: int = 2000, max_iter: int = 12,
             start: Optional[Vec] = None) -> Classification:
    _require_pole_free(surf)
    if is_flat_torus_without_singularities(surf):
        leaf = _class_leaf(surf, cls, _sample_points(surf, cls.seed))
        h = cls.holonomy
        if leaf is None:
            return Classification(NR, {"kind": "torus-holonomy", "holonomy": h.to_json()}, cls)
        cert = {"kind": "torus-foliation", "closed_trail": leaf.to_json(),
                "slope": list(primitive(leaf.direction))}
        if h.a == 1:
            cert.update(foliation="parallel", direction=fmt_vec(h.b))
        else:
            cert.update(foliation="radial", fixed_point=fmt_vec(h.fixed_point()))
        return Classification(TF, cert, cls, trail=leaf)
    cert = detect_full_cylinder_crossing(surf, cls, budget)
    if cert is not None:
        return Classification(NR, cert, cls)
    try:
        res = tighten(surf, cls, start, budget, max_iter)
    except (errors.ConnectFailed, errors.NotLeafTriangulation) as exc:
        return Classification(INCONCLUSIVE, {"kind": "budget", "reason": exc.code}, cls)
    if res.trail is None:
        return Classification(INCONCLUSIVE, {"kind": "budget", "reason": res.status,
                                             "iterations": res.iterations}, cls)
    ct = res.trail
    if ct.left_more and ct.right_more:
        return Classification(UT, {"kind": "unique-trail", "closed_trail": ct.to_json()},
                              cls, trail=ct)
    try:
        cyl = extend_cylinder(surf, ct, budget=budget)
    except errors.BudgetExhausted as exc:
        return Classification(INCONCLUSIVE, {"kind": "budget", "reason": str(exc)}, cls,
                              trail=ct)
    return Classification(CYL, {"kind": "cylinder", "closed_trail": ct.to_json(),
                                "cylinder": cyl.to_json()}, cls, trail=ct, cylinder=cyl)


# ---------------------------------------------------------------------------
# Named classes of the standard examples
# ---------------------------------------------------------------------------

def _edge_from(surf: Surface, p: Vec, q: Vec) -> Step:
    for t, tri in enumerate(surf.triangles):
        for e in range(3):
            if tri[e] == p and tri[(e + 1) % 3] == q:
                return (t, e)
    raise errors.InvalidCrossing(f"no edge from {fmt_vec(p)} to {fmt_vec(q)}")


def _interior_path(surf: Surface, src: int, dst: int) -> List[Step]:
    """Dual path crossing only edges glued by the identity."""
    prev = {src: None}
    queue = [src]
    for t in queue:
        if t == dst:
            break
        for e in range(3):
            g = surf.glue_map(t, e)
            t2, _ = surf.twin(t, e)
            if g.a == 1 and g.b == (0, 0) and t2 not in prev:
                prev[t2] = (t, e)
                queue.append(t2)
    if dst not in prev:
        raise errors.InvalidCrossing("triangles are not in one polygon")
    out = []
    while prev[dst] is not None:
        t, e = prev[dst]
        out.append((t, e))
        dst = t
    return out[::-1]


def loop_through(surf: Surface, exits: Sequence[Step]) -> HomotopyClass:
    """Class of the loop leaving through the given edges in order, joined by
    paths inside the polygons of the surface."""
    steps: List[Step] = []
    for i, (t, e) in enumerate(exits):
        pt, pe = exits[i - 1]
        entry = surf.twin(pt, pe)[0]
        steps.extend(_interior_path(surf, entry, t))
        steps.append((t, e))
    return HomotopyClass.from_loop(surf, steps[0][0], steps)


def named_classes(name: str, surf: Surface) -> Dict[str, HomotopyClass]:
    """Classes with names used in the examples and on the command line."""
    v = lambda x, y: (Rational(x), Rational(y))  # noqa: E731
    if name == "fig2_amalgam":
        core = loop_through(surf, [_edge_from(surf, v(2, 0), v(0, 2))])
        crossing = loop_through(surf, [
            _edge_from(surf, v(1, 0), v(2, 0)),
            _edge_from(surf, v(1, -1), v(2, -1)),
            _edge_from(surf, v(0, -1), v(0, -3)),
            _edge_from(surf, v(2, 0), v(2, 1)),
        ])
        return {"core": core, "crossing": crossing}
    if name == "hopf_like_dilation_torus":
        return {"core": loop_through(surf, [_edge_from(surf, v(-2, -2), v(2, -2))])}
    return {}
