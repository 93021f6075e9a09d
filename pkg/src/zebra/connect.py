"""Trail-ray propagation over a lazily developed universal cover.

The cover is built on demand.  A node is a lift of a surface triangle and
uses that triangle's own coordinates as its frame, so gluing maps transport
data between neighbouring nodes.  Lifted vertices are union-find classes
whose ring maps a corner slot (index in the vertex's corner cycle) to the
node occupying it.

Propagation follows the queue discipline of the convexity proof: a vertex
is processed once the rays reaching it are known, its uncovered triangles
are covered by a counterclockwise pass, a clockwise pass and finally by rays
leaving the vertex itself, and its neighbours are enqueued in flag order.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import errors
from .affine import AffineMap
from .exact import (Rational, Vec, add, cross, dot, line_intersection, orient, primitive, scale,
                    sub)
from .kinematics import Piece, Trail, canonical_piece, exit_point, make_bend, seat_direction
from .surface_core import Surface

FULLY_TRANSVERSE = "FullyTransverse"
CW_LEAF = "CwLeaf"
CCW_LEAF = "CcwLeaf"
DOUBLE_LEAF = "DoubleLeaf"
BASE = "Base"

CCW_FLAG, CW_FLAG, AWAY_FLAG, TOWARD_FLAG = "transverse-ccw", "transverse-cw", "leaf-away", "leaf-toward"

P_SOURCE = -1


# ---------------------------------------------------------------------------
# Lazy universal cover
# ---------------------------------------------------------------------------

@dataclass
class Node:
    tri: int
    nbr: List[Optional[int]]
    vert: List[int]


class Cover:
    """Lazily developed universal cover of a triangulated surface."""

    def __init__(self, surf: Surface) -> None:
        self.surf = surf
        self.nodes: List[Node] = []
        self._parent: List[int] = []
        self._ring: List[Dict[int, int]] = []
        self._vclass: List[int] = []
        self.on_merge: Optional[Callable[[int, int], None]] = None
        self.unions = 0

    # -- vertex lifts ------------------------------------------------------
    def _new_vertex(self, vclass: int) -> int:
        vid = len(self._parent)
        self._parent.append(vid)
        self._ring.append({})
        self._vclass.append(vclass)
        return vid

    def find(self, v: int) -> int:
        root = v
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[v] != root:
            self._parent[v], v = root, self._parent[v]
        return root

    def union(self, a: int, b: int) -> int:
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        if self._vclass[a] != self._vclass[b]:
            raise errors.InternalInvariantError("merging lifts of different vertices")
        ra, rb = self._ring[a], self._ring[b]
        for slot, n in rb.items():
            if slot in ra and ra[slot] != n:
                raise errors.InternalInvariantError("conflicting triangles in a vertex ring")
            ra[slot] = n
        self._parent[b] = a
        self._ring[b] = {}
        self.unions += 1
        if self.on_merge is not None:
            self.on_merge(a, b)
        return a

    def ring(self, v: int) -> Dict[int, int]:
        return self._ring[self.find(v)]

    def vertex_class(self, v: int) -> int:
        return self._vclass[self.find(v)]

    def vert(self, n: int, c: int) -> int:
        return self.find(self.nodes[n].vert[c])

    @property
    def n_vertices(self) -> int:
        return sum(1 for i, p in enumerate(self._parent) if p == i)

    # -- nodes -------------------------------------------------------------
    def root(self, tri: int) -> int:
        vs = [self._new_vertex(self.surf.vertex_of[(tri, c)]) for c in range(3)]
        return self._add_node(tri, vs)

    def _add_node(self, tri: int, vs: List[int]) -> int:
        n = len(self.nodes)
        self.nodes.append(Node(tri, [None, None, None], list(vs)))
        for c in range(3):
            ring = self.ring(vs[c])
            slot = self.surf.slot_of[(tri, c)]
            if slot in ring and ring[slot] != n:
                raise errors.InternalInvariantError("vertex ring slot already occupied")
            ring[slot] = n
        return n

    def step(self, n: int, e: int) -> int:
        """Node across edge e of node n, created if needed."""
        node = self.nodes[n]
        if node.nbr[e] is not None:
            return node.nbr[e]  # type: ignore[return-value]
        surf = self.surf
        t2, e2 = surf.twin(node.tri, e)
        a = self.find(node.vert[(e + 1) % 3])
        b = self.find(node.vert[e])
        m = self.ring(a).get(surf.slot_of[(t2, e2)])
        if m is None:
            m = self.ring(b).get(surf.slot_of[(t2, (e2 + 1) % 3)])
        if m is None:
            c3 = (e2 + 2) % 3
            w = None
            # neighbour across edge c3 sits next to us in the ring of a
            (tx, ex), _ = surf.ccw_next_corner(t2, e2)
            x = self.ring(a).get(surf.slot_of[(tx, ex)])
            if x is not None:
                w = self.nodes[x].vert[(ex + 1) % 3]
            (ty, cy), _ = surf.cw_next_corner(t2, (e2 + 1) % 3)
            y = self.ring(b).get(surf.slot_of[(ty, cy)])
            if y is not None:
                wy = self.nodes[y].vert[(cy + 2) % 3]
                w = wy if w is None else self.union(w, wy)
            if w is None:
                w = self._new_vertex(surf.vertex_of[(t2, c3)])
            vs = [0, 0, 0]
            vs[e2], vs[(e2 + 1) % 3], vs[c3] = a, b, self.find(w)
            m = self._add_node(t2, vs)
        self._link(n, e, m, e2)
        return m

    def _link(self, n: int, e: int, m: int, e2: int) -> None:
        nn, mm = self.nodes[n], self.nodes[m]
        if mm.tri != self.surf.twin(nn.tri, e)[0]:
            raise errors.InternalInvariantError("cover link joins the wrong triangles")
        if nn.nbr[e] not in (None, m) or mm.nbr[e2] not in (None, n):
            raise errors.InternalInvariantError("cover link conflicts with an existing one")
        nn.nbr[e], mm.nbr[e2] = m, n
        self.union(nn.vert[e], mm.vert[(e2 + 1) % 3])
        self.union(nn.vert[(e + 1) % 3], mm.vert[e2])

    def walk(self, n: int, path: Sequence) -> int:
        for step in path:
            if isinstance(step, int):
                e = step
            else:
                t, e = step
                if t != self.nodes[n].tri:
                    raise errors.InvalidCrossing(f"edge {(t, e)} is not on triangle "
                                                 f"{self.nodes[n].tri}")
            n = self.step(n, e)
        return n

    def peek(self, n: int, e: int) -> Optional[int]:
        """Existing node across edge e of n, without developing anything new."""
        node = self.nodes[n]
        if node.nbr[e] is not None:
            return node.nbr[e]
        t2, e2 = self.surf.twin(node.tri, e)
        m = self.ring(node.vert[(e + 1) % 3]).get(self.surf.slot_of[(t2, e2)])
        if m is None:
            m = self.ring(node.vert[e]).get(self.surf.slot_of[(t2, (e2 + 1) % 3)])
        return m

    def follow(self, n: int, path: Sequence) -> Optional[int]:
        """Like :meth:`walk` but only through existing nodes; None when the path leaves them."""
        for step in path:
            e = step if isinstance(step, int) else step[1]
            m = self.peek(n, e)
            if m is None:
                return None
            n = m
        return n

    def ring_around(self, n: int, c: int) -> List[Tuple[int, int]]:
        """All (node, corner) pairs around the vertex at corner c of n, counterclockwise."""
        out = [(n, c)]
        k = len(self.surf.cone(self.nodes[n].tri, c).corners)
        for _ in range(k - 1):
            tri = self.nodes[n].tri
            m = self.step(n, (c + 2) % 3)
            (_, c2), _ = self.surf.ccw_next_corner(tri, c)
            n, c = m, c2
            out.append((n, c))
        return out

    def path_to(self, src: int, dst: int) -> List[int]:
        """Dual path (edge indices) between two existing nodes, by breadth-first search."""
        prev: Dict[int, Tuple[int, int]] = {src: (-1, -1)}
        queue = deque([src])
        while queue:
            n = queue.popleft()
            if n == dst:
                break
            for e, m in enumerate(self.nodes[n].nbr):
                if m is not None and m not in prev:
                    prev[m] = (n, e)
                    queue.append(m)
        if dst not in prev:
            raise errors.InternalInvariantError("nodes are not connected in the cover")
        path = []
        n = dst
        while n != src:
            n, e = prev[n]
            path.append(e)
        return path[::-1]


# ---------------------------------------------------------------------------
# Coverage data
# ---------------------------------------------------------------------------

@dataclass
class Window:
    """Rays from a source point crossing the segment [a, b] of an edge."""

    src: int
    S: Vec
    a: Vec
    b: Vec
    origin: Tuple[int, int]
    to_origin: AffineMap

    def across(self, g: AffineMap) -> "Window":
        return Window(self.src, g(self.S), g(self.a), g(self.b), self.origin,
                      self.to_origin.compose(g.inverse()))


@dataclass(frozen=True)
class Status:
    kind: str
    edge: int  # entry edge, or apex corner for double-leaf triangles, -1 for the base

    def to_json(self) -> dict:
        return {"kind": self.kind, "edge": self.edge}


@dataclass
class Arrival:
    src: int
    S: Vec
    node: int
    corner: int
    d: Vec
    key: tuple


@dataclass
class RayCoverage:
    surf: Surface
    cover: Cover
    base_node: int
    base_point: Vec
    base_vertex: Optional[int]
    status: Dict[int, Status] = field(default_factory=dict)
    flags: Dict[Tuple[int, int], str] = field(default_factory=dict)
    queue_trace: List[int] = field(default_factory=list)
    frontier: List[int] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)
    arrivals: Dict[int, Arrival] = field(default_factory=dict)
    exits: Dict[Tuple[int, int], List[Window]] = field(default_factory=dict)
    leaves: Dict[Tuple[int, int], Tuple[int, int]] = field(default_factory=dict)
    sectors: Dict[int, List[Tuple[int, Vec, Vec, Vec]]] = field(default_factory=dict)
    entries: Dict[int, int] = field(default_factory=dict)
    exhausted: bool = False
    merges: int = 0

    @property
    def covered(self) -> int:
        return len(self.status)

    def is_covered(self, n: int) -> bool:
        return n in self.status

    def key_of(self, v: int) -> tuple:
        return self.arrivals[self.cover.find(v)].key

    def to_json(self) -> dict:
        return {
            "covered": self.covered,
            "status": {str(n): s.to_json() for n, s in sorted(self.status.items())},
            "queue_trace": list(self.queue_trace),
            "errors": list(self.errors),
            "exhausted": self.exhausted,
        }


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

class _Propagator:
    def __init__(self, cov: RayCoverage) -> None:
        self.cov = cov
        self.surf = cov.surf
        self.cover = cov.cover
        self.by_key: Dict[tuple, int] = {}
        self.cover.on_merge = self.merged

    # -- helpers -----------------------------------------------------------
    def pts(self, n: int) -> Tuple[Vec, Vec, Vec]:
        return self.surf.triangles[self.cover.nodes[n].tri]

    def error(self, msg: str) -> None:
        self.cov.errors.append(msg)

    def source_key(self, w: Window, target: Vec) -> tuple:
        d = w.to_origin.linear(sub(target, w.S))
        on, oc = w.origin
        if w.src == P_SOURCE and oc < 0:
            return ("p", primitive(d))
        src_key = ("p",) if w.src == P_SOURCE else self.cov.key_of(w.src)
        corner, dd = seat_direction(self.surf, (self.cover.nodes[on].tri, oc), d)
        return (src_key, self.surf.slot_of[corner], primitive(dd))

    def arrival(self, v: int) -> Optional[Arrival]:
        return self.cov.arrivals.get(self.cover.find(v))

    def merged(self, keep: int, gone: int) -> None:
        arrivals = self.cov.arrivals
        old = arrivals.pop(gone, None)
        if old is None:
            return
        cur = arrivals.get(keep)
        if cur is None:
            arrivals[keep] = old
        elif cur.key != old.key:
            self.error(f"vertex lift {keep} is reached by two different trails")

    def same_source(self, a: int, b: int) -> bool:
        if a == P_SOURCE or b == P_SOURCE:
            return a == b
        return self.cover.find(a) == self.cover.find(b)

    def arrive(self, v: int, w: Window, node: int, corner: int, target: Vec) -> None:
        """Record that the ray of window w reaches vertex lift v at ``target``."""
        cov, cover = self.cov, self.cover
        cur = cov.arrivals.get(cover.find(v))
        if cur is not None and self.same_source(cur.src, w.src):
            # straight segments between two fixed lifts are unique
            return
        key = self.source_key(w, target)
        other = self.by_key.get(key)
        if other is not None and cover.find(other) != cover.find(v):
            cover.union(other, v)
            cov.merges += 1
        v = cover.find(v)
        cur = cov.arrivals.get(v)
        if cur is not None:
            if cur.key != key:
                self.error(f"vertex lift {v} is reached by two different trails")
            return
        cov.arrivals[v] = Arrival(w.src, w.S, node, corner, sub(target, w.S), key)
        self.by_key[key] = v

    def set_leaf(self, n: int, e: int, frm: int, to: int) -> None:
        pair = (self.cover.find(frm), self.cover.find(to))
        self.cov.leaves[(n, e)] = pair
        m = self.cover.step(n, e)
        t2, e2 = self.surf.twin(self.cover.nodes[n].tri, e)
        self.cov.leaves[(m, e2)] = pair

    def add_exit(self, n: int, e: int, w: Window) -> None:
        if w.a == w.b:
            return
        self.cov.exits.setdefault((n, e), []).append(w)

    def cover_node(self, n: int, status: Status) -> bool:
        if n in self.cov.status:
            self.error(f"triangle node {n} entered twice")
            return False
        self.cov.status[n] = status
        return True

    def sector(self, n: int, w: Window, y0: Vec, y1: Vec) -> None:
        self.cov.sectors.setdefault(n, []).append((w.src, w.S, y0, y1))

    # -- base --------------------------------------------------------------
    def start(self) -> List[int]:
        cov, cover = self.cov, self.cover
        n, p = cov.base_node, cov.base_point
        where, idx = self.surf.locate(p, cover.nodes[n].tri)
        if where == "outside":
            raise errors.InvalidCrossing("base point is not in its triangle")
        if where == "edge":
            raise errors.InvalidCrossing("base point on an edge is not supported; move it "
                                         "into a triangle interior or onto a vertex")
        if where == "vertex":
            v = cover.vert(n, idx)
            cov.base_vertex = v
            cov.arrivals[v] = Arrival(P_SOURCE, p, n, idx, (0, 0), ("p",))
            self.by_key[("p",)] = v
            cov.queue_trace.append(v)
            self.double_leaves(v, cover.ring_around(n, idx), P_SOURCE)
            order = []
            for m, c in cover.ring_around(n, idx):
                order.append(cover.vert(m, (c + 1) % 3))
            return order
        cov.status[n] = Status(BASE, -1)
        tri = self.pts(n)
        ident = AffineMap.identity()
        for e in range(3):
            w = Window(P_SOURCE, p, tri[e], tri[(e + 1) % 3], (n, -1), ident)
            self.add_exit(n, e, w)
            self.sector(n, w, w.a, w.b)
        order = []
        for c in range(3):
            v = cover.vert(n, c)
            w = Window(P_SOURCE, p, tri[c], tri[c], (n, -1), ident)
            self.arrive(v, w, n, c, tri[c])
            order.append(v)
        return order

    # -- entering a triangle -------------------------------------------------
    def enter(self, n: int, e: int, windows: List[Window]) -> Optional[str]:
        """Apply the entering rule to node n entered through its edge e."""
        cover = self.cover
        tri = self.pts(n)
        A, B, C = tri[e], tri[(e + 1) % 3], tri[(e + 2) % 3]
        e1, e2 = (e + 1) % 3, (e + 2) % 3
        wa = self._window_at(windows, A)
        wb = self._window_at(windows, B)
        if wa is None or wb is None:
            self.error(f"entry edge of node {n} is not fully covered")
            return None
        dA, dB = sub(A, wa.S), sub(B, wb.S)
        ca, cb = cross(dA, sub(C, A)), cross(dB, sub(C, B))
        vA, vB, vC = cover.vert(n, e), cover.vert(n, e1), cover.vert(n, e2)
        if ca < 0 and cb > 0:
            kind = FULLY_TRANSVERSE
        elif ca >= 0:
            kind = CW_LEAF
        else:
            kind = CCW_LEAF
        if cb <= 0 and ca >= 0:
            self.error(f"node {n} satisfies two entering cases")
        if not self.cover_node(n, Status(kind, e)):
            return None
        self.cov.entries[n] = e
        if kind == FULLY_TRANSVERSE:
            best = None
            for w in windows:
                ya, ta = self._exit(tri, e, w.S, w.a)
                yb, tb = self._exit(tri, e, w.S, w.b)
                if ta == tb or "C" in (ta, tb):
                    edge = e1 if "e1" in (ta, tb) else e2
                    if ta == tb == "C":
                        edge = e1
                    self.add_exit(n, edge, Window(w.src, w.S, ya, yb, w.origin, w.to_origin))
                    self.sector(n, w, ya, yb)
                    if "C" in (ta, tb):
                        best = self._nearer(best, w, C)
                else:
                    # the ray through C splits the window
                    first, second = (ya, ta), (yb, tb)
                    for (y, tag) in (first, second):
                        edge = e1 if tag == "e1" else e2
                        self.add_exit(n, edge, Window(w.src, w.S, y, C, w.origin, w.to_origin))
                        self.sector(n, w, y, C)
                    best = self._nearer(best, w, C)
            if best is None:
                self.error(f"no ray reaches the apex of fully transverse node {n}")
            else:
                self.arrive(vC, best, n, e2, C)
            return kind
        if kind == CW_LEAF:
            exit_edge, pivot, pc, vP, leaf_edge = e1, A, e, vA, e2
            q = self._hit(A, dA, B, C)
        else:
            exit_edge, pivot, pc, vP, leaf_edge = e2, B, e1, vB, e1
            q = self._hit(B, dB, C, A)
        for w in windows:
            ya, _ = self._exit(tri, e, w.S, w.a, force=exit_edge)
            yb, _ = self._exit(tri, e, w.S, w.b, force=exit_edge)
            self.add_exit(n, exit_edge, Window(w.src, w.S, ya, yb, w.origin, w.to_origin))
            self.sector(n, w, ya, yb)
        pink = Window(vP, pivot, q, C, (n, pc), AffineMap.identity())
        if q != C:
            self.add_exit(n, exit_edge, pink)
            self.sector(n, pink, q, C)
        self.set_leaf(n, leaf_edge, vP, vC)
        self.arrive(vC, pink, n, e2, C)
        return kind

    @staticmethod
    def _window_at(windows: List[Window], x: Vec) -> Optional[Window]:
        best = None
        for w in windows:
            if w.a == x or w.b == x:
                if best is None or _closer(w.S, best.S, x):
                    best = w
        return best

    @staticmethod
    def _nearer(best: Optional[Window], w: Window, x: Vec) -> Window:
        if best is None or _closer(w.S, best.S, x):
            return w
        return best

    @staticmethod
    def _hit(P: Vec, d: Vec, U: Vec, V: Vec) -> Vec:
        s, t = line_intersection(P, d, U, V)
        return add(U, scale(t, sub(V, U)))

    @staticmethod
    def _exit(tri, e: int, S: Vec, x: Vec, force: Optional[int] = None) -> Tuple[Vec, str]:
        """Where the ray from S through the entry point x leaves the triangle."""
        A, B, C = tri[e], tri[(e + 1) % 3], tri[(e + 2) % 3]
        d = sub(x, S)
        side = cross(d, sub(C, x))
        if force is None:
            if side == 0:
                return C, "C"
            force = (e + 1) % 3 if side > 0 else (e + 2) % 3
        if force == (e + 1) % 3:
            if x == B:
                return B, "e1"
            return _Propagator._hit(x, d, B, C), "e1"
        if x == A:
            return A, "e2"
        return _Propagator._hit(x, d, C, A), "e2"

    # -- processing a vertex ---------------------------------------------------
    def double_leaves(self, v: int, ring: List[Tuple[int, int]], src_vid: int) -> None:
        for n, c in ring:
            if n in self.cov.status:
                continue
            self.cover_node(n, Status(DOUBLE_LEAF, c))
            tri = self.pts(n)
            V, X, Y = tri[c], tri[(c + 1) % 3], tri[(c + 2) % 3]
            w = Window(src_vid, V, X, Y, (n, c), AffineMap.identity())
            self.add_exit(n, (c + 1) % 3, w)
            self.sector(n, w, X, Y)
            vx, vy = self.cover.vert(n, (c + 1) % 3), self.cover.vert(n, (c + 2) % 3)
            self.set_leaf(n, c, v, vx)
            self.set_leaf(n, (c + 2) % 3, v, vy)
            self.arrive(vx, w, n, (c + 1) % 3, X)
            self.arrive(vy, w, n, (c + 2) % 3, Y)

    def process(self, v: int) -> List[int]:
        cov, cover, surf = self.cov, self.cover, self.surf
        arr = self.arrival(v)
        if arr is None:
            self.error(f"vertex lift {v} dequeued before any ray reached it")
            return []
        ring = cover.ring_around(arr.node, arr.corner)
        m = len(ring)
        covered = [n in cov.status for n, _ in ring]
        if not any(covered):
            self.error(f"vertex lift {v} dequeued with no covered triangle")
            return []
        if all(covered):
            return self.enqueue_order(v, ring)
        starts = [i for i in range(m) if covered[i] and not covered[(i + 1) % m]]
        ends = [i for i in range(m) if covered[i] and not covered[(i - 1) % m]]
        if len(starts) != 1:
            self.error(f"covered triangles around vertex lift {v} are not consecutive")
        # counterclockwise pass
        j = starts[0]
        steps = 0
        while steps < m:
            n, c = ring[j % m]
            edge = (c + 2) % 3
            ws = cov.exits.get((n, edge))
            nxt, nc = ring[(j + 1) % m]
            if not ws or nxt in cov.status:
                break
            g = surf.glue_map(cover.nodes[n].tri, edge)
            if self.enter(nxt, nc, [w.across(g) for w in ws]) is None:
                break
            j += 1
            steps += 1
        # clockwise pass
        j = ends[0]
        steps = 0
        while steps < m:
            n, c = ring[j % m]
            ws = cov.exits.get((n, c))
            prv, pc = ring[(j - 1) % m]
            if not ws or prv in cov.status:
                break
            g = surf.glue_map(cover.nodes[n].tri, c)
            if self.enter(prv, (pc + 2) % 3, [w.across(g) for w in ws]) is None:
                break
            j -= 1
            steps += 1
        self.double_leaves(cover.find(v), ring, cover.find(v))
        return self.enqueue_order(v, ring)

    def flag(self, v: int, ring: List[Tuple[int, int]], i: int) -> Optional[str]:
        """Flag of the edge between ring slots i and i+1."""
        cov, cover = self.cov, self.cover
        m = len(ring)
        n, c = ring[i]
        edge = (c + 2) % 3
        leaf = cov.leaves.get((n, edge))
        if leaf is not None:
            return AWAY_FLAG if leaf[0] == cover.find(v) else TOWARD_FLAG
        if cov.exits.get((n, edge)):
            return CCW_FLAG
        n2, c2 = ring[(i + 1) % m]
        if cov.exits.get((n2, c2)):
            return CW_FLAG
        return None

    def enqueue_order(self, v: int, ring: List[Tuple[int, int]]) -> List[int]:
        cover = self.cover
        m = len(ring)
        flags = [self.flag(v, ring, i) for i in range(m)]
        for i, f in enumerate(flags):
            self.cov.flags[(cover.find(v), i)] = f or "unknown"
        if None in flags:
            self.error(f"edge around vertex lift {v} carries no flag")
        elif cover.find(v) != self.cov.base_vertex:
            self.check_groups(v, flags)
        other = [cover.vert(n, (c + 2) % 3) for n, c in ring]
        groups: Dict[str, List[int]] = {CCW_FLAG: [], CW_FLAG: [], AWAY_FLAG: []}
        for i in range(m):
            if flags[i] in groups:
                groups[flags[i]].append(i)
        ccw = _cyclic_run(groups[CCW_FLAG], m)
        cw = _cyclic_run(groups[CW_FLAG], m)[::-1]
        away = _cyclic_run(groups[AWAY_FLAG], m)
        return [other[i] for i in ccw + cw + away]

    def check_groups(self, v: int, flags: List[Optional[str]]) -> None:
        """Flags must read ccw-transverse, away, cw-transverse cyclically, plus at most one
        leaf toward the vertex."""
        toward = [i for i, f in enumerate(flags) if f == TOWARD_FLAG]
        if len(toward) > 1:
            self.error(f"vertex lift {v} has {len(toward)} leaf flags toward it")
            return
        body = [f for f in flags if f != TOWARD_FLAG]
        runs = [f for i, f in enumerate(body) if f != body[i - 1]] or body[:1]
        order = [CCW_FLAG, AWAY_FLAG, CW_FLAG]
        if len(set(runs)) != len(runs) or any(r not in order for r in runs):
            self.error(f"flags around vertex lift {v} do not form ordered groups: {flags}")
            return
        pos = [order.index(r) for r in runs]
        turns = sum(1 for i in range(len(pos)) if pos[i] < pos[i - 1])
        if len(pos) > 1 and turns != 1:
            self.error(f"flag groups around vertex lift {v} are out of order: {flags}")


def _closer(S1: Vec, S2: Vec, x: Vec) -> bool:
    """True when S1 lies strictly between S2 and x on their common line."""
    return dot(sub(x, S1), sub(x, S1)) < dot(sub(x, S2), sub(x, S2))


def _cyclic_run(idx: List[int], m: int) -> List[int]:
    """Indices of a cyclically consecutive run, listed from its counterclockwise start."""
    if not idx:
        return []
    s = set(idx)
    start = next((i for i in idx if (i - 1) % m not in s), idx[0])
    out, i = [], start
    while i in s and len(out) < len(s):
        out.append(i)
        i = (i + 1) % m
    return out + [i for i in idx if i not in out]


def propagate_rays(surf: Surface, tri: int, point: Vec, budget: int = 500,
                   cover: Optional[Cover] = None, base_node: Optional[int] = None,
                   base_order: Optional[Sequence[int]] = None,
                   stop: Optional[Callable[[RayCoverage], bool]] = None) -> RayCoverage:
    """Cover triangles of the universal cover by trail rays from a base point.

    ``budget`` caps the number of covered triangle nodes; propagation stops
    before dequeuing a vertex once it is reached, and the partial coverage is
    returned with ``exhausted`` set.  ``base_order`` permutes the enqueue
    order of the base point's neighbours.
    """
    require_leaf_triangulation(surf)
    if cover is None:
        cover = Cover(surf)
    if base_node is None:
        base_node = cover.root(tri)
    cov = RayCoverage(surf, cover, base_node, point, None)
    prop = _Propagator(cov)
    first = prop.start()
    if base_order is not None:
        first = [first[i] for i in base_order]
    enqueued = set()
    queue: deque = deque()
    if cov.base_vertex is not None:
        enqueued.add(cov.base_vertex)
    for v in first:
        v = cover.find(v)
        if v not in enqueued:
            enqueued.add(v)
            queue.append(v)
    while queue:
        if stop is not None and stop(cov):
            break
        if cov.covered >= budget:
            cov.exhausted = True
            break
        v = cover.find(queue.popleft())
        cov.queue_trace.append(v)
        unions = cover.unions
        targets = prop.process(v)
        if cover.unions != unions:
            enqueued = {cover.find(x) for x in enqueued}
        for w in targets:
            w = cover.find(w)
            if w not in enqueued:
                enqueued.add(w)
                queue.append(w)
    cov.frontier = [cover.find(v) for v in queue]
    return cov


def require_leaf_triangulation(surf: Surface) -> None:
    if surf.has_poles:
        raise errors.NotLeafTriangulation("surfaces with poles are not supported here")
    if not surf.is_leaf_triangulation:
        raise errors.NotLeafTriangulation(
            "every vertex must have angle at least 3π for ray propagation")


# ---------------------------------------------------------------------------
# Trails between points
# ---------------------------------------------------------------------------

@dataclass
class TrailAnswer:
    trail: Trail
    coverage: Optional[RayCoverage]
    node: Optional[int] = None
    lifts: List[Tuple[int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"trail": self.trail.to_json()}
        if self.coverage is not None:
            out["covered"] = self.coverage.covered
        return out


def _in_sector(S: Vec, y0: Vec, y1: Vec, x: Vec) -> bool:
    o = orient(S, y0, y1)
    if o == 0:
        return orient(S, y0, x) == 0 and dot(sub(x, S), sub(y0, S)) >= 0
    return orient(S, y0, x) * o >= 0 and orient(S, x, y1) * o >= 0


def trail_to(cov: RayCoverage, n: int, x: Vec) -> Trail:
    """The trail from the base point to the point x of node n."""
    return trail_with_lifts(cov, n, x)[0]


def trail_with_lifts(cov: RayCoverage, n: int, x: Vec) -> Tuple[Trail, List[Tuple[int, int]]]:
    """Trail to the point x of node n, with the (node, corner) of each bend in order."""
    surf, cover = cov.surf, cov.cover
    tri_id = cover.nodes[n].tri
    start = (cover.nodes[cov.base_node].tri, cov.base_point)
    where, idx = surf.locate(x, tri_id)
    if where == "outside":
        raise errors.InvalidCrossing("point is not in its triangle")
    # bends recorded walking backwards: (vertex, pieces walked so far, out corner, out dir)
    back: List[Piece] = []
    bends_raw: List[tuple] = []
    if where == "vertex":
        v = cover.vert(n, idx)
        if cov.base_vertex is not None and v == cover.find(cov.base_vertex):
            return Trail([], [], start), []
        arr = cov.arrivals.get(v)
        if arr is None:
            raise errors.NotCovered("target vertex is not reached", covered=cov.covered)
        state = _from_arrival(cov, arr)
    else:
        if n not in cov.status:
            raise errors.NotCovered("target triangle is not covered", covered=cov.covered)
        S, src = _source_of(cov, n, x)
        state = (n, x, S, src, -1)
        if where == "edge":
            # on the edge the ray came in through: start on the other side
            pts = surf.triangles[tri_id]
            if cross(sub(pts[(idx + 1) % 3], pts[idx]), sub(S, x)) < 0:
                m = cover.nodes[n].nbr[idx]
                if m is None:
                    m = cover.peek(n, idx)
                if m is None:
                    raise errors.InternalInvariantError("trail leaves the developed region")
                g = surf.glue_map(tri_id, idx)
                state = (m, g(x), g(S), src, surf.twin(tri_id, idx)[1])
    for _ in range(1000000):
        n, x, S, src, skip = state
        t = cover.nodes[n].tri
        if x == S:
            if src == P_SOURCE:
                break
            v = cover.find(src)
            arr = cov.arrivals[v]
            prev = back[-1]
            bends_raw.append((v, len(back), (t, _corner_of(surf, t, x)),
                              sub(_prev_point(x, prev, surf, t), x), n))
            state = _from_arrival(cov, arr)
            continue
        kind, k, pt, s = exit_point(surf.triangles[t], x, sub(S, x), skip)
        if s >= 1:
            back.append(_frame_piece(t, x, S))
            state = (n, S, S, src, -1)
            continue
        back.append(_frame_piece(t, x, pt))
        if kind == "vertex":
            w = cover.vert(n, k)
            arr = cov.arrivals.get(w)
            if arr is None:
                raise errors.InternalInvariantError("trail passes an unreached vertex")
            bends_raw.append((w, len(back), (t, k), sub(x, pt), n))
            state = _from_arrival(cov, arr)
            continue
        m = cover.nodes[n].nbr[k]
        if m is None:
            m = cover.peek(n, k)
        if m is None:
            raise errors.InternalInvariantError("trail leaves the developed region")
        g = surf.glue_map(t, k)
        _, e2 = surf.twin(t, k)
        state = (m, g(pt), g(S), src, e2)
    else:
        raise errors.InternalInvariantError("trail reconstruction does not terminate")
    total = len(back)
    pieces = [canonical_piece(surf, p.tri, p.b, p.a) for p in reversed(back)]
    bends = []
    lifts = []
    for v, walked, out_corner, out_dir, node in bends_raw:
        arr = cov.arrivals[v]
        in_corner = (cover.nodes[arr.node].tri, arr.corner)
        bends.append(make_bend(surf, total - 1 - walked, in_corner, arr.d, out_corner, out_dir))
        lifts.append((total - 1 - walked, node, out_corner[1]))
    bends.sort(key=lambda b: b.index)
    lifts.sort()
    return Trail(pieces, bends, start), [(m, c) for _, m, c in lifts]


def _frame_piece(t: int, a: Vec, b: Vec) -> Piece:
    return Piece(t, a, b)


def _prev_point(x: Vec, prev: Piece, surf: Surface, t: int) -> Vec:
    """Far end, in frame t, of the last backward piece, which ends at x."""
    if prev.tri != t:
        raise errors.InternalInvariantError("backward piece is in another frame")
    return prev.a


def _source_of(cov: RayCoverage, n: int, x: Vec) -> Tuple[Vec, int]:
    if cov.status[n].kind == BASE:
        return cov.base_point, P_SOURCE
    best = None
    for src, S, y0, y1 in cov.sectors.get(n, []):
        if _in_sector(S, y0, y1, x):
            if best is None or _closer(S, best[0], x):
                best = (S, src)
    if best is None:
        raise errors.InternalInvariantError("covered point lies in no ray sector")
    return best


def _corner_of(surf: Surface, t: int, x: Vec) -> int:
    for c in range(3):
        if surf.triangles[t][c] == x:
            return c
    raise errors.InternalInvariantError("point is not a corner")


def _from_arrival(cov: RayCoverage, arr: Arrival) -> tuple:
    tri = cov.surf.triangles[cov.cover.nodes[arr.node].tri]
    return (arr.node, tri[arr.corner], arr.S, arr.src, -1)


def trail_between(surf: Surface, p_tri: int, p: Vec, q_path: Sequence, q: Vec,
                  budget: int = 2000, cover: Optional[Cover] = None,
                  p_node: Optional[int] = None) -> TrailAnswer:
    """Trail in the universal cover from p (in triangle p_tri) to q.

    q lies in the triangle reached from p's triangle along the dual path
    ``q_path``; its coordinates are in that triangle's frame.
    """
    if _is_flat_plane(surf):
        return TrailAnswer(_straight_trail(surf, p_tri, p, q_path, q), None)
    require_leaf_triangulation(surf)
    if cover is None:
        cover = Cover(surf)
    if p_node is None:
        p_node = cover.root(p_tri)
    return trail_along(cover, p_node, p, q_path, q, budget)


def trail_along(cover: Cover, p_node: int, p: Vec, q_path: Sequence, q: Vec,
                budget: int = 2000) -> TrailAnswer:
    """Trail from p to the point q of the lift reached along a dual path.

    The dual path is followed only through the developed region, so the
    target is identified inside one consistently developed disk.
    """
    surf = cover.surf
    require_leaf_triangulation(surf)
    p_tri = cover.nodes[p_node].tri
    q_tri = _path_end(surf, p_tri, q_path)
    where, idx = surf.locate(q, q_tri)
    if where == "outside":
        raise errors.InvalidCrossing("target point is not in its triangle")
    base_v = _vertex_at(cover, p_node, p)
    state: Dict[str, Optional[int]] = {"node": None}

    def done(cov: RayCoverage) -> bool:
        m = cover.follow(p_node, q_path)
        if m is None:
            return False
        state["node"] = m
        if where == "vertex":
            v = cover.vert(m, idx)
            return v in cov.arrivals or v == base_v
        return m in cov.status

    cov = propagate_rays(surf, p_tri, p, budget, cover, p_node, stop=done)
    if not done(cov):
        raise errors.NotCovered("target not covered within budget", budget=budget,
                                covered=cov.covered)
    m = state["node"]
    trail, lifts = trail_with_lifts(cov, m, q)
    return TrailAnswer(trail, cov, m, lifts)


def _path_end(surf: Surface, t: int, path: Sequence) -> int:
    for step in path:
        e = step if isinstance(step, int) else step[1]
        if not isinstance(step, int) and step[0] != t:
            raise errors.InvalidCrossing(f"edge {tuple(step)} is not on triangle {t}")
        if not (0 <= e < 3):
            raise errors.InvalidCrossing(f"edge index {e} out of range")
        t = surf.twin(t, e)[0]
    return t


def trail_between_nodes(cover: Cover, p_node: int, p: Vec, q_node: int, q: Vec,
                        budget: int = 2000) -> TrailAnswer:
    """Trail between points given in the frames of two nodes of one cover."""
    return trail_along(cover, p_node, p, cover.path_to(p_node, q_node), q, budget)


def _vertex_at(cover: Cover, n: int, p: Vec) -> Optional[int]:
    where, idx = cover.surf.locate(p, cover.nodes[n].tri)
    return cover.vert(n, idx) if where == "vertex" else None


def _is_flat_plane(surf: Surface) -> bool:
    return surf.mode == "translation" and not surf.singular_vertices


def _straight_trail(surf: Surface, p_tri: int, p: Vec, q_path: Sequence, q: Vec) -> Trail:
    from .kinematics import develop
    strip = develop(surf, p_tri, q_path)
    qt, m = strip.placed[-1]
    target = m(q)
    if target == p:
        return Trail([], [], (p_tri, p))
    pieces = walk_segment(surf, p_tri, p, target)
    return Trail(pieces, [], (p_tri, p))


def walk_segment(surf: Surface, tri: int, a: Vec, b: Vec, limit: int = 100000) -> List[Piece]:
    """Pieces of the developed straight segment from a to b, both in the frame of ``tri``.

    Vertices met on the way are crossed straight (only valid when they are removable).
    """
    pieces: List[Piece] = []
    t, x, target, skip = tri, a, b, -1
    for _ in range(limit):
        kind, k, pt, s = exit_point(surf.triangles[t], x, sub(target, x), skip)
        if s >= 1:
            pieces.append(canonical_piece(surf, t, x, target))
            return pieces
        pieces.append(canonical_piece(surf, t, x, pt))
        if kind == "vertex":
            from .kinematics import back_direction, rotate_half_turns
            d = sub(target, x)
            bc, bdir = back_direction(surf, (t, k), d)
            (t2, c2), o = rotate_half_turns(surf, bc, bdir, 1)
            g = _frame_map(surf, (t, k), (t2, c2))
            t, x, target, skip = t2, surf.triangles[t2][c2], g(target), -1
            continue
        g = surf.glue_map(t, k)
        t2, e2 = surf.twin(t, k)
        t, x, target, skip = t2, g(pt), g(target), e2
    raise errors.BudgetExhausted("segment crosses too many triangles")


def _frame_map(surf: Surface, c0: Tuple[int, int], c1: Tuple[int, int]) -> AffineMap:
    """Chart change from the frame of corner c0 to that of c1 around a shared vertex."""
    m = AffineMap.identity()
    cur = c0
    for _ in range(len(surf.cone(*c0).corners) + 1):
        if cur == c1:
            return m
        e = (cur[1] + 2) % 3
        m = surf.glue_map(cur[0], e).compose(m)
        cur, _ = surf.ccw_next_corner(*cur)
    raise errors.InternalInvariantError("corner not found around vertex")


# ---------------------------------------------------------------------------
# Polygonal convexity
# ---------------------------------------------------------------------------

@dataclass
class PolygonCorner:
    """Corner of a developed polygon.

    ``half_turns`` is the total angle at the point in units of pi (2 for a
    regular point).  ``fan`` optionally lists the interior wedges from the
    outgoing side direction counterclockwise to the incoming side reversed;
    without it the interior angle is read off the planar neighbours.
    """

    point: Vec
    half_turns: int = 2
    fan: Optional[List[Tuple[Vec, Vec]]] = None


@dataclass
class ConvexityReport:
    convex: bool
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        return {"convex": self.convex, "witness": self.witness}


def _planar_fan(prev: Vec, p: Vec, nxt: Vec) -> List[Tuple[Vec, Vec]]:
    u, v = sub(nxt, p), sub(prev, p)
    c = cross(u, v)
    if c > 0:
        return [(u, v)]
    perp = (-u[1], u[0])
    if c == 0 and dot(u, v) < 0:
        return [(u, perp), (perp, v)]
    # reflex: go through the perpendicular and the reversed outgoing direction
    back = (-u[0], -u[1])
    fan = [(u, perp), (perp, back)]
    nperp = (u[1], -u[0])
    if cross(back, v) > 0:
        fan.append((back, v))
    else:
        fan += [(back, nperp), (nperp, v)]
    return fan


def polygon_convexity_check(polygon: Sequence[PolygonCorner], region=None) -> ConvexityReport:
    """Convex exactly when every exterior angle is at least pi."""
    from .kinematics import walk_half_turns
    pts = [c.point for c in polygon]
    n = len(pts)
    if n < 3:
        raise errors.NotAPolygon("a polygon needs at least three corners")
    _check_simple(pts)
    for i, corner in enumerate(polygon):
        prev, p, nxt = pts[i - 1], pts[i], pts[(i + 1) % n]
        fan = corner.fan or _planar_fan(prev, p, nxt)
        chain = [fan[0][0]]
        for a, b in fan:
            chain += [a, b]
        h, exact = walk_half_turns(chain)
        k = corner.half_turns
        # exterior = k*pi - interior >= pi  iff  interior <= (k-1)*pi
        ok = h < k - 1 or (h == k - 1 and exact)
        if not ok:
            eps_a = _toward(p, nxt)
            eps_b = _toward(p, prev)
            return ConvexityReport(False, {
                "corner": i,
                "interior_half_turns": h,
                "exact": exact,
                "chord": [[str(c) for c in eps_a], [str(c) for c in eps_b]],
            })
    return ConvexityReport(True, None)


def _toward(p: Vec, x: Vec) -> Vec:
        return add(p, scale(Rational(1, 8), sub(x, p)))


def _check_simple(pts: List[Vec]) -> None:
    n = len(pts)
    area = sum(cross(pts[i], pts[(i + 1) % n]) for i in range(n))
    if area <= 0:
        raise errors.NotAPolygon("corners must be listed counterclockwise")
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        if a == b:
            raise errors.NotAPolygon("repeated corner")
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            c, d = pts[j], pts[(j + 1) % n]
            if _segments_meet(a, b, c, d):
                raise errors.NotAPolygon(f"sides {i} and {j} intersect")


def _segments_meet(a: Vec, b: Vec, c: Vec, d: Vec) -> bool:
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    def on(p, q, r):
        return orient(p, q, r) == 0 and min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and \
            min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
    return on(a, b, c) or on(a, b, d) or on(c, d, a) or on(c, d, b)
