"""One test per acceptance criterion, at the stated tolerances and time limits."""
import math
import random
import time
from math import gcd

import oracles
from classes import distinct_classes
from conftest import load
from zebra.builder import EXAMPLE_NAMES
from zebra.closed_trails import (CYL, NR, TF, UT, class_from_vector, classify,
                                 named_classes, tighten)
from zebra.connect import Cover, propagate_rays, trail_between, trail_to
from zebra.exact import Rational, cross, lerp, q, sub
from zebra.invariants import (brute_force_closed_trails, gauss_bonnet, random_region,
                              verify_trail)
from zebra.kinematics import EQUAL, GREATER, LESS, angle_cmp_pi
from zebra.surface_core import euler_poincare_report


def _random_point(surf, t, rng):
    a, b, c = surf.triangles[t]
    w = [rng.randint(1, 40) for _ in range(3)]
    return tuple(Rational(w[0] * a[i] + w[1] * b[i] + w[2] * c[i], sum(w)) for i in range(2))


def test_exact_identities():
    t0 = time.perf_counter()
    assert len(EXAMPLE_NAMES) >= 6
    rng = random.Random(1)
    for name in EXAMPLE_NAMES:
        s = load(name)
        ep = euler_poincare_report(s)
        assert ep["holds"] and ep["chi"] == oracles.euler_characteristic(s.desc), name
        assert sum(c.half_turns for c in s.cones) == sum(oracles.cone_half_turns(s.desc))
        for _ in range(100):
            rep = gauss_bonnet(random_region(s, 12, rng))
            assert rep.holds and rep.lhs == rep.rhs == 2, name
    assert time.perf_counter() - t0 < 5


def test_square_torus_classes():
    s = load("square_torus")
    for p in range(-5, 6):
        for r in range(-5, 6):
            if gcd(p, r) != 1:
                continue
            t0 = time.perf_counter()
            res = classify(s, class_from_vector(s, 0, (q(p), q(r))))
            assert res.verdict == TF, (p, r)
            for pc in res.trail.pieces:
                assert cross(sub(pc.b, pc.a), (q(p), q(r))) == 0, (p, r)
            assert time.perf_counter() - t0 < 1, (p, r)


def _turning(chain):
    return sum(math.atan2(float(cross(a, b)), float(a[0] * b[0] + a[1] * b[1]))
               for a, b in zip(chain, chain[1:]))


def test_fig2_amalgamated_cylinder():
    t0 = time.perf_counter()
    s = load("fig2_amalgam")
    named = named_classes("fig2_amalgam", s)
    cross_res = classify(s, named["crossing"])
    assert cross_res.verdict == NR
    cert = cross_res.certificate
    assert cert["kind"] == "full-cylinder" and cert["cylinder"]["full"]
    sweep = [tuple(Rational(x) for x in d) for d in cert["cylinder"]["sweep"]]
    # leaf directions turn through a half turn or more: every slope occurs
    assert abs(_turning(sweep)) >= math.pi - 1e-12
    core = classify(s, named["core"])
    assert core.verdict == CYL and core.cylinder.full
    kinds = [c.kind for c in core.cylinder.components]
    assert len(kinds) == 3 and sorted(kinds) == ["dilation", "dilation", "flat"]
    assert time.perf_counter() - t0 < 5


def test_oracle_equivalence():
    t0 = time.perf_counter()
    rng = random.Random(3)
    for name in ("octagon", "l_shaped"):
        s = load(name)
        classes = distinct_classes(s, 9)
        assert len(classes) >= 8
        for cls in classes:
            res = classify(s, cls)
            bf = brute_force_closed_trails(s, cls, 12)
            if res.verdict == UT:
                expected = [res.trail.normalized().key()]
            elif res.verdict == CYL:
                expected = sorted(b.normalized().key() for b in res.cylinder.boundary)
            else:
                assert res.verdict == TF and bf.leaves
                expected = []
            assert bf.keys == expected, (name, cls.loop)
            if res.verdict != UT:
                continue
            assert res.trail.left_more and res.trail.right_more
            for _ in range(10):
                again = tighten(s, cls, start=_random_point(s, cls.seed, rng))
                assert again.trail.normalized().key() == expected[0]
    assert time.perf_counter() - t0 < 60


def test_convexity_algorithm():
    t0 = time.perf_counter()
    s = load("octagon")
    rng = random.Random(7)
    for _ in range(200):
        tp = rng.randrange(s.n_triangles)
        p = _random_point(s, tp, rng)
        near = propagate_rays(s, tp, p, budget=300)
        n1 = rng.choice(sorted(near.status))
        tq = near.cover.nodes[n1].tri
        qq = _random_point(s, tq, rng)
        path = near.cover.path_to(near.base_node, n1)
        ans = trail_between(s, tp, p, path, qq, budget=2000)
        cv = Cover(s)
        r = cv.root(tp)
        back = cv.path_to(cv.walk(r, path), r)
        rev = trail_between(s, tq, qq, back, p, budget=2000)
        assert ans.trail.key() == rev.trail.reversed_key()
        assert verify_trail(s, ans.trail).ok
        assert ans.coverage.errors == [] and rev.coverage.errors == []
    assert time.perf_counter() - t0 < 30


def _direction(rng):
    while True:
        v = (rng.randint(-1000, 1000), rng.randint(-1000, 1000))
        if v != (0, 0):
            return (q(v[0]), q(v[1]))


def _random_fan(rng):
    """Boundary directions each less than a half turn apart, counterclockwise."""
    k = rng.randint(1, 6)
    dirs = [_direction(rng)]
    while len(dirs) < k + 1:
        d = _direction(rng)
        if cross(dirs[-1], d) > 0:
            dirs.append(d)
    fan = list(zip(dirs, dirs[1:]))
    (a, b), (c, d) = fan[0], fan[-1]
    s, t = rng.randint(0, 9), rng.randint(0, 9)
    frm = (q(10 - s) * a[0] / 10 + q(s) * b[0] / 10, q(10 - s) * a[1] / 10 + q(s) * b[1] / 10)
    to = (q(10 - t) * c[0] / 10 + q(t) * d[0] / 10, q(10 - t) * c[1] / 10 + q(t) * d[1] / 10)
    return fan, frm, to, [frm] + dirs[1:-1] + [to]


def test_angle_comparisons():
    t0 = time.perf_counter()
    rng = random.Random(6)
    checked = 0
    while checked < 10_000:
        fan, frm, to, chain = _random_fan(rng)
        if frm == (0, 0) or to == (0, 0):
            continue
        angle = oracles.chain_angle(chain)
        if abs(angle - math.pi) < 1e-6:
            continue
        want = LESS if angle < math.pi else GREATER
        assert angle_cmp_pi(fan, frm, to).result == want
        checked += 1
    for _ in range(100):
        u = _direction(rng)
        perp = (-u[1], u[0])
        mids = sorted({rng.randint(-50, 50) for _ in range(rng.randint(0, 3))})
        dirs = [u] + [(perp[0] + Rational(m, 10) * u[0], perp[1] + Rational(m, 10) * u[1])
                      for m in reversed(mids)] + [(-u[0], -u[1])]
        if len(dirs) == 2:
            dirs.insert(1, perp)
        assert angle_cmp_pi(list(zip(dirs, dirs[1:])), u, dirs[-1]).result == EQUAL
    assert time.perf_counter() - t0 < 5


def test_monotone_ray_slopes():
    t0 = time.perf_counter()
    s = load("octagon")
    tri = s.triangles[0]
    p = tuple(sum(x[i] for x in tri) / 3 for i in range(2))
    cov = propagate_rays(s, 0, p, budget=400)
    cv = cov.cover
    # the transversal edge whose rays arrive along the most distinct bend sequences
    best = None
    for n in sorted(cov.status)[::7]:
        t = cv.nodes[n].tri
        pts = s.triangles[t]
        for e in range(3):
            xs = [lerp(pts[e], pts[(e + 1) % 3], Rational(i, 11)) for i in range(1, 11)]
            kinds = len({tuple(b.vertex for b in trail_to(cov, n, x).bends) for x in xs})
            if best is None or kinds > best[0]:
                best = (kinds, n, e)
    _, n, e = best
    t = cv.nodes[n].tri
    a, b = s.triangles[t][e], s.triangles[t][(e + 1) % 3]
    dirs = []
    for i in range(1, 101):
        last = trail_to(cov, n, lerp(a, b, Rational(i, 101))).pieces[-1]
        d = sub(last.b, last.a)
        if last.tri != t:
            # the ray arrives through this edge, from the neighbour
            assert last.tri == s.twin(t, e)[0]
            d = s.glue_map(t, e).inverse().linear(d)
        dirs.append(d)
    signs = {(c > 0) - (c < 0) for c in (cross(u, v) for u, v in zip(dirs, dirs[1:]))}
    assert len(signs) == 1 and 0 not in signs
    assert time.perf_counter() - t0 < 5
