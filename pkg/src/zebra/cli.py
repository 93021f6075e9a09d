"""Command line front end.

Exit codes: 0 for a definite answer, 2 when the answer is Inconclusive, 1 on
input errors.  With ``--json`` a report is written to stdout; identical
inputs give identical reports apart from the ``timing`` field.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import errors
from .builder import EXAMPLE_NAMES, parse_surface, standard_example
from .closed_trails import (INCONCLUSIVE, HomotopyClass, class_from_vector, classify,
                            full_cylinders, named_classes)
from .connect import propagate_rays, trail_between
from .exact import Vec, fmt_vec, q
from .invariants import Region, gauss_bonnet, random_region
from .kinematics import develop, trace_leaf
from .surface_core import euler_poincare_report, validate_surface

SCHEMA = "zebra-report/1"
EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2


class Report:
    def __init__(self, command: str, digest: str) -> None:
        self.command = command
        self.digest = digest
        self.result: dict = {}
        self.verdict: Optional[str] = None
        self.timing: dict = {}
        self.svg: Optional[bytes] = None

    def to_json(self) -> dict:
        out = {"schema": SCHEMA, "command": self.command, "input_digest": self.digest,
               "result": self.result, "timing": self.timing}
        if self.verdict is not None:
            out["verdict"] = self.verdict
        return out

    @property
    def exit_code(self) -> int:
        return EXIT_INCONCLUSIVE if self.verdict == INCONCLUSIVE else EXIT_OK


def parse_report(text: str) -> dict:
    """Parse and check a machine-mode report."""
    doc = json.loads(text)
    for key in ("schema", "command", "input_digest", "result", "timing"):
        if key not in doc:
            raise ValueError(f"report lacks {key!r}")
    if doc["schema"] != SCHEMA:
        raise ValueError(f"unknown schema {doc['schema']!r}")
    return doc


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------

class Loaded:
    def __init__(self, surf, doc: dict, name: Optional[str], digest: str) -> None:
        self.surf = surf
        self.doc = doc
        self.name = name
        self.digest = digest


def load(path: str, mode: Optional[str] = None) -> Loaded:
    """Read a surface file; a missing file named after a standard example
    (``octagon.json``) loads that example."""
    p = Path(path)
    name = p.stem
    if p.exists():
        data = p.read_bytes()
    elif name in EXAMPLE_NAMES:
        from .builder import serialize_surface
        data = serialize_surface(standard_example(name))
    else:
        raise errors.InputError(f"no such file: {path}")
    desc = parse_surface(data)
    doc = json.loads(data)
    surf = validate_surface(desc, mode)
    return Loaded(surf, doc, name, hashlib.sha256(data).hexdigest())


def parse_point(text: str) -> Vec:
    parts = text.split(",")
    if len(parts) != 2:
        raise errors.InputError(f"expected x,y but got {text!r}")
    try:
        return (q(parts[0].strip()), q(parts[1].strip()))
    except (ValueError, ZeroDivisionError):
        raise errors.InputError(f"malformed rational pair {text!r}") from None


def parse_located(text: str) -> Tuple[int, Vec]:
    """``T:x,y`` is the point (x, y) in the frame of triangle T."""
    if ":" not in text:
        raise errors.InputError(f"expected T:x,y but got {text!r}")
    t, rest = text.split(":", 1)
    return _int(t), parse_point(rest)


def parse_edges(text: str) -> List[int]:
    return [_int(x) for x in text.split(",") if x.strip()] if text else []


def _int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise errors.InputError(f"expected an integer but got {text!r}") from None


def parse_class(ld: Loaded, spec: str) -> HomotopyClass:
    """A class given as a slope ``p,q``, a name, or a dual loop ``T:e,e,...``."""
    surf = ld.surf
    named = ld.doc.get("classes", {})
    if spec in named:
        c = named[spec]
        return HomotopyClass.from_loop(surf, int(c["seed"]), [tuple(s) for s in c["loop"]])
    if ld.name is not None:
        builtin = named_classes(ld.name, surf)
        if spec in builtin:
            return builtin[spec]
    if ":" in spec:
        t, rest = spec.split(":", 1)
        return HomotopyClass.from_loop(surf, _int(t), parse_edges(rest))
    parts = spec.split(",")
    if len(parts) == 2:
        v = (q(_int(parts[0])), q(_int(parts[1])))
        return class_from_vector(surf, 0, v)
    raise errors.InputError(f"cannot read class {spec!r}")


def parse_region(surf, spec: str, seed: int) -> Region:
    """``tri:T[,e,...]`` (dual path), ``star:V`` or ``random:N``."""
    kind, _, rest = spec.partition(":")
    if kind == "tri":
        vals = parse_edges(rest)
        if not vals:
            raise errors.InvalidRegion("tri: needs a triangle index")
        return Region.from_path(surf, vals[0], vals[1:])
    if kind == "star":
        v = _int(rest)
        if not (0 <= v < len(surf.cones)):
            raise errors.InvalidRegion(f"no vertex {v}")
        return Region.star(surf, v)
    if kind == "random":
        return random_region(surf, _int(rest), random.Random(seed))
    raise errors.InvalidRegion(f"unknown region spec {spec!r}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_validate(ld: Loaded, args) -> Report:
    rep = Report("validate", ld.digest)
    surf = ld.surf
    ep = euler_poincare_report(surf)
    rep.result = {
        "mode": surf.mode, "triangles": surf.n_triangles, "euler_poincare": ep,
        "vertices": [{"vertex": c.vertex, "angle_pi": c.half_turns, "alpha": c.alpha,
                      "removable": c.removable, "pole": c.is_pole} for c in surf.cones],
        "leaf_triangulation": surf.is_leaf_triangulation,
    }
    return rep


def cmd_trace(ld: Loaded, args) -> Report:
    rep = Report("trace", ld.digest)
    t, x = parse_located(args.start)
    tr = trace_leaf(ld.surf, t, x, parse_point(args.dir), args.budget)
    rep.result = tr.to_json()
    rep.verdict = INCONCLUSIVE if tr.kind == "budget" else None
    return rep


def cmd_connect(ld: Loaded, args) -> Report:
    rep = Report("connect", ld.digest)
    t, p = parse_located(args.start)
    ans = trail_between(ld.surf, t, p, parse_edges(args.path), parse_point(args.to),
                        args.budget)
    rep.result = ans.to_json()
    return rep


def cmd_classify(ld: Loaded, args) -> Report:
    rep = Report("classify", ld.digest)
    cls = parse_class(ld, args.cls)
    res = classify(ld.surf, cls, args.budget, args.max_iter)
    rep.result = res.to_json()
    rep.verdict = res.verdict
    return rep


def cmd_cylinders(ld: Loaded, args) -> Report:
    rep = Report("cylinders", ld.digest)
    cyls = full_cylinders(ld.surf, budget=args.budget)
    rep.result = {"full_cylinders": [c.to_json() for c in cyls]}
    return rep


def cmd_gauss_bonnet(ld: Loaded, args) -> Report:
    rep = Report("gauss-bonnet", ld.digest)
    reg = parse_region(ld.surf, args.region, args.seed)
    rep.result = gauss_bonnet(reg).to_json()
    return rep


def cmd_render(ld: Loaded, args) -> Report:
    """SVG of the surface, a developed strip, a ray coverage, a trail or a cylinder."""
    from . import render

    rep = Report("render", ld.digest)
    surf = ld.surf
    what = args.what
    if what == "surface":
        pic = render.render_surface(surf)
    elif what == "strip":
        cls = parse_class(ld, args.cls) if args.cls else None
        if cls is None:
            raise errors.InputError("render strip needs --class")
        pic = render.render_strip(surf, develop(surf, cls.seed, list(cls.loop) * 2))
    elif what == "coverage":
        t, x = parse_located(args.start)
        pic = render.render_coverage(propagate_rays(surf, t, x, args.budget))
    elif what == "trail":
        t, p = parse_located(args.start)
        if args.dir:
            tr = trace_leaf(surf, t, p, parse_point(args.dir), args.budget)
        else:
            tr = trail_between(surf, t, p, parse_edges(args.path), parse_point(args.to),
                               args.budget).trail
        pic = render.render_trail(surf, tr)
    elif what == "cylinder":
        res = classify(surf, parse_class(ld, args.cls), args.budget, args.max_iter)
        if res.cylinder is None:
            raise errors.InputError(f"class has no cylinder (verdict {res.verdict})")
        pic = render.render_cylinder(surf, res.cylinder)
    else:
        raise errors.InputError(f"cannot render {what!r}")
    rep.svg = pic.to_svg(exact=args.exact_overlay)
    rep.result = {"what": what, "bytes": len(rep.svg),
                  "sha256": hashlib.sha256(rep.svg).hexdigest()}
    return rep


COMMANDS = {
    "validate": cmd_validate,
    "trace": cmd_trace,
    "connect": cmd_connect,
    "classify": cmd_classify,
    "cylinders": cmd_cylinders,
    "gauss-bonnet": cmd_gauss_bonnet,
    "render": cmd_render,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def human(rep: Report) -> str:
    r = rep.result
    if rep.command == "validate":
        ep = r["euler_poincare"]
        lines = [f"mode {r['mode']}, {r['triangles']} triangles, chi {ep['chi']}, "
                 f"sum of alpha {ep['alpha_sum']} "
                 f"({'holds' if ep['holds'] else 'FAILS'})"]
        lines += [f"  vertex {v['vertex']}: angle {v['angle_pi']}pi, alpha {v['alpha']}"
                  for v in r["vertices"]]
        return "\n".join(lines)
    if rep.command == "classify":
        cert = r["certificate"]
        line = f"verdict {rep.verdict} ({cert['kind']})"
        if "cylinder" in cert and isinstance(cert["cylinder"], dict):
            cyl = cert["cylinder"]
            line += (f"; {cyl['n_components']} components {', '.join(cyl['kinds'])}; "
                     f"full {str(cyl['full']).lower()}")
        return line
    if rep.command == "gauss-bonnet":
        return (f"lhs {r['lhs_pi']}pi, rhs {r['rhs_pi']}pi, "
                f"{'holds' if r['holds'] else 'FAILS'}")
    if rep.command == "trace":
        return f"leaf {r['kind']} after {len(r['pieces'])} pieces"
    if rep.command == "connect":
        tr = r["trail"]
        return f"trail with {len(tr['pieces'])} pieces and {len(tr['bends'])} bends"
    if rep.command == "cylinders":
        return f"{len(r['full_cylinders'])} full cylinders"
    return json.dumps(r, indent=1, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zebra", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("file", help="surface file (JSON)")
    ap.add_argument("what", nargs="?", default="surface",
                    help="render target: surface, strip, coverage, trail or cylinder")
    ap.add_argument("--budget", type=int, default=2000, help="triangle crossings")
    ap.add_argument("--mode", choices=("translation", "dilation", "half-dilation"))
    ap.add_argument("--json", action="store_true", help="machine-readable report")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized regions")
    ap.add_argument("--max-iter", type=int, default=12, help="tightening iterations")
    ap.add_argument("--class", dest="cls", help="p,q or a class name or T:e,e,...")
    ap.add_argument("--region", default="tri:0", help="tri:T[,e,...], star:V or random:N")
    ap.add_argument("--start", help="T:x,y")
    ap.add_argument("--dir", help="dx,dy")
    ap.add_argument("--to", help="x,y in the triangle reached along --path")
    ap.add_argument("--path", default="", help="dual path as edge indices e,e,...")
    ap.add_argument("--out", help="write the SVG here instead of stdout")
    ap.add_argument("--exact-overlay", action="store_true",
                    help="embed rational coordinates in the SVG metadata")
    return ap


def _need(args, *names: str) -> None:
    for n in names:
        if getattr(args, n) is None:
            raise errors.InputError(f"--{n.replace('_', '-')} is required")


_REQUIRED = {"trace": ("start", "dir"), "connect": ("start", "to"), "classify": ("cls",)}


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        _need(args, *_REQUIRED.get(args.command, ()))
        ld = load(args.file, args.mode)
        rep = COMMANDS[args.command](ld, args)
    except errors.InputError as exc:
        _error(out, args, exc, "input")
        return EXIT_INPUT
    except errors.ZebraError as exc:
        _error(out, args, exc, "inconclusive")
        return EXIT_INCONCLUSIVE
    rep.timing = {"seconds": round(time.perf_counter() - t0, 6)}
    if rep.svg is not None and not args.json:
        if args.out:
            Path(args.out).write_bytes(rep.svg)
        else:
            out.write(rep.svg.decode())
        return rep.exit_code
    if rep.svg is not None and args.out:
        Path(args.out).write_bytes(rep.svg)
    if args.json:
        out.write(json.dumps(rep.to_json(), indent=1, sort_keys=True) + "\n")
    else:
        out.write(human(rep) + "\n")
    return rep.exit_code


def _error(out, args, exc: errors.ZebraError, kind: str) -> None:
    if args.json:
        doc = {"schema": SCHEMA, "command": args.command, "error": {
            "code": exc.code, "kind": kind, "message": str(exc)}}
        out.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"{exc.code}: {exc}\n")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
