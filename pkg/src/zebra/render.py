"""SVG pictures of surfaces, developed strips, ray coverages, trails and cylinders.

Coordinates are written as floats for display; with ``exact=True`` the
rational coordinates of every drawn item are embedded as JSON metadata.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from collections import deque
from typing import Dict, List, Optional, Sequence, Tuple

from .affine import AffineMap
from .exact import Vec, fmt_vec

SVG_NS = "http://www.w3.org/2000/svg"

STATUS_COLORS = {
    "Base": "#f4d35e",
    "FullyTransverse": "#9ad1d4",
    "CwLeaf": "#ee964b",
    "CcwLeaf": "#c490d1",
    "DoubleLeaf": "#f95738",
}
COMPONENT_COLORS = {"flat": "#8ecae6", "dilation": "#ffb703"}


class Picture:
    """Collects polygons and polylines in one plane, then writes SVG 1.1."""

    def __init__(self, title: str, size: int = 640, margin: int = 16) -> None:
        self.title = title
        self.size = size
        self.margin = margin
        self.items: List[dict] = []

    def polygon(self, pts: Sequence[Vec], fill: str = "none", stroke: str = "#555",
                label: Optional[str] = None, **meta: object) -> None:
        self.items.append({"kind": "polygon", "pts": list(pts), "fill": fill,
                           "stroke": stroke, "label": label, "meta": meta})

    def polyline(self, pts: Sequence[Vec], stroke: str = "#d00", width: float = 2.0,
                 **meta: object) -> None:
        self.items.append({"kind": "polyline", "pts": list(pts), "fill": "none",
                           "stroke": stroke, "width": width, "label": None, "meta": meta})

    def point(self, p: Vec, fill: str = "#000", **meta: object) -> None:
        self.items.append({"kind": "point", "pts": [p], "fill": fill, "stroke": "none",
                           "label": None, "meta": meta})

    def _frame(self):
        xs = [float(p[0]) for it in self.items for p in it["pts"]] or [0.0, 1.0]
        ys = [float(p[1]) for it in self.items for p in it["pts"]] or [0.0, 1.0]
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        span = max(x1 - x0, y1 - y0, 1e-9)
        k = (self.size - 2 * self.margin) / span

        def tr(p: Vec) -> Tuple[float, float]:
            # flip y so that the picture is oriented like the plane
            return (self.margin + (float(p[0]) - x0) * k,
                    self.size - self.margin - (float(p[1]) - y0) * k)
        return tr

    def to_svg(self, exact: bool = False) -> bytes:
        tr = self._frame()
        root = ET.Element("svg", {"xmlns": SVG_NS, "version": "1.1",
                                  "width": str(self.size), "height": str(self.size),
                                  "viewBox": f"0 0 {self.size} {self.size}"})
        ET.SubElement(root, "title").text = self.title
        if exact:
            meta = [{"kind": it["kind"], "points": [fmt_vec(p) for p in it["pts"]],
                     **{k: v for k, v in it["meta"].items()}} for it in self.items]
            ET.SubElement(root, "metadata", {"id": "exact-coordinates"}).text = json.dumps(
                meta, sort_keys=True)
        for it in self.items:
            pts = [tr(p) for p in it["pts"]]
            coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
            if it["kind"] == "polygon":
                ET.SubElement(root, "polygon", {"points": coords, "fill": it["fill"],
                                                "stroke": it["stroke"], "stroke-width": "1"})
                if it["label"] is not None:
                    cx = sum(x for x, _ in pts) / len(pts)
                    cy = sum(y for _, y in pts) / len(pts)
                    ET.SubElement(root, "text", {"x": f"{cx:.3f}", "y": f"{cy:.3f}",
                                                 "font-size": "10",
                                                 "text-anchor": "middle"}).text = it["label"]
            elif it["kind"] == "polyline":
                ET.SubElement(root, "polyline", {"points": coords, "fill": "none",
                                                 "stroke": it["stroke"],
                                                 "stroke-width": str(it["width"])})
            else:
                x, y = pts[0]
                ET.SubElement(root, "circle", {"cx": f"{x:.3f}", "cy": f"{y:.3f}", "r": "3",
                                               "fill": it["fill"]})
        ET.indent(root)
        return (b'<?xml version="1.0" encoding="UTF-8"?>\n'
                + ET.tostring(root, encoding="utf-8") + b"\n")


def _atlas(surf, pic: Picture) -> None:
    for t, tri in enumerate(surf.triangles):
        pic.polygon(tri, fill="#f7f7f7", stroke="#999", label=str(t), tri=t)


def _pieces(pic: Picture, pieces, stroke: str = "#d00", place=None) -> None:
    for p in pieces:
        a, b = (p.a, p.b) if place is None else (place(p.tri)(p.a), place(p.tri)(p.b))
        pic.polyline([a, b], stroke=stroke, tri=p.tri)


def render_surface(surf, title: str = "surface") -> Picture:
    pic = Picture(title)
    _atlas(surf, pic)
    return pic


def render_strip(surf, strip) -> Picture:
    """Triangles placed along a dual walk."""
    pic = Picture("developed strip")
    for i, (t, m) in enumerate(strip.placed):
        pts = [m(p) for p in surf.triangles[t]]
        pic.polygon(pts, fill="#e9f5db" if i else "#f4d35e", label=str(t), tri=t, step=i)
    return pic


def node_placements(cover, base: int, nodes: Sequence[int]) -> Dict[int, AffineMap]:
    """Developing maps of cover nodes, found by walking from the base node."""
    surf = cover.surf
    want = set(nodes)
    place = {base: AffineMap.identity()}
    queue = deque([base])
    while queue:
        n = queue.popleft()
        node = cover.nodes[n]
        for e in range(3):
            m = node.nbr[e]
            if m is None or m in place or m not in want:
                continue
            place[m] = place[n].compose(surf.glue_map(node.tri, e).inverse())
            queue.append(m)
    return place


def render_coverage(cov, trail=None) -> Picture:
    """Covered triangles coloured by their status."""
    pic = Picture("ray coverage")
    cover, surf = cov.cover, cov.surf
    place = node_placements(cover, cov.base_node, list(cov.status))
    for n, st in sorted(cov.status.items()):
        if n not in place:
            continue
        t = cover.nodes[n].tri
        pts = [place[n](p) for p in surf.triangles[t]]
        pic.polygon(pts, fill=STATUS_COLORS.get(st.kind, "#ddd"), stroke="#666",
                    node=n, tri=t, status=st.kind)
    pic.point(cov.base_point, fill="#000", role="base")
    if trail is not None:
        _pieces(pic, trail.pieces)
    return pic


def render_trail(surf, trail, title: str = "trail") -> Picture:
    pic = Picture(title)
    _atlas(surf, pic)
    _pieces(pic, trail.pieces)
    return pic


def render_cylinder(surf, cyl) -> Picture:
    """Core, boundary trails and one closed leaf per component, on the atlas."""
    from .closed_trails import _leaf_trail

    pic = Picture("cylinder")
    _atlas(surf, pic)
    for comp in cyl.components:
        _pieces(pic, _leaf_trail(surf, comp).pieces,
                stroke=COMPONENT_COLORS.get(comp.kind, "#888"))
    for b in cyl.boundary:
        _pieces(pic, b.pieces, stroke="#222")
    _pieces(pic, cyl.core.pieces, stroke="#d00")
    return pic
