"""SVG figures of an executed construction plan."""
from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .oracle import execute_plan, given_coordinates, sample_triangle
from .plan import LABEL_TO_CONST, VERTICES, ConstructionPlan
from .terms import Sort

_SIZE = 480
_STYLE = {
    "given": "fill:#c0392b",
    "point": "fill:#2c3e50",
    "line": "stroke:#2980b9;stroke-width:1.2;fill:none",
    "circle": "stroke:#27ae60;stroke-width:1.2;fill:none",
    "triangle": "stroke:#7f8c8d;stroke-width:1;stroke-dasharray:4 3;fill:none",
}


def _clip(line, lo, hi):
    """Segment of ax+by+c=0 inside the box [lo, hi]."""
    a, b, c = line
    pts = []
    for x in (lo[0], hi[0]):
        if abs(b) > 1e-12:
            y = -(a * x + c) / b
            if lo[1] - 1e-9 <= y <= hi[1] + 1e-9:
                pts.append((x, y))
    for y in (lo[1], hi[1]):
        if abs(a) > 1e-12:
            x = -(b * y + c) / a
            if lo[0] - 1e-9 <= x <= hi[0] + 1e-9:
                pts.append((x, y))
    if len(pts) < 2:
        return None
    pts.sort()
    return pts[0], pts[-1]


def render_svg(plan: ConstructionPlan, seed: int = 0) -> str:
    d = sample_triangle(seed)
    env = execute_plan(plan, given_coordinates(plan, d))
    sorts = plan.sorts()
    points = [np.asarray(env[n]) for n, s in sorts.items() if s == Sort.POINT]
    for n, s in sorts.items():
        if s == Sort.CIRCLE:
            cen, r = env[n]
            points += [np.asarray(cen) - r, np.asarray(cen) + r]
    pts = np.array(points)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.08 * max(hi - lo) + 1.0
    lo, hi = lo - pad, hi + pad
    scale = _SIZE / max(hi - lo)
    w, h = (hi - lo) * scale

    def tr(p):
        return (p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale   # flip y

    root = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=f"{w:.0f}", height=f"{h:.0f}",
                      viewBox=f"0 0 {w:.2f} {h:.2f}")
    ET.SubElement(root, "title").text = "construction from " + ", ".join(plan.given)
    tri = " ".join("{:.2f},{:.2f}".format(*tr(d.points[LABEL_TO_CONST[v]])) for v in VERTICES)
    ET.SubElement(root, "polygon", points=tri, style=_STYLE["triangle"], **{"class": "triangle"})

    def label(g, p, text):
        x, y = tr(p)
        t = ET.SubElement(g, "text", x=f"{x + 5:.2f}", y=f"{y - 5:.2f}", style="font:12px sans-serif")
        t.text = text

    for name, sort in sorts.items():
        g = ET.SubElement(root, "g", id=f"obj-{name}", **{"class": f"object {sort.value}"})
        val = env[name]
        if sort == Sort.POINT:
            x, y = tr(val)
            kind = "given" if name in plan.given else "point"
            ET.SubElement(g, "circle", cx=f"{x:.2f}", cy=f"{y:.2f}", r="3", style=_STYLE[kind])
            label(g, val, name)
        elif sort == Sort.LINE:
            seg = _clip(val, lo, hi)
            if seg is not None:
                (x1, y1), (x2, y2) = tr(seg[0]), tr(seg[1])
                ET.SubElement(g, "line", x1=f"{x1:.2f}", y1=f"{y1:.2f}", x2=f"{x2:.2f}", y2=f"{y2:.2f}",
                              style=_STYLE["line"])
                a, b = np.asarray(seg[0]), np.asarray(seg[1])
                label(g, a + 0.1 * (b - a), name)
        else:
            cen, r = val
            x, y = tr(cen)
            ET.SubElement(g, "circle", cx=f"{x:.2f}", cy=f"{y:.2f}", r=f"{r * scale:.2f}",
                          style=_STYLE["circle"])
            label(g, np.asarray(cen) + np.array([r, 0]) * 0.71, name)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"
