"""CSV, JSON and SVG writers plus the run manifest.

Rationals are always written as ``p/q`` strings.  Floats only appear in
rate, residual, radius and eigenvalue columns, formatted with ``%.12g``.
"""

from __future__ import annotations

import colorsys
import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field

from . import __version__
from .geometry import format_rational
from .pwa import PieceId, PiecewiseMap, locate, map_to_dict


def fmt_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and (math.isnan(x) or math.isinf(x)):
        return str(x)
    return "%.12g" % x


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def map_hash(m: PiecewiseMap) -> str:
    return hashlib.sha256(json.dumps(map_to_dict(m), sort_keys=True).encode()).hexdigest()


# -- CSV tables ------------------------------------------------------------

def cells_rows(counts):
    rows, prev = [], None
    for n, c in counts:
        rows.append([n, c, "" if prev is None else fmt_float(math.log(c / prev))])
        prev = c
    return rows


def partition_rows(m: PiecewiseMap, part):
    out = []
    for cell in part.cells:
        verts = " ".join(f"{format_rational(p.x)},{format_rational(p.y)}" for p in cell.polygon.vertices)
        out.append([part.depth, cell.labels(m), format_rational(cell.polygon.area()), verts])
    return out


def entropy_rows(report):
    rows = []
    for method, s in report.series.items():
        rates = dict(s.rates)
        for n, c in s.counts:
            rows.append([method, n, c, fmt_float(rates.get(n)), fmt_float(s.fit.residual)])
    return rows


def entropy_json(report) -> dict:
    return {
        "metadata": report.metadata,
        "methods": {
            k: {
                "counts": [[n, c] for n, c in s.counts],
                "successive_rates": [[n, r] for n, r in s.rates],
                "slope": s.fit.slope,
                "intercept": s.fit.intercept,
                "residual": s.fit.residual,
                **s.extra,
            }
            for k, s in report.series.items()
        },
    }


def orbit_rows(m: PiecewiseMap, res):
    """One row per orbit point; ``piece`` is the cell holding the point (blank if singular)."""
    rows = []
    for i, p in enumerate(res.points):
        where = locate(m, p)
        piece = where.label if isinstance(where, PieceId) else ""
        rows.append([i, format_rational(p.x), format_rational(p.y), piece])
    return rows


def contrast_json(report) -> dict:
    def rat(v):
        return None if v is None else format_rational(v)

    return {
        "depth": report.depth,
        "passed": report.passed,
        "experiments": [
            {
                "name": e.name,
                "conformal": e.conformal,
                "scale_sq": [rat(s) for s in e.scale_sq],
                "lipschitz_l1": rat(e.lipschitz_l1),
                "lipschitz_l2": e.extra["lipschitz_l2"],
                "lipschitz_linf": rat(e.extra["lipschitz_linf"]),
                "expected_rate": e.expected_rate,
                "tolerance": e.tolerance,
                "rates": e.rates,
                "slopes": e.slopes,
                "counts": {k: [[n, c] for n, c in v] for k, v in e.counts.items()},
                "verdicts": e.verdicts,
            }
            for e in report.experiments
        ],
    }


def contrast_rows(report):
    rows = []
    for e in report.experiments:
        for method, counts in e.counts.items():
            rates = dict((n1, math.log(c1 / c0)) for (_, c0), (n1, c1) in zip(counts, counts[1:]))
            for n, c in counts:
                rows.append([e.name, method, n, c, fmt_float(rates.get(n))])
    return rows


# -- SVG -------------------------------------------------------------------

RHOMBUS_VIEW = (-1.1, -1.1, 1.1, 1.1)


def view_for(m: PiecewiseMap, margin: float = 0.05):
    x0, y0, x1, y1 = (float(v) for v in m.domain.bbox())
    if (x0, y0, x1, y1) == (-1.0, -1.0, 1.0, 1.0):
        return RHOMBUS_VIEW
    pad = margin * max(x1 - x0, y1 - y0)
    return (x0 - pad, y0 - pad, x1 + pad, y1 + pad)


def _hue(i, k):
    r, g, b = colorsys.hls_to_rgb(i / max(k, 1), 0.72, 0.55)
    return "#%02x%02x%02x" % (round(r * 255), round(g * 255), round(b * 255))


class SvgCanvas:
    """Minimal SVG builder in data coordinates (y up)."""

    def __init__(self, view, size=600, title=None):
        self.view = view
        self.size = size
        self.items = []
        if title:
            self.items.append(f"<title>{title}</title>")

    def _xy(self, p):
        x0, y0, x1, y1 = self.view
        return float(p[0]), float(y0 + y1 - float(p[1]))

    def polygon(self, pts, fill="none", stroke="#222", width=0.004):
        coords = " ".join("%.6f,%.6f" % self._xy(p) for p in pts)
        self.items.append(f'<polygon points="{coords}" fill="{fill}" stroke="{stroke}" '
                          f'stroke-width="{width:.6f}"/>')

    def circle(self, p, r=0.012, fill="#000", stroke="none"):
        x, y = self._xy(p)
        self.items.append(f'<circle cx="{x:.6f}" cy="{y:.6f}" r="{r:.6f}" fill="{fill}" stroke="{stroke}"/>')

    def text(self, p, s, size=0.06):
        x, y = self._xy(p)
        self.items.append(f'<text x="{x:.6f}" y="{y:.6f}" font-size="{size:.6f}">{s}</text>')

    def render(self) -> str:
        x0, y0, x1, y1 = self.view
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
                f'viewBox="{x0:.6f} {y0:.6f} {x1 - x0:.6f} {y1 - y0:.6f}">')
        return "\n".join([head, *self.items, "</svg>"]) + "\n"


def draw_partition(canvas: SvgCanvas, m: PiecewiseMap, part):
    k = len(m.pieces)
    for cell in part.cells:
        canvas.polygon(cell.polygon.vertices, fill=_hue(cell.itinerary[0], k), stroke="#333", width=0.002)
    for piece in m.pieces:
        canvas.polygon(piece.cell.vertices, stroke="#000", width=0.006)


def partition_svg(m: PiecewiseMap, part, centers=(), title=None) -> str:
    canvas = SvgCanvas(view_for(m), title=title)
    draw_partition(canvas, m, part)
    for c in centers:
        canvas.circle(c, r=0.008, fill="#c00")
    return canvas.render()


def orbit_svg(m: PiecewiseMap, points, attractor=(), title=None) -> str:
    canvas = SvgCanvas(view_for(m), title=title)
    for piece in m.pieces:
        canvas.polygon(piece.cell.vertices, stroke="#000", width=0.006)
    n = max(len(points) - 1, 1)
    for i, p in enumerate(points):
        canvas.circle(p, fill=_hue(0.8 * i, n), stroke="#000")
    for a in attractor:
        canvas.circle(a, r=0.025, fill="none", stroke="#c00")
    return canvas.render()


def side_by_side_svg(left: str, right: str) -> str:
    """Place two standalone SVG documents next to each other."""
    def inner(doc):
        return doc.split("\n", 1)[1].rsplit("</svg>", 1)[0]

    def attr(doc, name):
        return doc.split(f'{name}="', 1)[1].split('"', 1)[0]

    parts = []
    for i, doc in enumerate((left, right)):
        parts.append(f'<svg x="{600 * i}" y="0" width="600" height="600" viewBox="{attr(doc, "viewBox")}">'
                     f"\n{inner(doc)}</svg>")
    return ('<svg xmlns="http://www.w3.org/2000/svg" width="1200" height="600">\n'
            + "\n".join(parts) + "\n</svg>\n")


# -- manifest --------------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    parameters: dict
    map_hash: str = ""
    outputs: list = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def to_dict(self) -> dict:
        return {
            "tool": "pwa-entropy",
            "version": __version__,
            "command": self.command,
            "parameters": self.parameters,
            "input_map_sha256": self.map_hash,
            "outputs": self.outputs,
            "wall_clock_seconds": round(time.perf_counter() - self.started, 6),
        }
