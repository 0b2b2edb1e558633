"""CSV/JSON emission, schema validation and a minimal SVG line plotter.

CSV layout: one schema line ``# rangekit <command> schema=<v> key=value ...``,
then the header row, then data rows. Comma separated, ``.`` decimal point,
LF line endings. Floats use Python's shortest round-trip ``repr`` so output
is byte-stable.
"""

from __future__ import annotations

import io
import json
import math
import xml.etree.ElementTree as ET

from .errors import DomainError
from .sweeps import COLUMNS, NON_PROBABILITY, SCHEMA_VERSION, Table

CUTOFF_NOTE = "photon numbers 0..cutoff inclusive"

__all__ = ["format_value", "table_to_csv", "table_to_json", "check_csv", "line_plot_svg", "table_svg"]


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _meta_token(value) -> str:
    return str(value).replace(" ", "_")


def table_to_csv(table: Table) -> str:
    out = io.StringIO(newline="")
    meta = " ".join(f"{k}={_meta_token(v)}" for k, v in table.meta.items())
    out.write(f"# rangekit {table.command} schema={SCHEMA_VERSION} {meta} basis={_meta_token(CUTOFF_NOTE)}\n")
    out.write(",".join(table.columns) + "\n")
    for row in table.rows:
        out.write(",".join(format_value(row[c]) for c in table.columns) + "\n")
    return out.getvalue()


def table_to_json(table: Table) -> str:
    doc = {
        "command": table.command,
        "schema": SCHEMA_VERSION,
        "basis": CUTOFF_NOTE,
        "meta": table.meta,
        "columns": table.columns,
        "rows": table.rows,
    }
    if table.extra:
        doc["extra"] = table.extra
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def check_csv(text: str) -> list[str]:
    """Validate an emitted CSV; returns a list of problems (empty when valid)."""
    problems = []
    if "\r" in text:
        problems.append("CR characters found; expected LF line endings")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2:
        return problems + ["missing schema line or header"]
    tokens = lines[0].split()
    if len(tokens) < 4 or tokens[0] != "#" or tokens[1] != "rangekit":
        return problems + ["first line is not a rangekit schema line"]
    command = tokens[2]
    if command not in COLUMNS:
        return problems + [f"unknown command {command!r}"]
    if tokens[3] != f"schema={SCHEMA_VERSION}":
        problems.append(f"schema version {tokens[3]!r} does not match schema={SCHEMA_VERSION}")
    header = lines[1].split(",")
    if header != COLUMNS[command]:
        problems.append(f"header {header} does not match {COLUMNS[command]}")
        return problems
    if len(lines) < 3:
        problems.append("no data rows")
    for lineno, line in enumerate(lines[2:], 3):
        cells = line.split(",")
        if len(cells) != len(header):
            problems.append(f"line {lineno}: expected {len(header)} fields, got {len(cells)}")
            continue
        for name, cell in zip(header, cells):
            try:
                v = float(cell)
            except ValueError:
                problems.append(f"line {lineno}: {name}={cell!r} is not a number")
                continue
            if name not in NON_PROBABILITY and not (-1e-12 <= v <= 1 + 1e-12):
                problems.append(f"line {lineno}: probability column {name}={v} outside [0, 1]")
    return problems


_W, _H = 800, 600
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 720, 50, 530
_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]


def _span(values, log):
    vals = [math.log10(v) for v in values if v > 0] if log else list(values)
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def line_plot_svg(x, series, logx=False, title="", xlabel="", ylabel="", y2label=""):
    """Render ``series`` (list of ``(label, y, axis)`` with axis ``"left"``/``"right"``).

    Each polyline carries ``data-x``/``data-y`` attributes with the raw values,
    and its ``points`` map to them through the axis ranges stored on the root
    element's ``data-xrange``/``data-yrange``/``data-y2range`` attributes.
    """
    x = [float(v) for v in x]
    if logx and any(v <= 0 for v in x):
        raise DomainError("log-x plot needs strictly positive x values")
    xlo, xhi = _span(x, logx)
    left = [v for _, y, ax in series if ax == "left" for v in y]
    right = [v for _, y, ax in series if ax == "right" for v in y]
    ylo, yhi = _span(left or [0, 1], False)
    y2lo, y2hi = _span(right or [0, 1], False)

    def px(v):
        t = (math.log10(v) if logx else v) - xlo
        return _LEFT + (_RIGHT - _LEFT) * t / (xhi - xlo)

    def py(v, ax):
        lo, hi = (ylo, yhi) if ax == "left" else (y2lo, y2hi)
        return _BOTTOM - (_BOTTOM - _TOP) * (v - lo) / (hi - lo)

    root = ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "viewBox": f"0 0 {_W} {_H}",
            "width": str(_W),
            "height": str(_H),
            "data-logx": str(int(logx)),
            "data-xrange": f"{xlo!r},{xhi!r}",
            "data-yrange": f"{ylo!r},{yhi!r}",
            "data-y2range": f"{y2lo!r},{y2hi!r}",
        },
    )
    ET.SubElement(root, "rect", {"x": "0", "y": "0", "width": str(_W), "height": str(_H), "fill": "white"})
    ET.SubElement(root, "rect", {
        "x": str(_LEFT), "y": str(_TOP), "width": str(_RIGHT - _LEFT), "height": str(_BOTTOM - _TOP),
        "fill": "none", "stroke": "black",
    })
    for text, attrs in (
        (title, {"x": str(_W // 2), "y": "30", "text-anchor": "middle", "font-size": "18"}),
        (xlabel, {"x": str(_W // 2), "y": str(_H - 20), "text-anchor": "middle", "font-size": "14"}),
        (ylabel, {"x": "20", "y": str(_H // 2), "text-anchor": "middle", "font-size": "14",
                  "transform": f"rotate(-90 20 {_H // 2})"}),
        (y2label, {"x": str(_W - 20), "y": str(_H // 2), "text-anchor": "middle", "font-size": "14",
                   "transform": f"rotate(90 {_W - 20} {_H // 2})"}),
    ):
        if text:
            ET.SubElement(root, "text", attrs).text = text
    for lo, hi, ax in ((ylo, yhi, "left"), (y2lo, y2hi, "right")):
        if ax == "right" and not right:
            continue
        xpos = _LEFT - 8 if ax == "left" else _RIGHT + 8
        for j in range(5):
            v = lo + (hi - lo) * j / 4
            ET.SubElement(root, "text", {
                "x": str(xpos), "y": f"{py(v, ax):.2f}", "font-size": "11",
                "text-anchor": "end" if ax == "left" else "start",
            }).text = f"{v:.3g}"
    for j in range(5):
        t = xlo + (xhi - xlo) * j / 4
        v = 10**t if logx else t
        ET.SubElement(root, "text", {
            "x": f"{px(v):.2f}", "y": str(_BOTTOM + 18), "font-size": "11", "text-anchor": "middle",
        }).text = f"{v:.3g}"
    for k, (label, y, ax) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{px(a):.3f},{py(float(b), ax):.3f}" for a, b in zip(x, y))
        ET.SubElement(root, "polyline", {
            "points": pts, "fill": "none", "stroke": color, "stroke-width": "2",
            "data-label": label, "data-axis": ax,
            "data-x": ",".join(repr(a) for a in x), "data-y": ",".join(repr(float(b)) for b in y),
        })
        ET.SubElement(root, "text", {
            "x": str(_LEFT + 10), "y": str(_TOP + 18 + 16 * k), "font-size": "12", "fill": color,
        }).text = label
    return ET.tostring(root, encoding="unicode") + "\n"


def table_svg(table: Table) -> str:
    cols = table.columns
    if table.command == "ranging-demo":
        x = [r["slot"] for r in table.rows]
        series = [
            ("detection_rate", [r["detection_rate"] for r in table.rows], "left"),
            ("mean_intensity", [r["mean_intensity"] for r in table.rows], "right"),
        ]
        return line_plot_svg(x, series, False, "Ranging simulation", "slot", "detection rate", "mean intensity")
    xcol = cols[0]
    x = [r[xcol] for r in table.rows]
    skip = {xcol} | NON_PROBABILITY | {c for c in cols if c.endswith("stderr") or c.endswith("gap")}
    series = [(c, [r[c] for r in table.rows], "left") for c in cols if c not in skip]
    logx = xcol == "ns" and all(v > 0 for v in x) and len(x) > 1
    return line_plot_svg(x, series, logx, table.command, xcol, "probability")
