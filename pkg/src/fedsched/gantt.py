"""Deterministic SVG Gantt chart of a round schedule."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .scheduler import PHASES, RoundSchedule

FILL = {"distribute": "#4c72b0", "train": "#55a868", "upload": "#c44e52"}
LANE_H = 28
BAR_H = 18
LEFT = 110
RIGHT = 30
TOP = 40
AXIS_H = 40
PLOT_W = 720
FONT = "DejaVu Sans, Arial, sans-serif"


def _tick_step(span: float) -> float:
    raw = span / 8.0
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


def _n(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def render_gantt(schedule: RoundSchedule) -> str:
    """One lane per client, three bars per lane, time axis in seconds and a makespan marker."""
    if not schedule.intervals:
        raise ValueError("schedule has no intervals")
    clients = sorted({iv.client_id for iv in schedule.intervals})
    t0 = schedule.round_start_s
    span = max(schedule.makespan_s, max(iv.end_s for iv in schedule.intervals) - t0, 1e-9)
    scale = PLOT_W / span
    height = TOP + LANE_H * len(clients) + AXIS_H
    width = LEFT + PLOT_W + RIGHT

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
        f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="{FONT}" font-size="11">',
        "<style>" + " ".join(f".{p} {{ fill: {c}; }}" for p, c in FILL.items()) + "</style>",
        f'<text x="{LEFT}" y="18" font-size="13">{escape(schedule.policy)} '
        f'({escape(schedule.channel)}), makespan {_n(schedule.makespan_s)} s</text>',
    ]
    order = {p: i for i, p in enumerate(PHASES)}
    for lane, cid in enumerate(clients):
        y = TOP + lane * LANE_H
        out.append(f'<text x="{LEFT - 6}" y="{_n(y + BAR_H - 4)}" text-anchor="end">{escape(cid)}</text>')
        ivs = sorted((iv for iv in schedule.intervals if iv.client_id == cid), key=lambda iv: order[iv.phase])
        for iv in ivs:
            x = LEFT + (iv.start_s - t0) * scale
            w = (iv.end_s - iv.start_s) * scale
            out.append(
                f'<rect class="{iv.phase}" x="{_n(x)}" y="{y}" width="{_n(w)}" height="{BAR_H}">'
                f"<title>{escape(cid)} {iv.phase} {_n(iv.start_s)}-{_n(iv.end_s)} s</title></rect>"
            )

    axis_y = TOP + LANE_H * len(clients) + 6
    out.append(f'<g class="axis"><line x1="{LEFT}" y1="{axis_y}" x2="{LEFT + PLOT_W}" y2="{axis_y}" stroke="#000"/>')
    step = _tick_step(span)
    k = 0
    while k * step <= span + 1e-9:
        x = LEFT + k * step * scale
        out.append(f'<line x1="{_n(x)}" y1="{axis_y}" x2="{_n(x)}" y2="{axis_y + 4}" stroke="#000"/>')
        out.append(f'<text x="{_n(x)}" y="{axis_y + 16}" text-anchor="middle">{_n(k * step)}</text>')
        k += 1
    out.append(f'<text x="{LEFT + PLOT_W / 2:.0f}" y="{axis_y + 32}" text-anchor="middle">time (s)</text></g>')

    mx = LEFT + schedule.makespan_s * scale
    out.append(f'<line class="makespan" x1="{_n(mx)}" y1="{TOP - 8}" x2="{_n(mx)}" y2="{axis_y}" '
               f'stroke="#000" stroke-dasharray="4,3"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
