"""Dependency-free SVG charts for simulation output.

Line charts show per-stage transplants (solid) and dropouts (dashed) for
each country; heatmaps summarise sweep grids.
"""

from __future__ import annotations

from pathlib import Path

from .simulator import SimulationResult, SweepCell

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 60, 20, 30, 50


def _svg_header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
    ]


def _axes(x_max: float, y_max: float, x_label: str, y_label: str) -> list[str]:
    px0, px1 = _ML, _W - _MR
    py0, py1 = _H - _MB, _MT
    parts = [
        f'<line x1="{px0}" y1="{py0}" x2="{px1}" y2="{py0}" stroke="black"/>',
        f'<line x1="{px0}" y1="{py0}" x2="{px0}" y2="{py1}" stroke="black"/>',
        f'<text x="{(px0 + px1) / 2}" y="{_H - 12}" text-anchor="middle">{x_label}</text>',
        f'<text x="16" y="{(py0 + py1) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(py0 + py1) / 2})">{y_label}</text>',
    ]
    ticks = 5
    for i in range(ticks + 1):
        xv = x_max * i / ticks
        yv = y_max * i / ticks
        px = px0 + (px1 - px0) * i / ticks
        py = py0 - (py0 - py1) * i / ticks
        parts.append(f'<text x="{px:.1f}" y="{py0 + 16}" text-anchor="middle">{xv:g}</text>')
        parts.append(f'<text x="{px0 - 6}" y="{py + 4:.1f}" text-anchor="end">{yv:g}</text>')
        parts.append(f'<line x1="{px0}" y1="{py:.1f}" x2="{px1}" y2="{py:.1f}" '
                     f'stroke="#ddd" stroke-width="0.5"/>')
    return parts


def _polyline(xs: list[float], ys: list[float], x_max: float, y_max: float,
              color: str, dashed: bool) -> str:
    px0, px1 = _ML, _W - _MR
    py0, py1 = _H - _MB, _MT
    pts = []
    for x, y in zip(xs, ys):
        px = px0 + (px1 - px0) * (x / x_max if x_max else 0.0)
        py = py0 - (py0 - py1) * (y / y_max if y_max else 0.0)
        pts.append(f"{px:.1f},{py:.1f}")
    dash = ' stroke-dasharray="6 4"' if dashed else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} '
            f'points="{" ".join(pts)}"/>')


def stage_chart(result: SimulationResult, regime: str, path: str | Path) -> None:
    """Mean transplants and dropouts per stage, one pair of lines per country."""
    cfg = result.config
    rows = [r for r in result.stage_records if r.regime == regime]
    stages = list(range(cfg.stages))
    series: list[tuple[str, list[float], str, bool]] = []
    for idx, k in enumerate(range(1, cfg.num_countries + 1)):
        color = _COLORS[idx % len(_COLORS)]
        tx = [sum(r.transplants for r in rows if r.stage == t and r.country == k)
              / cfg.instances for t in stages]
        dr = [sum(r.dropouts for r in rows if r.stage == t and r.country == k)
              / cfg.instances for t in stages]
        series.append((f"country {k} transplants", tx, color, False))
        series.append((f"country {k} dropouts", dr, color, True))
    y_max = max((max(vals) for _, vals, _, _ in series if vals), default=1.0) or 1.0
    x_max = max(stages[-1], 1)
    parts = _svg_header(f"{regime}: mean transplants and dropouts per run")
    parts += _axes(x_max, y_max, "matching run", "pairs")
    for i, (label, vals, color, dashed) in enumerate(series):
        parts.append(_polyline([float(t) for t in stages], vals, x_max, y_max,
                               color, dashed))
        dash = ' stroke-dasharray="6 4"' if dashed else ""
        ly = _MT + 14 * i
        parts.append(f'<line x1="{_W - 220}" y1="{ly}" x2="{_W - 190}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="1.8"{dash}/>')
        parts.append(f'<text x="{_W - 184}" y="{ly + 4}">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


def _heat_color(v: float, lo: float, hi: float) -> str:
    t = 0.0 if hi <= lo else (v - lo) / (hi - lo)
    r = int(255 * t)
    b = int(255 * (1 - t))
    g = int(96 + 64 * (1 - abs(2 * t - 1)))
    return f"rgb({r},{g},{b})"


def sweep_heatmap(cells: list[SweepCell], regime: str, path: str | Path) -> None:
    """Grid of mean total transplants, caps on rows and ratios on columns."""
    caps_axis = sorted({c.caps for c in cells}, key=str)
    ratio_axis = sorted({c.ratio for c in cells}, key=str)
    values: dict[tuple, float] = {}
    for c in cells:
        totals = c.result.totals(regime)
        values[(c.caps, c.ratio)] = sum(totals.values()) / c.result.config.instances
    lo = min(values.values(), default=0.0)
    hi = max(values.values(), default=1.0)
    cw = (_W - _ML - _MR) / max(1, len(ratio_axis))
    ch = (_H - _MT - _MB) / max(1, len(caps_axis))
    parts = _svg_header(f"{regime}: mean transplants per instance")
    for i, caps in enumerate(caps_axis):
        for j, ratio in enumerate(ratio_axis):
            v = values.get((caps, ratio))
            if v is None:
                continue
            x = _ML + j * cw
            y = _MT + i * ch
            parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{cw:.1f}" '
                         f'height="{ch:.1f}" fill="{_heat_color(v, lo, hi)}" '
                         f'stroke="white"/>')
            parts.append(f'<text x="{x + cw / 2:.1f}" y="{y + ch / 2 + 4:.1f}" '
                         f'text-anchor="middle" fill="white">{v:.1f}</text>')
    for i, caps in enumerate(caps_axis):
        label = ":".join("inf" if c is None else str(c) for c in caps)
        parts.append(f'<text x="{_ML - 6}" y="{_MT + i * ch + ch / 2 + 4:.1f}" '
                     f'text-anchor="end">{label}</text>')
    for j, ratio in enumerate(ratio_axis):
        label = "-" if ratio is None else ":".join(str(r) for r in ratio)
        parts.append(f'<text x="{_ML + j * cw + cw / 2:.1f}" y="{_H - _MB + 16}" '
                     f'text-anchor="middle">{label}</text>')
    parts.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" '
                 f'text-anchor="middle">pool size ratio</text>')
    parts.append(f'<text x="16" y="{_H / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {_H / 2})">cycle caps</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))
