"""Minimal SVG emitters for suite reports (bar charts and line plots)."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

W, H, PAD = 480, 320, 48


def _frame(title: str, body: list[str], xlabel: str, ylabel: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">')
    axes = [
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD / 2}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD / 2 + 10}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{H / 2}" text-anchor="middle" transform="rotate(-90 14 {H / 2})">{escape(ylabel)}</text>',
    ]
    return "\n".join([head, *axes, *body, "</svg>"]) + "\n"


def bar_chart(labels: Sequence, values: Sequence[float], title: str, xlabel: str = "",
              ylabel: str = "", threshold: float | None = None) -> str:
    top = max([*values, threshold or 0.0, 1e-300])
    plot_w, plot_h = W - 1.5 * PAD, H - 1.5 * PAD - 10
    bw = plot_w / max(len(values), 1)
    body = []
    for i, (lab, v) in enumerate(zip(labels, values)):
        h = plot_h * v / top
        x = PAD + i * bw + 0.15 * bw
        body.append(f'<rect x="{x:.2f}" y="{H - PAD - h:.2f}" width="{0.7 * bw:.2f}" height="{h:.2f}" fill="#4c72b0"/>')
        body.append(f'<text x="{x + 0.35 * bw:.2f}" y="{H - PAD + 14}" text-anchor="middle">{escape(str(lab))}</text>')
        body.append(f'<text x="{x + 0.35 * bw:.2f}" y="{H - PAD - h - 4:.2f}" text-anchor="middle">{v:.3g}</text>')
    if threshold is not None:
        y = H - PAD - plot_h * threshold / top
        body.append(f'<line x1="{PAD}" y1="{y:.2f}" x2="{W - PAD / 2}" y2="{y:.2f}" stroke="#c44e52" stroke-dasharray="4 3"/>')
    return _frame(title, body, xlabel, ylabel)


def line_plot(x: Sequence[float], y: Sequence[float], title: str, xlabel: str = "", ylabel: str = "",
              logx: bool = False) -> str:
    import math
    xs = [math.log10(v) for v in x] if logx else list(x)
    if not xs:
        return _frame(title, [], xlabel, ylabel)
    x0, x1 = min(xs), max(xs)
    y1 = max(max(y), 1e-300)
    plot_w, plot_h = W - 1.5 * PAD, H - 1.5 * PAD - 10
    sx = lambda v: PAD + plot_w * ((v - x0) / (x1 - x0) if x1 > x0 else 0.5)
    sy = lambda v: H - PAD - plot_h * v / y1
    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs, y))
    body = [f'<polyline points="{pts}" fill="none" stroke="#4c72b0" stroke-width="1.5"/>',
            f'<text x="{PAD - 4}" y="{sy(y1) + 4:.2f}" text-anchor="end">{y1:.3g}</text>',
            f'<text x="{PAD}" y="{H - PAD + 14}" text-anchor="middle">{(10 ** x0 if logx else x0):.3g}</text>',
            f'<text x="{W - PAD / 2}" y="{H - PAD + 14}" text-anchor="middle">{(10 ** x1 if logx else x1):.3g}</text>']
    return _frame(title, body, xlabel, ylabel)
