"""Minimal deterministic SVG emission for report figures.

Hand-rolled on purpose: text output with fixed formatting diffs cleanly in
CI and carries no plotting dependency.
"""

from __future__ import annotations

from pathlib import Path

WIDTH, HEIGHT = 640, 400
MARGIN = 50
PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]


def curve_panel(
    curves: list[tuple[str, list[float], list[float]]],
    title: str,
    path: str | Path,
) -> None:
    """Overlaid (label, x, y) polylines with a shared axis box and legend."""
    xs = [v for _, x, _ in curves for v in x]
    ys = [v for _, _, y in curves for v in y]
    x_lo, x_hi = min(xs), max(xs)
    y_hi = max(ys) or 1.0
    span_x = (x_hi - x_lo) or 1.0

    def px(x: float) -> float:
        return MARGIN + (x - x_lo) / span_x * (WIDTH - 2 * MARGIN)

    def py(y: float) -> float:
        return HEIGHT - MARGIN - y / y_hi * (HEIGHT - 2 * MARGIN)

    parts = _header(title)
    parts.append(
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
        f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="black"/>'
    )
    for i, (label, x, y) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = MARGIN + 16 * (i + 1)
        parts.append(f'<line x1="{WIDTH - 180}" y1="{ly}" x2="{WIDTH - 160}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{WIDTH - 154}" y="{ly + 4}" font-family="sans-serif" '
                     f'font-size="11">{label}</text>')
    parts.append(f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 20}" font-family="sans-serif" '
                 f'font-size="11">{_fmt(x_lo)}</text>')
    parts.append(f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 20}" text-anchor="end" '
                 f'font-family="sans-serif" font-size="11">{_fmt(x_hi)}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def heatmap(
    labels: list[str],
    matrix: list[list[float]],
    title: str,
    path: str | Path,
) -> None:
    """Square heatmap of values in [0, 1] with per-cell annotations."""
    n = len(labels)
    size = min((WIDTH - 2 * MARGIN - 60), (HEIGHT - 2 * MARGIN)) / max(n, 1)
    parts = _header(title)
    x0, y0 = MARGIN + 60, MARGIN
    for i in range(n):
        for j in range(n):
            v = matrix[i][j]
            shade = int(round(255 * (1.0 - v)))
            color = f"rgb({shade},{shade},255)"
            x, y = x0 + j * size, y0 + i * size
            parts.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(size)}" '
                         f'height="{_fmt(size)}" fill="{color}" stroke="white"/>')
            parts.append(f'<text x="{_fmt(x + size / 2)}" y="{_fmt(y + size / 2 + 4)}" '
                         f'text-anchor="middle" font-family="sans-serif" '
                         f'font-size="10">{v:.2f}</text>')
    for i, label in enumerate(labels):
        parts.append(f'<text x="{x0 - 6:.0f}" y="{_fmt(y0 + i * size + size / 2 + 4)}" '
                     f'text-anchor="end" font-family="sans-serif" font-size="10">{label}</text>')
        parts.append(f'<text x="{_fmt(x0 + i * size + size / 2)}" y="{_fmt(y0 + n * size + 14)}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="10">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
