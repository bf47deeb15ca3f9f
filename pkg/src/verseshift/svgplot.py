"""Hand-emitted SVG figures: box plots and multi-line trajectory plots.

No plotting dependency; output is deterministic and diffable. Every figure
carries exactly one <title> element directly under the svg root.
"""

from __future__ import annotations

from .analysis import DistributionSummary

WIDTH = 960
HEIGHT = 560
MARGIN_LEFT = 80
MARGIN_RIGHT = 40
MARGIN_TOP = 60
MARGIN_BOTTOM = 80

LINE_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"]


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{_escape(title)}</title>",
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.1f}" y="32" text-anchor="middle" font-size="20" '
        f'font-family="sans-serif">{_escape(title)}</text>',
    ]


def _axes(parts: list[str], x_label: str, y_label: str) -> None:
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    parts.append(
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="#000" stroke-width="1.5"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="#000" stroke-width="1.5"/>'
    )
    parts.append(
        f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 18}" text-anchor="middle" '
        f'font-size="14" font-family="sans-serif">{_escape(x_label)}</text>'
    )
    mid_y = (top + bottom) / 2
    parts.append(
        f'<text x="24" y="{mid_y:.1f}" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif" transform="rotate(-90 24 {mid_y:.1f})">{_escape(y_label)}</text>'
    )


def _y_scale(lo: float, hi: float):
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo -= pad
    hi += pad
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM

    def to_px(v: float) -> float:
        return bottom - (v - lo) / (hi - lo) * (bottom - top)

    return to_px, lo, hi


def _y_ticks(parts: list[str], to_px, lo: float, hi: float, n: int = 6) -> None:
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    for i in range(n + 1):
        v = lo + (hi - lo) * i / n
        y = to_px(v)
        parts.append(
            f'<line x1="{left}" y1="{y:.2f}" x2="{right}" y2="{y:.2f}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="12" '
            f'font-family="sans-serif">{v:.2f}</text>'
        )


def render_box_plot(
    title: str,
    x_labels: list[str],
    summaries: list[DistributionSummary],
    x_axis_label: str,
    y_axis_label: str,
) -> str:
    """Box plot with whiskers at the summary's 5th/95th percentiles and a mean dot."""
    if len(x_labels) != len(summaries) or not summaries:
        raise ValueError("need one x label per summary")
    parts = _header(title)
    lo = min(s.whisker_lo for s in summaries)
    hi = max(s.whisker_hi for s in summaries)
    to_px, lo, hi = _y_scale(lo, hi)
    _y_ticks(parts, to_px, lo, hi)
    _axes(parts, x_axis_label, y_axis_label)

    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    bottom = HEIGHT - MARGIN_BOTTOM
    n = len(summaries)
    span = (right - left) / n
    box_w = min(48.0, span * 0.5)
    for i, (label, s) in enumerate(zip(x_labels, summaries)):
        cx = left + span * (i + 0.5)
        x0 = cx - box_w / 2
        y_lo, y_hi = to_px(s.whisker_lo), to_px(s.whisker_hi)
        y_q1, y_q3 = to_px(s.q1), to_px(s.q3)
        y_med, y_mean = to_px(s.median), to_px(s.mean)
        parts.append(
            f'<line x1="{cx:.2f}" y1="{y_hi:.2f}" x2="{cx:.2f}" y2="{y_lo:.2f}" stroke="#555" stroke-width="1"/>'
        )
        for y in (y_lo, y_hi):
            parts.append(
                f'<line x1="{cx - box_w / 3:.2f}" y1="{y:.2f}" x2="{cx + box_w / 3:.2f}" y2="{y:.2f}" '
                'stroke="#555" stroke-width="1"/>'
            )
        parts.append(
            f'<rect x="{x0:.2f}" y="{y_q3:.2f}" width="{box_w:.2f}" height="{abs(y_q1 - y_q3):.2f}" '
            'fill="#9ecae1" stroke="#3182bd" stroke-width="1.2"/>'
        )
        parts.append(
            f'<line x1="{x0:.2f}" y1="{y_med:.2f}" x2="{x0 + box_w:.2f}" y2="{y_med:.2f}" '
            'stroke="#08306b" stroke-width="2"/>'
        )
        parts.append(f'<circle cx="{cx:.2f}" cy="{y_mean:.2f}" r="2.5" fill="#d62728"/>')
        parts.append(
            f'<text x="{cx:.2f}" y="{bottom + 20}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{_escape(label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def render_line_plot(
    title: str,
    x_values: list[float],
    series: list[tuple[str, list[float]]],
    x_axis_label: str,
    y_axis_label: str,
    show_legend: bool = False,
) -> str:
    """Multi-line plot over shared x positions, one polyline per series."""
    if not series or not x_values:
        raise ValueError("need at least one series and one x value")
    parts = _header(title)
    all_y = [v for _, vals in series for v in vals]
    to_px, lo, hi = _y_scale(min(all_y), max(all_y))
    _y_ticks(parts, to_px, lo, hi)
    _axes(parts, x_axis_label, y_axis_label)

    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    bottom = HEIGHT - MARGIN_BOTTOM
    x_lo, x_hi = min(x_values), max(x_values)
    x_span = (x_hi - x_lo) or 1.0

    def x_px(v: float) -> float:
        return left + (v - x_lo) / x_span * (right - left)

    for x in x_values:
        parts.append(
            f'<text x="{x_px(x):.2f}" y="{bottom + 20}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{x:g}</text>'
        )
    for idx, (label, vals) in enumerate(series):
        color = LINE_COLORS[idx % len(LINE_COLORS)]
        pts = " ".join(f"{x_px(x):.2f},{to_px(y):.2f}" for x, y in zip(x_values, vals))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" opacity="0.85" points="{pts}"/>'
        )
        if show_legend and idx < 12:
            ly = MARGIN_TOP + 16 * idx
            parts.append(
                f'<line x1="{right - 150}" y1="{ly}" x2="{right - 126}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{right - 120}" y="{ly + 4}" font-size="11" font-family="sans-serif">'
                f"{_escape(label)}</text>"
            )
    parts.append("</svg>")
    return "\n".join(parts)
