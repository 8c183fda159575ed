"""Static, self-contained SVG renderings of branch records."""

from xml.sax.saxutils import escape

import numpy as np

from .errors import EmptyBranch, ValidationError

WIDTH, HEIGHT, MARGIN = 640, 480, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
CLASS_COLORS = {"local_minimum": "#d8f0d8", "saddle": "#f6dada", "degenerate": "#e0e0e0"}
KINDS = ("trajectories", "s_profile")


def _scale(values, lo_px, hi_px):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    return lambda v: lo_px + (np.asarray(v) - lo) / (hi - lo) * (hi_px - lo_px), (lo, hi)


def _num(x):
    return f"{float(x):.2f}"


def _frame(title, xlabel, ylabel, xr, yr):
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f"<title>{escape(title)}</title>",
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" '
           f'font-size="14">{escape(title)}</text>']
    x0, x1, y0, y1 = MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" '
               'stroke="black" stroke-width="1"/>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 18 {HEIGHT / 2})">{escape(ylabel)}</text>')
    for txt, x, y, anchor in ((f"{xr[0]:.3g}", x0, y0 + 16, "start"),
                              (f"{xr[1]:.3g}", x1, y0 + 16, "end"),
                              (f"{yr[0]:.3g}", x0 - 4, y0, "end"),
                              (f"{yr[1]:.3g}", x0 - 4, y1 + 10, "end")):
        out.append(f'<text x="{x}" y="{y}" text-anchor="{anchor}" font-family="sans-serif" '
                   f'font-size="10">{txt}</text>')
    return out


def _polyline(xs, ys, color, cls):
    pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in zip(xs, ys))
    return (f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>')


def _trajectories(record):
    n, d = record.n, record.dimension
    if d == 3:
        hx, hy = 1, 2
        proj = "projection onto the plane of axes 1 and 2 (orthogonal to the s-axis)"
    else:
        hx, hy = 1, 0
        proj = "full plane: axis 1 horizontal, s-axis (axis 0) vertical"
    X = record.q[:, :, hx]
    Y = record.q[:, :, hy]
    fx, xr = _scale(X, MARGIN, WIDTH - MARGIN)
    fy, yr = _scale(Y, HEIGHT - MARGIN, MARGIN)
    title = f"{record.scenario} s*={record.candidate:.6g} {record.direction}: body paths, {proj}"
    out = _frame(title, f"axis {hx}", f"axis {hy}", xr, yr)
    for i in range(n):
        color = PALETTE[i % len(PALETTE)]
        xs, ys = fx(X[:, i]), fy(Y[:, i])
        if len(record) > 1:
            out.append(_polyline(xs, ys, color, "path"))
        out.append(f'<circle class="start" cx="{_num(xs[0])}" cy="{_num(ys[0])}" r="4" '
                   f'fill="{color}"><title>body {i} start</title></circle>')
        if len(record) > 1:
            out.append(f'<rect class="end" x="{_num(xs[-1] - 4)}" y="{_num(ys[-1] - 4)}" '
                       f'width="8" height="8" fill="none" stroke="{color}" stroke-width="2">'
                       f'<title>body {i} end (s={record.s[-1]:.6g})</title></rect>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _s_profile(record):
    t, s = record.arclength, record.s
    fx, xr = _scale(t, MARGIN, WIDTH - MARGIN)
    fy, yr = _scale(s, HEIGHT - MARGIN, MARGIN)
    title = (f"{record.scenario} s*={record.candidate:.6g} {record.direction}: "
             "s against arclength, background shaded by classification")
    out = _frame(title, "arclength", "s", xr, yr)
    xs, ys = fx(t), fy(s)
    # classification bands: one rectangle per run of equal class
    k = 0
    while k < len(record):
        j = k
        while j + 1 < len(record) and record.classes[j + 1] == record.classes[k]:
            j += 1
        left = xs[k] if k == 0 else 0.5 * (xs[k - 1] + xs[k])
        right = xs[j] if j == len(record) - 1 else 0.5 * (xs[j] + xs[j + 1])
        color = CLASS_COLORS.get(record.classes[k], "#ffffff")
        out.append(f'<rect class="band {escape(record.classes[k])}" x="{_num(left)}" '
                   f'y="{MARGIN}" width="{_num(max(right - left, 1.0))}" '
                   f'height="{HEIGHT - 2 * MARGIN}" fill="{color}" opacity="0.8">'
                   f"<title>{escape(record.classes[k])}</title></rect>")
        k = j + 1
    if len(record) > 1:
        out.append(_polyline(xs, ys, "black", "path"))
    else:
        out.append(f'<circle class="point" cx="{_num(xs[0])}" cy="{_num(ys[0])}" r="3" fill="black"/>')
    for i in record.event_indices("turning_point"):
        if 0 <= i < len(record):
            out.append(f'<circle class="turning-point" cx="{_num(xs[i])}" cy="{_num(ys[i])}" r="6" '
                       f'fill="none" stroke="#d62728" stroke-width="2">'
                       f"<title>turning point s={s[i]:.6g}</title></circle>")
    legend_y = MARGIN + 14
    for name, color in CLASS_COLORS.items():
        out.append(f'<rect x="{WIDTH - MARGIN - 110}" y="{legend_y - 9}" width="10" height="10" '
                   f'fill="{color}" stroke="black" stroke-width="0.5"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 95}" y="{legend_y}" font-family="sans-serif" '
                   f'font-size="10">{name}</text>')
        legend_y += 14
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(record, kind):
    """SVG text for a branch record.

    ``trajectories`` draws every body's path with a filled circle at the start
    and an open square at the end; ``s_profile`` draws ``s`` against arclength
    with turning points circled. The projection used is stated in the title.
    """
    if record is None or len(record) == 0:
        raise EmptyBranch("cannot plot an empty branch")
    if kind == "trajectories":
        return _trajectories(record)
    if kind == "s_profile":
        return _s_profile(record)
    raise ValidationError(f"unknown plot kind {kind!r}; choose from {KINDS}")
