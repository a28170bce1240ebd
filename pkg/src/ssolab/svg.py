"""Minimal deterministic SVG line and scatter plots (axes, polylines, labels)."""
import math
from xml.sax.saxutils import escape

W, H = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag * 10)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def _label(v):
    return format(v, ".4g")


class Plot:
    def __init__(self, title="", xlabel="", ylabel="", logx=False, note=""):
        self.title, self.xlabel, self.ylabel, self.logx, self.note = title, xlabel, ylabel, logx, note
        self.lines = []
        self.points = []

    def line(self, x, y, label=""):
        self.lines.append((list(map(float, x)), list(map(float, y)), label))
        return self

    def scatter(self, x, y, label=""):
        self.points.append((list(map(float, x)), list(map(float, y)), label))
        return self

    def _bounds(self):
        xs, ys = [], []
        for x, y, _ in self.lines + self.points:
            for a, b in zip(x, y):
                if math.isfinite(a) and math.isfinite(b) and (a > 0 or not self.logx):
                    xs.append(math.log10(a) if self.logx else a)
                    ys.append(b)
        if not xs:
            return 0.0, 1.0, 0.0, 1.0
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        pad = 0.05 * (y1 - y0) if y1 > y0 else 0.5
        return x0, x1, y0 - pad, y1 + pad

    def render(self):
        x0, x1, y0, y1 = self._bounds()
        pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

        def px(x):
            x = math.log10(x) if self.logx else x
            return LEFT + (x - x0) / (x1 - x0) * pw

        def py(y):
            return TOP + (1 - (y - y0) / (y1 - y0)) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" '
               f'font-size="11">',
               f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
               f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
               f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
        if self.note:
            out.append(f'<!-- {escape(self.note)} -->')
        if self.logx:
            xt = [10.0 ** k for k in range(math.floor(x0), math.ceil(x1) + 1) if x0 - 1e-9 <= k <= x1 + 1e-9]
        else:
            xt = _ticks(x0, x1)
        for v in xt:
            X = px(v)
            out.append(f'<line x1="{X:.2f}" y1="{TOP + ph}" x2="{X:.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{X:.2f}" y="{TOP + ph + 18}" text-anchor="middle">{_label(v)}</text>')
        for v in _ticks(y0, y1):
            Y = py(v)
            out.append(f'<line x1="{LEFT - 5}" y1="{Y:.2f}" x2="{LEFT}" y2="{Y:.2f}" stroke="black"/>')
            out.append(f'<line x1="{LEFT}" y1="{Y:.2f}" x2="{LEFT + pw}" y2="{Y:.2f}" stroke="#e0e0e0"/>')
            out.append(f'<text x="{LEFT - 8}" y="{Y + 4:.2f}" text-anchor="end">{_label(v)}</text>')
        out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">{escape(self.ylabel)}</text>')
        k = 0
        for x, y, label in self.lines:
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y)
                           if math.isfinite(b) and (a > 0 or not self.logx))
            c = COLORS[k % len(COLORS)]
            out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.2" points="{pts}"/>')
            out.append(self._legend(k, c, label))
            k += 1
        for x, y, label in self.points:
            c = COLORS[k % len(COLORS)]
            for a, b in zip(x, y):
                if math.isfinite(a) and math.isfinite(b):
                    out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="{c}"/>')
            out.append(self._legend(k, c, label))
            k += 1
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def _legend(self, k, color, label):
        y = TOP + 14 + 16 * k
        x = W - RIGHT + 12
        return (f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" stroke="{color}" stroke-width="2"/>'
                f'<text x="{x + 24}" y="{y + 4}">{escape(label)}</text>')

    def save(self, path):
        from pathlib import Path
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        return path
