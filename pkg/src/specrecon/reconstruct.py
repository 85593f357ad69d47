"""Natural cubic-spline reconstruction and a deterministic SVG emitter."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .core import EmptyCurve, SpecreconError, SpectralCurve, SpectrumType


class TooFewPoints(SpecreconError):
    pass


class NonMonotonicX(SpecreconError):
    pass


class OutOfDomain(SpecreconError):
    def __init__(self, offending):
        self.offending = list(map(float, offending))
        shown = ", ".join(f"{v:g}" for v in self.offending[:8])
        more = "" if len(self.offending) <= 8 else f" (+{len(self.offending) - 8} more)"
        super().__init__(f"x outside spline domain: {shown}{more}")


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Thomas algorithm, no pivoting. ``lower[0]`` and ``upper[-1]`` are unused.

    Only safe for diagonally dominant systems, which is what the spline
    normal equations produce for strictly increasing knots.
    """
    n = len(diag)
    c = np.zeros(n)
    d = np.zeros(n)
    c[0] = upper[0] / diag[0] if n > 1 else 0.0
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * c[i - 1]
        if i < n - 1:
            c[i] = upper[i] / denom
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom
    out = np.empty(n)
    out[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        out[i] = d[i] - c[i] * out[i + 1]
    return out


@dataclass(frozen=True, eq=False)
class CubicSpline:
    """Piecewise cubic ``a + b*t + c*t**2 + d*t**3`` with ``t = x - knots[i]``."""

    knots: np.ndarray
    values: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def interval(self, x: np.ndarray) -> np.ndarray:
        i = np.searchsorted(self.knots, x, side="right") - 1
        return np.clip(i, 0, len(self.knots) - 2)

    def __call__(self, x, nu: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        i = self.interval(x)
        t = x - self.knots[i]
        a, b, c, d = self.a[i], self.b[i], self.c[i], self.d[i]
        if nu == 0:
            return a + t * (b + t * (c + t * d))
        if nu == 1:
            return b + t * (2 * c + 3 * t * d)
        if nu == 2:
            return 2 * c + 6 * t * d
        raise ValueError("nu must be 0, 1 or 2")

    def piece(self, i: int, x, nu: int = 0) -> np.ndarray:
        """Evaluate interval ``i``'s polynomial at ``x`` (no interval lookup)."""
        t = np.asarray(x, dtype=float) - self.knots[i]
        a, b, c, d = self.a[i], self.b[i], self.c[i], self.d[i]
        return [a + t * (b + t * (c + t * d)), b + t * (2 * c + 3 * t * d), 2 * c + 6 * t * d][nu]


def spline_fit(sampled: SpectralCurve) -> CubicSpline:
    """Natural cubic spline through the sampled points (zero end curvature)."""
    x, y = sampled.x, sampled.y
    n = x.size
    if n < 2:
        raise TooFewPoints(f"need at least 2 points, got {n}")
    h = np.diff(x)
    if not np.all(h > 0):
        raise NonMonotonicX("knots must be strictly increasing; canonicalize first")
    slope = np.diff(y) / h
    m = np.zeros(n)  # second derivatives; natural ends stay zero
    if n > 2:
        lower = np.concatenate([[0.0], h[1:-1]])
        diag = 2.0 * (h[:-1] + h[1:])
        upper = np.concatenate([h[1:-1], [0.0]])
        rhs = 6.0 * np.diff(slope)
        m[1:-1] = solve_tridiagonal(lower, diag, upper, rhs)
    a = y[:-1].copy()
    b = slope - h * (2.0 * m[:-1] + m[1:]) / 6.0
    c = m[:-1] / 2.0
    d = np.diff(m) / (6.0 * h)
    return CubicSpline(x.copy(), y.copy(), a, b, c, d)


def resample_dense(
    spline: CubicSpline, x_grid, name: str = "", x_label: str = "", y_label: str = ""
) -> SpectralCurve:
    grid = np.asarray(x_grid, dtype=float)
    lo, hi = spline.domain
    bad = grid[(grid < lo) | (grid > hi) | ~np.isfinite(grid)]
    if bad.size:
        raise OutOfDomain(bad)
    grid = np.unique(grid)
    y = spline(grid)
    # knots reproduce exactly rather than via t=0 arithmetic on the neighbour piece
    hit = np.searchsorted(spline.knots, grid)
    on_knot = (hit < spline.knots.size) & (spline.knots[np.minimum(hit, spline.knots.size - 1)] == grid)
    y[on_knot] = spline.values[hit[on_knot]]
    return SpectralCurve(grid, y, name, x_label, y_label)


def uniform_grid(curve: SpectralCurve, k: int) -> np.ndarray:
    return np.linspace(curve.x[0], curve.x[-1], k)


def reconstruct(
    sampled: SpectralCurve, grid: np.ndarray | None = None, reference: SpectralCurve | None = None
) -> SpectralCurve:
    """Fit the sampled points and evaluate on ``grid`` (default: reference x)."""
    spline = spline_fit(sampled)
    if grid is None:
        grid = reference.x if reference is not None else sampled.x
    return resample_dense(spline, grid, sampled.name, sampled.x_label, sampled.y_label)


# --- SVG ----------------------------------------------------------------------

WIDTH, HEIGHT = 800, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 20, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def render_svg(curves: Sequence[SpectralCurve], style: SpectrumType = SpectrumType.IR) -> str:
    """Deterministic 800x600 SVG: axes plus one trace per curve.

    MS input draws one vertical stick per nonzero point; every other type
    draws a polyline.
    """
    if not curves:
        raise EmptyCurve("nothing to render")
    for c in curves:
        if len(c) == 0:
            raise EmptyCurve(f"curve {c.name!r} has no points")
    xs = np.concatenate([c.x for c in curves])
    ys = np.concatenate([c.y for c in curves])
    if style is SpectrumType.MS:
        ys = np.append(ys, 0.0)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(v):
        return MARGIN_L + (np.asarray(v) - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN_T + (1.0 - (np.asarray(v) - y0) / (y1 - y0)) * ph

    bottom, right = MARGIN_T + ph, MARGIN_L + pw
    x_label = escape(curves[0].x_label)
    y_label = escape(curves[0].y_label)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<g id="axes" stroke="#000000" stroke-width="1" fill="none">',
        f'<line x1="{MARGIN_L}" y1="{bottom}" x2="{right}" y2="{bottom}"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{bottom}"/>',
        "</g>",
        '<g id="labels" font-family="sans-serif" font-size="12" fill="#000000">',
        f'<text x="{MARGIN_L}" y="{bottom + 16}">{_fmt(x0)}</text>',
        f'<text x="{right}" y="{bottom + 16}" text-anchor="end">{_fmt(x1)}</text>',
        f'<text x="{MARGIN_L - 4}" y="{bottom}" text-anchor="end">{_fmt(y0)}</text>',
        f'<text x="{MARGIN_L - 4}" y="{MARGIN_T + 12}" text-anchor="end">{_fmt(y1)}</text>',
        f'<text x="{MARGIN_L + pw / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle">{x_label}</text>',
        f'<text x="16" y="{MARGIN_T + ph / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.0f})">{y_label}</text>',
        "</g>",
    ]
    for k, c in enumerate(curves):
        color = PALETTE[k % len(PALETTE)]
        cx, cy = px(c.x), py(c.y)
        if style is SpectrumType.MS:
            base = _fmt(float(py(0.0)))
            out.append(f'<g class="sticks" stroke="{color}" stroke-width="1">')
            for xi, yi, raw in zip(cx, cy, c.y):
                if raw != 0.0:
                    out.append(
                        f'<line x1="{_fmt(xi)}" y1="{base}" x2="{_fmt(xi)}" y2="{_fmt(yi)}"/>'
                    )
            out.append("</g>")
        else:
            pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(cx, cy))
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
