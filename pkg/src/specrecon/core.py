"""Shared curve types, axis normalization and curve I/O."""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class SpecreconError(Exception):
    """Base class for all errors raised by this package."""


class EmptyCurve(SpecreconError):
    pass


class InvalidConfig(SpecreconError):
    pass


class SpectrumType(str, enum.Enum):
    NMR = "NMR"
    IR = "IR"
    XRD = "XRD"
    RAMAN = "Raman"
    MS = "MS"
    UVVIS = "UVVis"
    XPS = "XPS"

    @classmethod
    def parse(cls, text: str) -> "SpectrumType":
        key = text.replace("-", "").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown spectrum type {text!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralCurve:
    """An ordered run of (x, y) samples plus axis labels.

    Coordinates are held as read-only float arrays so that curves can be
    shared freely between threads.
    """

    x: np.ndarray
    y: np.ndarray
    name: str = ""
    x_label: str = ""
    y_label: str = ""

    def __post_init__(self):
        x = _frozen(np.ravel(self.x))
        y = _frozen(np.ravel(self.y))
        if x.shape != y.shape:
            raise ValueError(f"x and y lengths differ: {x.size} vs {y.size}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], **meta) -> "SpectralCurve":
        pts = np.asarray(list(points), dtype=float).reshape(-1, 2)
        return cls(pts[:, 0], pts[:, 1], **meta)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def __len__(self) -> int:
        return int(self.x.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectralCurve):
            return NotImplemented
        return (
            np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and (self.name, self.x_label, self.y_label)
            == (other.name, other.x_label, other.y_label)
        )

    __hash__ = None  # type: ignore[assignment]

    def with_y(self, y) -> "SpectralCurve":
        return SpectralCurve(self.x, y, self.name, self.x_label, self.y_label)

    def take(self, indices) -> "SpectralCurve":
        idx = np.asarray(indices, dtype=int)
        return SpectralCurve(self.x[idx], self.y[idx], self.name, self.x_label, self.y_label)

    def is_canonical(self) -> bool:
        return (
            len(self) > 0
            and bool(np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y)))
            and bool(np.all(np.diff(self.x) > 0))
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "x_label": self.x_label,
            "y_label": self.y_label,
            "points": [[float(a), float(b)] for a, b in zip(self.x, self.y)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralCurve":
        pts = d.get("points") or []
        return cls.from_points(
            pts,
            name=d.get("name", ""),
            x_label=d.get("x_label", ""),
            y_label=d.get("y_label", ""),
        )


@dataclass(frozen=True)
class SubplotAnswer:
    subplot_id: str
    lines: tuple[SpectralCurve, ...]
    diagnostics: tuple[str, ...] = field(default_factory=tuple)


def canonicalize_with_count(curve: SpectralCurve) -> tuple[SpectralCurve, int]:
    """Sort by x, average y over duplicate x, drop non-finite points.

    Returns the canonical curve and the number of dropped points.
    """
    finite = np.isfinite(curve.x) & np.isfinite(curve.y)
    dropped = int(np.count_nonzero(~finite))
    x, y = curve.x[finite], curve.y[finite]
    if x.size == 0:
        raise EmptyCurve(f"curve {curve.name!r} has no finite points")
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    ux, start, counts = np.unique(x, return_index=True, return_counts=True)
    if ux.size != x.size:
        y = np.add.reduceat(y, start) / counts
        x = ux
    return SpectralCurve(x, y, curve.name, curve.x_label, curve.y_label), dropped


def canonicalize(curve: SpectralCurve) -> SpectralCurve:
    return canonicalize_with_count(curve)[0]


@dataclass(frozen=True)
class AxisNormalization:
    """Affine map ``u = (x - x_offset) * x_scale`` (same for y)."""

    x_offset: float
    x_scale: float
    y_offset: float
    y_scale: float

    def __post_init__(self):
        if not (self.x_scale > 0 and self.y_scale > 0):
            raise InvalidConfig("axis scales must be positive")

    @classmethod
    def identity(cls) -> "AxisNormalization":
        return cls(0.0, 1.0, 0.0, 1.0)

    def apply_xy(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        x = (np.asarray(x, dtype=float) - self.x_offset) * self.x_scale
        y = (np.asarray(y, dtype=float) - self.y_offset) * self.y_scale
        return x, y

    def invert_xy(self, u, v) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(u, dtype=float) / self.x_scale + self.x_offset
        y = np.asarray(v, dtype=float) / self.y_scale + self.y_offset
        return x, y

    def apply(self, curve: SpectralCurve) -> SpectralCurve:
        x, y = self.apply_xy(curve.x, curve.y)
        return SpectralCurve(x, y, curve.name, curve.x_label, curve.y_label)

    def invert(self, curve: SpectralCurve) -> SpectralCurve:
        x, y = self.invert_xy(curve.x, curve.y)
        return SpectralCurve(x, y, curve.name, curve.x_label, curve.y_label)


def _axis_map(lo: float, hi: float) -> tuple[float, float]:
    if hi > lo:
        return lo, 1.0 / (hi - lo)
    # degenerate extent: unit scale, value lands on 0.5
    return lo - 0.5, 1.0


def fit_unit_square(*curves: SpectralCurve) -> AxisNormalization:
    """Map the joint bounding box of ``curves`` onto the unit square."""
    if not curves or any(len(c) == 0 for c in curves):
        raise EmptyCurve("fit_unit_square needs non-empty curves")
    xs = np.concatenate([c.x for c in curves])
    ys = np.concatenate([c.y for c in curves])
    xo, xs_ = _axis_map(float(xs.min()), float(xs.max()))
    yo, ys_ = _axis_map(float(ys.min()), float(ys.max()))
    return AxisNormalization(xo, xs_, yo, ys_)


# --- curve file I/O -------------------------------------------------------


def load_curves(path: str | Path) -> list[SpectralCurve]:
    """Read curves from a JSON (one curve, list of curves, or ``{"curves": [...]}``)
    or a two-column CSV file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return [_curve_from_csv(text, name=path.stem)]
    data = json.loads(text)
    if isinstance(data, dict) and "curves" in data:
        data = data["curves"]
    if isinstance(data, dict):
        data = [data]
    return [SpectralCurve.from_dict(d) for d in data]


def _curve_from_csv(text: str, name: str = "") -> SpectralCurve:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    x_label = y_label = ""
    if rows:
        try:
            float(rows[0][0]), float(rows[0][1])
        except (ValueError, IndexError):
            header = rows.pop(0)
            x_label = header[0].strip()
            y_label = header[1].strip() if len(header) > 1 else ""
    pts = [(float(r[0]), float(r[1])) for r in rows]
    return SpectralCurve.from_points(pts, name=name, x_label=x_label, y_label=y_label)


def dump_curves(curves: Sequence[SpectralCurve]) -> str:
    """Deterministic JSON text for a list of curves."""
    return json.dumps({"curves": [c.to_dict() for c in curves]}, indent=1, sort_keys=True) + "\n"

