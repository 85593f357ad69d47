"""Savitzky-Golay smoothing on the sample index grid."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import InvalidConfig, SpecreconError, SpectralCurve


class CurveTooShort(SpecreconError):
    pass


@dataclass(frozen=True)
class SgConfig:
    window: int = 11
    poly_order: int = 3

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise InvalidConfig(f"window must be odd and >= 3, got {self.window}")
        if not 0 <= self.poly_order < self.window:
            raise InvalidConfig(
                f"poly_order must satisfy 0 <= order < window, got {self.poly_order}"
            )


@lru_cache(maxsize=64)
def _coeffs(window: int, poly_order: int) -> tuple[float, ...]:
    half = window // 2
    t = np.arange(-half, half + 1, dtype=float)
    vander = np.vander(t, poly_order + 1, increasing=True)
    # fitted value at t=0 is the constant term: first row of pinv(V)
    weights = np.linalg.pinv(vander)[0]
    return tuple(float(w) for w in weights)


def sg_coefficients(window: int, poly_order: int) -> np.ndarray:
    """Central-point smoothing weights of the windowed least-squares polynomial.

    >>> np.round(sg_coefficients(5, 2) * 35, 10)
    array([-3., 12., 17., 12., -3.])
    """
    SgConfig(window, poly_order)
    return np.array(_coeffs(window, poly_order))


def _mirror_pad(y: np.ndarray, half: int) -> np.ndarray:
    # reflect without repeating the edge sample
    return np.pad(y, half, mode="reflect")


def sg_filter(y: np.ndarray, cfg: SgConfig) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.size < cfg.window:
        raise CurveTooShort(f"need at least {cfg.window} samples, got {y.size}")
    half = cfg.window // 2
    w = sg_coefficients(cfg.window, cfg.poly_order)
    padded = _mirror_pad(y, half)
    # weights are symmetric, so correlate == convolve
    return np.convolve(padded, w[::-1], mode="valid")


def sg_smooth(curve: SpectralCurve, cfg: SgConfig = SgConfig()) -> SpectralCurve:
    """Return ``curve`` with y replaced by its Savitzky-Golay filtered values.

    Weights assume uniform spacing; the filter runs over sample indices even
    when x is irregular.
    """
    return curve.with_y(sg_filter(curve.y, cfg))
