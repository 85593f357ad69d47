"""Uniform baseline sampling plus Ramer-Douglas-Peucker feature sampling."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import InvalidConfig, SpectralCurve, fit_unit_square

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.005
EPS_LO, EPS_HI = 1e-6, 1.0
AUTOTUNE_ITERATIONS = 40


@dataclass(frozen=True)
class SamplingConfig:
    """Sampling knobs.

    At most one of ``epsilon``, ``target_points`` and ``target_fraction`` may
    be given. ``target_fraction`` is a per-curve budget resolved to
    ``floor(target_fraction * N)`` points. With none set, ``DEFAULT_EPSILON``
    applies. ``epsilon`` is measured in unit-square coordinates.
    """

    baseline_fraction: float = 0.05
    epsilon: Optional[float] = None
    target_points: Optional[int] = None
    target_fraction: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.baseline_fraction <= 1:
            raise InvalidConfig("baseline_fraction must lie in (0, 1]")
        given = [v is not None for v in (self.epsilon, self.target_points, self.target_fraction)]
        if sum(given) > 1:
            raise InvalidConfig("epsilon, target_points and target_fraction are mutually exclusive")
        if self.epsilon is not None and not self.epsilon > 0:
            raise InvalidConfig("epsilon must be positive")
        if self.target_points is not None and self.target_points < 2:
            raise InvalidConfig("target_points must be >= 2")
        if self.target_fraction is not None and not 0 < self.target_fraction <= 1:
            raise InvalidConfig("target_fraction must lie in (0, 1]")

    def budget_for(self, n: int) -> Optional[int]:
        if self.target_points is not None:
            return min(self.target_points, n)
        if self.target_fraction is not None:
            return max(2, min(n, math.floor(self.target_fraction * n + 1e-9)))
        return None


def uniform_sample(n: int, fraction: float) -> np.ndarray:
    """Evenly spaced indices over ``[0, n-1]``, endpoints included.

    ``k = max(2, ceil(fraction * n))`` indices at ``round(i * (n-1) / (k-1))``.
    """
    if n < 1:
        raise ValueError("empty curve")
    if not 0 < fraction <= 1:
        raise InvalidConfig("fraction must lie in (0, 1]")
    if n == 1:
        return np.array([0])
    # guard against 0.05 * 100 == 5.000000000000001 style ceilings
    k = min(n, max(2, math.ceil(fraction * n - 1e-9)))
    idx = np.round(np.arange(k) * (n - 1) / (k - 1)).astype(int)
    return np.unique(idx)


def _segment_distances(px, py, ax, ay, bx, by) -> np.ndarray:
    """Euclidean distance from points to the segments a-b (arrays broadcast)."""
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    safe = np.where(seg2 == 0.0, 1.0, seg2)
    t = np.where(seg2 == 0.0, 0.0, np.clip(((px - ax) * dx + (py - ay) * dy) / safe, 0.0, 1.0))
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _split_points(x, y, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Farthest interior point of every open segment ``(lo, hi)`` at once.

    Requires ``hi - lo >= 2``. Ties go to the lowest index.
    """
    lengths = hi - lo - 1
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    seg = np.repeat(np.arange(lo.size), lengths)
    pos = np.arange(seg.size)
    idx = lo[seg] + 1 + (pos - starts[seg])
    a, b = lo[seg], hi[seg]
    d = _segment_distances(x[idx], y[idx], x[a], y[a], x[b], y[b])
    dmax = np.maximum.reduceat(d, starts)
    first = np.minimum.reduceat(np.where(d == dmax[seg], pos, seg.size), starts)
    return idx[first], dmax


def _split_tree(x, y, epsilon: float):
    """Breadth-first RDP splitting without recursion.

    Yields ``(split_index, distance, parent_cap)`` arrays per level, where
    only splits with distance > ``epsilon`` are expanded further.
    """
    n = x.size
    lo, hi = np.array([0]), np.array([n - 1])
    cap = np.array([np.inf])
    while lo.size:
        live = hi - lo >= 2
        lo, hi, cap = lo[live], hi[live], cap[live]
        if not lo.size:
            break
        m, d = _split_points(x, y, lo, hi)
        yield m, d, cap
        go = d > epsilon
        t = np.minimum(cap[go], d[go])
        lo, hi, cap = (
            np.concatenate([lo[go], m[go]]),
            np.concatenate([m[go], hi[go]]),
            np.concatenate([t, t]),
        )


def rdp_simplify(curve: SpectralCurve, epsilon: float) -> np.ndarray:
    """Indices kept by Ramer-Douglas-Peucker at tolerance ``epsilon``.

    Distances are taken in the curve's own coordinates; callers normalize to
    the unit square first. Segments are processed level by level from a work
    queue, so depth is not bounded by the interpreter recursion limit.
    """
    if not epsilon > 0:
        raise InvalidConfig("epsilon must be positive")
    n = len(curve)
    if n <= 2:
        return np.arange(n)
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    for m, d, _ in _split_tree(curve.x, curve.y, epsilon):
        keep[m[d > epsilon]] = True
    return np.flatnonzero(keep)


def rdp_thresholds(curve: SpectralCurve) -> np.ndarray:
    """Largest epsilon at which each index is still dropped.

    Index ``i`` survives ``rdp_simplify(curve, eps)`` exactly when
    ``thresholds[i] > eps``: the split tree is the same for every epsilon and a
    node survives only if it and all its ancestors beat the tolerance.
    Endpoints get ``inf``.
    """
    n = len(curve)
    thr = np.zeros(n)
    if n == 0:
        return thr
    thr[0] = thr[-1] = np.inf
    if n <= 2:
        return thr
    for m, d, cap in _split_tree(curve.x, curve.y, 0.0):
        pos = d > 0.0
        thr[m[pos]] = np.minimum(cap[pos], d[pos])
    return thr


@dataclass(frozen=True)
class SampleResult:
    sampled: SpectralCurve
    indices: np.ndarray
    n_in: int
    epsilon_used: float
    warnings: tuple[str, ...] = ()

    @property
    def n_out(self) -> int:
        return int(self.indices.size)

    @property
    def reduction_ratio(self) -> float:
        return self.n_out / self.n_in

    def stats(self) -> dict:
        return {
            "n_in": self.n_in,
            "n_out": self.n_out,
            "reduction_ratio": self.reduction_ratio,
            "epsilon_used": self.epsilon_used,
        }


def merge_samples(
    curve: SpectralCurve, baseline, critical
) -> tuple[SpectralCurve, float, np.ndarray]:
    """Points at the sorted union of both index sets, plus R = |union| / N."""
    idx = np.union1d(np.asarray(baseline, dtype=int), np.asarray(critical, dtype=int))
    return curve.take(idx), idx.size / len(curve), idx


def autotune_epsilon(
    curve: SpectralCurve,
    target_points: int,
    baseline: Optional[np.ndarray] = None,
) -> tuple[float, np.ndarray, list[str]]:
    """Smallest epsilon whose merged sample fits in ``target_points``.

    Bisects ``log(epsilon)`` over ``[1e-6, 1]`` for a fixed number of steps.
    ``curve`` must already be in unit-square coordinates. Returns the epsilon,
    the merged indices (baseline union RDP) and any warnings. When the
    baseline alone exceeds the budget, only the two endpoints are returned.
    """
    n = len(curve)
    if not 2 <= target_points:
        raise InvalidConfig("target_points must be >= 2")
    target_points = min(target_points, n)
    baseline = np.array([], dtype=int) if baseline is None else np.asarray(baseline, dtype=int)
    thr = rdp_thresholds(curve)
    in_base = np.zeros(n, dtype=bool)
    in_base[baseline] = True

    def merged_size(eps: float) -> int:
        return int(np.count_nonzero(in_base | (thr > eps)))

    if merged_size(EPS_HI) > target_points:
        msg = (
            f"budget {target_points} unreachable even at epsilon={EPS_HI}; "
            "returning endpoints only"
        )
        log.warning(msg)
        return EPS_HI, np.array([0, n - 1]) if n > 1 else np.array([0]), [msg]
    if merged_size(EPS_LO) <= target_points:
        eps = EPS_LO
    else:
        lo, hi = math.log(EPS_LO), math.log(EPS_HI)  # size(lo) > target >= size(hi)
        for _ in range(AUTOTUNE_ITERATIONS):
            mid = 0.5 * (lo + hi)
            if merged_size(math.exp(mid)) > target_points:
                lo = mid
            else:
                hi = mid
        eps = math.exp(hi)
    idx = np.flatnonzero(in_base | (thr > eps))
    return eps, idx, []


def sample_curve(smoothed: SpectralCurve, cfg: SamplingConfig = SamplingConfig()) -> SampleResult:
    """Baseline plus RDP sampling of an already smoothed, canonical curve.

    RDP runs in the curve's own unit square; sampled points keep raw units.
    """
    n = len(smoothed)
    unit = fit_unit_square(smoothed).apply(smoothed)
    baseline = uniform_sample(n, cfg.baseline_fraction)
    budget = cfg.budget_for(n)
    warnings: list[str] = []
    if budget is not None:
        eps, idx, warnings = autotune_epsilon(unit, budget, baseline)
    else:
        eps = cfg.epsilon if cfg.epsilon is not None else DEFAULT_EPSILON
        _, _, idx = merge_samples(unit, baseline, rdp_simplify(unit, eps))
    return SampleResult(smoothed.take(idx), idx, n, eps, tuple(warnings))
