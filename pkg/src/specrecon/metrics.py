"""Point-cloud distances, normalized fidelity scores and line matching."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .core import SpecreconError, SpectralCurve, SubplotAnswer, fit_unit_square

log = logging.getLogger(__name__)

MetricKind = Literal["cd", "hd", "wd"]
KINDS: tuple[MetricKind, ...] = ("cd", "hd", "wd")

EXHAUSTIVE_LIMIT = 256 * 256
_CHUNK = 1 << 20  # pairwise entries per block


class EmptySet(SpecreconError):
    pass


class LengthMismatch(SpecreconError):
    pass


class NonFiniteCost(SpecreconError):
    pass


def _as_points(p) -> np.ndarray:
    if isinstance(p, SpectralCurve):
        return p.points
    arr = np.asarray(p, dtype=float).reshape(-1, 2)
    return arr


def _nn_sq_exhaustive(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared distance from each point of ``a`` to its nearest point in ``b``."""
    out = np.empty(len(a))
    rows = max(1, _CHUNK // len(b))
    bx, by = b[:, 0], b[:, 1]
    for s in range(0, len(a), rows):
        blk = a[s : s + rows]
        dx = blk[:, :1] - bx
        dy = blk[:, 1:] - by
        out[s : s + rows] = np.min(dx * dx + dy * dy, axis=1)
    return out


def _nn_sq_tree(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d, _ = cKDTree(b).query(a, k=1)
    return d * d


def nearest_sq(a, b, method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Directed nearest-neighbour squared distances ``a -> b`` and ``b -> a``."""
    a, b = _as_points(a), _as_points(b)
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("point sets must be non-empty")
    if method == "auto":
        method = "exhaustive" if len(a) * len(b) <= EXHAUSTIVE_LIMIT else "tree"
    kernel = _nn_sq_exhaustive if method == "exhaustive" else _nn_sq_tree
    return kernel(a, b), kernel(b, a)


def chamfer(a, b, method: str = "auto") -> float:
    ab, ba = nearest_sq(a, b, method)
    return float(ab.mean() + ba.mean())


def hausdorff(a, b, method: str = "auto") -> float:
    ab, ba = nearest_sq(a, b, method)
    return float(np.sqrt(max(ab.max(), ba.max())))


def wasserstein_paired(a: SpectralCurve, b: SpectralCurve) -> float:
    """Mean Euclidean distance between index-matched points after x-sorting."""
    pa, pb = _as_points(a), _as_points(b)
    if len(pa) != len(pb):
        raise LengthMismatch(f"paired distance needs equal lengths, got {len(pa)} and {len(pb)}")
    if len(pa) == 0:
        raise EmptySet("point sets must be non-empty")
    pa = pa[np.argsort(pa[:, 0], kind="stable")]
    pb = pb[np.argsort(pb[:, 0], kind="stable")]
    return float(np.mean(np.hypot(pa[:, 0] - pb[:, 0], pa[:, 1] - pb[:, 1])))


def diameter_sq(points) -> float:
    """Largest squared pairwise distance in the set (searched over hull vertices)."""
    pts = np.unique(_as_points(points), axis=0)
    if len(pts) < 2:
        return 0.0
    if len(pts) > 3:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            # collinear: the farthest pair is extreme in x or in y
            keep = [pts[:, 0].argmin(), pts[:, 0].argmax(), pts[:, 1].argmin(), pts[:, 1].argmax()]
            pts = pts[keep]
    dx = pts[:, None, 0] - pts[None, :, 0]
    dy = pts[:, None, 1] - pts[None, :, 1]
    return float(np.max(dx * dx + dy * dy))


def normalized_score(d: float, union, kind: MetricKind, strict: bool = False) -> float:
    """``1 - d / D`` with D the squared diameter of ``union`` for Chamfer.

    Hausdorff and Wasserstein distances are lengths, so by default they are
    divided by the plain diameter. ``strict=True`` divides every kind by the
    squared diameter. An all-coincident union scores 1 with a warning.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown metric kind {kind!r}")
    pts = _as_points(union)
    if len(pts) < 2:
        raise EmptySet("union needs at least two points")
    return _score(d, diameter_sq(pts), kind, strict)


def _score(d: float, dsq: float, kind: MetricKind, strict: bool) -> float:
    if dsq == 0.0:
        log.warning("degenerate union (zero diameter); score set to 1")
        return 1.0
    denom = dsq if (strict or kind == "cd") else float(np.sqrt(dsq))
    return 1.0 - d / denom


@dataclass
class FidelityReport:
    d_cd: float
    d_hd: float
    d_wd: Optional[float]
    score_cd: float
    score_hd: float
    score_wd: Optional[float]
    diameter_sq: float
    reduction_ratio: Optional[float] = None

    def score(self, kind: MetricKind) -> Optional[float]:
        return getattr(self, f"score_{kind}")

    def distance(self, kind: MetricKind) -> Optional[float]:
        return getattr(self, f"d_{kind}")

    def to_dict(self) -> dict:
        return asdict(self)


def _on_grid(pred: SpectralCurve, grid_x: np.ndarray) -> SpectralCurve:
    # linear resample with flat extrapolation, only used when lengths differ
    return SpectralCurve(grid_x, np.interp(grid_x, pred.x, pred.y))


def fidelity(
    truth: SpectralCurve,
    rec: SpectralCurve,
    *,
    normalize: bool = True,
    strict: bool = False,
    reduction_ratio: Optional[float] = None,
) -> FidelityReport:
    """All three distances and scores for one curve pair.

    With ``normalize`` both curves are first mapped by the affine transform
    sending their joint bounding box to the unit square. When ``rec`` and
    ``truth`` differ in length the paired Wasserstein term is computed on
    ``rec`` linearly resampled onto ``truth``'s x grid.
    """
    if normalize:
        m = fit_unit_square(truth, rec)
        truth, rec = m.apply(truth), m.apply(rec)
    pt, pr = truth.points, rec.points
    ab, ba = nearest_sq(pt, pr)
    d_cd = float(ab.mean() + ba.mean())
    d_hd = float(np.sqrt(max(ab.max(), ba.max())))
    paired = rec if len(rec) == len(truth) else _on_grid(rec, truth.x)
    d_wd = wasserstein_paired(truth, paired)
    union = np.vstack([pt, pr])
    dsq = diameter_sq(union)
    return FidelityReport(
        d_cd=d_cd,
        d_hd=d_hd,
        d_wd=d_wd,
        score_cd=_score(d_cd, dsq, "cd", strict),
        score_hd=_score(d_hd, dsq, "hd", strict),
        score_wd=_score(d_wd, dsq, "wd", strict),
        diameter_sq=dsq,
        reduction_ratio=reduction_ratio,
    )


# --- assignment ---------------------------------------------------------------


@dataclass
class LineAssignment:
    pairs: list[tuple[int, int, float]] = field(default_factory=list)
    unmatched_pred: list[int] = field(default_factory=list)
    unmatched_truth: list[int] = field(default_factory=list)

    @property
    def total_cost(self) -> float:
        return float(sum(c for _, _, c in self.pairs))


def _hungarian_square(cost: np.ndarray) -> np.ndarray:
    """Min-cost perfect matching on a square matrix; returns col for each row.

    Shortest augmenting paths with row/column potentials, O(n^3).
    """
    n = cost.shape[0]
    INF = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match_col = np.zeros(n + 1, dtype=int)  # match_col[j] = row matched to column j (1-based)
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        match_col[0] = i
        j0 = 0
        minv = np.full(n + 1, INF)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match_col[j0]
            free = ~used[1:]
            cols = np.flatnonzero(free) + 1
            cur = cost[i0 - 1, cols - 1] - u[i0] - v[cols]
            better = cur < minv[cols]
            minv[cols[better]] = cur[better]
            way[cols[better]] = j0
            k = int(np.argmin(minv[cols]))
            j1 = int(cols[k])
            delta = minv[j1]
            u[match_col[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if match_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match_col[j0] = match_col[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=int)
    for j in range(1, n + 1):
        row_to_col[match_col[j] - 1] = j - 1
    return row_to_col


def hungarian_assign(cost) -> LineAssignment:
    """Optimal one-to-one matching of size ``min(n, m)``.

    Rectangular inputs are padded to a square with a constant larger than
    any real entry, which leaves the optimum over real cells unchanged.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim == 1:
        c = c[None, :]
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
        raise ValueError("cost must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(c)):
        raise NonFiniteCost("cost matrix contains NaN or infinity")
    n, m = c.shape
    size = max(n, m)
    pad = float(np.abs(c).max()) + 1.0
    sq = np.full((size, size), pad)
    sq[:n, :m] = c
    cols = _hungarian_square(sq)
    out = LineAssignment()
    for i in range(n):
        j = int(cols[i])
        if j < m:
            out.pairs.append((i, j, float(c[i, j])))
        else:
            out.unmatched_pred.append(i)
    matched_truth = {j for _, j, _ in out.pairs}
    out.unmatched_truth = [j for j in range(m) if j not in matched_truth]
    return out


# --- subplot scoring ----------------------------------------------------------


@dataclass
class SubplotScore:
    score: float
    assignment: LineAssignment
    reports: list[FidelityReport]
    diagnostics: list[str] = field(default_factory=list)


def _pair_distance(a: SpectralCurve, b: SpectralCurve, kind: MetricKind) -> float:
    if kind == "cd":
        return chamfer(a, b)
    if kind == "hd":
        return hausdorff(a, b)
    if len(a) != len(b):
        a = _on_grid(a, b.x)
    return wasserstein_paired(a, b)


def score_subplot(
    pred: SubplotAnswer | Sequence[SpectralCurve],
    truth: SubplotAnswer | Sequence[SpectralCurve],
    kind: MetricKind = "cd",
    *,
    cost_kind: MetricKind = "cd",
    normalize: bool = True,
    strict: bool = False,
    penalize_unmatched: bool = False,
) -> SubplotScore:
    """Match predicted lines to truth lines and average the matched scores.

    The cost matrix uses ``cost_kind`` distances with every line of both
    answers mapped through one shared unit-square transform. Each matched
    pair is then scored on its own with :func:`fidelity`. Unmatched lines are
    left out of the mean unless ``penalize_unmatched`` counts every unmatched
    truth line as a zero.
    """
    p_lines = list(pred.lines if isinstance(pred, SubplotAnswer) else pred)
    t_lines = list(truth.lines if isinstance(truth, SubplotAnswer) else truth)
    if not t_lines:
        raise ValueError("truth must hold at least one line")
    if not p_lines:
        return SubplotScore(
            0.0,
            LineAssignment(unmatched_truth=list(range(len(t_lines)))),
            [],
            ["prediction has no parseable lines"],
        )
    if normalize:
        m = fit_unit_square(*p_lines, *t_lines)
        p_norm = [m.apply(c) for c in p_lines]
        t_norm = [m.apply(c) for c in t_lines]
    else:
        p_norm, t_norm = p_lines, t_lines
    cost = np.array([[_pair_distance(p, t, cost_kind) for t in t_norm] for p in p_norm])
    assignment = hungarian_assign(cost)
    reports = [
        fidelity(t_lines[j], p_lines[i], normalize=normalize, strict=strict)
        for i, j, _ in assignment.pairs
    ]
    scores = [r.score(kind) for r in reports]
    if penalize_unmatched:
        scores += [0.0] * len(assignment.unmatched_truth)
    return SubplotScore(float(np.mean(scores)), assignment, reports)
