"""Smooth -> sample -> reconstruct -> score, for one curve at a time."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import SpectralCurve, SpectrumType, canonicalize_with_count
from .metrics import FidelityReport, fidelity
from .preprocess import SgConfig, sg_smooth
from .reconstruct import reconstruct, uniform_grid
from .sampling import SampleResult, SamplingConfig, sample_curve, uniform_sample

DEFAULT_BUDGET_FRACTION = 0.067
SUITE_SEED = 2024
SUITE_PER_TYPE = 100
METRICS = ("cd", "hd", "wd")


@dataclass(frozen=True)
class PipelineConfig:
    sg: SgConfig = field(default_factory=SgConfig)
    sampling: SamplingConfig = field(
        default_factory=lambda: SamplingConfig(target_fraction=DEFAULT_BUDGET_FRACTION)
    )
    smooth: bool = True
    grid: str = "original"  # or "uniform:K"
    normalize: bool = True
    strict: bool = False

    def grid_for(self, curve: SpectralCurve) -> np.ndarray:
        if self.grid == "original":
            return curve.x
        kind, _, k = self.grid.partition(":")
        if kind != "uniform" or not k.isdigit() or int(k) < 2:
            raise ValueError(f"bad grid spec {self.grid!r}")
        return uniform_grid(curve, int(k))


@dataclass
class CurveResult:
    original: SpectralCurve
    sample: SampleResult
    reconstructed: SpectralCurve
    report: FidelityReport
    dropped_nonfinite: int = 0


def sample_points(
    curve: SpectralCurve, cfg: PipelineConfig = PipelineConfig(), smooth: Optional[bool] = None
) -> SampleResult:
    """Canonicalize, optionally smooth, then baseline + RDP sample."""
    canon, _ = canonicalize_with_count(curve)
    do_smooth = cfg.smooth if smooth is None else smooth
    if do_smooth and len(canon) >= cfg.sg.window:
        canon = sg_smooth(canon, cfg.sg)
    return sample_curve(canon, cfg.sampling)


def run_curve(
    curve: SpectralCurve, cfg: PipelineConfig = PipelineConfig(), smooth: Optional[bool] = None
) -> CurveResult:
    canon, dropped = canonicalize_with_count(curve)
    sample = sample_points(canon, cfg, smooth)
    rec = reconstruct(sample.sampled, grid=cfg.grid_for(canon))
    if cfg.grid != "original":
        # score against the original grid regardless of the emitted grid
        scored = reconstruct(sample.sampled, grid=canon.x)
    else:
        scored = rec
    report = fidelity(
        canon,
        scored,
        normalize=cfg.normalize,
        strict=cfg.strict,
        reduction_ratio=sample.reduction_ratio,
    )
    return CurveResult(canon, sample, rec, report, dropped)


def with_budget(cfg: PipelineConfig, **sampling_overrides) -> PipelineConfig:
    base = dict(baseline_fraction=cfg.sampling.baseline_fraction)
    base.update(sampling_overrides)
    return replace(cfg, sampling=SamplingConfig(**base))


# --- suites and ablations -------------------------------------------------------


@dataclass(frozen=True)
class SuiteCurve:
    type: Optional[SpectrumType]
    curve: SpectralCurve
    smooth: Optional[bool] = None  # None defers to PipelineConfig.smooth


def suite_curves(
    master_seed: int = SUITE_SEED, per_type: int = SUITE_PER_TYPE, workers: int = 1
) -> list[SuiteCurve]:
    """The versioned synthetic suite: ``per_type`` single-line curves per type.

    Each entry carries its profile's smoothing flag (MS sticks skip smoothing).
    """
    from .syngen import generate

    samples = generate(per_type * len(SpectrumType), master_seed, workers=workers)
    return [SuiteCurve(s.spec.type, s.curves[0], None if s.spec.smooth else False) for s in samples]


def uniform_only(
    curve: SpectralCurve, cfg: PipelineConfig = PipelineConfig(), smooth: Optional[bool] = None
) -> CurveResult:
    """Ablation arm: evenly spaced points at the same budget, no RDP, no smoothing."""
    canon, dropped = canonicalize_with_count(curve)
    n = len(canon)
    budget = cfg.sampling.budget_for(n) or max(2, round(DEFAULT_BUDGET_FRACTION * n))
    idx = uniform_sample(n, budget / n)
    sample = SampleResult(canon.take(idx), idx, n, float("nan"))
    rec = reconstruct(sample.sampled, grid=canon.x)
    report = fidelity(canon, rec, normalize=cfg.normalize, strict=cfg.strict,
                      reduction_ratio=sample.reduction_ratio)
    return CurveResult(canon, sample, rec, report, dropped)


def summarize(reports: Sequence[FidelityReport]) -> dict:
    """Mean and min per score, plus mean reduction ratio."""
    out: dict = {"n_curves": len(reports)}
    for k in METRICS:
        vals = [r.score(k) for r in reports if r.score(k) is not None]
        out[f"mean_score_{k}"] = float(np.mean(vals)) if vals else None
        out[f"min_score_{k}"] = float(np.min(vals)) if vals else None
    ratios = [r.reduction_ratio for r in reports if r.reduction_ratio is not None]
    out["mean_reduction_ratio"] = float(np.mean(ratios)) if ratios else None
    return out


ArmFn = Callable[[SpectralCurve, PipelineConfig, Optional[bool]], CurveResult]
ABLATION_ARMS: dict[str, ArmFn] = {
    "Testset with sampling strategy": run_curve,
    "Testset with sampling, no smoothing": lambda c, cfg, smooth: run_curve(c, cfg, smooth=False),
    "Testset with uniform sampling only": uniform_only,
}


def map_ordered(fn, items, workers: int = 1) -> list:
    """``map`` with an optional thread pool; results keep input order."""
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def run_ablation(
    curves: Sequence[SpectralCurve | SuiteCurve],
    cfg: PipelineConfig = PipelineConfig(),
    arms: Optional[Sequence[str]] = None,
    workers: int = 1,
) -> dict[str, dict]:
    """Summary per ablation arm over ``curves``.

    :class:`SuiteCurve` entries pass their own smoothing flag to each arm.
    """
    items = [(c.curve, c.smooth) if isinstance(c, SuiteCurve) else (c, None) for c in curves]
    out = {}
    for name in arms or ABLATION_ARMS:
        arm = ABLATION_ARMS[name]
        results = map_ordered(lambda it: arm(it[0], cfg, it[1]).report, items, workers)
        out[name] = summarize(results)
    return out
