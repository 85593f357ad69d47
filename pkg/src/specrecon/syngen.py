"""Synthetic spectra for the seven spectrum types, batch QC and training records.

Profiles are versioned: changing any range or shape convention below must
bump ``PROFILE_VERSION`` so datasets stay regenerable from their seed.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import SpecreconError, SpectralCurve, SpectrumType, SubplotAnswer

log = logging.getLogger(__name__)

PROFILE_VERSION = "profile_v1"
N_RANGE = (800, 3000)
SHAPES = ("gaussian", "lorentzian", "pseudo_voigt", "stick")
BASELINES = ("flat", "linear", "broad_hump")


class InvalidSpec(SpecreconError):
    pass


class ExhaustedRetries(SpecreconError):
    pass


@dataclass(frozen=True)
class Peak:
    center: float
    height: float
    width: float = 0.0  # FWHM; ignored for sticks
    shape: str = "gaussian"
    eta: float = 0.5  # Lorentzian fraction of a pseudo-Voigt


@dataclass(frozen=True)
class Baseline:
    kind: str = "flat"
    # flat: (level,); linear: (level, rise over x_range);
    # broad_hump: (level, amplitude, center, fwhm)
    params: tuple[float, ...] = (0.0,)


@dataclass(frozen=True)
class SynthSpec:
    type: SpectrumType
    seed: int
    n_points: int
    peaks: tuple[Peak, ...]
    baseline: Baseline = Baseline()
    noise_sigma: float = 0.0
    x_range: tuple[float, float] = (0.0, 1.0)
    n_lines: int = 1
    transmittance: bool = False
    smooth: bool = True  # MS sticks skip smoothing

    def validate(self) -> None:
        lo, hi = self.x_range
        if not hi > lo:
            raise InvalidSpec("x_range must be increasing")
        if not N_RANGE[0] <= self.n_points <= N_RANGE[1]:
            raise InvalidSpec(f"n_points must lie in {N_RANGE}")
        if self.n_lines < 1:
            raise InvalidSpec("n_lines must be >= 1")
        if not self.noise_sigma >= 0:
            raise InvalidSpec("noise_sigma must be >= 0")
        if self.baseline.kind not in BASELINES:
            raise InvalidSpec(f"unknown baseline {self.baseline.kind!r}")
        for p in self.peaks:
            if p.shape not in SHAPES:
                raise InvalidSpec(f"unknown peak shape {p.shape!r}")
            if not lo <= p.center <= hi:
                raise InvalidSpec(f"peak center {p.center} outside {self.x_range}")
            if p.shape != "stick" and not p.width > 0:
                raise InvalidSpec("peak widths must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["type"] = self.type.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        return cls(
            type=SpectrumType.parse(d["type"]),
            seed=int(d["seed"]),
            n_points=int(d["n_points"]),
            peaks=tuple(Peak(**p) for p in d["peaks"]),
            baseline=Baseline(d["baseline"]["kind"], tuple(d["baseline"]["params"])),
            noise_sigma=float(d["noise_sigma"]),
            x_range=tuple(d["x_range"]),
            n_lines=int(d["n_lines"]),
            transmittance=bool(d.get("transmittance", False)),
            smooth=bool(d.get("smooth", True)),
        )


AXIS_LABELS = {
    SpectrumType.NMR: ("Chemical shift (ppm)", "Intensity (a.u.)"),
    SpectrumType.IR: ("Wavenumber (cm-1)", "Absorbance (a.u.)"),
    SpectrumType.XRD: ("2theta (deg)", "Intensity (a.u.)"),
    SpectrumType.RAMAN: ("Raman shift (cm-1)", "Intensity (a.u.)"),
    SpectrumType.MS: ("m/z", "Relative abundance (%)"),
    SpectrumType.UVVIS: ("Wavelength (nm)", "Absorbance"),
    SpectrumType.XPS: ("Binding energy (eV)", "Intensity (counts)"),
}


def _shape(x: np.ndarray, p: Peak) -> np.ndarray:
    u = (x - p.center) / p.width if p.width > 0 else None
    if p.shape == "gaussian":
        return p.height * np.exp(-4.0 * math.log(2.0) * u * u)
    if p.shape == "lorentzian":
        return p.height / (1.0 + 4.0 * u * u)
    if p.shape == "pseudo_voigt":
        g = np.exp(-4.0 * math.log(2.0) * u * u)
        lor = 1.0 / (1.0 + 4.0 * u * u)
        return p.height * (p.eta * lor + (1.0 - p.eta) * g)
    out = np.zeros_like(x)
    out[int(np.argmin(np.abs(x - p.center)))] = p.height
    return out


def _baseline(x: np.ndarray, b: Baseline, x_range) -> np.ndarray:
    lo, hi = x_range
    level = b.params[0] if b.params else 0.0
    if b.kind == "flat":
        return np.full_like(x, level)
    if b.kind == "linear":
        return level + b.params[1] * (x - lo) / (hi - lo)
    amp, center, fwhm = b.params[1:4]
    return level + amp * np.exp(-4.0 * math.log(2.0) * ((x - center) / fwhm) ** 2)


def gen_spectrum(spec: SynthSpec) -> list[SpectralCurve]:
    """Evaluate baseline + peaks + Gaussian noise for each line of ``spec``.

    Line ``k`` scales peak heights by a factor in [0.6, 1] (line 0 unscaled)
    and draws its noise from ``default_rng([seed, k])``.
    """
    spec.validate()
    x = np.linspace(spec.x_range[0], spec.x_range[1], spec.n_points)
    x_label, y_label = AXIS_LABELS[spec.type]
    if spec.transmittance:
        y_label = "Transmittance (%)"
    curves = []
    for k in range(spec.n_lines):
        rng = np.random.default_rng([spec.seed, k])
        scale = 1.0 if k == 0 else float(rng.uniform(0.6, 1.0))
        y = _baseline(x, spec.baseline, spec.x_range)
        for p in spec.peaks:
            y = y + scale * _shape(x, p)
        if spec.noise_sigma > 0:
            y = y + rng.normal(0.0, spec.noise_sigma, size=x.size)
        if spec.transmittance:
            top = max(float(np.max(y)), 1e-12)
            y = 100.0 * (1.0 - 0.9 * y / top)
        curves.append(
            SpectralCurve(x, y, name=f"{spec.type.value}-{spec.seed}-{k + 1}",
                          x_label=x_label, y_label=y_label)
        )
    return curves


# --- per-type profiles ----------------------------------------------------------


def _sorted_peaks(peaks: list[Peak]) -> tuple[Peak, ...]:
    return tuple(sorted(peaks, key=lambda p: p.center))


def _noise(rng, peak_heights) -> float:
    return float(rng.uniform(0.0, 0.02)) * float(max(peak_heights, default=1.0))


def sample_type_profile(type: SpectrumType, seed: int, n_lines: int = 1) -> SynthSpec:
    """Draw a :class:`SynthSpec` from the per-type distribution."""
    type = SpectrumType(type)
    rng = np.random.default_rng([seed, 0x5EC])
    n = int(rng.integers(N_RANGE[0], N_RANGE[1] + 1))
    common = dict(type=type, seed=seed, n_points=n, n_lines=n_lines)

    if type is SpectrumType.MS:
        lo, hi = 50.0, 800.0
        k = int(rng.integers(5, 31))
        centers = rng.uniform(lo, hi, k)
        heights = rng.uniform(2.0, 100.0, k)
        heights[int(rng.integers(k))] = 100.0  # base peak
        peaks = [Peak(float(c), float(h), 0.0, "stick") for c, h in zip(centers, heights)]
        return SynthSpec(peaks=_sorted_peaks(peaks), x_range=(lo, hi), noise_sigma=0.0,
                         baseline=Baseline("flat", (0.0,)), smooth=False, **common)

    if type is SpectrumType.UVVIS:
        lo, hi = 200.0, 800.0
        k = int(rng.integers(1, 5))
        peaks = [Peak(float(rng.uniform(230, 700)), float(rng.uniform(0.2, 1.5)),
                      float(rng.uniform(30, 150)), "gaussian") for _ in range(k)]
        base = Baseline("linear", (float(rng.uniform(0, 0.05)), float(rng.uniform(-0.05, 0.05))))
        return SynthSpec(peaks=_sorted_peaks(peaks), x_range=(lo, hi), baseline=base,
                         noise_sigma=_noise(rng, [p.height for p in peaks]), **common)

    if type is SpectrumType.IR:
        lo, hi = 400.0, 4000.0
        k = int(rng.integers(5, 21))
        peaks = [Peak(float(rng.uniform(450, 3950)), float(rng.uniform(0.05, 1.0)),
                      float(rng.uniform(15, 80)), "lorentzian") for _ in range(k)]
        base = Baseline("linear", (float(rng.uniform(0, 0.05)), float(rng.uniform(-0.05, 0.05))))
        return SynthSpec(peaks=_sorted_peaks(peaks), x_range=(lo, hi), baseline=base,
                         noise_sigma=_noise(rng, [p.height for p in peaks]),
                         transmittance=bool(rng.random() < 0.5), **common)

    if type is SpectrumType.RAMAN:
        lo, hi = 100.0, 3500.0
        k = int(rng.integers(3, 16))
        peaks = [Peak(float(rng.uniform(150, 3450)), float(rng.uniform(0.1, 1.0)),
                      float(rng.uniform(8, 40)), "lorentzian") for _ in range(k)]
        base = Baseline("broad_hump", (0.0, float(rng.uniform(0.0, 0.4)),
                                       float(rng.uniform(lo, hi)), float(rng.uniform(1000, 3000))))
        return SynthSpec(peaks=_sorted_peaks(peaks), x_range=(lo, hi), baseline=base,
                         noise_sigma=_noise(rng, [p.height for p in peaks]), **common)

    if type is SpectrumType.XRD:
        lo, hi = 10.0, 80.0
        k = int(rng.integers(5, 26))
        peaks = [Peak(float(rng.uniform(12, 78)), float(rng.uniform(0.05, 1.0)),
                      float(rng.uniform(0.15, 0.5)), "pseudo_voigt",
                      float(rng.uniform(0.2, 0.8))) for _ in range(k)]
        base = Baseline("broad_hump", (0.0, float(rng.uniform(0.0, 0.08)),
                                       float(rng.uniform(15, 35)), float(rng.uniform(10, 30))))
        return SynthSpec(peaks=_sorted_peaks(peaks), x_range=(lo, hi), baseline=base,
                         noise_sigma=_noise(rng, [p.height for p in peaks]), **common)

    if type is SpectrumType.NMR:
        lo, hi = 0.0, 12.0
        k = int(rng.integers(2, 11))
        peaks = []
        for _ in range(k):
            center = float(rng.uniform(0.5, 11.5))
            parts = int(rng.integers(1, 5))
            j = float(rng.uniform(0.04, 0.1))
            width = float(rng.uniform(0.03, 0.08))
            height = float(rng.uniform(0.1, 1.0))
            # binomial intensities for a first-order multiplet
            weights = [math.comb(parts - 1, i) for i in range(parts)]
            for i, w in enumerate(weights):
                offset = (i - (parts - 1) / 2) * j
                peaks.append(Peak(center + offset, height * w / max(weights), width, "lorentzian"))
        return SynthSpec(peaks=_sorted_peaks(peaks), x_range=(lo, hi),
                         baseline=Baseline("flat", (0.0,)),
                         noise_sigma=_noise(rng, [p.height for p in peaks]), **common)

    # XPS
    width = float(rng.uniform(20, 40))
    lo = float(rng.uniform(50, 1000))
    hi = lo + width
    k = int(rng.integers(1, 5))
    peaks = [Peak(float(rng.uniform(lo + 3, hi - 3)), float(rng.uniform(0.3, 1.0)),
                  float(rng.uniform(1.0, 3.0)), "pseudo_voigt", float(rng.uniform(0.2, 0.5)))
             for _ in range(k)]
    base = Baseline("linear", (float(rng.uniform(0.1, 0.4)), float(rng.uniform(0.05, 0.3))))
    return SynthSpec(peaks=_sorted_peaks(peaks), x_range=(lo, hi), baseline=base,
                     noise_sigma=_noise(rng, [p.height for p in peaks]), **common)


# --- datasets ---------------------------------------------------------------------


@dataclass
class Sample:
    index: int
    spec: SynthSpec
    curves: list[SpectralCurve]
    subplot_id: str = "A"

    def to_json(self) -> str:
        doc = {
            "index": self.index,
            "profile": PROFILE_VERSION,
            "spectrum_type": self.spec.type.value,
            "subplot_id": self.subplot_id,
            "spec": self.spec.to_dict(),
            "curves": [c.to_dict() for c in self.curves],
        }
        return json.dumps(doc, sort_keys=True) + "\n"


SUBPLOT_IDS = "ABCDEFGH"


def sample_seed(master_seed: int, index: int) -> int:
    """Per-sample seed; independent of generation order or parallelism."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0] >> 1)


def make_sample(master_seed: int, index: int, types: Sequence[SpectrumType]) -> Sample:
    t = types[index % len(types)]
    seed = sample_seed(master_seed, index)
    spec = sample_type_profile(t, seed)
    sid = SUBPLOT_IDS[seed % len(SUBPLOT_IDS)]
    return Sample(index, spec, gen_spectrum(spec), sid)


def generate(
    count: int,
    master_seed: int = 0,
    types: Optional[Sequence[SpectrumType]] = None,
    workers: int = 1,
) -> list[Sample]:
    """``count`` samples cycling through ``types`` (default: all seven)."""
    types = list(types or SpectrumType)
    if workers <= 1:
        return [make_sample(master_seed, i, types) for i in range(count)]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda i: make_sample(master_seed, i, types), range(count)))


@dataclass
class BatchQcReport:
    batch_size: int
    sampled_fraction: float
    pass_count: int
    fail_count: int
    pass_rate: float
    accepted: bool
    attempt: int = 1
    master_seed: int = 0
    failures: list[int] = field(default_factory=list)


def default_predicate(sample: Sample) -> bool:
    """Finite values, peaks inside the axis range, clean wire round trip."""
    from . import wirefmt

    lo, hi = sample.spec.x_range
    for c in sample.curves:
        if not (np.all(np.isfinite(c.x)) and np.all(np.isfinite(c.y))):
            return False
    if any(not lo <= p.center <= hi for p in sample.spec.peaks):
        return False
    record = emit_training_sample(sample.curves, sample.subplot_id, f"{sample.index}.svg",
                                  smooth=None if sample.spec.smooth else False)
    answer_text = json.loads(record)["conversations"][1]["value"]
    try:
        answers, diag = wirefmt.parse_answer(answer_text)
    except wirefmt.NoSubplotFound:
        return False
    return not diag.warnings and len(answers[0].lines) == len(sample.curves)


def run_batch(
    count: int,
    qc_fraction: float = 0.1,
    predicate: Callable[[Sample], bool] = default_predicate,
    *,
    master_seed: int = 0,
    types: Optional[Sequence[SpectrumType]] = None,
    max_retries: int = 3,
    workers: int = 1,
) -> tuple[list[Sample], BatchQcReport]:
    """Generate a batch and accept it only if > 95% of a random QC subset passes.

    A rejected batch is discarded and regenerated from a fresh master seed
    derived from the original one, at most ``max_retries`` more times.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0 < qc_fraction <= 1:
        raise ValueError("qc_fraction must lie in (0, 1]")
    seed = master_seed
    for attempt in range(1, max_retries + 2):
        samples = generate(count, seed, types, workers)
        rng = np.random.default_rng([seed, 0xC0FFEE])
        k = max(1, math.ceil(qc_fraction * count - 1e-9))
        picked = np.sort(rng.choice(count, size=k, replace=False))
        fails = [int(i) for i in picked if not predicate(samples[i])]
        passed = k - len(fails)
        rate = passed / k
        report = BatchQcReport(count, k / count, passed, len(fails), rate, rate > 0.95,
                               attempt, seed, fails)
        if report.accepted:
            return samples, report
        log.warning("batch seed=%d rejected (pass rate %.3f)", seed, rate)
        seed = int(np.random.SeedSequence([seed, 0xBAD, attempt]).generate_state(1, np.uint64)[0] >> 1)
    raise ExhaustedRetries(f"no batch accepted after {max_retries + 1} attempts")


def emit_training_sample(
    curves: Sequence[SpectralCurve],
    subplot_id: str,
    image_path: str,
    *,
    sampling: bool = True,
    sampling_config=None,
    smooth: Optional[bool] = None,
) -> str:
    """One JSON record: human prompt turn, serialized answer turn, image list.

    With ``sampling`` each curve is smoothed and reduced by the sampling
    pipeline before serialization; otherwise all points are written.
    ``smooth`` overrides the config's smoothing switch (profiles that skip
    smoothing pass ``False``).
    """
    from . import wirefmt
    from .pipeline import PipelineConfig, sample_points

    if not curves:
        raise ValueError("need at least one curve")
    if sampling:
        cfg = sampling_config or PipelineConfig()
        lines = tuple(sample_points(c, cfg, smooth).sampled for c in curves)
    else:
        lines = tuple(curves)
    answer = wirefmt.serialize_subplot(SubplotAnswer(subplot_id, lines))
    record = {
        "conversations": [
            {"from": "human", "value": f"<image>Underlying data for subplot {subplot_id}:"},
            {"from": "gpt", "value": answer},
        ],
        "images": [image_path],
    }
    return json.dumps(record, ensure_ascii=False)
