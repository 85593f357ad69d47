"""Sampling, reconstruction and scoring of spectral curves."""

from .core import (
    AxisNormalization,
    EmptyCurve,
    InvalidConfig,
    SpecreconError,
    SpectralCurve,
    SpectrumType,
    SubplotAnswer,
    canonicalize,
    dump_curves,
    fit_unit_square,
    load_curves,
)
from .judge import (
    AccuracyReport,
    EndpointConfig,
    JudgeUnavailable,
    JudgeVerdict,
    MalformedVerdict,
    QaItem,
    accuracy_report,
    build_judge_prompt,
    judge_items,
    judge_local_numeric,
    judge_remote,
)
from .metrics import (
    FidelityReport,
    LineAssignment,
    chamfer,
    fidelity,
    hausdorff,
    hungarian_assign,
    normalized_score,
    score_subplot,
    wasserstein_paired,
)
from .pipeline import PipelineConfig, run_curve, sample_points
from .preprocess import SgConfig, sg_coefficients, sg_filter, sg_smooth
from .reconstruct import CubicSpline, reconstruct, render_svg, resample_dense, spline_fit
from .sampling import (
    SampleResult,
    SamplingConfig,
    autotune_epsilon,
    merge_samples,
    rdp_simplify,
    sample_curve,
    uniform_sample,
)
from .syngen import SynthSpec, gen_spectrum, generate, run_batch, sample_type_profile
from .wirefmt import ParseDiagnostics, parse_answer, select_subplot, serialize_subplot

__version__ = "0.1.0"
