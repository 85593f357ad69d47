"""Command-line front end.

Exit codes are stable:

====  ===============================================
0     success
2     configuration error (bad flag, bad TOML, bad value)
3     input error (missing or unreadable input)
4     partial failure (some files failed, others were written)
5     nothing to do (no inputs found)
====  ===============================================
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from importlib import metadata
from pathlib import Path
from typing import Any, Optional, Sequence

import tomli

from . import judge as judge_mod
from .core import (
    InvalidConfig,
    SpecreconError,
    SpectralCurve,
    SpectrumType,
    SubplotAnswer,
    canonicalize,
    dump_curves,
    load_curves,
)
from .metrics import fidelity, score_subplot
from .pipeline import (
    ABLATION_ARMS,
    METRICS,
    PipelineConfig,
    SuiteCurve,
    map_ordered,
    run_ablation,
    run_curve,
    sample_points,
    summarize,
)
from .preprocess import SgConfig, sg_smooth
from .reconstruct import reconstruct, render_svg, uniform_grid
from .sampling import SamplingConfig
from .syngen import emit_training_sample, run_batch
from .wirefmt import NoSubplotFound, parse_answer, select_subplot

log = logging.getLogger("specrecon")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_PARTIAL = 4
EXIT_NOTHING = 5

COLUMN_TITLES = {
    "cd": "Score-Chamfer Distance",
    "hd": "Score-Hausdorff Distance",
    "wd": "Score-Wasserstein Distance",
}
CURVE_SUFFIXES = (".json", ".csv")
RESERVED = {"manifest.json", "qc.json", "summary.json", "ablation.json", "scores.json", "accuracy.json"}


class ConfigError(SpecreconError):
    pass


class InputError(SpecreconError):
    pass


# --- config -------------------------------------------------------------------------


def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"bad TOML in {path}: {e}") from e


def _pick(flag, table: dict, key: str, default=None):
    return flag if flag is not None else table.get(key, default)


def pipeline_config(args, conf: dict) -> PipelineConfig:
    """Merge ``[sg]``, ``[sampling]`` and ``[pipeline]`` tables with flags (flags win)."""
    sg_t, sa_t, pi_t = conf.get("sg", {}), conf.get("sampling", {}), conf.get("pipeline", {})
    g = lambda name: getattr(args, name, None)  # noqa: E731
    try:
        sg = SgConfig(
            window=_pick(g("window"), sg_t, "window", 11),
            poly_order=_pick(g("poly_order"), sg_t, "poly_order", 3),
        )
        eps = _pick(g("epsilon"), sa_t, "epsilon")
        pts = _pick(g("target_points"), sa_t, "target_points")
        frac = _pick(g("target_fraction"), sa_t, "target_fraction")
        if eps is None and pts is None and frac is None:
            frac = PipelineConfig().sampling.target_fraction
        elif g("epsilon") is not None or g("target_points") is not None or g("target_fraction") is not None:
            # a flag picks the sampling mode and overrides whatever the file chose
            eps, pts, frac = g("epsilon"), g("target_points"), g("target_fraction")
        sampling = SamplingConfig(
            baseline_fraction=_pick(g("baseline_fraction"), sa_t, "baseline_fraction", 0.05),
            epsilon=eps,
            target_points=pts,
            target_fraction=frac,
        )
        no_smooth = g("no_smooth")
        cfg = PipelineConfig(
            sg=sg,
            sampling=sampling,
            smooth=False if no_smooth else bool(pi_t.get("smooth", True)),
            grid=_pick(g("grid"), pi_t, "grid", "original"),
            normalize=bool(pi_t.get("normalize", True)),
            strict=bool(g("strict") or pi_t.get("strict", False)),
        )
        if cfg.grid != "original":
            kind, _, k = cfg.grid.partition(":")
            if kind != "uniform" or not k.isdigit() or int(k) < 2:
                raise InvalidConfig(f"bad grid spec {cfg.grid!r}")
        return cfg
    except (InvalidConfig, TypeError) as e:
        raise ConfigError(str(e)) from e


def config_snapshot(cfg: PipelineConfig) -> dict:
    return asdict(cfg)


# --- manifest -------------------------------------------------------------------------


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


class RunManifest:
    """Provenance record written once per batch run as ``manifest.json``."""

    def __init__(self, argv: Sequence[str], config: dict, master_seed: Optional[int] = None):
        self.argv = list(argv)
        self.config = config
        self.master_seed = master_seed
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def add_input(self, path: Path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def write_output(self, path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.outputs[path.name] = hashlib.sha256(data).hexdigest()

    def to_dict(self) -> dict:
        return {
            "command_line": self.argv,
            "config": self.config,
            "master_seed": self.master_seed,
            "tool_version": tool_version(),
            "input_digests": dict(sorted(self.inputs.items())),
            "output_digests": dict(sorted(self.outputs.items())),
            "wall_time_s": round(time.perf_counter() - self.t0, 3),
        }

    def save(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "manifest.json").write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False, default=_plain) + "\n"


def _plain(o):
    if hasattr(o, "item"):
        return o.item()
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# --- input helpers --------------------------------------------------------------------


def read_curves(path: str) -> list[SpectralCurve]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    try:
        curves = load_curves(p)
    except (ValueError, KeyError, IndexError, SpecreconError) as e:
        raise InputError(f"cannot read curves from {path}: {e}") from e
    if not curves:
        raise InputError(f"{path} holds no curves")
    return curves


def curve_files(path: str) -> list[Path]:
    p = Path(path)
    if p.is_file():
        return [p]
    if p.is_dir():
        return sorted(
            f for f in p.iterdir()
            if f.suffix.lower() in CURVE_SUFFIXES and f.name not in RESERVED
            and not f.name.endswith((".report.json", ".sampled.json", ".reconstructed.json"))
        )
    raise InputError(f"no such file or directory: {path}")


def write_or_print(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def score_table(rows: dict[str, dict], metrics: Sequence[str], key: str = "mean_score_{}") -> str:
    """Markdown table in the fidelity-comparison layout, 4 decimals."""
    head = "| Model | " + " | ".join(COLUMN_TITLES[m] for m in metrics) + " |"
    sep = "|---|" + "---|" * len(metrics)
    lines = [head, sep]
    for name, summary in rows.items():
        cells = []
        for m in metrics:
            v = summary.get(key.format(m))
            cells.append("-" if v is None else f"{v:.4f}")
        lines.append(f"| {name} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def parse_metrics(text: str) -> list[str]:
    ms = [m.strip().lower() for m in text.split(",") if m.strip()]
    bad = [m for m in ms if m not in METRICS]
    if bad or not ms:
        raise ConfigError(f"metrics must be drawn from {','.join(METRICS)}")
    return ms


# --- single-file commands ---------------------------------------------------------------


def cmd_smooth(args, conf) -> int:
    cfg = pipeline_config(args, conf)
    curves = [sg_smooth(canonicalize(c), cfg.sg) for c in read_curves(args.input)]
    write_or_print(dump_curves(curves), args.output)
    return EXIT_OK


def cmd_sample(args, conf) -> int:
    cfg = pipeline_config(args, conf)
    results = [sample_points(c, cfg) for c in read_curves(args.input)]
    for r in results:
        for w in r.warnings:
            log.warning(w)
    write_or_print(dump_curves([r.sampled for r in results]), args.output)
    if args.stats:
        write_or_print(_json([r.stats() for r in results]), args.stats)
    return EXIT_OK


def cmd_reconstruct(args, conf) -> int:
    cfg = pipeline_config(args, conf)
    sampled = [canonicalize(c) for c in read_curves(args.input)]
    refs = read_curves(args.reference) if args.reference else None
    if refs is not None and len(refs) != len(sampled):
        raise InputError("reference and sampled files hold different numbers of curves")
    out = []
    for i, s in enumerate(sampled):
        if refs is not None:
            grid = canonicalize(refs[i]).x
        elif cfg.grid == "original":
            grid = s.x
        else:
            grid = uniform_grid(s, int(cfg.grid.split(":")[1]))
        out.append(reconstruct(s, grid=grid))
    write_or_print(dump_curves(out), args.output)
    return EXIT_OK


def cmd_render(args, conf) -> int:
    try:
        style = SpectrumType.parse(args.type)
    except (ValueError, KeyError) as e:
        raise ConfigError(str(e)) from e
    svg = render_svg([canonicalize(c) for c in read_curves(args.input)], style)
    write_or_print(svg, args.output)
    return EXIT_OK


def cmd_score(args, conf) -> int:
    cfg = pipeline_config(args, conf)
    truth = [canonicalize(c) for c in read_curves(args.truth)]
    pred = [canonicalize(c) for c in read_curves(args.pred)]
    if len(truth) == 1 and len(pred) == 1:
        doc = fidelity(truth[0], pred[0], normalize=cfg.normalize, strict=cfg.strict).to_dict()
    else:
        doc = {}
        for k in METRICS:
            s = score_subplot(pred, truth, k, normalize=cfg.normalize, strict=cfg.strict)
            doc[f"score_{k}"] = s.score
        doc["pairs"] = [[i, j] for i, j, _ in s.assignment.pairs]
    write_or_print(_json(doc), args.output)
    return EXIT_OK


def cmd_parse(args, conf) -> int:
    p = Path(args.input)
    if not p.is_file():
        raise InputError(f"no such file: {args.input}")
    text = p.read_text(encoding="utf-8")
    try:
        answers, diag = parse_answer(text)
        chosen, notes = select_subplot(answers, args.subplot)
    except NoSubplotFound as e:
        raise InputError(str(e)) from e
    doc = {
        "subplot_id": chosen.subplot_id,
        "curves": [c.to_dict() for c in chosen.lines],
        "diagnostics": list(chosen.diagnostics) + notes,
        "salvaged_points": diag.salvaged_points,
        "dropped_fragments": diag.dropped_fragments,
    }
    write_or_print(_json(doc), args.output)
    return EXIT_OK


# --- batch commands ----------------------------------------------------------------------


def _workers(args) -> int:
    w = getattr(args, "workers", None)
    return max(1, w if w is not None else (os.cpu_count() or 1))


def cmd_gen(args, conf) -> int:
    gen_t = conf.get("gen", {})
    seed = _pick(args.seed, gen_t, "seed", 0)
    count = _pick(args.count, gen_t, "count", 70)
    types_text = _pick(args.types, gen_t, "types")
    try:
        types = [SpectrumType.parse(t) for t in types_text.split(",")] if types_text else None
    except (ValueError, KeyError) as e:
        raise ConfigError(str(e)) from e
    if count < 1:
        raise ConfigError("count must be >= 1")
    cfg = pipeline_config(args, conf)
    out = Path(args.out)
    manifest = RunManifest(sys.argv, {"count": count, "types": types_text, **config_snapshot(cfg)}, seed)
    samples, qc = run_batch(count, _pick(args.qc_fraction, gen_t, "qc_fraction", 0.1),
                            master_seed=seed, types=types, workers=_workers(args))
    records = map_ordered(
        lambda s: emit_training_sample(s.curves, s.subplot_id, f"{s.index}.svg",
                                       sampling=not args.full_resolution, sampling_config=cfg,
                                       smooth=None if s.spec.smooth else False),
        samples,
        _workers(args),
    )
    for s in samples:
        manifest.write_output(out / f"{s.index}.json", s.to_json())
        manifest.write_output(out / f"{s.index}.svg", render_svg(s.curves, s.spec.type))
    manifest.write_output(out / "train.jsonl", "".join(r + "\n" for r in records))
    manifest.write_output(out / "qc.json", _json(asdict(qc)))
    manifest.master_seed = qc.master_seed
    manifest.save(out)
    print(f"wrote {len(samples)} samples to {out} (qc pass rate {qc.pass_rate:.3f})")
    return EXIT_OK


def profile_smooth(path: Path) -> Optional[bool]:
    """``False`` when a generated sample's profile disables smoothing, else ``None``."""
    if path.suffix.lower() != ".json":
        return None
    try:
        doc = json.loads(path.read_text())
    except ValueError:
        return None
    spec = doc.get("spec") if isinstance(doc, dict) else None
    if isinstance(spec, dict) and spec.get("smooth") is False:
        return False
    return None


def _pipeline_file(path: Path, cfg: PipelineConfig):
    try:
        curves = load_curves(path)
        if not curves:
            raise InputError("no curves")
        smooth = profile_smooth(path)
        results = [run_curve(c, cfg, smooth) for c in curves]
        return path, results, None
    except (SpecreconError, ValueError, KeyError, IndexError, OSError) as e:
        return path, None, f"{type(e).__name__}: {e}"


def cmd_pipeline(args, conf) -> int:
    cfg = pipeline_config(args, conf)
    files = curve_files(args.input)
    out = Path(args.out)
    manifest = RunManifest(sys.argv, config_snapshot(cfg))
    for f in files:
        manifest.add_input(f)
    results = map_ordered(lambda f: _pipeline_file(f, cfg), files, _workers(args))
    reports, failures = [], {}
    for path, res, err in results:
        if err is not None:
            log.error("%s: %s", path, err)
            failures[path.name] = err
            continue
        stem = path.stem
        manifest.write_output(out / f"{stem}.sampled.json", dump_curves([r.sample.sampled for r in res]))
        manifest.write_output(out / f"{stem}.reconstructed.json", dump_curves([r.reconstructed for r in res]))
        doc = [
            {**r.report.to_dict(), **r.sample.stats(), "dropped_nonfinite": r.dropped_nonfinite,
             "warnings": list(r.sample.warnings)}
            for r in res
        ]
        manifest.write_output(out / f"{stem}.report.json", _json(doc))
        reports += [r.report for r in res]
    summary = {**summarize(reports), "n_files": len(files), "failures": failures}
    manifest.write_output(out / "summary.json", _json(summary))
    manifest.save(out)
    if not files:
        print("no input curves found")
        return EXIT_NOTHING
    print(score_table({"pipeline": summary}, METRICS), end="")
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_ablation(args, conf) -> int:
    cfg = pipeline_config(args, conf)
    metrics = parse_metrics(args.metric)
    files = curve_files(args.dataset)
    files = [f for f in files if f.suffix == ".json"]
    manifest = RunManifest(sys.argv, config_snapshot(cfg))
    curves, failures = [], {}
    for f in files:
        manifest.add_input(f)
        try:
            smooth = profile_smooth(f)
            curves += [SuiteCurve(None, canonicalize(c), smooth) for c in load_curves(f)]
        except (SpecreconError, ValueError, KeyError) as e:
            failures[f.name] = f"{type(e).__name__}: {e}"
    if not curves:
        print("no curves found in dataset")
        return EXIT_NOTHING
    arms = args.arm or list(ABLATION_ARMS)
    unknown = [a for a in arms if a not in ABLATION_ARMS]
    if unknown:
        raise ConfigError(f"unknown ablation arm(s) {unknown}; choose from {list(ABLATION_ARMS)}")
    rows = run_ablation(curves, cfg, arms, _workers(args))
    table = score_table(rows, metrics)
    sys.stdout.write(table)
    if args.out:
        out = Path(args.out)
        manifest.write_output(out / "ablation.md", table)
        manifest.write_output(out / "ablation.json", _json({"rows": rows, "failures": failures}))
        manifest.save(out)
    return EXIT_PARTIAL if failures else EXIT_OK


def _truth_answer(path: Path) -> SubplotAnswer:
    data = json.loads(path.read_text())
    sid = data.get("subplot_id") if isinstance(data, dict) else None
    return SubplotAnswer(sid or "A", tuple(canonicalize(c) for c in load_curves(path)))


def score_prediction(text: str, truth: SubplotAnswer, cfg: PipelineConfig) -> dict:
    """Scores of one wire-format prediction; unparseable text scores 0."""
    zero = {f"score_{k}": 0.0 for k in METRICS}
    try:
        answers, _ = parse_answer(text)
        chosen, notes = select_subplot(answers, truth.subplot_id)
    except NoSubplotFound as e:
        return {**zero, "lines": 0, "diagnostics": [f"NoSubplotFound: {e}"]}
    doc: dict = {"lines": len(chosen.lines), "diagnostics": list(chosen.diagnostics) + notes}
    for k in METRICS:
        s = score_subplot(chosen, truth, k, normalize=cfg.normalize, strict=cfg.strict,
                          penalize_unmatched=True)
        doc[f"score_{k}"] = s.score
        doc["diagnostics"] += [d for d in s.diagnostics if d not in doc["diagnostics"]]
    return doc


def _pairs(pred_dir: Path, truth_dir: Path, pairs_csv: Optional[str]) -> list[tuple[str, Path, Path]]:
    if pairs_csv:
        with open(pairs_csv, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        if rows and rows[0][:2] == ["pred", "truth"]:
            rows = rows[1:]
        return [(Path(p).stem, pred_dir / p, truth_dir / t) for p, t, *_ in rows]
    return [(f.stem, f, truth_dir / f"{f.stem}.json") for f in sorted(pred_dir.glob("*.txt"))]


def cmd_score_model_outputs(args, conf) -> int:
    cfg = pipeline_config(args, conf)
    metrics = parse_metrics(args.metric)
    pred_root, truth_dir = Path(args.pred), Path(args.truth)
    if not pred_root.is_dir() or not truth_dir.is_dir():
        raise InputError("--pred and --truth must be directories")
    subdirs = sorted(d for d in pred_root.iterdir() if d.is_dir())
    models = [(d.name, d) for d in subdirs] or [(pred_root.name, pred_root)]
    manifest = RunManifest(sys.argv, config_snapshot(cfg))
    rows, detail, missing = {}, {}, []
    for model, d in models:
        per_file = {}
        for name, pf, tf in _pairs(d, truth_dir, args.pairs):
            if not pf.is_file() or not tf.is_file():
                missing.append(f"{model}/{name}")
                continue
            manifest.add_input(pf)
            manifest.add_input(tf)
            per_file[name] = score_prediction(pf.read_text(encoding="utf-8"), _truth_answer(tf), cfg)
        if per_file:
            rows[model] = {
                f"mean_score_{k}": sum(v[f"score_{k}"] for v in per_file.values()) / len(per_file)
                for k in METRICS
            }
            detail[model] = per_file
    if not rows:
        print("no prediction/truth pairs found")
        return EXIT_NOTHING
    table = score_table(rows, metrics)
    sys.stdout.write(table)
    if args.out:
        out = Path(args.out)
        manifest.write_output(out / "leaderboard.md", table)
        manifest.write_output(out / "scores.json", _json({"rows": rows, "files": detail, "missing": missing}))
        manifest.save(out)
    return EXIT_PARTIAL if missing else EXIT_OK


def cmd_eval_qa(args, conf) -> int:
    j_t = conf.get("judge", {})
    p = Path(args.items)
    if not p.is_file():
        raise InputError(f"no such file: {args.items}")
    try:
        items = judge_mod.load_items(p)
    except (ValueError, KeyError) as e:
        raise InputError(f"bad QA items in {p}: {e}") from e
    if not items:
        print("no QA items")
        return EXIT_NOTHING
    mode = _pick(args.judge, j_t, "mode", "auto")
    endpoint = judge_mod.EndpointConfig(
        base_url=_pick(args.base_url, j_t, "base_url", judge_mod.EndpointConfig.base_url),
        model=_pick(args.judge_model, j_t, "model", judge_mod.EndpointConfig.model),
    )
    remote = judge_mod.RemoteJudge(endpoint) if mode != "local" else None
    try:
        verdicts = judge_mod.judge_items(items, mode, remote, _pick(args.max_in_flight, j_t, "max_in_flight", 4))
    except (judge_mod.JudgeUnavailable, judge_mod.MalformedVerdict) as e:
        log.error("%s", e)
        return EXIT_PARTIAL
    finally:
        if remote is not None:
            remote.close()
    report = judge_mod.accuracy_report(verdicts, args.overall)
    sys.stdout.write(report.to_markdown(args.model))
    if args.report:
        out = Path(args.report)
        manifest = RunManifest(sys.argv, {"judge": mode, "endpoint": asdict(endpoint), "overall": args.overall})
        manifest.add_input(p)
        manifest.write_output(out / "accuracy.md", report.to_markdown(args.model))
        manifest.write_output(out / "accuracy.csv", report.to_csv(args.model))
        manifest.write_output(out / "accuracy.json", _json(report.to_dict()))
        manifest.write_output(out / "verdicts.jsonl", "".join(
            json.dumps({"id": i.id, "correct": v.correct if v else None,
                        "judge_kind": v.judge_kind if v else None}, sort_keys=True) + "\n"
            for i, v in verdicts
        ))
        manifest.save(out)
    return EXIT_PARTIAL if report.unjudged else EXIT_OK


def cmd_report(args, conf) -> int:
    """Collect ``summary.json`` files from pipeline runs into one table."""
    metrics = parse_metrics(args.metric)
    rows = {}
    for d in args.runs:
        f = Path(d) / "summary.json"
        if not f.is_file():
            raise InputError(f"no summary.json in {d}")
        rows[Path(d).name] = json.loads(f.read_text())
    if not rows:
        return EXIT_NOTHING
    write_or_print(score_table(rows, metrics), args.output)
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------------------


def _pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--window", type=int, help="Savitzky-Golay window (odd)")
    g.add_argument("--poly-order", type=int, dest="poly_order")
    g.add_argument("--no-smooth", action="store_true", dest="no_smooth")
    g.add_argument("--baseline-fraction", type=float, dest="baseline_fraction")
    mx = g.add_mutually_exclusive_group()
    mx.add_argument("--epsilon", type=float, help="fixed RDP tolerance in unit-square units")
    mx.add_argument("--target-points", type=int, dest="target_points")
    mx.add_argument("--target-fraction", type=float, dest="target_fraction")
    g.add_argument("--grid", help="'original' or 'uniform:K'")
    g.add_argument("--strict", action="store_true", help="squared-diameter normalizer for every metric")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specrecon", description="Spectral curve sampling, reconstruction and scoring.")
    ap.add_argument("--config", help="TOML config file; flags override it")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, io=True):
        p = sub.add_parser(name, help=help_)
        if io:
            p.add_argument("input")
            p.add_argument("-o", "--output")
        p.set_defaults(fn=fn)
        return p

    p = add("smooth", cmd_smooth, "Savitzky-Golay smooth a curve file")
    _pipeline_flags(p)
    p = add("sample", cmd_sample, "baseline + RDP sample a curve file")
    _pipeline_flags(p)
    p.add_argument("--stats", help="write per-curve sampling stats here")
    p = add("reconstruct", cmd_reconstruct, "spline-reconstruct sampled curves")
    _pipeline_flags(p)
    p.add_argument("--reference", help="evaluate on this file's x grid")
    p = add("render", cmd_render, "render curves to SVG")
    p.add_argument("--type", default="IR")
    p = add("score", cmd_score, "fidelity scores of predicted vs true curves", io=False)
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("-o", "--output")
    _pipeline_flags(p)
    p = add("parse", cmd_parse, "parse a wire-format answer")
    p.add_argument("--subplot")

    p = add("gen", cmd_gen, "generate a synthetic dataset", io=False)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--types", help="comma-separated spectrum types")
    p.add_argument("--qc-fraction", type=float, dest="qc_fraction")
    p.add_argument("--full-resolution", action="store_true", help="train.jsonl without sampling")
    p.add_argument("--workers", type=int)
    _pipeline_flags(p)

    p = add("pipeline", cmd_pipeline, "smooth, sample, reconstruct and score curve files", io=False)
    p.add_argument("input", help="curve file or directory")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    _pipeline_flags(p)

    p = add("ablation", cmd_ablation, "fidelity comparison table over a dataset", io=False)
    p.add_argument("dataset")
    p.add_argument("--metric", default="cd,hd,wd")
    p.add_argument("--arm", action="append", help=f"one of {list(ABLATION_ARMS)} (repeatable)")
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    _pipeline_flags(p)

    p = add("score-model-outputs", cmd_score_model_outputs, "score wire-format model outputs", io=False)
    p.add_argument("--pred", required=True, help="dir of NAME.txt, or of one subdir per model")
    p.add_argument("--truth", required=True, help="dir of NAME.json")
    p.add_argument("--pairs", help="CSV of pred,truth filenames overriding name pairing")
    p.add_argument("--metric", default="cd,hd,wd")
    p.add_argument("--out")
    _pipeline_flags(p)

    p = add("eval-qa", cmd_eval_qa, "judge QA predictions and tabulate accuracy", io=False)
    p.add_argument("--items", required=True, help="JSONL of QA items")
    p.add_argument("--judge", choices=["local", "remote", "auto"])
    p.add_argument("--report")
    p.add_argument("--overall", choices=["mean", "pooled"], default="mean")
    p.add_argument("--model", default="model", help="row label")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--judge-model", dest="judge_model")
    p.add_argument("--max-in-flight", type=int, dest="max_in_flight")

    p = add("report", cmd_report, "tabulate pipeline run summaries", io=False)
    p.add_argument("runs", nargs="+", help="pipeline output directories")
    p.add_argument("--metric", default="cd,hd,wd")
    p.add_argument("-o", "--output")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args, load_config(args.config))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except SpecreconError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
