"""QA answer judging: a local numeric check and a chat-completions judge.

The local path handles answers where truth and prediction each hold one
number; everything else goes to a remote judge model prompted with the
few-shot template in ``prompts/judge.txt``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Literal, Optional, Sequence

import httpx

from .core import SpecreconError

log = logging.getLogger(__name__)

CATEGORIES = ("L0", "L1")
LANGUAGES = ("en", "zh")
TOLERANCE = 0.05


class JudgeUnavailable(SpecreconError):
    pass


class MalformedVerdict(SpecreconError):
    pass


@dataclass(frozen=True)
class QaItem:
    question: str
    ground_truth: str
    prediction: str
    category: str = "L0"
    language: str = "en"
    id: str = ""

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"category must be one of {CATEGORIES}")
        if self.language not in LANGUAGES:
            raise ValueError(f"language must be one of {LANGUAGES}")
        if not self.ground_truth.strip():
            raise ValueError("ground_truth must be non-empty")

    @classmethod
    def from_dict(cls, d: dict) -> "QaItem":
        return cls(
            question=str(d["question"]),
            ground_truth=str(d["ground_truth"]),
            prediction=str(d.get("prediction", "")),
            category=str(d.get("category", "L0")),
            language=str(d.get("language", "en")),
            id=str(d.get("id", "")),
        )


@dataclass(frozen=True)
class JudgeVerdict:
    correct: bool
    judge_kind: Literal["remote", "local_numeric"]
    raw_response: str = ""
    retries: int = 0


# --- prompt ---------------------------------------------------------------------


def judge_template() -> str:
    return resources.files("specrecon").joinpath("prompts/judge.txt").read_text(encoding="utf-8")


_SLOTS = re.compile(r"\{QUESTION\}|\{GROUND TRUTH\}|\{PREDICTION\}")


def build_judge_prompt(item: QaItem) -> str:
    """Fill the final few-shot turn with the item's fields.

    Substitution is a single pass over the template, so placeholder-like
    text inside the item's fields is emitted literally.
    """
    values = {
        "{QUESTION}": item.question,
        "{GROUND TRUTH}": item.ground_truth,
        "{PREDICTION}": item.prediction,
    }
    return _SLOTS.sub(lambda m: values[m.group(0)], judge_template())


# --- local numeric judge --------------------------------------------------------

_NUMBER = re.compile(
    r"(?<![\w.])[-+]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:[eE][-+]?\d+)?"
    r"|(?<![\w.])[-+]?\.\d+(?:[eE][-+]?\d+)?"
)


def extract_numbers(text: str) -> list[float]:
    # "14-4" reads as two numbers, which is what we want: it is an expression
    spaced = re.sub(r"(?<=\d)([-+])(?=\d)", r" \1", text)
    return [float(m.group(0).replace(",", "")) for m in _NUMBER.finditer(spaced)]


def judge_local_numeric(item: QaItem) -> Optional[JudgeVerdict]:
    """Relative 5% check when both answers carry exactly one number.

    Returns ``None`` (not applicable) otherwise. A zero ground truth needs an
    exact zero.
    """
    truth = extract_numbers(item.ground_truth)
    pred = extract_numbers(item.prediction)
    if len(truth) != 1 or len(pred) != 1:
        return None
    t, p = truth[0], pred[0]
    ok = p == 0.0 if t == 0.0 else abs(p - t) <= TOLERANCE * abs(t)
    return JudgeVerdict(ok, "local_numeric")


# --- remote judge -----------------------------------------------------------------


@dataclass
class EndpointConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "o4-mini"
    api_key_env: str = "JUDGE_API_KEY"
    timeout: float = 60.0
    max_attempts: int = 3
    backoff: float = 1.0
    temperature: float = 0.0

    def api_key(self) -> Optional[str]:
        return os.environ.get(self.api_key_env)


def parse_verdict(content: str) -> Optional[bool]:
    token = content.strip().casefold()
    if token == "true":
        return True
    if token == "false":
        return False
    return None


class RemoteJudge:
    """Chat-completions client with bounded retries.

    ``transport`` and ``sleep`` are injectable so tests can run offline.
    """

    def __init__(
        self,
        config: EndpointConfig = EndpointConfig(),
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.sleep = sleep
        headers = {"Content-Type": "application/json"}
        key = config.api_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self.client = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            headers=headers,
            timeout=config.timeout,
            transport=transport,
        )

    def close(self) -> None:
        self.client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _request(self, prompt: str) -> str:
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        r = self.client.post("/chat/completions", json=body)
        r.raise_for_status()
        return r.json()["choices"][0]["message"]["content"] or ""

    def judge(self, item: QaItem) -> JudgeVerdict:
        prompt = build_judge_prompt(item)
        last_error: Optional[Exception] = None
        last_content: Optional[str] = None
        for attempt in range(self.config.max_attempts):
            if attempt:
                self.sleep(self.config.backoff * 2 ** (attempt - 1))
            try:
                content = self._request(prompt)
            except (httpx.TransportError, httpx.HTTPStatusError, KeyError, ValueError) as e:
                log.warning("judge request failed (attempt %d): %s", attempt + 1, e)
                last_error, last_content = e, None
                continue
            verdict = parse_verdict(content)
            if verdict is not None:
                return JudgeVerdict(verdict, "remote", content, retries=attempt)
            log.warning("judge returned %r (attempt %d)", content[:40], attempt + 1)
            last_error, last_content = None, content
        if last_content is not None:
            raise MalformedVerdict(f"judge answered {last_content[:60]!r}")
        raise JudgeUnavailable(f"judge unreachable: {last_error}")


def judge_remote(item: QaItem, config: EndpointConfig = EndpointConfig(), **kw) -> JudgeVerdict:
    with RemoteJudge(config, **kw) as j:
        return j.judge(item)


def judge_items(
    items: Sequence[QaItem],
    mode: Literal["local", "remote", "auto"] = "auto",
    remote: Optional[RemoteJudge] = None,
    max_in_flight: int = 4,
) -> list[tuple[QaItem, Optional[JudgeVerdict]]]:
    """Judge every item; result order follows ``items``.

    ``local`` leaves non-numeric items unjudged (``None``); ``auto`` sends
    them to ``remote``.
    """

    def one(item: QaItem) -> Optional[JudgeVerdict]:
        if mode in ("local", "auto"):
            v = judge_local_numeric(item)
            if v is not None or mode == "local":
                return v
        if remote is None:
            raise JudgeUnavailable("no remote judge configured")
        return remote.judge(item)

    if max_in_flight <= 1 or mode == "local":
        verdicts = [one(i) for i in items]
    else:
        with ThreadPoolExecutor(max_in_flight) as pool:
            verdicts = list(pool.map(one, items))
    return list(zip(items, verdicts))


# --- accuracy tables --------------------------------------------------------------

COLUMNS = [("en", "L0"), ("en", "L1"), ("zh", "L0"), ("zh", "L1")]
COLUMN_NAMES = ["en-L0", "en-L1", "zh-L0", "zh-L1"]


@dataclass
class AccuracyReport:
    counts: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict)  # (correct, total)
    overall_mode: str = "mean"
    unjudged: int = 0

    def cell(self, language: str, category: str) -> Optional[float]:
        c, n = self.counts.get((language, category), (0, 0))
        return c / n if n else None

    @property
    def correct(self) -> int:
        return sum(c for c, _ in self.counts.values())

    @property
    def total(self) -> int:
        return sum(n for _, n in self.counts.values())

    @property
    def overall(self) -> Optional[float]:
        if self.overall_mode == "pooled":
            return self.correct / self.total if self.total else None
        cells = [v for v in (self.cell(*k) for k in COLUMNS) if v is not None]
        return sum(cells) / len(cells) if cells else None

    def row(self) -> list[Optional[float]]:
        return [self.cell(*k) for k in COLUMNS] + [self.overall]

    def to_markdown(self, model: str = "model") -> str:
        def f(v):
            return "-" if v is None else f"{v:.4f}"

        head = "| Model | English (en) L0 | English (en) L1 | Chinese (zh) L0 | Chinese (zh) L1 | Overall |"
        sep = "|---|---|---|---|---|---|"
        return "\n".join([head, sep, "| " + " | ".join([model] + [f(v) for v in self.row()]) + " |"]) + "\n"

    def to_csv(self, model: str = "model") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model"] + COLUMN_NAMES + ["overall"])
        w.writerow([model] + ["" if v is None else f"{v:.4f}" for v in self.row()])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "cells": {
                f"{lang}-{cat}": {"correct": c, "total": n, "accuracy": c / n if n else None}
                for (lang, cat), (c, n) in sorted(self.counts.items())
            },
            "overall": self.overall,
            "overall_mode": self.overall_mode,
            "correct": self.correct,
            "total": self.total,
            "unjudged": self.unjudged,
        }


def accuracy_report(
    verdicts: Iterable[tuple[QaItem, Optional[JudgeVerdict]]], overall: str = "mean"
) -> AccuracyReport:
    """Per (language, category) accuracy; ``overall`` is ``mean`` of cells or ``pooled``."""
    if overall not in ("mean", "pooled"):
        raise ValueError("overall must be 'mean' or 'pooled'")
    counts: dict[tuple[str, str], list[int]] = {}
    skipped = 0
    for item, v in verdicts:
        if v is None:
            skipped += 1
            continue
        cell = counts.setdefault((item.language, item.category), [0, 0])
        cell[0] += int(v.correct)
        cell[1] += 1
    return AccuracyReport({k: (c, n) for k, (c, n) in counts.items()}, overall, skipped)


def load_items(path) -> list[QaItem]:
    with open(path, encoding="utf-8") as fh:
        return [QaItem.from_dict(json.loads(line)) for line in fh if line.strip()]
