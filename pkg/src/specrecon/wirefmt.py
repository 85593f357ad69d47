"""Reader and writer for the ``<subplot>``/``<line>`` answer format.

The reader is deliberately forgiving: model outputs in the wild contain
escaped newlines, ``<line1>`` without the space, ellipses in place of
points and answers cut off mid-number. Each such deviation is recorded as
one :class:`ParseWarning` and parsing carries on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np

from .core import SpecreconError, SpectralCurve, SubplotAnswer, canonicalize


class NoSubplotFound(SpecreconError):
    pass


class EmptyAnswer(SpecreconError):
    pass


@dataclass(frozen=True)
class ParseWarning:
    kind: str
    offset: int  # byte offset into the UTF-8 input
    message: str

    def __str__(self) -> str:
        return f"{self.kind}@{self.offset}: {self.message}"


@dataclass
class ParseDiagnostics:
    warnings: list[ParseWarning] = field(default_factory=list)
    salvaged_points: int = 0
    dropped_fragments: int = 0

    def kinds(self) -> list[str]:
        return [w.kind for w in self.warnings]


_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"
_SUBPLOT_OPEN = re.compile(r"<\s*subplot\s+([^>\s]+)\s*>", re.I)
_SUBPLOT_CLOSE = re.compile(r"<\s*/\s*subplot\s*>", re.I)
_LINE_OPEN = re.compile(r"<\s*line(\s*)(-?\d+)\s*>", re.I)
_LINE_CLOSE = re.compile(r"<\s*/\s*line\s*>", re.I)
_TOKEN = re.compile(
    rf"(?P<pair>\[\s*(?P<x>{_NUM})\s*,\s*(?P<y>{_NUM})\s*\])"
    r"|(?P<ellipsis>\.{3,}|…)"
    r"|(?P<sep>[\s,;]+)"
)


class _Parser:
    def __init__(self, text: str):
        # escaped newlines become two spaces so character offsets survive
        self.raw = text
        self.text = text.replace("\\n", "  ")
        self.diag = ParseDiagnostics()

    def byte_offset(self, i: int) -> int:
        return len(self.raw[:i].encode("utf-8"))

    def warn(self, kind: str, pos: int, message: str) -> str:
        w = ParseWarning(kind, self.byte_offset(pos), message)
        self.diag.warnings.append(w)
        return str(w)

    def run(self) -> list[SubplotAnswer]:
        escapes = [m.start() for m in re.finditer(r"\\n", self.raw)]
        opens = list(_SUBPLOT_OPEN.finditer(self.text))
        if not opens:
            raise NoSubplotFound("no <subplot X> block found")
        answers = []
        for k, m in enumerate(opens):
            limit = opens[k + 1].start() if k + 1 < len(opens) else len(self.text)
            lo = 0 if k == 0 else m.start()
            notes = [
                self.warn("escaped_newline", i, "literal \\n treated as whitespace")
                for i in escapes
                if lo <= i < limit
            ]
            close = _SUBPLOT_CLOSE.search(self.text, m.end(), limit)
            if close is None:
                notes.append(self.warn("unclosed_subplot", m.start(), "missing </subplot>"))
                end = limit
            else:
                end = close.start()
            label = m.group(1).upper()
            lines = self.lines(m.end(), end, notes)
            answers.append(SubplotAnswer(label, tuple(lines), tuple(notes)))
        return answers

    def lines(self, start: int, end: int, notes: list[str]) -> list[SpectralCurve]:
        out: list[SpectralCurve] = []
        opens = [m for m in _LINE_OPEN.finditer(self.text, start, end)]
        self.stray(start, opens[0].start() if opens else end, notes)
        seen: list[int] = []
        for k, m in enumerate(opens):
            limit = opens[k + 1].start() if k + 1 < len(opens) else end
            if not m.group(1):
                notes.append(self.warn("line_tag_spacing", m.start(), f"<line{m.group(2)}> without space"))
            close = _LINE_CLOSE.search(self.text, m.end(), limit)
            if close is None:
                notes.append(self.warn("unclosed_line", m.start(), f"line {m.group(2)} has no </line>"))
                body_end = limit
            else:
                body_end = close.start()
                self.stray(close.end(), limit, notes)
            index = int(m.group(2))
            if seen and index != seen[-1] + 1:
                notes.append(self.warn("index_gap", m.start(), f"line {index} follows line {seen[-1]}"))
            seen.append(index)
            pts = self.points(m.end(), body_end, notes)
            if len(pts) < 2:
                notes.append(self.warn("short_line", m.start(), f"line {index} has {len(pts)} valid points"))
                continue
            xs = np.array([p[0] for p in pts])
            if np.any(np.diff(xs) <= 0):
                notes.append(self.warn("unsorted_points", m.start(), f"line {index} re-sorted by x"))
            out.append(canonicalize(SpectralCurve.from_points(pts, name=f"line {index}")))
        return out

    def stray(self, start: int, end: int, notes: list[str]) -> None:
        chunk = self.text[start:end]
        if chunk.strip(" \t\r\n,;"):
            self.diag.dropped_fragments += 1
            lead = len(chunk) - len(chunk.lstrip())
            notes.append(self.warn("stray_text", start + lead, f"ignored {chunk.strip()[:30]!r}"))

    def points(self, start: int, end: int, notes: list[str]) -> list[tuple[float, float]]:
        pts: list[tuple[float, float]] = []
        pos = start
        while pos < end:
            m = _TOKEN.match(self.text, pos, end)
            if m is None:
                nxt = self.text.find("[", pos + 1, end)
                frag_end = end if nxt < 0 else nxt
                frag = self.text[pos:frag_end]
                self.diag.dropped_fragments += 1
                if nxt < 0 and frag.lstrip().startswith("["):
                    notes.append(self.warn("truncated_point", pos, f"dropped {frag.strip()[:30]!r}"))
                else:
                    notes.append(self.warn("bad_fragment", pos, f"dropped {frag.strip()[:30]!r}"))
                pos = frag_end
                continue
            if m.group("pair"):
                x, y = float(m.group("x")), float(m.group("y"))
                if np.isfinite(x) and np.isfinite(y):
                    pts.append((x, y))
                    self.diag.salvaged_points += 1
            elif m.group("ellipsis"):
                self.diag.dropped_fragments += 1
                notes.append(self.warn("ellipsis", pos, "elided points skipped"))
            pos = m.end()
        return pts


def parse_answer(text: str) -> tuple[list[SubplotAnswer], ParseDiagnostics]:
    """Parse every ``<subplot>`` block in ``text``.

    Raises :class:`NoSubplotFound` only when no block is recognizable at all.
    """
    p = _Parser(text)
    answers = p.run()
    return answers, p.diag


def select_subplot(
    answers: list[SubplotAnswer], subplot_id: str | None
) -> tuple[SubplotAnswer, list[str]]:
    """Pick the block labelled ``subplot_id``; fall back to a sole block."""
    if subplot_id is None:
        return answers[0], []
    want = subplot_id.upper()
    for a in answers:
        if a.subplot_id == want:
            return a, []
    if len(answers) == 1:
        return answers[0], [f"subplot {want} not found; using sole block {answers[0].subplot_id}"]
    raise NoSubplotFound(f"subplot {want} not among {[a.subplot_id for a in answers]}")


def format_value(v: float) -> str:
    """Two decimals, ties to even on the exact binary value (so 2.675 -> 2.67)."""
    s = str(Decimal(float(v)).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))
    return "0.00" if s == "-0.00" else s


def quantize_line(line: SpectralCurve) -> SpectralCurve:
    """The line as it reads back after two-decimal emission.

    Points whose x collide after rounding are merged (mean y, re-rounded),
    so the emitted text never carries duplicate x values.
    """
    q = np.vectorize(lambda v: float(format_value(v)), otypes=[float])
    merged = canonicalize(SpectralCurve(q(line.x), q(line.y), line.name, line.x_label, line.y_label))
    return merged.with_y(q(merged.y))


def serialize_subplot(answer: SubplotAnswer) -> str:
    """Emit the canonical text: ``<line i>`` from 1, ``[x,y]`` at two decimals."""
    if not answer.lines:
        raise EmptyAnswer(f"subplot {answer.subplot_id} has no lines")
    rows = [f"<subplot {answer.subplot_id}>"]
    for i, line in enumerate(answer.lines, start=1):
        if len(line) == 0:
            raise EmptyAnswer(f"line {i} has no points")
        line = quantize_line(line)
        pts = ",".join(f"[{format_value(x)},{format_value(y)}]" for x, y in zip(line.x, line.y))
        rows.append(f"<line {i}>{pts}</line>")
    rows.append("</subplot>")
    return "\n".join(rows)
