"""Source spans, structured diagnostics and their human/JSON rendering."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from enum import Enum


@dataclass(frozen=True, order=True)
class Span:
    """A region of source text. Lines and columns are 1-based; ``end_col`` is exclusive."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def merge(self, other: "Span") -> "Span":
        lo = min((self.start_line, self.start_col), (other.start_line, other.start_col))
        hi = max((self.end_line, self.end_col), (other.end_line, other.end_col))
        return Span(self.file, lo[0], lo[1], hi[0], hi[1])

    def contains(self, other: "Span") -> bool:
        return (self.start_line, self.start_col) <= (other.start_line, other.start_col) and (
            other.end_line,
            other.end_col,
        ) <= (self.end_line, self.end_col)

    def site(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "line": self.start_line,
            "col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }


NO_SPAN = Span("<builtin>", 1, 1, 1, 1)


class Severity(str, Enum):
    ERROR = "error"


# Stable diagnostic codes. QBxxx come from the ownership checker, the rest
# from earlier phases.
MESSAGES = {
    "QB001": "{place} already borrowed",
    "QB002": "{place} already consumed",
    "QB003": "Cannot measure qubit since it is not owned",
    "QB004": "Allocated qubit is not consumed",
    "QB005": "Qubit is conditionally consumed",
    "QB006": "Variable {place} is not defined on all paths",
    "QB007": "Cannot move {place} out of a qubit array",
}
QB003_GENERIC = "Cannot consume qubit since it is not owned"


@dataclass(frozen=True)
class Note:
    message: str
    span: Span

    def to_json(self) -> dict:
        return {"message": self.message, "span": self.span.to_json()}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span
    notes: tuple[Note, ...] = ()
    severity: Severity = Severity.ERROR

    def sort_key(self):
        return (self.span.file, self.span.start_line, self.span.start_col, self.code, self.message)

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "span": self.span.to_json(),
            "notes": [n.to_json() for n in self.notes],
        }


class QImpError(Exception):
    """Base class for compile errors that carry diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(f"{d.code}: {d.message}" for d in self.diagnostics))


class LexError(QImpError):
    def __init__(self, message: str, span: Span):
        super().__init__([Diagnostic("QL001", message, span)])
        self.span = span


class ParseError(QImpError):
    def __init__(self, message: str, span: Span, expected: frozenset[str] = frozenset()):
        if expected:
            message = f"{message} (expected {', '.join(sorted(expected))})"
        super().__init__([Diagnostic("QP001", message, span)])
        self.span = span
        self.expected = expected


class TypeCheckError(QImpError):
    pass


class InternalError(Exception):
    """A bug in the compiler itself; never caused by user input alone."""


def type_error(message: str, span: Span) -> Diagnostic:
    return Diagnostic("QT001", message, span)


# ---------------------------------------------------------------------------
# Human-readable rendering


def _use_color(stream) -> bool:
    mode = os.environ.get("QIMP_COLOR", "auto")
    if mode == "always":
        return True
    if mode == "never":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


@dataclass
class SourceMap:
    """File name -> source text, used to print excerpts."""

    files: dict[str, str] = field(default_factory=dict)

    def line(self, file: str, lineno: int) -> str | None:
        text = self.files.get(file)
        if text is None:
            return None
        lines = text.splitlines()
        if 1 <= lineno <= len(lines):
            return lines[lineno - 1]
        return None


def _excerpt(sources: SourceMap, span: Span, color: bool) -> list[str]:
    line = sources.line(span.file, span.start_line)
    if line is None:
        return []
    width = len(str(span.start_line))
    if span.end_line == span.start_line:
        n = max(1, span.end_col - span.start_col)
    else:
        n = max(1, len(line) - span.start_col + 1)
    caret = " " * (span.start_col - 1) + "^" * n
    if color:
        caret = f"\x1b[1;31m{caret}\x1b[0m"
    pad = " " * width
    return [f"{pad} |", f"{span.start_line} | {line}", f"{pad} | {caret}"]


def render(diag: Diagnostic, sources: SourceMap, stream=None) -> str:
    color = _use_color(stream if stream is not None else sys.stdout)
    head = f"error[{diag.code}]: {diag.message}"
    if color:
        head = f"\x1b[1;31merror[{diag.code}]\x1b[0m\x1b[1m: {diag.message}\x1b[0m"
    out = [head, f"  --> {diag.span.site()}"]
    out += _excerpt(sources, diag.span, color)
    for note in diag.notes:
        out.append(f"note: {note.message}")
        out.append(f"  --> {note.span.site()}")
        out += _excerpt(sources, note.span, color)
    return "\n".join(out)
