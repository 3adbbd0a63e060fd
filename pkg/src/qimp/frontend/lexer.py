"""Indentation-aware tokenizer for QImp source text."""

from __future__ import annotations

import re
from dataclasses import dataclass

from qimp.diagnostics import LexError, Span

KEYWORDS = {
    "def": "DEF",
    "class": "CLASS",
    "if": "IF",
    "elif": "ELIF",
    "else": "ELSE",
    "while": "WHILE",
    "for": "FOR",
    "in": "IN",
    "return": "RETURN",
    "assert": "ASSERT",
    "True": "TRUE",
    "False": "FALSE",
    "and": "AND",
    "or": "OR",
    "not": "NOT",
    "None": "NONE",
    "pass": "PASS",
}

# Longest operators first.
OPERATORS = [
    ("->", "ARROW"),
    ("==", "EQEQ"),
    ("!=", "NOTEQ"),
    ("<=", "LE"),
    (">=", "GE"),
    ("+=", "PLUS_EQ"),
    ("-=", "MINUS_EQ"),
    ("*=", "STAR_EQ"),
    ("/=", "SLASH_EQ"),
    ("+", "PLUS"),
    ("-", "MINUS"),
    ("*", "STAR"),
    ("/", "SLASH"),
    ("<", "LT"),
    (">", "GT"),
    ("=", "EQUALS"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    ("[", "LBRACKET"),
    ("]", "RBRACKET"),
    (",", "COMMA"),
    (":", "COLON"),
    (".", "DOT"),
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_NUMBER = re.compile(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")
_OWNED = re.compile(r"@owned(?![A-Za-z_0-9])")
_OPENERS = {"(", "["}
_CLOSERS = {")", "]"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span

    def __repr__(self) -> str:
        if self.kind in ("IDENT", "INT", "FLOAT"):
            return f"{self.kind} {self.text}"
        return self.kind


def _indent_width(prefix: str) -> int:
    col = 0
    for ch in prefix:
        col = (col // 8 + 1) * 8 if ch == "\t" else col + 1
    return col


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens.

    Blocks are delimited Python-style with INDENT/DEDENT. A NEWLINE token
    separates consecutive logical lines; no NEWLINE follows the last one and
    there is no end-of-file token, so an empty source yields ``[]``.
    Comments and blank lines produce nothing.
    """
    tokens: list[Token] = []
    indents = [0]
    depth = 0
    pending_newline: Span | None = None
    lines = source.splitlines()

    for lineno, line in enumerate(lines, start=1):
        stripped = line.lstrip(" \t")
        if depth == 0:
            if not stripped or stripped.startswith("#"):
                continue
            width = _indent_width(line[: len(line) - len(stripped)])
            start_col = len(line) - len(stripped) + 1
            if pending_newline is not None:
                tokens.append(Token("NEWLINE", "", pending_newline))
                pending_newline = None
            here = Span(file, lineno, start_col, lineno, start_col)
            if width > indents[-1]:
                if not tokens:
                    raise LexError("unexpected indentation", here)
                indents.append(width)
                tokens.append(Token("INDENT", "", here))
            else:
                while width < indents[-1]:
                    indents.pop()
                    tokens.append(Token("DEDENT", "", here))
                if width != indents[-1]:
                    raise LexError("inconsistent dedent", here)
            col = start_col - 1
        else:
            col = 0

        while col < len(line):
            ch = line[col]
            if ch in " \t":
                col += 1
                continue
            if ch == "#":
                break
            start = col + 1
            m = _IDENT.match(line, col)
            if m:
                text = m.group()
                tokens.append(Token(KEYWORDS.get(text, "IDENT"), text, Span(file, lineno, start, lineno, m.end() + 1)))
                col = m.end()
                continue
            m = _NUMBER.match(line, col)
            if m:
                text = m.group()
                kind = "FLOAT" if any(c in text for c in ".eE") else "INT"
                tokens.append(Token(kind, text, Span(file, lineno, start, lineno, m.end() + 1)))
                col = m.end()
                continue
            m = _OWNED.match(line, col)
            if m:
                tokens.append(Token("AT_OWNED", m.group(), Span(file, lineno, start, lineno, m.end() + 1)))
                col = m.end()
                continue
            for text, kind in OPERATORS:
                if line.startswith(text, col):
                    if text in _OPENERS:
                        depth += 1
                    elif text in _CLOSERS:
                        if depth == 0:
                            raise LexError(f"unmatched '{text}'", Span(file, lineno, start, lineno, start + 1))
                        depth -= 1
                    tokens.append(Token(kind, text, Span(file, lineno, start, lineno, start + len(text))))
                    col += len(text)
                    break
            else:
                raise LexError(f"illegal character {ch!r}", Span(file, lineno, start, lineno, start + 1))
        if depth == 0 and tokens:
            last = tokens[-1].span
            pending_newline = Span(file, last.end_line, last.end_col, last.end_line, last.end_col)

    if depth != 0:
        n = len(lines)
        raise LexError("unclosed bracket at end of input", Span(file, n, 1, n, 1))
    end = tokens[-1].span if tokens else None
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token("DEDENT", "", Span(file, end.end_line, end.end_col, end.end_line, end.end_col)))
    return tokens
