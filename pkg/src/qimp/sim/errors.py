from __future__ import annotations

from qimp.diagnostics import Span

# Safety violations that accepted programs can never trigger.
SAFETY_KINDS = ("UseAfterFree", "DoubleBorrowAlias", "LeakAtScopeExit")
KINDS = SAFETY_KINDS + ("AssertionFailed", "NotOwned", "Unbound", "CapacityExceeded", "ArithmeticError")


class QImpRuntimeError(Exception):
    """A dynamic error raised while executing a program."""

    def __init__(self, kind: str, message: str, span: Span | None = None):
        assert kind in KINDS, kind
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message
        self.span = span

    def to_json(self, shot: int | None = None) -> dict:
        out = {"kind": self.kind, "message": self.message, "site": self.span.site() if self.span else None}
        if shot is not None:
            out["shot"] = shot
        return out
