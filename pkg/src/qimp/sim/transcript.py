"""Execution transcripts shared by both interpreters."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from qimp.typesys import ArrayType, StructType, TupleType


@dataclass
class Shot:
    measurements: list[tuple[str, int]] = field(default_factory=list)
    assertions: list[tuple[str, bool]] = field(default_factory=list)
    result: object = None

    def to_json(self) -> dict:
        return {
            "measurements": [{"site": s, "bit": b} for s, b in self.measurements],
            "assertions": [{"site": s, "ok": ok} for s, ok in self.assertions],
            "result": self.result,
        }


@dataclass
class Transcript:
    shots: list[Shot] = field(default_factory=list)
    error: dict | None = None

    def to_json(self) -> dict:
        return {"shots": [s.to_json() for s in self.shots], "error": self.error}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    def __eq__(self, other):
        return isinstance(other, Transcript) and self.to_json() == other.to_json()


def value_to_json(v, ty):
    """Classical result value -> JSON data. Structs become objects, arrays lists."""
    if ty is None:
        return None
    if isinstance(ty, TupleType):
        return [value_to_json(x, t) for x, t in zip(v, ty.elems)]
    if isinstance(ty, ArrayType):
        return [value_to_json(x, ty.elem) for x in v]
    if isinstance(ty, StructType):
        items = v.items() if isinstance(v, dict) else zip((n for n, _ in ty.fields), v)
        vals = dict(items)
        return {n: value_to_json(vals[n], t) for n, t in ty.fields}
    return v


def first_divergence(a: Transcript, b: Transcript) -> str | None:
    """Human description of where two transcripts first differ, or None."""
    ja, jb = a.to_json(), b.to_json()
    if ja == jb:
        return None
    for i, (sa, sb) in enumerate(zip(ja["shots"], jb["shots"])):
        if sa != sb:
            for key in ("measurements", "assertions", "result"):
                if sa[key] != sb[key]:
                    return f"shot {i}: {key} differ: {sa[key]!r} vs {sb[key]!r}"
    if len(ja["shots"]) != len(jb["shots"]):
        return f"shot counts differ: {len(ja['shots'])} vs {len(jb['shots'])}"
    return f"errors differ: {ja['error']!r} vs {jb['error']!r}"
