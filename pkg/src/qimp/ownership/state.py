"""Per-place ownership states and their join.

A variable's state is a tree. Leaves describe a whole value; a ``Partial``
node appears once some field of a struct has been moved out while siblings
stay usable. Spans recorded in states are diagnostic payload only and never
take part in equality, so the fixpoint compares abstract facts alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from qimp.diagnostics import Span
from qimp.typesys import Field, Index, Place, StructType, Type, is_quantum, place_type


@dataclass(frozen=True)
class Owned:
    """Holds a live value. For quantum values the origin is where it was obtained."""

    origin: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Dead:
    """No live value: never assigned (``consumed=False``) or moved out/consumed."""

    consumed: bool = False
    cause: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Maybe:
    """Classical value assigned on some incoming paths only."""


@dataclass(frozen=True)
class Conflict:
    """Quantum value live on some paths and dead on others. Already reported; absorbs further errors."""


@dataclass(frozen=True)
class Partial:
    fields: tuple[tuple[str, "State"], ...]

    def get(self, name: str) -> "State":
        for n, s in self.fields:
            if n == name:
                return s
        raise KeyError(name)


State = Union[Owned, Dead, Maybe, Conflict, Partial]
UNASSIGNED = Dead(False)
Fact = dict[str, State]


def _expand(s: State, ty: StructType) -> Partial:
    if isinstance(s, Partial):
        return s
    return Partial(tuple((n, s) for n, _ in ty.fields))


def normalize(s: State) -> State:
    if isinstance(s, Partial) and s.fields and all(isinstance(f, Owned) for _, f in s.fields):
        return Owned(s.fields[0][1].origin)
    return s


def lookup(s: State, projections) -> State:
    for p in projections:
        if isinstance(p, Field) and isinstance(s, Partial):
            s = s.get(p.name)
    return s


def update(s: State, ty: Type, projections, new: State) -> State:
    if not projections:
        return new
    head, rest = projections[0], projections[1:]
    if isinstance(head, Index):
        # Arrays are tracked as a whole.
        return s
    assert isinstance(ty, StructType)
    p = _expand(s, ty)
    ft = ty.field_type(head.name)
    fields = tuple((n, update(fs, ft, rest, new) if n == head.name else fs) for n, fs in p.fields)
    return normalize(Partial(fields))


def find_bad(fact: Fact, types: dict[str, Type], place: Place) -> tuple[Place, State] | None:
    """First non-Owned state on the path to ``place`` or anywhere below it.

    Returns the place where it is stored and the state itself.
    """
    s = fact.get(place.root, UNASSIGNED)
    cur = Place(place.root)
    for p in place.projections:
        if not isinstance(s, Partial):
            break
        if isinstance(p, Field):
            s = s.get(p.name)
            cur = cur.child(p)
        else:
            break
    if not isinstance(s, (Owned, Partial)):
        return cur, s
    if isinstance(s, Partial):
        return _find_bad_below(s, cur)
    return None


def _find_bad_below(s: State, cur: Place):
    if isinstance(s, Partial):
        for n, fs in s.fields:
            hit = _find_bad_below(fs, cur.child(Field(n)))
            if hit:
                return hit
        return None
    if isinstance(s, Owned):
        return None
    return cur, s


def live_quantum(s: State, ty: Type, cur: Place) -> list[tuple[Place, Span | None]]:
    """Quantum sub-places of ``cur`` that still hold live values."""
    if not is_quantum(ty):
        return []
    if isinstance(s, Owned):
        return [(cur, s.origin)]
    if isinstance(s, Partial):
        out = []
        for (n, fs), (_, ft) in zip(s.fields, ty.fields):
            out += live_quantum(fs, ft, cur.child(Field(n)))
        return out
    return []


def join(a: State, b: State, ty: Type, cur: Place, conflicts: list | None = None) -> State:
    """Least upper bound; strict for quantum leaves (live vs dead is a conflict).

    ``conflicts`` collects ``(place, live_state, dead_state)`` for newly created conflicts.
    """
    if a == b:
        return a
    if isinstance(a, Conflict) or isinstance(b, Conflict):
        return Conflict()
    if isinstance(a, Partial) or isinstance(b, Partial):
        assert isinstance(ty, StructType)
        pa, pb = _expand(a, ty), _expand(b, ty)
        fields = tuple(
            (n, join(fa, fb, ft, cur.child(Field(n)), conflicts))
            for (n, fa), (_, fb), (_, ft) in zip(pa.fields, pb.fields, ty.fields)
        )
        return normalize(Partial(fields))
    if isinstance(a, Dead) and isinstance(b, Dead):
        return a if a.consumed else b
    if is_quantum(ty):
        if conflicts is not None:
            live, dead = (a, b) if isinstance(a, Owned) else (b, a)
            conflicts.append((cur, live, dead))
        return Conflict()
    return Maybe()


def join_facts(a: Fact, b: Fact, types: dict[str, Type], conflicts: list | None = None) -> Fact:
    out: Fact = {}
    for var in sorted(set(a) | set(b)):
        s = join(a.get(var, UNASSIGNED), b.get(var, UNASSIGNED), types[var], Place(var), conflicts)
        if s != UNASSIGNED:
            out[var] = s
    return out


def set_place(fact: Fact, types: dict[str, Type], place: Place, new: State) -> None:
    cur = fact.get(place.root, UNASSIGNED)
    s = update(cur, types[place.root], place.projections, new)
    if s == UNASSIGNED:
        fact.pop(place.root, None)
    else:
        fact[place.root] = s


def subtree(fact: Fact, place: Place) -> State:
    return lookup(fact.get(place.root, UNASSIGNED), place.projections)


def type_of(types: dict[str, Type], place: Place) -> Type:
    return place_type(types[place.root], place.projections)
