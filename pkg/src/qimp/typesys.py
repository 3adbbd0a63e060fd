"""Semantic types, function signatures, places and the builtin table."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Union


class Type:
    """Base class for semantic types. All types are immutable and hashable."""

    def __str__(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class QubitType(Type):
    def __str__(self):
        return "qubit"


@dataclass(frozen=True)
class IntType(Type):
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class FloatType(Type):
    def __str__(self):
        return "float"


@dataclass(frozen=True)
class BoolType(Type):
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class UnitType(Type):
    def __str__(self):
        return "()"


@dataclass(frozen=True)
class TupleType(Type):
    elems: tuple[Type, ...]

    def __str__(self):
        return "(" + ", ".join(map(str, self.elems)) + ")"


@dataclass(frozen=True)
class ArrayType(Type):
    elem: Type
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("array length must be nonnegative")

    def __str__(self):
        return f"array[{self.elem}, {self.length}]"


@dataclass(frozen=True)
class StructType(Type):
    name: str
    fields: tuple[tuple[str, Type], ...]

    def __post_init__(self):
        names = [n for n, _ in self.fields]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate field in struct {self.name}")

    def field_type(self, name: str) -> Type | None:
        for n, t in self.fields:
            if n == name:
                return t
        return None

    def __str__(self):
        return self.name


QUBIT = QubitType()
INT = IntType()
FLOAT = FloatType()
BOOL = BoolType()
UNIT = UnitType()
SCALARS = {"int": INT, "float": FLOAT, "bool": BOOL, "qubit": QUBIT}


@lru_cache(maxsize=None)
def is_quantum(t: Type) -> bool:
    """True iff ``t`` is or transitively contains a qubit."""
    if isinstance(t, QubitType):
        return True
    if isinstance(t, ArrayType):
        return is_quantum(t.elem)
    if isinstance(t, TupleType):
        return any(is_quantum(e) for e in t.elems)
    if isinstance(t, StructType):
        return any(is_quantum(ft) for _, ft in t.fields)
    return False


class OwnershipMode(str, Enum):
    BORROWED = "borrowed"
    OWNED = "owned"


@dataclass(frozen=True)
class ParamSig:
    name: str
    type: Type
    mode: OwnershipMode


@dataclass(frozen=True)
class FuncSig:
    name: str
    params: tuple[ParamSig, ...]
    returns: tuple[Type, ...]

    @staticmethod
    def make(name: str, params, returns) -> "FuncSig":
        norm = []
        for p in params:
            pname, ptype, mode = p
            # Classical parameters are passed by value.
            if not is_quantum(ptype):
                mode = OwnershipMode.OWNED
            norm.append(ParamSig(pname, ptype, mode))
        return FuncSig(name, tuple(norm), tuple(returns))

    @property
    def return_type(self) -> Type:
        if not self.returns:
            return UNIT
        if len(self.returns) == 1:
            return self.returns[0]
        return TupleType(self.returns)

    def __str__(self):
        ps = ", ".join(
            f"{p.name}: {p.type}" + (" @owned" if p.mode is OwnershipMode.OWNED and is_quantum(p.type) else "")
            for p in self.params
        )
        rs = ", ".join(map(str, self.returns))
        return f"({ps}) -> ({rs})"


# --- places -----------------------------------------------------------------


@dataclass(frozen=True)
class Field:
    name: str

    def __str__(self):
        return f".{self.name}"


@dataclass(frozen=True)
class Index:
    value: int

    def __str__(self):
        return f"[{self.value}]"


Projection = Union[Field, Index]


@dataclass(frozen=True)
class Place:
    root: str
    projections: tuple[Projection, ...] = ()

    def child(self, proj: Projection) -> "Place":
        return Place(self.root, self.projections + (proj,))

    @property
    def parent(self) -> "Place | None":
        if not self.projections:
            return None
        return Place(self.root, self.projections[:-1])

    def is_prefix_of(self, other: "Place") -> bool:
        n = len(self.projections)
        return self.root == other.root and other.projections[:n] == self.projections

    def has_index(self) -> bool:
        return any(isinstance(p, Index) for p in self.projections)

    def __str__(self):
        return self.root + "".join(map(str, self.projections))


def places_overlap(a: Place, b: Place) -> bool:
    """Two places overlap iff one's path is a prefix of the other's."""
    return a.is_prefix_of(b) or b.is_prefix_of(a)


def place_type(root_type: Type, projections) -> Type:
    t = root_type
    for p in projections:
        if isinstance(p, Field):
            assert isinstance(t, StructType)
            t = t.field_type(p.name)
        else:
            assert isinstance(t, ArrayType)
            t = t.elem
    return t


# --- builtins ---------------------------------------------------------------

B, O = OwnershipMode.BORROWED, OwnershipMode.OWNED
GATES_1Q = ("h", "x", "y", "z", "s", "t")
GATES_2Q = ("cx", "cz")

BUILTINS: dict[str, FuncSig] = {
    "qubit": FuncSig.make("qubit", [], [QUBIT]),
    **{g: FuncSig.make(g, [("q", QUBIT, B)], []) for g in GATES_1Q},
    "rz": FuncSig.make("rz", [("q", QUBIT, B), ("angle", FLOAT, O)], []),
    **{g: FuncSig.make(g, [("a", QUBIT, B), ("b", QUBIT, B)], []) for g in GATES_2Q},
    "measure": FuncSig.make("measure", [("q", QUBIT, O)], [BOOL]),
    "discard": FuncSig.make("discard", [("q", QUBIT, O)], []),
}

# Generic over the array length; instantiated per call site by the resolver.
ARRAY_BUILTINS = ("array", "measure_array", "discard_array")


def array_builtin_sig(name: str, arg_types: list[Type]) -> FuncSig | None:
    if name == "measure_array" and len(arg_types) == 1:
        t = arg_types[0]
        if isinstance(t, ArrayType) and t.elem == QUBIT:
            return FuncSig.make(name, [("qs", t, O)], [ArrayType(BOOL, t.length)])
    if name == "discard_array" and len(arg_types) == 1:
        t = arg_types[0]
        if isinstance(t, ArrayType) and t.elem == QUBIT:
            return FuncSig.make(name, [("qs", t, O)], [])
    return None
