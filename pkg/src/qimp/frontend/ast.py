"""QImp abstract syntax tree.

Every node carries exactly one :class:`Span`. Spans and the type annotations
filled in by the resolver are excluded from equality, so two trees compare
equal when they are structurally the same program.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Union

from qimp.diagnostics import Span


def _span():
    return field(compare=False, repr=False, kw_only=True)


def _ann():
    return field(default=None, compare=False, repr=False, kw_only=True)


# --- type expressions -------------------------------------------------------


@dataclass
class NamedTypeExpr:
    name: str
    span: Span = _span()


@dataclass
class ArrayTypeExpr:
    elem: "TypeExpr"
    length: int
    span: Span = _span()


TypeExpr = Union[NamedTypeExpr, ArrayTypeExpr]


# --- expressions ------------------------------------------------------------


@dataclass
class IntLit:
    value: int
    span: Span = _span()
    ty: Any = _ann()


@dataclass
class FloatLit:
    value: float
    span: Span = _span()
    ty: Any = _ann()


@dataclass
class BoolLit:
    value: bool
    span: Span = _span()
    ty: Any = _ann()


@dataclass
class Name:
    id: str
    span: Span = _span()
    ty: Any = _ann()


@dataclass
class Attribute:
    value: "Expr"
    field: str
    span: Span = _span()
    ty: Any = _ann()


@dataclass
class Subscript:
    value: "Expr"
    index: "Expr"
    span: Span = _span()
    ty: Any = _ann()


@dataclass
class Keyword:
    name: str
    value: "Expr"
    span: Span = _span()


@dataclass
class Call:
    func: str
    args: list["Expr"]
    keywords: list[Keyword] = field(default_factory=list)
    span: Span = _span()
    ty: Any = _ann()
    # Filled by the resolver: "builtin" | "func" | "struct" | "array"
    kind: Any = _ann()
    sig: Any = _ann()
    # Resolved argument order (keywords folded into positions).
    ordered_args: Any = _ann()


@dataclass
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = _span()
    ty: Any = _ann()


@dataclass
class UnaryOp:
    op: str
    operand: "Expr"
    span: Span = _span()
    ty: Any = _ann()


@dataclass
class TupleExpr:
    elts: list["Expr"]
    span: Span = _span()
    ty: Any = _ann()


Expr = Union[IntLit, FloatLit, BoolLit, Name, Attribute, Subscript, Call, BinOp, UnaryOp, TupleExpr]
PLACE_EXPRS = (Name, Attribute, Subscript)


# --- statements -------------------------------------------------------------


@dataclass
class Assign:
    targets: list[Expr]
    value: Expr
    span: Span = _span()


@dataclass
class AugAssign:
    target: Expr
    op: str
    value: Expr
    span: Span = _span()


@dataclass
class ExprStmt:
    value: Expr
    span: Span = _span()


@dataclass
class Return:
    value: Expr | None
    span: Span = _span()


@dataclass
class If:
    cond: Expr
    body: list["Stmt"]
    orelse: list["Stmt"]
    span: Span = _span()


@dataclass
class While:
    cond: Expr
    body: list["Stmt"]
    span: Span = _span()


@dataclass
class For:
    target: Name
    iter: Expr
    body: list["Stmt"]
    span: Span = _span()


@dataclass
class Assert:
    test: Expr
    span: Span = _span()


Stmt = Union[Assign, AugAssign, ExprStmt, Return, If, While, For, Assert]


# --- declarations -----------------------------------------------------------


@dataclass
class FieldDecl:
    name: str
    type: TypeExpr
    span: Span = _span()


@dataclass
class StructDecl:
    name: str
    fields: list[FieldDecl]
    span: Span = _span()


@dataclass
class Param:
    name: str
    type: TypeExpr
    owned: bool
    span: Span = _span()


@dataclass
class FuncDecl:
    name: str
    params: list[Param]
    returns: list[TypeExpr]
    body: list[Stmt]
    span: Span = _span()


@dataclass
class Module:
    structs: list[StructDecl]
    functions: list[FuncDecl]
    span: Span = _span()


Node = Union[Module, StructDecl, FieldDecl, FuncDecl, Param, Stmt, Expr, Keyword, TypeExpr]


def children(node) -> list:
    """Direct AST children of ``node`` in field order."""
    out = []
    for f in fields(node):
        if f.name in ("span", "ty", "kind", "sig", "ordered_args"):
            continue
        val = getattr(node, f.name)
        if isinstance(val, list):
            out.extend(v for v in val if hasattr(v, "span"))
        elif hasattr(val, "span"):
            out.append(val)
    return out


def walk(node):
    yield node
    for child in children(node):
        yield from walk(child)


def to_json(node, typed: bool = False) -> Any:
    """Deterministic JSON tree: ``{"kind", "span", <fields>...}``."""
    if isinstance(node, list):
        return [to_json(n, typed) for n in node]
    if not hasattr(node, "span"):
        return node
    out: dict[str, Any] = {"kind": type(node).__name__, "span": node.span.to_json()}
    for f in fields(node):
        if f.name in ("span", "ty", "kind", "sig", "ordered_args"):
            continue
        out[f.name] = to_json(getattr(node, f.name), typed)
    if typed and getattr(node, "ty", None) is not None:
        out["type"] = str(node.ty)
    if typed and isinstance(node, Call) and node.sig is not None:
        out["callee_kind"] = node.kind
        out["signature"] = str(node.sig)
    return out
