"""Type resolution: annotate every expression with its semantic type."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from qimp.diagnostics import Diagnostic, Span, TypeCheckError, type_error
from qimp.frontend import ast as A
from qimp.typesys import (
    ARRAY_BUILTINS,
    BOOL,
    BUILTINS,
    FLOAT,
    INT,
    QUBIT,
    SCALARS,
    UNIT,
    ArrayType,
    Field,
    FuncSig,
    Index,
    OwnershipMode,
    Place,
    StructType,
    TupleType,
    Type,
    UnitType,
    array_builtin_sig,
    is_quantum,
)


class _Fail(Exception):
    def __init__(self, message: str, span: Span):
        self.diag = type_error(message, span)


@dataclass
class FunctionInfo:
    decl: A.FuncDecl
    sig: FuncSig
    var_types: dict[str, Type] = field(default_factory=dict)
    # Roots that never confer ownership: borrowed quantum parameters and
    # quantum for-loop variables.
    borrowed: set[str] = field(default_factory=set)
    params: set[str] = field(default_factory=set)


@dataclass
class TypedProgram:
    module: A.Module
    structs: dict[str, StructType]
    functions: dict[str, FunctionInfo]

    def sig(self, name: str) -> FuncSig:
        return self.functions[name].sig


def place_of(e: A.Expr) -> Place | None:
    """The static place denoted by ``e``, or None if ``e`` is not a place expression."""
    if isinstance(e, A.Name):
        return Place(e.id)
    if isinstance(e, A.Attribute):
        base = place_of(e.value)
        return None if base is None else base.child(Field(e.field))
    if isinstance(e, A.Subscript):
        base = place_of(e.value)
        if base is None or not isinstance(e.index, A.IntLit):
            return None
        return base.child(Index(e.index.value))
    return None


class _Resolver:
    def __init__(self, module: A.Module):
        self.module = module
        self.structs: dict[str, StructType] = {}
        self.sigs: dict[str, FuncSig] = {}
        self.errors: list[Diagnostic] = []

    # -- declarations ----------------------------------------------------

    def resolve_type(self, t: A.TypeExpr, allow_none: bool = False) -> Type:
        if isinstance(t, A.ArrayTypeExpr):
            elem = self.resolve_type(t.elem)
            if elem not in (QUBIT, INT, FLOAT, BOOL):
                raise _Fail("array elements must be qubit, int, float or bool", t.elem.span)
            return ArrayType(elem, t.length)
        if t.name in SCALARS:
            return SCALARS[t.name]
        if t.name in self.structs:
            return self.structs[t.name]
        if t.name == "None" and allow_none:
            return UNIT
        raise _Fail(f"unknown type '{t.name}'", t.span)

    def declare(self):
        for sd in self.module.structs:
            try:
                if sd.name in self.structs or sd.name in SCALARS or sd.name == "array":
                    raise _Fail(f"duplicate type name '{sd.name}'", sd.span)
                seen = set()
                fields = []
                for fd in sd.fields:
                    if fd.name in seen:
                        raise _Fail(f"duplicate field '{fd.name}'", fd.span)
                    seen.add(fd.name)
                    fields.append((fd.name, self.resolve_type(fd.type)))
                self.structs[sd.name] = StructType(sd.name, tuple(fields))
            except _Fail as f:
                self.errors.append(f.diag)
        reserved = set(BUILTINS) | set(ARRAY_BUILTINS) | set(self.structs)
        for fd in self.module.functions:
            try:
                if fd.name in reserved or fd.name in self.sigs:
                    raise _Fail(f"duplicate or reserved function name '{fd.name}'", fd.span)
                params, seen = [], set()
                for p in fd.params:
                    if p.name in seen:
                        raise _Fail(f"duplicate parameter '{p.name}'", p.span)
                    seen.add(p.name)
                    pt = self.resolve_type(p.type)
                    if p.owned and not is_quantum(pt):
                        raise _Fail("@owned is only allowed on qubit-containing parameters", p.span)
                    mode = OwnershipMode.OWNED if p.owned else OwnershipMode.BORROWED
                    params.append((p.name, pt, mode))
                returns = [self.resolve_type(t) for t in fd.returns]
                self.sigs[fd.name] = FuncSig.make(fd.name, params, returns)
            except _Fail as f:
                self.errors.append(f.diag)

    def run(self) -> TypedProgram:
        self.declare()
        functions: dict[str, FunctionInfo] = {}
        for fd in self.module.functions:
            if fd.name not in self.sigs:
                continue
            info = FunctionInfo(fd, self.sigs[fd.name])
            try:
                _FunctionResolver(self, info).run()
            except _Fail as f:
                self.errors.append(f.diag)
            functions[fd.name] = info
        if self.errors:
            raise TypeCheckError(sorted(self.errors, key=Diagnostic.sort_key))
        return TypedProgram(self.module, self.structs, functions)


class _FunctionResolver:
    def __init__(self, outer: _Resolver, info: FunctionInfo):
        self.outer = outer
        self.info = info
        self.scope = info.var_types
        self.loop_vars: set[str] = set()

    def run(self):
        fd = self.info.decl
        for p in self.info.sig.params:
            self.scope[p.name] = p.type
            self.info.params.add(p.name)
            if p.mode is OwnershipMode.BORROWED and is_quantum(p.type):
                self.info.borrowed.add(p.name)
        for i, s in enumerate(fd.body):
            if isinstance(s, A.Return) and i != len(fd.body) - 1:
                raise _Fail("return is only allowed as the final statement of a function", s.span)
            self.stmt(s)
        if self.info.sig.returns and not isinstance(fd.body[-1], A.Return):
            raise _Fail(f"function '{fd.name}' must end with a return statement", fd.span)

    # -- statements ------------------------------------------------------

    def block(self, stmts):
        for s in stmts:
            if isinstance(s, A.Return):
                raise _Fail("return is only allowed as the final statement of a function", s.span)
            self.stmt(s)

    def stmt(self, s: A.Stmt):
        if isinstance(s, A.Assign):
            self.assign(s)
        elif isinstance(s, A.AugAssign):
            vt = self.expr(s.value)
            tt = self.place_expr(s.target)
            if tt not in (INT, FLOAT) or (s.op == "/" and tt != FLOAT):
                raise _Fail(f"augmented assignment '{s.op}=' is not defined for {tt}", s.span)
            if vt != tt:
                raise _Fail(f"expected {tt}, found {vt}", s.value.span)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.value, allow_unit=True, allow_tuple=True)
        elif isinstance(s, A.Return):
            self.ret(s)
        elif isinstance(s, A.Assert):
            self.expect(s.test, BOOL)
        elif isinstance(s, A.If):
            self.expect(s.cond, BOOL)
            self.block(s.body)
            self.block(s.orelse)
        elif isinstance(s, A.While):
            self.expect(s.cond, BOOL)
            self.block(s.body)
        elif isinstance(s, A.For):
            self.for_(s)
        else:  # pragma: no cover
            raise _Fail("unsupported statement", s.span)

    def ret(self, s: A.Return):
        returns = self.info.sig.returns
        if not returns:
            if s.value is not None:
                raise _Fail("function has no return type but returns a value", s.span)
            return
        if s.value is None:
            raise _Fail(f"expected a return value of type {self.info.sig.return_type}", s.span)
        if len(returns) == 1:
            self.expect(s.value, returns[0])
            return
        if isinstance(s.value, A.TupleExpr):
            if len(s.value.elts) != len(returns):
                raise _Fail(f"expected {len(returns)} return values, found {len(s.value.elts)}", s.value.span)
            for e, t in zip(s.value.elts, returns):
                self.expect(e, t)
            s.value.ty = TupleType(tuple(returns))
            return
        vt = self.expr(s.value, allow_tuple=True)
        if vt != TupleType(tuple(returns)):
            raise _Fail(f"expected {TupleType(tuple(returns))}, found {vt}", s.value.span)

    def assign(self, s: A.Assign):
        if len(s.targets) == 1:
            if isinstance(s.value, A.TupleExpr):
                raise _Fail("tuples cannot be stored in variables", s.value.span)
            vt = self.expr(s.value)
            self.assign_target(s.targets[0], vt)
            return
        names = [t.id for t in s.targets if isinstance(t, A.Name)]
        if len(set(names)) != len(names):
            raise _Fail("duplicate assignment target", s.span)
        if isinstance(s.value, A.TupleExpr):
            if len(s.value.elts) != len(s.targets):
                raise _Fail(f"cannot unpack {len(s.value.elts)} values into {len(s.targets)} targets", s.span)
            types = [self.expr(e) for e in s.value.elts]
            s.value.ty = TupleType(tuple(types))
        else:
            vt = self.expr(s.value, allow_tuple=True)
            if not isinstance(vt, TupleType) or len(vt.elems) != len(s.targets):
                raise _Fail(f"cannot unpack {vt} into {len(s.targets)} targets", s.value.span)
            types = list(vt.elems)
        for t, ty in zip(s.targets, types):
            self.assign_target(t, ty)

    def assign_target(self, target: A.Expr, ty: Type):
        if isinstance(target, A.Name):
            name = target.id
            if name in self.loop_vars:
                raise _Fail(f"cannot assign to loop variable '{name}'", target.span)
            if name in self.scope:
                if self.scope[name] != ty:
                    raise _Fail(f"variable '{name}' has type {self.scope[name]}, cannot assign {ty}", target.span)
            else:
                self.scope[name] = ty
            target.ty = ty
            return
        tt = self.place_expr(target)
        if tt != ty:
            raise _Fail(f"expected {tt}, found {ty}", target.span)

    def for_(self, s: A.For):
        it = self.place_expr(s.iter)
        if not isinstance(it, ArrayType):
            raise _Fail(f"can only iterate over arrays, not {it}", s.iter.span)
        name = s.target.id
        if is_quantum(it.elem):
            if name in self.scope and name not in self.loop_vars:
                raise _Fail(f"loop variable '{name}' shadows an existing variable", s.target.span)
            self.loop_vars.add(name)
            self.info.borrowed.add(name)
        elif name in self.loop_vars:
            raise _Fail(f"loop variable '{name}' is already a qubit loop variable", s.target.span)
        elif name in self.scope and self.scope[name] != it.elem:
            raise _Fail(f"variable '{name}' has type {self.scope[name]}, cannot bind {it.elem}", s.target.span)
        self.scope[name] = it.elem
        s.target.ty = it.elem
        self.block(s.body)

    # -- expressions -----------------------------------------------------

    def expect(self, e: A.Expr, ty: Type):
        t = self.expr(e)
        if t != ty:
            raise _Fail(f"expected {ty}, found {t}", e.span)

    def place_expr(self, e: A.Expr) -> Type:
        if not isinstance(e, A.PLACE_EXPRS):
            raise _Fail("expected a variable, field or array element", e.span)
        return self.expr(e)

    def expr(self, e: A.Expr, allow_unit: bool = False, allow_tuple: bool = False) -> Type:
        t = self._expr(e)
        if isinstance(t, UnitType) and not allow_unit:
            raise _Fail("expression does not produce a value", e.span)
        if isinstance(t, TupleType) and not allow_tuple:
            raise _Fail("multiple return values must be unpacked", e.span)
        e.ty = t
        return t

    def _expr(self, e: A.Expr) -> Type:
        if isinstance(e, A.IntLit):
            return INT
        if isinstance(e, A.FloatLit):
            return FLOAT
        if isinstance(e, A.BoolLit):
            return BOOL
        if isinstance(e, A.Name):
            if e.id in self.scope:
                return self.scope[e.id]
            if e.id in self.outer.sigs or e.id in BUILTINS:
                raise _Fail(f"functions are not values: '{e.id}'", e.span)
            raise _Fail(f"unknown name '{e.id}'", e.span)
        if isinstance(e, A.Attribute):
            base = self.place_expr(e.value)
            if not isinstance(base, StructType):
                raise _Fail(f"type {base} has no fields", e.value.span)
            ft = base.field_type(e.field)
            if ft is None:
                raise _Fail(f"struct {base.name} has no field '{e.field}'", e.span)
            return ft
        if isinstance(e, A.Subscript):
            base = self.place_expr(e.value)
            if not isinstance(base, ArrayType):
                raise _Fail(f"type {base} cannot be indexed", e.value.span)
            if not isinstance(e.index, A.IntLit):
                raise _Fail("array indices must be integer constants (dynamic array index)", e.index.span)
            e.index.ty = INT
            if not 0 <= e.index.value < base.length:
                raise _Fail(f"index {e.index.value} out of bounds for {base}", e.index.span)
            return base.elem
        if isinstance(e, A.Call):
            return self.call(e)
        if isinstance(e, A.BinOp):
            return self.binop(e)
        if isinstance(e, A.UnaryOp):
            t = self.expr(e.operand)
            if e.op == "not":
                if t != BOOL:
                    raise _Fail(f"'not' expects bool, found {t}", e.operand.span)
                return BOOL
            if t not in (INT, FLOAT):
                raise _Fail(f"unary '-' expects a number, found {t}", e.operand.span)
            return t
        if isinstance(e, A.TupleExpr):
            raise _Fail("tuples can only appear in assignments and return statements", e.span)
        raise _Fail("unsupported expression", e.span)  # pragma: no cover

    def binop(self, e: A.BinOp) -> Type:
        lt = self.expr(e.left)
        rt = self.expr(e.right)
        if e.op in ("and", "or"):
            if lt != BOOL or rt != BOOL:
                raise _Fail(f"'{e.op}' expects bool operands, found {lt} and {rt}", e.span)
            return BOOL
        if lt != rt:
            raise _Fail(f"operands of '{e.op}' have different types {lt} and {rt}", e.span)
        if e.op in ("==", "!="):
            if lt not in (INT, FLOAT, BOOL):
                raise _Fail(f"cannot compare values of type {lt}", e.span)
            return BOOL
        if e.op in ("<", "<=", ">", ">="):
            if lt not in (INT, FLOAT):
                raise _Fail(f"cannot order values of type {lt}", e.span)
            return BOOL
        if e.op == "/" and lt != FLOAT:
            raise _Fail("'/' is only defined for float", e.span)
        if lt not in (INT, FLOAT):
            raise _Fail(f"'{e.op}' is not defined for {lt}", e.span)
        return lt

    def call(self, e: A.Call) -> Type:
        name = e.func
        if e.keywords and name not in self.outer.structs:
            raise _Fail("keyword arguments are only allowed in struct constructors", e.keywords[0].span)
        if name in self.outer.structs:
            st = self.outer.structs[name]
            ordered: list[A.Expr | None] = list(e.args) + [None] * (len(st.fields) - len(e.args))
            if len(e.args) > len(st.fields):
                raise _Fail(f"{name} has {len(st.fields)} fields, got {len(e.args)} arguments", e.span)
            names = [n for n, _ in st.fields]
            for kw in e.keywords:
                if kw.name not in names:
                    raise _Fail(f"struct {name} has no field '{kw.name}'", kw.span)
                i = names.index(kw.name)
                if ordered[i] is not None:
                    raise _Fail(f"field '{kw.name}' given twice", kw.span)
                ordered[i] = kw.value
            for n, arg in zip(names, ordered):
                if arg is None:
                    raise _Fail(f"missing field '{n}' in {name} constructor", e.span)
            sig = FuncSig.make(name, [(n, t, OwnershipMode.OWNED) for n, t in st.fields], [st])
            kind = "struct"
        elif name == "array":
            if not e.args:
                raise _Fail("array() needs at least one element", e.span)
            types = [self.expr(a) for a in e.args]
            if any(t != types[0] for t in types) or types[0] not in (QUBIT, INT, FLOAT, BOOL):
                raise _Fail("array elements must all have the same scalar or qubit type", e.span)
            sig = FuncSig.make(
                "array",
                [(f"e{i}", types[0], OwnershipMode.OWNED) for i in range(len(types))],
                [ArrayType(types[0], len(types))],
            )
            ordered, kind = list(e.args), "array"
        elif name in ("measure_array", "discard_array"):
            types = [self.expr(a) for a in e.args]
            sig = array_builtin_sig(name, types)
            if sig is None:
                raise _Fail(f"{name} expects one array of qubits", e.span)
            ordered, kind = list(e.args), "builtin"
        elif name in BUILTINS:
            sig, ordered, kind = BUILTINS[name], list(e.args), "builtin"
        elif name in self.outer.sigs:
            sig, ordered, kind = self.outer.sigs[name], list(e.args), "func"
        else:
            raise _Fail(f"unknown function '{name}'", e.span)
        if len(ordered) != len(sig.params):
            raise _Fail(f"{name} expects {len(sig.params)} arguments, got {len(ordered)}", e.span)
        for arg, p in zip(ordered, sig.params):
            self.expect(arg, p.type)
        e.kind, e.sig, e.ordered_args = kind, sig, ordered
        return sig.return_type


def resolve_types(module: A.Module) -> TypedProgram:
    """Type-check ``module``; returns an annotated copy or raises TypeCheckError."""
    return _Resolver(copy.deepcopy(module)).run()
