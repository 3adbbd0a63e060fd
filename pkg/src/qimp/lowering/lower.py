"""Translate accepted imperative functions into value-threading dataflow graphs.

Each quantum place is represented by the wire that currently holds its value.
A borrowing call consumes that wire and rebinds the place to the matching
extra output of the call; an owning call consumes it for good. Struct values
are split into per-field wires on demand and packed back together at region
boundaries, so threaded values always have a canonical shape.
"""

from __future__ import annotations

from dataclasses import dataclass

from qimp.diagnostics import InternalError
from qimp.frontend import ast as A
from qimp.lowering.ir import DataflowGraph, FunctionGraph, LoweredSig, Node, Region, Val, Wire
from qimp.resolve import FunctionInfo, TypedProgram, place_of
from qimp.typesys import (
    BOOL,
    INT,
    ArrayType,
    FuncSig,
    Index,
    OwnershipMode,
    Place,
    StructType,
    Type,
    is_quantum,
)


def lower_signature(sig: FuncSig) -> LoweredSig:
    """Inputs are the parameters; outputs are the returns, then every borrowed quantum parameter."""
    borrowed = [p.type for p in sig.params if p.mode is OwnershipMode.BORROWED and is_quantum(p.type)]
    return LoweredSig(tuple(p.type for p in sig.params), tuple(sig.returns) + tuple(borrowed))


def _threaded(sig: FuncSig) -> tuple[int, ...]:
    return tuple(i for i, p in enumerate(sig.params) if p.mode is OwnershipMode.BORROWED and is_quantum(p.type))


# --- slots ------------------------------------------------------------------
# A variable's value is either on one wire (W) or split into struct fields
# (Parts). A missing field (None) has been moved out.


@dataclass
class W:
    v: Val


@dataclass
class Parts:
    ty: StructType
    fields: dict


def _shape(slot):
    if isinstance(slot, W):
        return slot.v.type
    if slot is None:
        return None
    return (slot.ty.name, tuple((n, _shape(s)) for n, s in slot.fields.items()))


def _flatten(slot) -> list[Val]:
    if isinstance(slot, W):
        return [slot.v]
    if slot is None:
        return []
    out = []
    for s in slot.fields.values():
        out += _flatten(s)
    return out


def _rebuild(slot, vals):
    if isinstance(slot, W):
        return W(next(vals))
    if slot is None:
        return None
    return Parts(slot.ty, {n: _rebuild(s, vals) for n, s in slot.fields.items()})


def names_in(nodes) -> set[str]:
    out = set()
    for n in nodes:
        for x in A.walk(n):
            if isinstance(x, A.Name):
                out.add(x.id)
    return out


class _RegionBuilder:
    def __init__(self, fn: "FunctionLowerer", in_types):
        self.fn = fn
        self.region = Region()
        self.inputs = self.add("input", [], list(in_types))

    def add(self, op, inputs: list[Val], out_types, params=None, regions=(), node_id=None) -> list[Val]:
        nid = self.fn.fresh_id() if node_id is None else node_id
        node = Node(nid, op, dict(params or {}), [v.type for v in inputs], list(out_types), list(regions))
        for i, v in enumerate(inputs):
            self.region.wires.append(Wire((v.node, v.port), (nid, i), v.type))
        self.region.nodes.append(node)
        return [node.out(i) for i in range(len(out_types))]

    def finish(self, outputs: list[Val]) -> Region:
        self.add("output", outputs, [])
        return self.region


class FunctionLowerer:
    def __init__(self, program: TypedProgram, info: FunctionInfo):
        self.program = program
        self.info = info
        self.types = info.var_types
        self.next_id = 0
        self.b: _RegionBuilder | None = None
        self.env: dict[str, object] = {}

    def fresh_id(self) -> int:
        self.next_id += 1
        return self.next_id - 1

    def add(self, *args, **kw) -> list[Val]:
        return self.b.add(*args, **kw)

    def const(self, ty: Type, value) -> Val:
        return self.add("const", [], [ty], {"value": value})[0]

    # -- struct packing ----------------------------------------------------

    def pack(self, slot) -> Val:
        if isinstance(slot, W):
            return slot.v
        if not isinstance(slot, Parts):
            raise InternalError("use of a moved value during lowering")
        vals = [self.pack(s) for s in slot.fields.values()]
        return self.add("pack", vals, [slot.ty], {"struct": slot.ty.name})[0]

    def unpack(self, slot, ty) -> Parts:
        if isinstance(slot, Parts):
            return slot
        if not isinstance(slot, W) or not isinstance(ty, StructType):
            raise InternalError("field access on a non-struct during lowering")
        outs = self.add("unpack", [slot.v], [t for _, t in ty.fields], {"struct": ty.name})
        return Parts(ty, {n: W(v) for (n, _), v in zip(ty.fields, outs)})

    def normalize(self, slot):
        if isinstance(slot, Parts):
            fields = {n: self.normalize(s) for n, s in slot.fields.items()}
            if all(isinstance(s, W) for s in fields.values()):
                vals = [s.v for s in fields.values()]
                return W(self.add("pack", vals, [slot.ty], {"struct": slot.ty.name})[0])
            return Parts(slot.ty, fields)
        return slot

    # -- places ------------------------------------------------------------

    def modify(self, place: Place, fn):
        """Apply ``fn(slot) -> (new_slot, result)`` at a field path, splitting structs on the way."""

        def go(slot, ty, projs):
            if not projs:
                return fn(slot)
            slot = self.unpack(slot, ty)
            name = projs[0].name
            sub, res = go(slot.fields[name], ty.field_type(name), projs[1:])
            fields = dict(slot.fields)
            fields[name] = sub
            return Parts(ty, fields), res

        new, res = go(self.env.get(place.root), self.types[place.root], place.projections)
        if new is None:
            self.env.pop(place.root, None)
        else:
            self.env[place.root] = new
        return res

    def read(self, place: Place, move: bool, index: Val | None = None) -> Val:
        """Current value of ``place``.

        Quantum values are always taken out of the environment; a borrowing
        caller puts the result back with :meth:`write`.
        """
        if place.projections and isinstance(place.projections[-1], Index):
            index = self.const(INT, place.projections[-1].value)
            place = place.parent
        if index is not None:
            return self.read_elem(place, index)

        def fn(slot):
            v = self.pack(slot)
            if move and is_quantum(v.type):
                return None, v
            return W(v), v

        return self.modify(place, fn)

    def read_elem(self, arr_place: Place, index: Val) -> Val:
        def fn(slot):
            arr = self.pack(slot)
            if is_quantum(arr.type):
                arr2, e = self.add("array_take", [arr, index], [arr.type, arr.type.elem])
                return W(arr2), e
            return W(arr), self.add("array_get", [arr, index], [arr.type.elem])[0]

        return self.modify(arr_place, fn)

    def write(self, place: Place, v: Val, index: Val | None = None):
        if place.projections and isinstance(place.projections[-1], Index):
            index = self.const(INT, place.projections[-1].value)
            place = place.parent
        if index is not None:

            def fn(slot):
                arr = self.pack(slot)
                op = "array_put" if is_quantum(arr.type) else "array_set"
                return W(self.add(op, [arr, index, v], [arr.type])[0]), None

            self.modify(place, fn)
        else:
            self.modify(place, lambda slot: (W(v), None))

    # -- expressions -------------------------------------------------------

    def expr(self, e, move: bool = True):
        """Lower ``e``; returns a Val, a list of Vals for tuples, or None for unit."""
        if isinstance(e, A.IntLit):
            return self.const(INT, e.value)
        if isinstance(e, A.FloatLit):
            return self.const(e.ty, e.value)
        if isinstance(e, A.BoolLit):
            return self.const(BOOL, e.value)
        if isinstance(e, A.PLACE_EXPRS):
            return self.read(place_of(e), move)
        if isinstance(e, A.BinOp):
            left = self.expr(e.left)
            right = self.expr(e.right)
            return self.add("binop", [left, right], [e.ty], {"op": e.op})[0]
        if isinstance(e, A.UnaryOp):
            v = self.expr(e.operand)
            return self.add("unop", [v], [e.ty], {"op": e.op})[0]
        if isinstance(e, A.TupleExpr):
            return [self.expr(x) for x in e.elts]
        if isinstance(e, A.Call):
            return self.call(e)
        raise InternalError(f"cannot lower expression {e!r}")

    def call(self, call: A.Call):
        sig: FuncSig = call.sig
        args: list = [None] * len(sig.params)
        places: list = [None] * len(sig.params)
        # Everything except quantum places is evaluated left to right first.
        for i, (arg, p) in enumerate(zip(call.ordered_args, sig.params)):
            if is_quantum(p.type) and isinstance(arg, A.PLACE_EXPRS):
                places[i] = place_of(arg)
            else:
                args[i] = self.expr(arg)
        for i, p in enumerate(sig.params):
            if places[i] is not None:
                args[i] = self.read(places[i], move=p.mode is OwnershipMode.OWNED)
        borrowed = _threaded(sig)
        out_types = list(sig.returns) + [sig.params[i].type for i in borrowed]
        site = call.span.site()
        if call.kind == "struct":
            outs = self.add("pack", args, out_types, {"struct": sig.returns[0].name})
        elif call.kind == "array":
            outs = self.add("array_new", args, out_types)
        elif call.kind == "func":
            outs = self.add("call", args, out_types, {"callee": call.func})
        elif call.func == "qubit":
            outs = self.add("alloc", args, out_types, {"site": site})
        elif call.func in ("measure", "measure_array"):
            outs = self.add(call.func, args, out_types, {"site": site})
        else:
            outs = self.add(call.func, args, out_types)
        for i, v in zip(borrowed, outs[len(sig.returns) :]):
            if places[i] is None:
                raise InternalError("borrowed temporary is never consumed")
            self.write(places[i], v)
        rets = outs[: len(sig.returns)]
        if not rets:
            return None
        return rets[0] if len(rets) == 1 else rets

    # -- statements --------------------------------------------------------

    def stmts(self, stmts):
        for s in stmts:
            self.stmt(s)

    def stmt(self, s):
        if isinstance(s, A.Assign):
            v = self.expr(s.value)
            vals = v if len(s.targets) > 1 else [v]
            for t, x in zip(s.targets, vals):
                self.write(place_of(t), x)
        elif isinstance(s, A.AugAssign):
            place = place_of(s.target)
            cur = self.read(place, move=False)
            v = self.expr(s.value)
            self.write(place, self.add("binop", [cur, v], [cur.type], {"op": s.op})[0])
        elif isinstance(s, A.ExprStmt):
            if not isinstance(s.value, A.PLACE_EXPRS):
                self.expr(s.value)
        elif isinstance(s, A.Assert):
            v = self.expr(s.test)
            self.add("assert", [v], [], {"site": s.span.site()})
        elif isinstance(s, A.If):
            self.lower_if(s)
        elif isinstance(s, A.While):
            self.lower_while(s)
        elif isinstance(s, A.For):
            self.lower_for(s)
        else:
            raise InternalError(f"cannot lower statement {s!r}")

    def _capture(self, names) -> tuple[list[str], list, list[Val]]:
        """Normalize and flatten the live variables among ``names``."""
        live = sorted(n for n in names if n in self.env)
        shapes, vals = [], []
        for n in live:
            self.env[n] = self.normalize(self.env[n])
            shapes.append(self.env[n])
            vals += _flatten(self.env[n])
        return live, shapes, vals

    def _enter(self, names, shapes, in_types) -> _RegionBuilder:
        b = _RegionBuilder(self, in_types)
        it = iter(b.inputs)
        self.b = b
        self.env = {n: _rebuild(s, it) for n, s in zip(names, shapes)}
        return b

    def lower_if(self, s: A.If):
        pred = self.expr(s.cond)
        names, shapes, vals = self._capture(names_in(s.body + s.orelse))
        nid = self.fresh_id()
        outer_b, outer_env = self.b, self.env
        ends = []
        for branch in (s.body, s.orelse):
            self._enter(names, shapes, [v.type for v in vals])
            self.stmts(branch)
            live, _, _ = self._capture(self.env)
            ends.append((self.b, dict(self.env), set(live)))
        out_names = sorted(set.intersection(*(e[2] for e in ends)))
        out_shapes = None
        regions = []
        for b, env, _ in ends:
            sh = [_shape(env[n]) for n in out_names]
            if out_shapes is None:
                out_shapes = sh
                template = [env[n] for n in out_names]
            elif sh != out_shapes:
                raise InternalError("branches disagree on the shape of threaded values")
            outs = []
            for n in out_names:
                outs += _flatten(env[n])
            regions.append(b.finish(outs))
        self.b, self.env = outer_b, outer_env
        for n in names:
            self.env.pop(n, None)
        out_types = list(regions[0].outputs)
        outs = self.add("conditional", [pred] + vals, out_types, regions=regions, node_id=nid)
        it = iter(outs)
        for n, t in zip(out_names, template):
            self.env[n] = _rebuild(t, it)

    def _close_loop(self, names, shapes, head: list[Val]) -> Region:
        _, end_shapes, _ = self._capture(names)
        body_vals = []
        for n, sh in zip(names, shapes):
            if n not in self.env or _shape(self.env[n]) != _shape(sh):
                raise InternalError(f"loop-carried value {n} changes shape")
            body_vals += _flatten(self.env[n])
        return self.b.finish(head + body_vals)

    def _after_loop(self, names, shapes, outs):
        it = iter(outs)
        for n, sh in zip(names, shapes):
            self.env[n] = _rebuild(sh, it)

    def lower_while(self, s: A.While):
        pred0 = self.expr(s.cond)
        names, shapes, vals = self._capture(names_in([s.cond] + s.body))
        nid = self.fresh_id()
        outer_b, outer_env = self.b, self.env
        self._enter(names, shapes, [v.type for v in vals])
        self.stmts(s.body)
        pred = self.expr(s.cond)
        body = self._close_loop(names, shapes, [pred])
        self.b, self.env = outer_b, outer_env
        outs = self.add("loop", [pred0] + vals, [v.type for v in vals], regions=[body], node_id=nid)
        self._after_loop(names, shapes, outs)

    def lower_for(self, s: A.For):
        iter_place = place_of(s.iter)
        arr_ty: ArrayType = s.iter.ty
        quantum = is_quantum(arr_ty)
        head = []
        if not quantum:
            # Classical arrays are iterated by value: later writes do not affect the loop.
            head.append(self.read(iter_place, move=False))
        refs = names_in(s.body) | {s.target.id}
        if quantum:
            refs.add(iter_place.root)
        names, shapes, vals = self._capture(refs)
        pred0 = self.const(BOOL, arr_ty.length > 0)
        i0 = self.const(INT, 0)
        head = [i0] + head
        nid = self.fresh_id()
        outer_b, outer_env = self.b, self.env
        b = self._enter(names, shapes, [v.type for v in head + vals])
        # The region inputs start with the counter (and the snapshot), then the carried values.
        ins = b.inputs
        i = ins[0]
        snapshot = ins[1] if not quantum else None
        it = iter(ins[len(head) :])
        self.env = {n: _rebuild(sh, it) for n, sh in zip(names, shapes)}
        target = Place(s.target.id)
        if quantum:
            elem = self.read(iter_place, move=False, index=i)
        else:
            elem = self.add("array_get", [snapshot, i], [arr_ty.elem])[0]
        self.env[s.target.id] = W(elem)
        self.stmts(s.body)
        if quantum:
            elem = self.read(target, move=True)
            self.write(iter_place, elem, index=i)
        one = self.const(INT, 1)
        i1 = self.add("binop", [i, one], [INT], {"op": "+"})[0]
        n = self.const(INT, arr_ty.length)
        pred = self.add("binop", [i1, n], [BOOL], {"op": "<"})[0]
        body = self._close_loop(names, shapes, [pred, i1] + ([snapshot] if snapshot is not None else []))
        self.b, self.env = outer_b, outer_env
        outs = self.add(
            "loop", [pred0] + head + vals, [v.type for v in head + vals], regions=[body], node_id=nid
        )
        self._after_loop(names, shapes, outs[len(head) :])

    # -- driver ------------------------------------------------------------

    def run(self) -> FunctionGraph:
        sig = lower_signature(self.info.sig)
        params = self.info.sig.params
        self.b = _RegionBuilder(self, sig.inputs)
        self.env = {p.name: W(v) for p, v in zip(params, self.b.inputs)}
        body = self.info.decl.body
        ret = None
        if body and isinstance(body[-1], A.Return):
            ret = body[-1]
            body = body[:-1]
        self.stmts(body)
        outs: list[Val] = []
        if ret is not None and ret.value is not None:
            v = self.expr(ret.value)
            outs = v if isinstance(v, list) else [v]
        for i in _threaded(self.info.sig):
            outs.append(self.read(Place(params[i].name), move=True))
        region = self.b.finish(outs)
        return FunctionGraph(self.info.decl.name, sig, region, _threaded(self.info.sig))


def lower_function(program: TypedProgram, info: FunctionInfo) -> FunctionGraph:
    """Lower one function that the ownership checker accepted."""
    return FunctionLowerer(program, info).run()


def lower_program(program: TypedProgram) -> DataflowGraph:
    g = DataflowGraph(structs=dict(program.structs))
    for name, info in program.functions.items():
        g.functions[name] = lower_function(program, info)
    return g
