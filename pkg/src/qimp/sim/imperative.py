"""Reference interpreter for typed ASTs with qubits as opaque handles.

Qubit-carrying structs and arrays are shared by reference, exactly like the
pointer semantics of the source language; classical composites are copied on
every read. Each call frame records which handles it owns. The interpreter
runs programs whether or not the ownership checker accepted them, and reports
the dynamic counterpart of each static error:

* ``UseAfterFree``: reading a moved-out place or touching a measured qubit;
* ``DoubleBorrowAlias``: the same qubit reaches a call through two arguments;
* ``LeakAtScopeExit``: a frame returns while still owning a live qubit.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from qimp.diagnostics import Span
from qimp.frontend import ast as A
from qimp.resolve import FunctionInfo, TypedProgram
from qimp.sim.errors import QImpRuntimeError
from qimp.sim.rng import ShotRng, shot_seed
from qimp.sim.statevector import QuantumState
from qimp.sim.transcript import Shot, Transcript, value_to_json
from qimp.typesys import GATES_1Q, GATES_2Q, OwnershipMode, StructType, is_quantum


class _Moved:
    def __repr__(self):
        return "<moved>"


MOVED = _Moved()


class Qubit(int):
    """A qubit handle. Distinct from ints so composites can be scanned for handles."""


@dataclass
class StructVal:
    ty: StructType
    fields: dict


def _handles(v, out: list):
    if isinstance(v, Qubit):
        out.append(v)
    elif isinstance(v, StructVal):
        for x in v.fields.values():
            _handles(x, out)
    elif isinstance(v, (list, tuple)):
        for x in v:
            _handles(x, out)
    elif v is MOVED:
        out.append(v)
    return out


def _plain(v):
    if isinstance(v, StructVal):
        return {k: _plain(x) for k, x in v.fields.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


@dataclass
class Frame:
    info: FunctionInfo
    vars: dict = field(default_factory=dict)
    owned: set = field(default_factory=set)


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "and": lambda a, b: a and b,
    "or": lambda a, b: a or b,
}


def binop(op: str, a, b):
    try:
        return _BINOPS[op](a, b)
    except ZeroDivisionError:
        raise QImpRuntimeError("ArithmeticError", "division by zero") from None


def unop(op: str, a):
    return (not a) if op == "not" else -a


class Interpreter:
    def __init__(self, program: TypedProgram, state: QuantumState, shot: Shot):
        self.program = program
        self.state = state
        self.shot = shot
        self.frame: Frame | None = None

    # -- ownership -------------------------------------------------------

    def _take_ownership(self, handles, span: Span, what: str):
        for h in handles:
            if h not in self.frame.owned:
                raise QImpRuntimeError("NotOwned", f"cannot {what} qubit #{h} since it is not owned", span)
            self.frame.owned.discard(h)

    def _check_live(self, handles, span: Span):
        for h in handles:
            if h is MOVED:
                raise QImpRuntimeError("UseAfterFree", "use of a moved-out value", span)
            if not self.state.is_live(h):
                raise QImpRuntimeError("UseAfterFree", f"qubit #{h} was already consumed", span)

    # -- places ----------------------------------------------------------

    def _container(self, e):
        """Resolve ``e`` to ``(container, key)`` so the place can be read or written."""
        if isinstance(e, A.Name):
            return self.frame.vars, e.id
        base = self.load(e.value, copy_classical=False)
        if isinstance(e, A.Attribute):
            return base.fields, e.field
        return base, e.index.value

    def load(self, e, copy_classical=True):
        cont, key = self._container(e)
        if isinstance(cont, dict) and key not in cont:
            raise QImpRuntimeError("Unbound", f"variable {key} is not defined", e.span)
        v = cont[key]
        if v is MOVED:
            raise QImpRuntimeError("UseAfterFree", f"use of moved-out value {A_str(e)}", e.span)
        if copy_classical and not is_quantum(e.ty) and isinstance(v, (list, StructVal)):
            v = copy.deepcopy(v)
        return v

    def store(self, e, v):
        cont, key = self._container(e)
        cont[key] = v

    def move_out(self, e):
        cont, key = self._container(e)
        cont[key] = MOVED

    # -- expressions -----------------------------------------------------

    def eval(self, e):
        t = type(e)
        if t is A.IntLit or t is A.FloatLit or t is A.BoolLit:
            return e.value
        if t is A.Name or t is A.Attribute or t is A.Subscript:
            return self.load(e)
        if t is A.BinOp:
            a = self.eval(e.left)
            b = self.eval(e.right)
            return binop(e.op, a, b)
        if t is A.UnaryOp:
            return unop(e.op, self.eval(e.operand))
        if t is A.Call:
            return self.call(e)
        if t is A.TupleExpr:
            return tuple(self.eval(x) for x in e.elts)
        raise AssertionError(f"cannot evaluate {e!r}")  # pragma: no cover

    def call(self, call: A.Call):
        try:
            return self._call(call)
        except QImpRuntimeError as err:
            if err.span is None:
                err.span = call.span
            raise

    def _call(self, call: A.Call):
        sig = call.sig
        vals = []
        for arg, p in zip(call.ordered_args, sig.params):
            if isinstance(arg, A.PLACE_EXPRS) and is_quantum(p.type):
                cont, key = self._container(arg)
                vals.append(cont.get(key, MOVED) if isinstance(cont, dict) else cont[key])
            else:
                vals.append(self.eval(arg))
        per_arg = [_handles(v, []) if is_quantum(p.type) else [] for v, p in zip(vals, sig.params)]
        flat = [h for hs in per_arg for h in hs]
        self._check_live(flat, call.span)
        if len(set(flat)) != len(flat):
            raise QImpRuntimeError("DoubleBorrowAlias", f"the same qubit is passed twice to {call.func}", call.span)
        # Owned arguments leave their places.
        for arg, p in zip(call.ordered_args, sig.params):
            if p.mode is OwnershipMode.OWNED and is_quantum(p.type) and isinstance(arg, A.PLACE_EXPRS):
                self.move_out(arg)

        kind, name = call.kind, call.func
        if kind == "struct":
            return StructVal(sig.returns[0], {p.name: v for p, v in zip(sig.params, vals)})
        if kind == "array":
            return list(vals)
        if kind == "func":
            return self.invoke(self.program.functions[name], vals, call.span)
        st = self.state
        if name == "qubit":
            h = Qubit(st.alloc())
            self.frame.owned.add(h)
            return h
        if name in GATES_1Q:
            st.apply(name, vals)
            return None
        if name in GATES_2Q:
            st.apply(name, vals)
            return None
        if name == "rz":
            st.apply("rz", vals[:1], vals[1])
            return None
        site = call.span.site()
        if name in ("measure", "discard"):
            self._take_ownership(vals, call.span, "measure" if name == "measure" else "discard")
            bit = st.measure(vals[0])
            if name == "measure":
                self.shot.measurements.append((site, bit))
                return bool(bit)
            return None
        if name in ("measure_array", "discard_array"):
            self._take_ownership(vals[0], call.span, "consume")
            bits = []
            for h in vals[0]:
                bit = st.measure(h)
                if name == "measure_array":
                    self.shot.measurements.append((site, bit))
                bits.append(bool(bit))
            return bits if name == "measure_array" else None
        raise AssertionError(f"unknown builtin {name}")  # pragma: no cover

    def invoke(self, info: FunctionInfo, args, span: Span):
        callee = Frame(info)
        for p, v in zip(info.sig.params, args):
            if p.mode is OwnershipMode.OWNED and is_quantum(p.type):
                hs = _handles(v, [])
                self._take_ownership(hs, span, "transfer")
                callee.owned.update(hs)
            callee.vars[p.name] = v
        caller, self.frame = self.frame, callee
        result = None
        for s in info.decl.body:
            if isinstance(s, A.Return):
                result = self.eval(s.value) if s.value is not None else None
                break
            self.exec(s)
        if result is not None and is_quantum(info.sig.return_type):
            hs = _handles(result, [])
            self._check_live(hs, s.span)
            self._take_ownership(hs, s.span, "return")
        for h in sorted(callee.owned):
            if self.state.is_live(h):
                raise QImpRuntimeError(
                    "LeakAtScopeExit", f"qubit #{h} is still owned when {info.decl.name} returns", info.decl.span
                )
        self.frame = caller
        if caller is not None and result is not None:
            caller.owned.update(h for h in _handles(result, []) if h is not MOVED)
        return result

    # -- statements ------------------------------------------------------

    def exec_block(self, stmts):
        for s in stmts:
            self.exec(s)

    def exec(self, s):
        t = type(s)
        if t is A.Assign:
            v = self.eval(s.value)
            if isinstance(s.value, A.PLACE_EXPRS) and is_quantum(s.value.ty):
                self.move_out(s.value)
            elif isinstance(s.value, A.TupleExpr):
                for x in s.value.elts:
                    if isinstance(x, A.PLACE_EXPRS) and is_quantum(x.ty):
                        self.move_out(x)
            vals = v if len(s.targets) > 1 else (v,)
            for target, x in zip(s.targets, vals):
                self.store(target, x)
        elif t is A.AugAssign:
            cur = self.load(s.target)
            v = self.eval(s.value)
            self.store(s.target, binop(s.op, cur, v))
        elif t is A.ExprStmt:
            if not isinstance(s.value, A.PLACE_EXPRS):
                self.eval(s.value)
            else:
                self.load(s.value, copy_classical=False)
        elif t is A.Assert:
            ok = bool(self.eval(s.test))
            self.shot.assertions.append((s.span.site(), ok))
            if not ok:
                raise QImpRuntimeError("AssertionFailed", "assertion failed", s.span)
        elif t is A.If:
            self.exec_block(s.body if self.eval(s.cond) else s.orelse)
        elif t is A.While:
            while self.eval(s.cond):
                self.exec_block(s.body)
        elif t is A.For:
            arr = self.load(s.iter, copy_classical=True)
            for i in range(s.iter.ty.length):
                # Qubit arrays are re-read so the loop variable names the element in place.
                self.frame.vars[s.target.id] = arr[i]
                self.exec_block(s.body)
        else:  # pragma: no cover
            raise AssertionError(f"cannot execute {s!r}")


def A_str(e) -> str:
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.Attribute):
        return f"{A_str(e.value)}.{e.field}"
    if isinstance(e, A.Subscript):
        return f"{A_str(e.value)}[{e.index.value}]"
    return "<expr>"


def _check_entry(program: TypedProgram, entry: str) -> FunctionInfo:
    if entry not in program.functions:
        raise KeyError(f"no function named {entry!r}")
    info = program.functions[entry]
    if info.sig.params or is_quantum(info.sig.return_type):
        raise ValueError(f"entry function {entry!r} must take no arguments and return only classical values")
    return info


def run_imperative(program: TypedProgram, entry: str = "main", seed: int = 0, shots: int = 1) -> Transcript:
    """Execute ``entry`` once per shot with seed ``seed + i``; stops at the first runtime error."""
    info = _check_entry(program, entry)
    out = Transcript()
    for i in range(shots):
        shot = Shot()
        out.shots.append(shot)
        state = QuantumState(ShotRng(shot_seed(seed, i)))
        interp = Interpreter(program, state, shot)
        try:
            result = interp.invoke(info, [], info.decl.span)
        except QImpRuntimeError as err:
            out.error = err.to_json(i)
            break
        shot.result = value_to_json(_plain(result), info.sig.return_type if info.sig.returns else None)
    return out
