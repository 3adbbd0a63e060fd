"""Evaluator for dataflow graphs.

Each region is compiled once into a list of steps over a flat value array;
nodes run in id order, which is a topological order because the lowering
creates every node after its producers. Qubits are plain handles into the
shared statevector backend; aggregates are immutable tuples.
"""

from __future__ import annotations

from qimp.lowering.ir import DataflowGraph, FunctionGraph, Node, Region
from qimp.sim.errors import QImpRuntimeError
from qimp.sim.imperative import binop, unop
from qimp.sim.rng import ShotRng, shot_seed
from qimp.sim.statevector import QuantumState
from qimp.sim.transcript import Shot, Transcript, value_to_json
from qimp.typesys import GATES_1Q, GATES_2Q, TupleType, is_quantum


class _Ctx:
    __slots__ = ("state", "shot", "program")

    def __init__(self, program, state, shot):
        self.program = program
        self.state = state
        self.shot = shot


class CompiledRegion:
    def __init__(self, region: Region, program: "CompiledProgram"):
        slot = {}
        n_slots = 0
        for node in region.nodes:
            for i in range(len(node.out_types)):
                slot[(node.id, i)] = n_slots
                n_slots += 1
        src = {w.dst: slot[w.src] for w in region.wires}
        self.n_slots = n_slots
        self.n_inputs = len(region.inputs)
        self.steps = []
        for node in region.nodes[1:-1]:
            ins = [src[(node.id, i)] for i in range(len(node.in_types))]
            base = slot.get((node.id, 0), 0)
            self.steps.append((_handler(node, program), node, ins, base, len(node.out_types)))
        out = region.output_node
        self.outputs = [src[(out.id, i)] for i in range(len(out.in_types))]

    def run(self, ctx: _Ctx, args) -> list:
        vals = [None] * self.n_slots
        vals[: self.n_inputs] = args
        for fn, node, ins, base, n_out in self.steps:
            outs = fn(ctx, node, [vals[i] for i in ins])
            if n_out:
                vals[base : base + n_out] = outs
        return [vals[i] for i in self.outputs]


class CompiledProgram:
    def __init__(self, graph: DataflowGraph):
        self.graph = graph
        self.functions: dict[str, CompiledRegion] = {}
        for name, fg in graph.functions.items():
            self.functions[name] = CompiledRegion(fg.body, self)


# --- node handlers ------------------------------------------------------------


def _const(ctx, node, ins):
    return [node.params["value"]]


def _alloc(ctx, node, ins):
    try:
        return [ctx.state.alloc()]
    except QImpRuntimeError as err:
        raise QImpRuntimeError(err.kind, err.message, _SiteSpan(node.params["site"])) from None


def _gate(ctx, node, ins):
    ctx.state.apply(node.op, ins)
    return ins


def _rz(ctx, node, ins):
    ctx.state.apply("rz", ins[:1], ins[1])
    return ins[:1]


def _measure(ctx, node, ins):
    bit = ctx.state.measure(ins[0])
    ctx.shot.measurements.append((node.params["site"], bit))
    return [bool(bit)]


def _discard(ctx, node, ins):
    ctx.state.measure(ins[0])
    return []


def _measure_array(ctx, node, ins):
    site = node.params["site"]
    bits = []
    for h in ins[0]:
        bit = ctx.state.measure(h)
        ctx.shot.measurements.append((site, bit))
        bits.append(bool(bit))
    return [tuple(bits)]


def _discard_array(ctx, node, ins):
    for h in ins[0]:
        ctx.state.measure(h)
    return []


def _binop(ctx, node, ins):
    return [binop(node.params["op"], ins[0], ins[1])]


def _unop(ctx, node, ins):
    return [unop(node.params["op"], ins[0])]


def _pack(ctx, node, ins):
    return [tuple(ins)]


def _unpack(ctx, node, ins):
    return list(ins[0])


def _array_take(ctx, node, ins):
    arr, i = ins
    return [arr[:i] + (None,) + arr[i + 1 :], arr[i]]


def _array_put(ctx, node, ins):
    arr, i, e = ins
    return [arr[:i] + (e,) + arr[i + 1 :]]


def _array_get(ctx, node, ins):
    return [ins[0][ins[1]]]


def _assert(ctx, node, ins):
    site = node.params["site"]
    ctx.shot.assertions.append((site, bool(ins[0])))
    if not ins[0]:
        raise QImpRuntimeError("AssertionFailed", "assertion failed", _SiteSpan(site))
    return []


class _SiteSpan:
    """Stands in for a span when only the printed site is known."""

    def __init__(self, site: str):
        self._site = site

    def site(self) -> str:
        return self._site


_SIMPLE = {
    "const": _const,
    "alloc": _alloc,
    "rz": _rz,
    "measure": _measure,
    "discard": _discard,
    "measure_array": _measure_array,
    "discard_array": _discard_array,
    "binop": _binop,
    "unop": _unop,
    "pack": _pack,
    "array_new": _pack,
    "unpack": _unpack,
    "array_take": _array_take,
    "array_put": _array_put,
    "array_set": _array_put,
    "array_get": _array_get,
    "assert": _assert,
    **{g: _gate for g in GATES_1Q + GATES_2Q},
}


def _handler(node: Node, program: CompiledProgram):
    if node.op in _SIMPLE:
        return _SIMPLE[node.op]
    if node.op == "call":
        name = node.params["callee"]
        return lambda ctx, node, ins: program.functions[name].run(ctx, ins)
    if node.op == "conditional":
        then_r, else_r = (CompiledRegion(r, program) for r in node.regions)
        return lambda ctx, node, ins: (then_r if ins[0] else else_r).run(ctx, ins[1:])
    if node.op == "loop":
        body = CompiledRegion(node.regions[0], program)

        def loop(ctx, node, ins):
            pred, vals = ins[0], ins[1:]
            while pred:
                outs = body.run(ctx, vals)
                pred, vals = outs[0], outs[1:]
            return vals

        return loop
    raise ValueError(f"unknown IR operation {node.op!r}")


def run_ir(graph: DataflowGraph | CompiledProgram, entry: str = "main", seed: int = 0, shots: int = 1) -> Transcript:
    """Evaluate ``entry`` once per shot with seed ``seed + i``; same transcript format as the imperative run."""
    prog = graph if isinstance(graph, CompiledProgram) else CompiledProgram(graph)
    if entry not in prog.graph.functions:
        raise KeyError(f"no function named {entry!r}")
    fg: FunctionGraph = prog.graph.functions[entry]
    if fg.sig.inputs or any(is_quantum(t) for t in fg.sig.outputs):
        raise ValueError(f"entry function {entry!r} must take no arguments and return only classical values")
    region = prog.functions[entry]
    rets = fg.sig.outputs
    out = Transcript()
    for i in range(shots):
        shot = Shot()
        out.shots.append(shot)
        ctx = _Ctx(prog, QuantumState(ShotRng(shot_seed(seed, i))), shot)
        try:
            vals = region.run(ctx, [])
        except QImpRuntimeError as err:
            out.error = err.to_json(i)
            break
        if not rets:
            shot.result = None
        elif len(rets) == 1:
            shot.result = value_to_json(vals[0], rets[0])
        else:
            shot.result = value_to_json(vals, TupleType(tuple(rets)))
    return out
