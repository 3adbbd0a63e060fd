"""Structural checks for dataflow graphs.

Linearity is the graph-level image of unique borrows: each qubit-carrying
output port feeds exactly one input port, and every input port has exactly
one producer.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from qimp.lowering.ir import DataflowGraph, FunctionGraph, Node, Region
from qimp.typesys import BOOL, is_quantum


@dataclass(frozen=True)
class IrViolation:
    # "linearity" | "type" | "cycle" | "signature" | "boundary" | "structure"
    kind: str
    message: str
    function: str
    node: int | None = None
    port: int | None = None

    def __str__(self):
        where = self.function
        if self.node is not None:
            where += f" node {self.node}"
        if self.port is not None:
            where += f" port {self.port}"
        return f"{self.kind}: {self.message} ({where})"


def _check_region(fn: str, region: Region, graph: DataflowGraph, out: list[IrViolation]):
    def bad(kind, msg, node=None, port=None):
        out.append(IrViolation(kind, msg, fn, node, port))

    nodes = {n.id: n for n in region.nodes}
    if len(nodes) != len(region.nodes):
        bad("structure", "duplicate node id")
    if not region.nodes or region.nodes[0].op != "input" or region.nodes[-1].op != "output":
        bad("structure", "region must start with input and end with output")
        return
    if sum(n.op in ("input", "output") for n in region.nodes) != 2:
        bad("structure", "region has extra input/output nodes")

    incoming: Counter = Counter()
    outgoing: Counter = Counter()
    succs: dict[int, set[int]] = {n.id: set() for n in region.nodes}
    for w in region.wires:
        src, dst = nodes.get(w.src[0]), nodes.get(w.dst[0])
        if src is None or dst is None:
            bad("boundary", f"wire {w.src} -> {w.dst} leaves its region", w.dst[0], w.dst[1])
            continue
        if not 0 <= w.src[1] < len(src.out_types) or not 0 <= w.dst[1] < len(dst.in_types):
            bad("structure", f"wire {w.src} -> {w.dst} uses a missing port", w.dst[0], w.dst[1])
            continue
        if src.out_types[w.src[1]] != w.type or dst.in_types[w.dst[1]] != w.type:
            bad("type", f"wire of type {w.type} connects {src.out_types[w.src[1]]} to {dst.in_types[w.dst[1]]}",
                w.dst[0], w.dst[1])
        incoming[w.dst] += 1
        outgoing[w.src] += 1
        succs[src.id].add(dst.id)

    for n in region.nodes:
        for i, t in enumerate(n.in_types):
            c = incoming[(n.id, i)]
            if c != 1:
                kind = "linearity" if is_quantum(t) else "structure"
                bad(kind, f"input port has {c} incoming wires", n.id, i)
        for i, t in enumerate(n.out_types):
            c = outgoing[(n.id, i)]
            if is_quantum(t) and c != 1:
                what = "unconsumed qubit value" if c == 0 else f"qubit value used {c} times"
                bad("linearity", what, n.id, i)
        _check_node(n, graph, bad)
        for r in n.regions:
            _check_region(fn, r, graph, out)

    # Kahn's algorithm; leftovers sit on a cycle.
    indeg = Counter()
    for a, bs in succs.items():
        for b in bs:
            indeg[b] += 1
    ready = [n for n in succs if indeg[n] == 0]
    seen = 0
    while ready:
        a = ready.pop()
        seen += 1
        for b in succs[a]:
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
    if seen != len(succs):
        bad("cycle", "region contains a cycle")


def _check_node(n: Node, graph: DataflowGraph, bad):
    if n.op == "conditional":
        if not n.regions:
            bad("signature", "conditional without regions", n.id)
        if not n.in_types or n.in_types[0] != BOOL:
            bad("signature", "conditional predicate must be bool", n.id, 0)
        for r in n.regions:
            if list(r.inputs) != list(n.in_types[1:]) or list(r.outputs) != list(n.out_types):
                bad("signature", "branch signature does not match the conditional", n.id)
    elif n.op == "loop":
        if len(n.regions) != 1:
            bad("signature", "loop must have exactly one body", n.id)
            return
        r = n.regions[0]
        ok = (
            n.in_types[:1] == [BOOL]
            and list(n.in_types[1:]) == list(n.out_types)
            and list(r.inputs) == list(n.out_types)
            and list(r.outputs) == [BOOL] + list(n.out_types)
        )
        if not ok:
            bad("signature", "loop body signature does not match the loop", n.id)
    elif n.regions:
        bad("structure", f"{n.op} node cannot own regions", n.id)
    if n.op == "call":
        callee = graph.functions.get(n.params.get("callee"))
        if callee is None:
            bad("signature", f"unknown callee {n.params.get('callee')}", n.id)
        elif tuple(n.in_types) != callee.sig.inputs or tuple(n.out_types) != callee.sig.outputs:
            bad("signature", f"call does not match the signature of {callee.name}", n.id)


def verify_function(fg: FunctionGraph, graph: DataflowGraph | None = None) -> list[IrViolation]:
    graph = graph or DataflowGraph({fg.name: fg})
    out: list[IrViolation] = []
    if tuple(fg.body.inputs) != fg.sig.inputs or tuple(fg.body.outputs) != fg.sig.outputs:
        out.append(IrViolation("signature", "body does not match the function signature", fg.name))
    _check_region(fg.name, fg.body, graph, out)
    return out


def verify_ir(graph: DataflowGraph | FunctionGraph) -> list[IrViolation]:
    """All violations in ``graph``; an empty list means the graph is well formed."""
    if isinstance(graph, FunctionGraph):
        return verify_function(graph)
    out = []
    for fg in graph.functions.values():
        out += verify_function(fg, graph)
    return out
