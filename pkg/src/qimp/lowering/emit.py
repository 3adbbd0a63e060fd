"""Text and JSON renderings of dataflow graphs."""

from __future__ import annotations

import json

from qimp.lowering.ir import DataflowGraph, FunctionGraph, Node, Region


def _fmt_param(v) -> str:
    return json.dumps(v) if isinstance(v, str) else repr(v)


def _node_line(n: Node, sources: dict) -> str:
    s = f"{n.id}: {n.op}"
    if n.params:
        s += "[" + ", ".join(f"{k}={_fmt_param(v)}" for k, v in sorted(n.params.items())) + "]"
    if n.in_types:
        s += "(" + ", ".join(f"{a}.{b}" for a, b in (sources.get((n.id, i), ("?", "?")) for i in range(len(n.in_types)))) + ")"
    if n.out_types:
        s += " -> " + ", ".join(map(str, n.out_types))
    return s


def _region_lines(r: Region, indent: str) -> list[str]:
    sources = {w.dst: w.src for w in r.wires}
    lines = []
    for n in r.nodes:
        lines.append(indent + _node_line(n, sources))
        for k, sub in enumerate(n.regions):
            lines.append(f"{indent}  region {k}:")
            lines += _region_lines(sub, indent + "    ")
    return lines


def emit_ir_text(graph: FunctionGraph) -> str:
    """One line per node in id order: ``id: op[params](src.port, ...) -> types``."""
    return "\n".join(_region_lines(graph.body, "")) + "\n"


def emit_program_text(graph: DataflowGraph) -> str:
    chunks = []
    for fg in graph.functions.values():
        body = "".join("  " + line + "\n" for line in emit_ir_text(fg).splitlines())
        chunks.append(f"function {fg.name} {fg.sig}\n{body}")
    return "\n".join(chunks)


def _region_json(r: Region) -> dict:
    return {
        "inputs": [str(t) for t in r.inputs],
        "outputs": [str(t) for t in r.outputs],
        "nodes": [
            {
                "id": n.id,
                "op": n.op,
                "params": dict(sorted(n.params.items())),
                "in_ports": [str(t) for t in n.in_types],
                "out_ports": [str(t) for t in n.out_types],
                "regions": [_region_json(x) for x in n.regions],
            }
            for n in r.nodes
        ],
        "wires": [{"from": list(w.src), "to": list(w.dst), "type": str(w.type)} for w in r.wires],
    }


def ir_to_json(graph: DataflowGraph) -> dict:
    return {
        "structs": {
            name: [[f, str(t)] for f, t in st.fields] for name, st in graph.structs.items()
        },
        "functions": [
            {"name": fg.name, **_region_json(fg.body), "inputs": [str(t) for t in fg.sig.inputs],
             "outputs": [str(t) for t in fg.sig.outputs]}
            for fg in graph.functions.values()
        ],
    }


def emit_ir_json(graph: DataflowGraph) -> str:
    return json.dumps(ir_to_json(graph), indent=2, sort_keys=False) + "\n"
