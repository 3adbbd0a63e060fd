"""Structured dataflow graphs with linear qubit wires.

A function body is a :class:`Region`. Its first node is ``input`` (one output
port per parameter) and its last is ``output`` (one input port per result).
``conditional`` and ``loop`` nodes own nested regions. Ports are identified by
``(node_id, index)``; node ids are unique within a function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from qimp.typesys import Type


class Val(NamedTuple):
    """An output port together with the type it carries."""

    node: int
    port: int
    type: Type


@dataclass
class Node:
    id: int
    op: str
    params: dict = field(default_factory=dict)
    in_types: list[Type] = field(default_factory=list)
    out_types: list[Type] = field(default_factory=list)
    regions: list["Region"] = field(default_factory=list)

    def out(self, i: int) -> Val:
        return Val(self.id, i, self.out_types[i])


@dataclass
class Wire:
    src: tuple[int, int]
    dst: tuple[int, int]
    type: Type


@dataclass
class Region:
    nodes: list[Node] = field(default_factory=list)
    wires: list[Wire] = field(default_factory=list)

    @property
    def input_node(self) -> Node:
        return self.nodes[0]

    @property
    def output_node(self) -> Node:
        return self.nodes[-1]

    @property
    def inputs(self) -> list[Type]:
        return self.input_node.out_types

    @property
    def outputs(self) -> list[Type]:
        return self.output_node.in_types


@dataclass(frozen=True)
class LoweredSig:
    inputs: tuple[Type, ...]
    outputs: tuple[Type, ...]

    def __str__(self):
        return "(" + ", ".join(map(str, self.inputs)) + ") -> (" + ", ".join(map(str, self.outputs)) + ")"


@dataclass
class FunctionGraph:
    name: str
    sig: LoweredSig
    body: Region
    # Indices of parameters whose values come back as trailing outputs.
    threaded_params: tuple[int, ...] = ()


@dataclass
class DataflowGraph:
    functions: dict[str, FunctionGraph] = field(default_factory=dict)
    structs: dict = field(default_factory=dict)


def all_regions(region: Region):
    """``region`` and every region nested in it, outermost first."""
    yield region
    for n in region.nodes:
        for r in n.regions:
            yield from all_regions(r)
