"""Control-flow graphs over resolved function bodies.

Structured statements are flattened into basic blocks. A ``for`` loop becomes
an index-counter loop: the pre-header evaluates the iterated place, the header
tests the hidden counter, and the body opens a reborrow region that binds the
loop variable to ``arr[i]`` and freezes ``arr`` until the body ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from qimp.diagnostics import Span
from qimp.frontend import ast as A
from qimp.resolve import FunctionInfo, place_of
from qimp.typesys import Place, is_quantum


@dataclass(frozen=True)
class CfgStmt:
    # "stmt" | "cond" | "for_init" | "for_bind" | "for_unbind"
    kind: str
    node: object
    # Places frozen by enclosing for-loop reborrow regions, with the loop span.
    frozen: tuple[tuple[Place, Span], ...] = ()
    loop_cond: bool = False


@dataclass
class Block:
    id: int
    stmts: list[CfgStmt] = field(default_factory=list)
    succs: list[int] = field(default_factory=list)
    preds: list[int] = field(default_factory=list)
    # The if/while/for statement whose control flow merges at this block.
    join_span: Span | None = None
    loop_header: bool = False


@dataclass
class CFG:
    blocks: list[Block]
    entry: int
    exit: int

    def back_edges(self) -> list[tuple[int, int]]:
        return [(b.id, s) for b in self.blocks for s in b.succs if s <= b.id and self.blocks[s].loop_header]

    def rpo(self) -> list[int]:
        seen, order = set(), []

        def visit(n):
            seen.add(n)
            for s in self.blocks[n].succs:
                if s not in seen:
                    visit(s)
            order.append(n)

        visit(self.entry)
        return order[::-1]


class _Builder:
    def __init__(self):
        self.blocks: list[Block] = []

    def new(self, **kw) -> Block:
        b = Block(len(self.blocks), **kw)
        self.blocks.append(b)
        return b

    def edge(self, a: Block, b: Block):
        a.succs.append(b.id)
        b.preds.append(a.id)

    def stmts(self, stmts, cur: Block, frozen) -> Block:
        for s in stmts:
            cur = self.stmt(s, cur, frozen)
        return cur

    def stmt(self, s, cur: Block, frozen) -> Block:
        if isinstance(s, A.If):
            cur.stmts.append(CfgStmt("cond", s.cond, frozen))
            then_b = self.new()
            else_b = self.new() if s.orelse else None
            join = self.new(join_span=s.span)
            self.edge(cur, then_b)
            self.edge(cur, else_b or join)
            self.edge(self.stmts(s.body, then_b, frozen), join)
            if else_b is not None:
                self.edge(self.stmts(s.orelse, else_b, frozen), join)
            return join
        if isinstance(s, A.While):
            header = self.new(join_span=s.span, loop_header=True)
            self.edge(cur, header)
            header.stmts.append(CfgStmt("cond", s.cond, frozen, loop_cond=True))
            body = self.new()
            exit_b = self.new()
            self.edge(header, body)
            self.edge(header, exit_b)
            self.edge(self.stmts(s.body, body, frozen), header)
            return exit_b
        if isinstance(s, A.For):
            cur.stmts.append(CfgStmt("for_init", s, frozen))
            header = self.new(join_span=s.span, loop_header=True)
            self.edge(cur, header)
            body = self.new()
            exit_b = self.new()
            self.edge(header, body)
            self.edge(header, exit_b)
            body.stmts.append(CfgStmt("for_bind", s, frozen))
            inner = frozen
            if is_quantum(s.iter.ty):
                inner = frozen + ((place_of(s.iter), s.iter.span),)
            end = self.stmts(s.body, body, inner)
            end.stmts.append(CfgStmt("for_unbind", s, frozen))
            self.edge(end, header)
            return exit_b
        cur.stmts.append(CfgStmt("stmt", s, frozen))
        return cur


def build_cfg(info: FunctionInfo) -> CFG:
    b = _Builder()
    entry = b.new()
    end = b.stmts(info.decl.body, entry, ())
    return CFG(b.blocks, entry.id, end.id)
