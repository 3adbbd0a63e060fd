import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, typed, typed_corpus
from qimp.gen import generate_accepted
from qimp.lowering import (
    DataflowGraph,
    FunctionGraph,
    LoweredSig,
    Node,
    Region,
    Wire,
    emit_ir_text,
    emit_program_text,
    lower_program,
    lower_signature,
    verify_ir,
)
from qimp.lowering.ir import all_regions
from qimp.ownership import check_program
from qimp.typesys import BOOL, INT, QUBIT, FuncSig, OwnershipMode, is_quantum

B, O = OwnershipMode.BORROWED, OwnershipMode.OWNED
ACCEPTED = [n for n in sorted(p.stem for p in CORPUS.glob("*.qimp")) if not check_program(typed_corpus(n))]


@pytest.mark.parametrize(
    "params, returns, expected",
    [
        ([("q", QUBIT, B)], [], "(qubit) -> (qubit)"),
        ([("q", QUBIT, O)], [BOOL], "(qubit) -> (bool)"),
        ([("a", QUBIT, B), ("b", QUBIT, O), ("x", INT, O)], [BOOL], "(qubit, qubit, int) -> (bool, qubit)"),
        ([], [QUBIT, QUBIT], "() -> (qubit, qubit)"),
        ([("x", INT, O)], [], "(int) -> ()"),
    ],
)
def test_lower_signature(params, returns, expected):
    assert str(lower_signature(FuncSig.make("f", params, returns))) == expected


def test_mixed_signature_through_lowering():
    src = (
        "def f(a: qubit, b: qubit @owned, x: int) -> bool:\n   cx(a, b)\n   return measure(b)\n\n"
        "def main() -> bool:\n   a = qubit()\n   r = f(a, qubit(), 3)\n   discard(a)\n   return r\n"
    )
    g = lower_program(typed(src))
    assert str(g.functions["f"].sig) == "(qubit, qubit, int) -> (bool, qubit)"
    assert verify_ir(g) == []


def test_foo_lowering_listing():
    fg = lower_program(typed_corpus("foo_imperative")).functions["foo_imperative"]
    assert str(fg.sig) == "(qubit) -> (qubit)"
    assert [n.op for n in fg.body.nodes] == ["input", "h", "z", "output"]
    assert emit_ir_text(fg).count("\n") == 4


def test_bell_lowering_shape():
    fg = lower_program(typed_corpus("bell")).functions["bell"]
    ops = [n.op for n in fg.body.nodes]
    assert ops.count("alloc") == 2 and ops.count("h") == 1 and ops.count("cx") == 1
    assert fg.body.inputs == []
    assert fg.body.outputs == [QUBIT, QUBIT]


def test_empty_function():
    fg = lower_program(typed("def f():\n   x = 1\n")).functions["f"]
    assert str(fg.sig) == "() -> ()"
    ops = [n.op for n in fg.body.nodes]
    assert ops[0] == "input" and ops[-1] == "output"
    assert not any(is_quantum(t) for n in fg.body.nodes for t in n.out_types)


def test_conditional_threads_borrowed_qubit():
    fg = lower_program(typed("def f(b: bool, q: qubit):\n   if b:\n      x(q)\n")).functions["f"]
    (cond,) = [n for n in fg.body.nodes if n.op == "conditional"]
    then_r, else_r = cond.regions
    assert cond.in_types == [BOOL, QUBIT] and cond.out_types == [QUBIT]
    assert [n.op for n in then_r.nodes] == ["input", "x", "output"]
    # The untaken branch just passes q through.
    assert [n.op for n in else_r.nodes] == ["input", "output"]
    assert else_r.wires[0].src == (else_r.input_node.id, 0)


def test_for_loop_becomes_loop_node():
    g = lower_program(typed_corpus("example_small"))
    assert any(n.op == "loop" for r in all_regions(g.functions["example"].body) for n in r.nodes)
    assert verify_ir(g) == []


@pytest.mark.parametrize("name", ACCEPTED)
def test_corpus_lowers_clean(name):
    assert verify_ir(lower_program(typed_corpus(name))) == []


@pytest.mark.parametrize("name", ACCEPTED)
def test_lowering_is_deterministic(name):
    a = emit_program_text(lower_program(typed_corpus(name)))
    b = emit_program_text(lower_program(typed_corpus(name)))
    assert a == b


def test_golden_foo_imperative():
    text = emit_program_text(lower_program(typed((CORPUS / "foo_imperative.qimp").read_text(), "corpus/listings/foo_imperative.qimp")))
    assert text == (CORPUS / "foo_imperative.ir").read_text()


# --- hand-built graphs ---------------------------------------------------------


def _graph(nodes, wires, sig=LoweredSig((QUBIT,), (QUBIT,))):
    return DataflowGraph({"g": FunctionGraph("g", sig, Region(nodes, wires))})


def _identity_h():
    nodes = [
        Node(0, "input", out_types=[QUBIT]),
        Node(1, "h", in_types=[QUBIT], out_types=[QUBIT]),
        Node(2, "output", in_types=[QUBIT]),
    ]
    wires = [Wire((0, 0), (1, 0), QUBIT), Wire((1, 0), (2, 0), QUBIT)]
    return nodes, wires


def test_hand_built_valid():
    assert verify_ir(_graph(*_identity_h())) == []


def test_fan_out_is_flagged():
    nodes = [
        Node(0, "input", out_types=[QUBIT]),
        Node(1, "h", in_types=[QUBIT], out_types=[QUBIT]),
        Node(2, "z", in_types=[QUBIT], out_types=[QUBIT]),
        Node(3, "output", in_types=[QUBIT]),
    ]
    wires = [Wire((0, 0), (1, 0), QUBIT), Wire((0, 0), (2, 0), QUBIT), Wire((1, 0), (3, 0), QUBIT)]
    kinds = {v.kind for v in verify_ir(_graph(nodes, wires))}
    assert "linearity" in kinds


def test_dangling_output_is_flagged():
    nodes, wires = _identity_h()
    nodes.insert(2, Node(5, "alloc", out_types=[QUBIT]))
    out = verify_ir(_graph(nodes, wires))
    assert [(v.kind, v.node) for v in out] == [("linearity", 5)]
    assert "unconsumed" in out[0].message


def test_type_mismatch_is_flagged():
    nodes, wires = _identity_h()
    wires[0] = Wire((0, 0), (1, 0), INT)
    assert any(v.kind == "type" for v in verify_ir(_graph(nodes, wires)))


def test_cycle_is_flagged():
    nodes = [
        Node(0, "input", out_types=[QUBIT]),
        Node(1, "cx", in_types=[QUBIT, QUBIT], out_types=[QUBIT, QUBIT]),
        Node(2, "output", in_types=[QUBIT]),
    ]
    wires = [Wire((0, 0), (1, 0), QUBIT), Wire((1, 1), (1, 1), QUBIT), Wire((1, 0), (2, 0), QUBIT)]
    assert any(v.kind == "cycle" for v in verify_ir(_graph(nodes, wires)))


def test_signature_mismatch_is_flagged():
    nodes, wires = _identity_h()
    assert any(v.kind == "signature" for v in verify_ir(_graph(nodes, wires, LoweredSig((), (QUBIT,)))))


# --- properties ---------------------------------------------------------------


def qubit_wires(graph):
    for fg in graph.functions.values():
        for region in all_regions(fg.body):
            for i, w in enumerate(region.wires):
                if is_quantum(w.type):
                    yield region, i


def mutate(graph, rng: random.Random) -> str:
    """Duplicate or delete one qubit wire in place; returns which."""
    region, i = rng.choice(list(qubit_wires(graph)))
    if rng.random() < 0.5:
        region.wires.append(region.wires[i])
        return "duplicate"
    del region.wires[i]
    return "delete"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_programs_lower_clean(seed):
    g = lower_program(typed(generate_accepted(seed).source))
    assert verify_ir(g) == []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_wire_mutations_are_flagged(seed):
    g = lower_program(typed(generate_accepted(seed).source))
    mutate(g, random.Random(seed))
    assert verify_ir(g) != []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_signature_counts_borrowed_params(seed):
    prog = typed(generate_accepted(seed).source)
    for info in prog.functions.values():
        sig = info.sig
        low = lower_signature(sig)
        n_borrowed = sum(p.mode is B and is_quantum(p.type) for p in sig.params)
        n_quantum_returns = sum(is_quantum(t) for t in sig.returns)
        assert sum(is_quantum(t) for t in low.outputs) == n_quantum_returns + n_borrowed
        assert low.inputs == tuple(p.type for p in sig.params)
