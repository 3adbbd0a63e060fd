import pytest

from conftest import CORPUS, codes, typed, typed_corpus
from qimp.diagnostics import MESSAGES
from qimp.ownership import build_cfg, check_program
from qimp.sim import run_imperative

PAIR = "class S:\n   q: qubit\n   qs: array[qubit, 2]\n   x: int\n\n"

# (file, [(code, message, line, col)]) for every listing in the corpus.
CORPUS_EXPECTED = {
    "bar": [],
    "baz": [("QB004", "Allocated qubit is not consumed", 2, 10)],
    "baz_main": [("QB004", "Allocated qubit is not consumed", 2, 10)],
    "bell": [],
    "bell_already_borrowed": [("QB001", "q1 already borrowed", 4, 11)],
    "bell_main": [],
    "empty": [],
    "example_small": [],
    "foo": [],
    "foo_harness": [],
    "foo_imperative": [],
    "foo_not_owned": [("QB003", "Cannot measure qubit since it is not owned", 5, 12)],
    "main_already_consumed": [("QB002", "q1 already consumed", 11, 6)],
    "mystruct_example": [],
}


def test_corpus_table_is_complete():
    assert sorted(p.stem for p in CORPUS.glob("*.qimp")) == sorted(CORPUS_EXPECTED)


@pytest.mark.parametrize("name", sorted(CORPUS_EXPECTED))
def test_corpus_diagnostics(name):
    got = [(d.code, d.message, d.span.start_line, d.span.start_col) for d in check_program(typed_corpus(name))]
    assert got == CORPUS_EXPECTED[name]


def test_catalog_messages():
    assert MESSAGES["QB001"].format(place="q1") == "q1 already borrowed"
    assert MESSAGES["QB002"].format(place="q1") == "q1 already consumed"
    assert MESSAGES["QB003"] == "Cannot measure qubit since it is not owned"
    assert MESSAGES["QB004"] == "Allocated qubit is not consumed"


def test_consumed_note_points_at_measure():
    (d,) = check_program(typed_corpus("main_already_consumed"))
    (note,) = d.notes
    assert note.message == "consumed here"
    assert note.span.start_line == 10


@pytest.mark.parametrize(
    "src, expected",
    [
        # conditional consumption
        ("def f(c: bool):\n   q = qubit()\n   if c:\n      measure(q)\n", ["QB005"]),
        ("def f(c: bool):\n   q = qubit()\n   if c:\n      measure(q)\n   else:\n      discard(q)\n", []),
        ("def f(c: bool):\n   q = qubit()\n   while c:\n      measure(q)\n   discard(q)\n", ["QB005"]),
        ("def f(c: bool):\n   if c:\n      y = 1\n   z = y\n", ["QB006"]),
        ("def f(qs: array[qubit, 2] @owned):\n   measure(qs[0])\n   discard_array(qs)\n", ["QB007"]),
        # partial moves
        (
            PAIR + "def f(s: S @owned) -> bool:\n   b = measure(s.q)\n   s.q = qubit()\n   h(s.q)\n"
            "   discard(s.q)\n   discard_array(s.qs)\n   return b\n",
            [],
        ),
        (
            PAIR + "def f(s: S @owned):\n   measure(s.q)\n   g(s)\n\n"
            "def g(s: S @owned):\n   discard(s.q)\n   discard_array(s.qs)\n",
            ["QB002"],
        ),
        (PAIR + "def f(s: S):\n   measure(s.q)\n", ["QB003"]),
        # for-loop reborrow regions
        (PAIR + "def f(s: S @owned):\n   for o in s.qs:\n      discard_array(s.qs)\n   discard(s.q)\n", ["QB001"]),
        (PAIR + "def f(s: S):\n   for o in s.qs:\n      g(s)\n\ndef g(s: S):\n   h(s.q)\n", ["QB001"]),
        (PAIR + "def f(s: S):\n   for o in s.qs:\n      cx(s.q, o)\n", []),
        (PAIR + "def f(s: S):\n   for o in s.qs:\n      measure(o)\n", ["QB003"]),
        # leaks and transfers
        ("def f():\n   q = qubit()\n   q = qubit()\n   discard(q)\n", ["QB004"]),
        ("def f(q: qubit) -> qubit:\n   return q\n", ["QB003"]),
        ("def f(q: qubit @owned):\n   h(q)\n", ["QB004"]),
        ("def f(q: qubit @owned):\n   h(q)\n   discard(q)\n", []),
        ("def f():\n   h(qubit())\n", ["QB004"]),
        ("def f() -> qubit:\n   q = qubit()\n   return q\n", []),
        # aliasing through moves and fields
        ("def f():\n   q = qubit()\n   r = q\n   h(q)\n   discard(r)\n", ["QB002"]),
        (PAIR + "def f(s: S):\n   cx(s.q, s.q)\n", ["QB001"]),
        (PAIR + "def f(s: S):\n   g(s, s.q)\n\ndef g(s: S, q: qubit):\n   h(q)\n", ["QB001"]),
        # classical values are never tracked
        ("def f(x: int) -> int:\n   y = x\n   z = x\n   return y + z\n", []),
    ],
)
def test_extra_cases(src, expected):
    assert codes(src) == expected


def test_one_bug_one_message():
    src = "def f():\n   q = qubit()\n   measure(q)\n   h(q)\n   x(q)\n   measure(q)\n"
    assert codes(src) == ["QB002"]


def test_qb005_both_paths_by_simulation():
    # The conditional-consumption error is real: one path leaks, the other doesn't.
    src = (
        "def f(c: bool):\n   q = qubit()\n   if c:\n      measure(q)\n\n"
        "def main_t():\n   f(True)\n\ndef main_f():\n   f(False)\n"
    )
    prog = typed(src)
    assert run_imperative(prog, "main_t", 0, 1).error is None
    assert run_imperative(prog, "main_f", 0, 1).error["kind"] == "LeakAtScopeExit"


def test_diagnostics_sorted_by_position():
    src = "def g():\n   q = qubit()\n\ndef f():\n   r = qubit()\n"
    ds = check_program(typed(src))
    assert [d.span.start_line for d in ds] == [2, 5]


def test_cfg_straight_line():
    cfg = build_cfg(typed_corpus("bell").functions["bell"])
    assert len(cfg.blocks) == 1
    assert cfg.back_edges() == []


def test_cfg_for_loop():
    cfg = build_cfg(typed_corpus("mystruct_example").functions["example"])
    entry, header, body, exit_ = cfg.blocks
    assert header.loop_header
    assert [s.kind for s in body.stmts][0] == "for_bind"
    assert cfg.back_edges() == [(body.id, header.id)]
    assert cfg.exit == exit_.id and cfg.entry == entry.id


def test_cfg_diamond():
    src = "def f(c: bool, q: qubit):\n   if c:\n      h(q)\n   else:\n      x(q)\n   z(q)\n"
    cfg = build_cfg(typed(src).functions["f"])
    assert len(cfg.blocks) == 4
    assert sorted(cfg.blocks[3].preds) == [1, 2]
