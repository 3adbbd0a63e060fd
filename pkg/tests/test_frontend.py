import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS
from qimp.diagnostics import NO_SPAN, LexError, ParseError, QImpError
from qimp.frontend import ast as A
from qimp.frontend import parse_source, print_module, tokenize
from qimp.frontend.printer import print_expr
from qimp.gen import generate_accepted, generate_rejected

CORPUS_FILES = sorted(CORPUS.glob("*.qimp"))


def mk(cls, *args):
    return cls(*args, span=NO_SPAN)


def kinds(src):
    return [repr(t) for t in tokenize(src)]


@pytest.mark.parametrize(
    "src, expected",
    [
        (
            "q1, q2 = qubit(), qubit()",
            "IDENT q1|COMMA|IDENT q2|EQUALS|IDENT qubit|LPAREN|RPAREN|COMMA|IDENT qubit|LPAREN|RPAREN",
        ),
        ("", ""),
        ("q @owned", "IDENT q|AT_OWNED"),
        ("x += 2 * y", "IDENT x|PLUS_EQ|INT 2|STAR|IDENT y"),
        ("a -> b", "IDENT a|ARROW|IDENT b"),
        ("# only a comment\n\n", ""),
    ],
)
def test_tokenize_examples(src, expected):
    assert "|".join(kinds(src)) == expected


def test_indent_dedent():
    toks = kinds("def f():\n   h(q)\n   if c:\n      x(q)\n   z(q)\n")
    assert toks.count("INDENT") == 2
    assert toks.count("DEDENT") == 2


def test_brackets_suppress_newlines():
    toks = kinds("f(a,\n  b)\n")
    assert "NEWLINE" not in toks and "INDENT" not in toks


@pytest.mark.parametrize(
    "src",
    [
        "q $ r",  # illegal character
        "def f():\n      h(q)\n   h(q)\n",  # dedent to a level never opened
        "   h(q)\n",  # leading indentation
        "f(a, b\n",  # unclosed bracket
        "q @borrowed",
    ],
)
def test_lex_errors(src):
    with pytest.raises(LexError) as info:
        tokenize(src)
    assert info.value.diagnostics[0].code == "QL001"


def test_bell_parses_to_expected_shape():
    m = parse_source((CORPUS / "bell.qimp").read_text())
    (f,) = m.functions
    assert f.name == "bell"
    assert f.params == []
    assert [t.name for t in f.returns] == ["qubit", "qubit"]
    assert len(f.body) == 4
    assert isinstance(f.body[-1], A.Return)


def test_mystruct_listing_shape():
    m = parse_source((CORPUS / "mystruct_example.qimp").read_text())
    (s,) = m.structs
    assert [(fd.name, fd.type) for fd in s.fields] == [
        ("q", mk(A.NamedTypeExpr, "qubit")),
        ("qs", mk(A.ArrayTypeExpr, mk(A.NamedTypeExpr, "qubit"), 42)),
        ("x", mk(A.NamedTypeExpr, "int")),
    ]
    (f,) = m.functions
    assert any(isinstance(s, A.For) for s in f.body)


def test_owned_param_flag():
    (f,) = parse_source((CORPUS / "bar.qimp").read_text()).functions
    assert f.params[0].owned is True


@pytest.mark.parametrize(
    "src",
    [
        "def f(): pass\n",
        "def f():\n   pass\n",
        "def f():\n",
        "def f(q: qubit)\n   h(q)\n",
        "def f():\n   x = \n",
        "class S:\n   def g():\n      h(q)\n",
        "def f():\n   return 1 +\n",
    ],
)
def test_parse_errors(src):
    with pytest.raises(ParseError) as info:
        parse_source(src)
    d = info.value.diagnostics[0]
    assert d.code == "QP001"
    assert d.span.start_line >= 1


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse_source("def f(q: qubit)\n   h(q)\n")
    assert info.value.expected


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    m = parse_source(path.read_text())
    assert parse_source(print_module(m)) == m


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_spans_nest(path):
    m = parse_source(path.read_text(), path.name)

    def check(node):
        for c in A.children(node):
            assert node.span.contains(c.span), (node, c)
            check(c)

    check(m)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_round_trip(seed):
    m = parse_source(generate_accepted(seed).source)
    assert parse_source(print_module(m)) == m


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_mutants_parse(seed):
    # Ownership violations are semantic; the syntax stays valid.
    parse_source(generate_rejected(seed).source)


_names = st.sampled_from(["a", "b", "xs", "s"])
_leaf = st.one_of(
    st.integers(0, 1000).map(lambda v: mk(A.IntLit, v)),
    st.floats(0, 100, allow_nan=False).map(lambda v: mk(A.FloatLit, v)),
    st.booleans().map(lambda v: mk(A.BoolLit, v)),
    _names.map(lambda n: mk(A.Name, n)),
)


def _grow(inner):
    ops = ["+", "-", "*", "/", "==", "!=", "<", "<=", ">", ">=", "and", "or"]
    return st.one_of(
        st.builds(lambda o, l, r: mk(A.BinOp, o, l, r), st.sampled_from(ops), inner, inner),
        st.builds(lambda o, x: mk(A.UnaryOp, o, x), st.sampled_from(["not", "-"]), inner),
        st.builds(lambda n, f: mk(A.Attribute, mk(A.Name, n), f), _names, st.sampled_from(["q", "x"])),
        st.builds(lambda n, i: mk(A.Subscript, mk(A.Name, n), mk(A.IntLit, i)), _names, st.integers(0, 9)),
        st.builds(lambda args: mk(A.Call, "f", args), st.lists(inner, max_size=3)),
    )


@settings(max_examples=300, deadline=None)
@given(st.recursive(_leaf, _grow, max_leaves=12))
def test_expression_print_parse_identity(e):
    src = f"def f():\n   y = {print_expr(e)}\n"
    (f,) = parse_source(src).functions
    assert f.body[0].value == e


def test_multi_file_errors_carry_file_name():
    with pytest.raises(QImpError) as info:
        parse_source("def f(:\n", "broken.qimp")
    assert info.value.diagnostics[0].span.file == "broken.qimp"
