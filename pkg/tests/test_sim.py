import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, corpus_path, typed, typed_corpus
from qimp.gen import generate_accepted
from qimp.lowering import lower_program
from qimp.sim import (
    QImpRuntimeError,
    QuantumState,
    ShotRng,
    apply_gate,
    first_divergence,
    measure_qubit,
    run_imperative,
    run_ir,
    shot_seed,
)
from qimp.sim.statevector import GATES, rz_matrix

R2 = 1 / math.sqrt(2)


def fresh(n, seed=0):
    st_ = QuantumState(ShotRng(seed))
    hs = [st_.alloc() for _ in range(n)]
    return st_, hs


# --- gate semantics ---------------------------------------------------------


def test_h_on_zero():
    s, (q,) = fresh(1)
    apply_gate(s, "h", [q])
    np.testing.assert_allclose(s.vector(), [R2, R2], atol=1e-12)


def test_cx_makes_bell():
    s, (a, b) = fresh(2)
    apply_gate(s, "h", [a])
    np.testing.assert_allclose(s.vector(), [R2, 0, R2, 0], atol=1e-12)
    apply_gate(s, "cx", [a, b])
    np.testing.assert_allclose(s.vector(), [R2, 0, 0, R2], atol=1e-12)


def test_z_after_h():
    s, (q,) = fresh(1)
    apply_gate(s, "h", [q])
    apply_gate(s, "z", [q])
    np.testing.assert_allclose(s.vector(), [R2, -R2], atol=1e-12)


def _dense(gate, axes, n, theta=None):
    """Full 2**n unitary built from Kronecker products; axis 0 is the most significant bit."""
    if gate in ("cx", "cz"):
        c, t = axes
        dim = 2**n
        u = np.zeros((dim, dim), dtype=complex)
        for i in range(dim):
            bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
            j_bits = list(bits)
            phase = 1
            if bits[c]:
                if gate == "cx":
                    j_bits[t] ^= 1
                elif bits[t]:
                    phase = -1
            j = sum(b << (n - 1 - k) for k, b in enumerate(j_bits))
            u[j, i] = phase
        return u
    m = rz_matrix(theta) if gate == "rz" else GATES[gate]
    out = np.eye(1)
    for k in range(n):
        out = np.kron(out, m if k == axes[0] else np.eye(2))
    return out


_ops = st.one_of(
    st.tuples(st.sampled_from(sorted(GATES)), st.integers(0, 3), st.just(0), st.just(None)),
    st.tuples(st.just("rz"), st.integers(0, 3), st.just(0), st.floats(-6.3, 6.3)),
    st.tuples(st.sampled_from(["cx", "cz"]), st.integers(0, 3), st.integers(1, 3), st.just(None)),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(_ops, max_size=25))
def test_gates_match_dense_matrices(ops):
    n = 4
    s, hs = fresh(n)
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    for gate, a, off, theta in ops:
        axes = [a] if gate not in ("cx", "cz") else [a, (a + off) % n]
        apply_gate(s, gate, [hs[k] for k in axes], theta)
        psi = _dense(gate, axes, n, theta) @ psi
    np.testing.assert_allclose(s.vector(), psi, atol=1e-9)
    assert abs(s.norm() - 1) < 1e-9


def test_repeated_target_is_alias_error():
    s, (a,) = fresh(1)
    with pytest.raises(QImpRuntimeError) as info:
        apply_gate(s, "cx", [a, a])
    assert info.value.kind == "DoubleBorrowAlias"


def test_dead_handle_is_use_after_free():
    s, (a,) = fresh(1)
    measure_qubit(s, a)
    with pytest.raises(QImpRuntimeError) as info:
        apply_gate(s, "h", [a])
    assert info.value.kind == "UseAfterFree"


def test_capacity():
    s = QuantumState(ShotRng(0))
    for _ in range(16):
        s.alloc()
    with pytest.raises(QImpRuntimeError) as info:
        s.alloc()
    assert info.value.kind == "CapacityExceeded"


# --- measurement ------------------------------------------------------------


@given(st.integers(0, 2**64 - 1))
def test_zero_always_measures_zero(seed):
    s, (q,) = fresh(1, seed)
    bit, s = measure_qubit(s, q)
    assert bit == 0
    assert s.n == 0


@settings(max_examples=200)
@given(st.integers(0, 2**64 - 1))
def test_bell_outcomes_agree(seed):
    s, (a, b) = fresh(2, seed)
    apply_gate(s, "h", [a])
    apply_gate(s, "cx", [a, b])
    assert measure_qubit(s, a)[0] == measure_qubit(s, b)[0]


def test_measurement_removes_wire_and_keeps_order():
    s, (a, b, c) = fresh(3)
    apply_gate(s, "x", [c])
    measure_qubit(s, b)
    assert s.wires == [a, c]
    np.testing.assert_allclose(s.vector(), [0, 1, 0, 0], atol=1e-12)


def test_measurement_renormalizes():
    s, (a, b) = fresh(2, seed=3)
    apply_gate(s, "h", [a])
    apply_gate(s, "h", [b])
    measure_qubit(s, a)
    np.testing.assert_allclose(s.vector(), [R2, R2], atol=1e-12)


def test_h_frequency_small_sample():
    # 2000 shots: sd = 0.011, so [0.45, 0.55] is a > 4 sigma window.
    ones = 0
    for i in range(2000):
        s, (q,) = fresh(1, shot_seed(99, i))
        apply_gate(s, "h", [q])
        ones += measure_qubit(s, q)[0]
    assert 0.45 <= ones / 2000 <= 0.55


# --- RNG --------------------------------------------------------------------

_MULT = 0x2360ED051FC65DA44385DF649FCCF645


def _pcg64_step(state, inc):
    """Reference XSL-RR output for one 128-bit LCG step."""
    state = (state * _MULT + inc) % 2**128
    x = ((state >> 64) ^ state) % 2**64
    r = state >> 122
    return state, ((x >> r) | (x << ((64 - r) % 64))) % 2**64


@pytest.mark.parametrize("seed", [0, 1, 12345, 2**64 - 1])
def test_rng_matches_reference_algorithm(seed):
    rng = ShotRng(seed)
    internal = rng._bg.state["state"]
    state, inc = internal["state"], internal["inc"]
    for _ in range(16):
        state, want = _pcg64_step(state, inc)
        assert rng.raw() == want


def test_rng_matches_pinned_sequence():
    ref = json.loads((CORPUS.parent / "rng" / "pcg64_reference.json").read_text())
    for seed, seq in ref["sequences"].items():
        rng = ShotRng(int(seed))
        assert [str(rng.raw()) for _ in seq] == seq


def test_uniform_first_draws():
    rng = ShotRng(0)
    assert [rng.uniform() for _ in range(3)] == [0.6369616873214543, 0.2697867137638703, 0.04097352393619469]


def test_shot_seed_wraps():
    assert shot_seed(2**64 - 1, 1) == 0
    assert shot_seed(5, 3) == 8


# --- interpreters -----------------------------------------------------------


def test_bell_main_assertions_hold():
    t = run_imperative(typed_corpus("bell_main"), "main", 0, 200)
    assert t.error is None
    assert all(ok for shot in t.shots for _, ok in shot.assertions)
    bits = {tuple(b for _, b in shot.measurements) for shot in t.shots}
    assert bits == {(0, 0), (1, 1)}


@pytest.mark.parametrize(
    "name, harness, kind",
    [
        ("baz_main", "", "LeakAtScopeExit"),
        ("main_already_consumed", "", "UseAfterFree"),
        ("bell_already_borrowed", "def main():\n   a, b = bell()\n   discard(a)\n   discard(b)\n", "DoubleBorrowAlias"),
        ("foo_not_owned", "def main():\n   q = qubit()\n   foo(q)\n   discard(q)\n", "NotOwned"),
    ],
)
def test_error_listings_fail_dynamically(name, harness, kind):
    src = corpus_path(name).read_text() + "\n" + harness
    t = run_imperative(typed(src), "main", 0, 10)
    assert t.error["kind"] == kind
    assert t.error["shot"] == 0


def test_foo_harness_is_fair_coin():
    # Z.H|0> = (|0> - |1>)/sqrt(2): each outcome with probability 1/2.
    t = run_ir(lower_program(typed_corpus("foo_harness")), "main", 0, 4000)
    ones = sum(shot.result for shot in t.shots)
    assert 0.46 <= ones / 4000 <= 0.54


def test_empty_entry():
    prog = typed("def main():\n   x = 1\n")
    for t in (run_imperative(prog, "main", 0, 3), run_ir(lower_program(prog), "main", 0, 3)):
        assert [s.to_json() for s in t.shots] == [{"measurements": [], "assertions": [], "result": None}] * 3


def test_example_small_result():
    prog = typed_corpus("example_small")
    a = run_imperative(prog, "main", 0, 20)
    assert a.error is None
    assert {s.result for s in a.shots} == {3}
    assert first_divergence(a, run_ir(lower_program(prog), "main", 0, 20)) is None


def test_classical_arrays_copy_on_assignment():
    src = (
        "def main() -> int:\n   xs = array(1, 2)\n   ys = xs\n   ys[0] = 5\n   return xs[0]\n"
    )
    prog = typed(src)
    assert run_imperative(prog).shots[0].result == 1
    assert run_ir(lower_program(prog)).shots[0].result == 1


def test_division_by_zero():
    t = run_imperative(typed("def main() -> float:\n   z = 0.0\n   return 1.0 / z\n"))
    assert t.error["kind"] == "ArithmeticError"


def test_failed_assertion_stops_run():
    src = "def main():\n   q = qubit()\n   x(q)\n   assert measure(q) == False\n"
    prog = typed(src)
    a = run_imperative(prog, "main", 0, 5)
    b = run_ir(lower_program(prog), "main", 0, 5)
    assert a.error["kind"] == "AssertionFailed" and len(a.shots) == 1
    assert a == b


def test_bad_entry():
    prog = typed_corpus("foo")
    with pytest.raises(KeyError):
        run_imperative(prog, "nope")
    with pytest.raises(ValueError):
        run_imperative(prog, "foo")


@pytest.mark.parametrize("name", ["bell_main", "foo_harness", "example_small"])
def test_corpus_differential(name):
    prog = typed_corpus(name)
    a = run_imperative(prog, "main", 11, 100)
    b = run_ir(lower_program(prog), "main", 11, 100)
    assert first_divergence(a, b) is None


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2**64 - 1))
def test_generated_differential(seed, base):
    prog = typed(generate_accepted(seed).source)
    a = run_imperative(prog, "main", base, 10)
    b = run_ir(lower_program(prog), "main", base, 10)
    assert a.error is None
    assert first_divergence(a, b) is None


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2**64 - 1))
def test_seed_determinism(seed, base):
    prog = typed(generate_accepted(seed).source)
    assert run_imperative(prog, "main", base, 5) == run_imperative(prog, "main", base, 5)
