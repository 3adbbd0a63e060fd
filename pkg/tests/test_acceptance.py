"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import io
import os
import random
import subprocess
import sys
import time
from functools import lru_cache

import numpy as np

from conftest import ACCEPTANCE_LINES, CORPUS, ROOT, typed
from qimp.cli import main as cli_main
from qimp.gen import generate_accepted, generate_rejected
from qimp.lowering import lower_program, verify_ir
from qimp.ownership import check_program
from qimp.sim import SAFETY_KINDS, QuantumState, ShotRng, first_divergence, run_imperative, run_ir, shot_seed
from qimp.sim.statevector import GATES

N_PROGRAMS = 500
N_SEEDS = 100
DYNAMIC = {"QB001": "DoubleBorrowAlias", "QB002": "UseAfterFree", "QB003": "NotOwned", "QB004": "LeakAtScopeExit"}


def report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def read(name):
    path = CORPUS / f"{name}.qimp"
    return typed(path.read_text(), f"corpus/listings/{name}.qimp")


# --- 1 --------------------------------------------------------------------

LISTINGS = {
    # listing: (corpus file, expected [(code, message, line)])
    "bell": ("bell", []),
    "main": ("bell_main", []),
    "foo": ("foo", []),
    "bar": ("bar", []),
    "baz": ("baz", [("QB004", "Allocated qubit is not consumed", 2)]),
    "MyStruct/example": ("mystruct_example", []),
    "foo_imperative": ("foo_imperative", []),
    "cx(q1, q1)": ("bell_already_borrowed", [("QB001", "q1 already borrowed", 4)]),
    "h(q1) after measure": ("main_already_consumed", [("QB002", "q1 already consumed", 11)]),
    "measure borrowed q": ("foo_not_owned", [("QB003", "Cannot measure qubit since it is not owned", 5)]),
}


def test_criterion_1_listing_fidelity():
    t0 = time.perf_counter()
    bad = []
    for listing, (name, want) in LISTINGS.items():
        got = [(d.code, d.message, d.span.start_line) for d in check_program(read(name))]
        if got != want:
            bad.append(f"{listing}: {got}")
    golden = (CORPUS / "foo_imperative.ir").exists()
    dt = time.perf_counter() - t0
    ok = not bad and golden and dt < 1.0
    report(1, ok, f"{len(LISTINGS)} listings, {len(bad)} mismatches, lowering golden present={golden}, {dt:.3f}s (< 1s)")


# --- 2 --------------------------------------------------------------------


def test_criterion_2_translation_golden():
    out, err = io.StringIO(), io.StringIO()
    cwd = os.getcwd()
    os.chdir(ROOT)
    try:
        code = cli_main(["lower", "corpus/listings/foo_imperative.qimp"], out, err)
    finally:
        os.chdir(cwd)
    golden = (CORPUS / "foo_imperative.ir").read_text()
    fg = lower_program(read("foo_imperative")).functions["foo_imperative"]
    ops = [n.op for n in fg.body.nodes]
    ok = code == 0 and out.getvalue() == golden and str(fg.sig) == "(qubit) -> (qubit)"
    ok = ok and ops == ["input", "h", "z", "output"]
    report(2, ok, f"signature {fg.sig}, nodes {' -> '.join(ops)}, golden match={out.getvalue() == golden}")


# --- 3, 4, 5 share one batch of generated programs --------------------------

CORPUS_HARNESS = {
    "bell_main": "",
    "foo_harness": "",
    "example_small": "",
    "bar": "def main() -> bool:\n   q = qubit()\n   h(q)\n   return bar(q)\n",
    "foo": "def main() -> bool:\n   q = qubit()\n   foo(q)\n   return measure(q)\n",
}


@lru_cache(maxsize=None)
def accepted_batch():
    """(label, typed program, lowered graph, imperative transcript, IR transcript) per program."""
    out = []
    sources = [(n, (CORPUS / f"{n}.qimp").read_text() + "\n" + h) for n, h in CORPUS_HARNESS.items()]
    sources += [(f"gen{seed}", generate_accepted(seed).source) for seed in range(N_PROGRAMS)]
    t0 = time.perf_counter()
    for label, src in sources:
        prog = typed(src, f"{label}.qimp")
        diags = check_program(prog)
        graph = lower_program(prog) if not diags else None
        a = run_imperative(prog, "main", 0, N_SEEDS)
        b = run_ir(graph, "main", 0, N_SEEDS) if graph is not None else None
        out.append((label, prog, diags, graph, a, b))
    return out, time.perf_counter() - t0


def test_criterion_3_differential():
    batch, dt = accepted_batch()
    rejected = [label for label, _, diags, *_ in batch if diags]
    diverged = [(label, first_divergence(a, b)) for label, _, d, _, a, b in batch if not d and first_divergence(a, b)]
    errored = [(label, a.error["kind"]) for label, _, d, _, a, _ in batch if not d and a.error]
    ok = not rejected and not diverged and not errored and dt < 120
    detail = (
        f"{len(CORPUS_HARNESS)} corpus + {N_PROGRAMS} generated programs x {N_SEEDS} seeds, "
        f"{len(diverged)} divergences, {len(rejected)} unexpectedly rejected, {len(errored)} runtime errors, {dt:.1f}s (< 120s)"
    )
    report(3, ok, detail + (f"; first: {(diverged + errored + rejected)[0]}" if not ok and (diverged or errored or rejected) else ""))


def test_criterion_4_soundness_oracle():
    batch, _ = accepted_batch()
    false_alarm = [label for label, _, d, _, a, _ in batch if not d and a.error and a.error["kind"] in SAFETY_KINDS]
    misses = []
    by_code = {}
    for seed in range(N_PROGRAMS):
        g = generate_rejected(seed)
        prog = typed(g.source, f"mut{seed}.qimp")
        codes = [d.code for d in check_program(prog)]
        t = run_imperative(prog, "main", 0, N_SEEDS)
        kind = t.error and t.error["kind"]
        by_code[g.expected] = by_code.get(g.expected, 0) + 1
        if g.expected not in codes or kind != DYNAMIC[g.expected]:
            misses.append((seed, g.expected, codes, kind))
        if kind in SAFETY_KINDS and not codes:
            false_alarm.append(f"mut{seed}")
    ok = not false_alarm and not misses
    counts = ", ".join(f"{k}={v}" for k, v in sorted(by_code.items()))
    report(
        4,
        ok,
        f"{len(batch)} accepted with 0 safety errors required (got {len(false_alarm)}); "
        f"{N_PROGRAMS} rejected ({counts}), {len(misses)} missed" + (f"; first: {misses[0]}" if misses else ""),
    )


def test_criterion_5_ir_linearity():
    from test_lowering import mutate

    batch, _ = accepted_batch()
    graphs = [(label, g) for label, _, _, g, *_ in batch if g is not None]
    dirty = [label for label, g in graphs if verify_ir(g)]
    unflagged = []
    rng = random.Random(5)
    generated = [(label, prog) for label, prog, *_ in batch if label.startswith("gen")]
    for label, prog in generated[:100]:
        g = lower_program(prog)  # a fresh copy, so the shared batch stays intact
        how = mutate(g, rng)
        if not verify_ir(g):
            unflagged.append((label, how))
    ok = not dirty and not unflagged
    report(5, ok, f"verify_ir clean on {len(graphs) - len(dirty)}/{len(graphs)} graphs; {100 - len(unflagged)}/100 wire mutations flagged")


# --- 6 --------------------------------------------------------------------


def test_criterion_6_physics():
    t0 = time.perf_counter()
    bell = read("bell_main")
    ta = run_imperative(bell, "main", 0, 1000)
    tb = run_ir(lower_program(bell), "main", 0, 1000)
    bell_ok = ta.error is None and ta == tb and all(
        s.measurements[0][1] == s.measurements[1][1] for s in ta.shots
    )

    zero = typed("def main() -> bool:\n   q = qubit()\n   return measure(q)\n")
    zero_ok = all(s.result is False for s in run_imperative(zero, "main", 0, 1000).shots)

    plus = typed("def main() -> bool:\n   q = qubit()\n   h(q)\n   return measure(q)\n")
    shots = run_imperative(plus, "main", 0, 10000).shots
    freq = sum(s.result for s in shots) / len(shots)
    freq_ok = 0.48 <= freq <= 0.52

    rng = np.random.default_rng(6)
    st = QuantumState(ShotRng(0))
    hs = [st.alloc() for _ in range(10)]
    names = sorted(GATES) + ["rz", "cx", "cz"]
    drift = 0.0
    for _ in range(1000):
        g = names[rng.integers(len(names))]
        if g in ("cx", "cz"):
            a, b = rng.choice(10, 2, replace=False)
            st.apply(g, [hs[a], hs[b]])
        else:
            st.apply(g, [hs[rng.integers(10)]], float(rng.uniform(-np.pi, np.pi)) if g == "rz" else None)
        drift = max(drift, abs(st.norm() - 1))
    dt = time.perf_counter() - t0
    ok = bell_ok and zero_ok and freq_ok and drift < 1e-9 and dt < 30
    report(
        6,
        ok,
        f"bell equal on 1000 seeds={bell_ok}, |0> gives 0 on 1000 seeds={zero_ok}, "
        f"H frequency {freq:.4f} in [0.48, 0.52], max norm drift {drift:.1e} (< 1e-9), {dt:.1f}s (< 30s)",
    )


# --- 7 --------------------------------------------------------------------

CLI_RUNS = [
    ["check", "corpus/listings/bell.qimp"],
    ["check", "corpus/listings/baz.qimp"],
    ["check", "corpus/listings/main_already_consumed.qimp", "--emit", "json"],
    ["check", "corpus/listings/example_small.qimp", "--emit", "ast"],
    ["check", "corpus/listings/example_small.qimp", "--emit", "typed-ast"],
    ["lower", "corpus/listings/bell.qimp"],
    ["lower", "corpus/listings/example_small.qimp", "--emit", "ir-json"],
    ["lower", "corpus/listings/baz.qimp"],
    ["run", "corpus/listings/bell_main.qimp", "--seed", "7", "--shots", "50"],
    ["run", "corpus/listings/example_small.qimp", "--mode", "ir", "--seed", "3", "--shots", "20"],
    ["run", "corpus/listings/baz_main.qimp"],
    ["diff", "corpus/listings/bell_main.qimp", "--seeds", "50"],
    ["diff", "corpus/listings/foo_harness.qimp", "--seeds", "50", "--emit", "json"],
]


def _cli(argv):
    env = dict(os.environ, QIMP_COLOR="never", PYTHONHASHSEED="random")
    p = subprocess.run([sys.executable, "-m", "qimp", *argv], cwd=ROOT, capture_output=True, env=env)
    return p.returncode, p.stdout, p.stderr


def test_criterion_7_cli_determinism():
    differing = [" ".join(argv) for argv in CLI_RUNS if _cli(argv) != _cli(argv)]
    report(7, not differing, f"{len(CLI_RUNS) - len(differing)}/{len(CLI_RUNS)} CLI invocations byte-identical across two runs")
