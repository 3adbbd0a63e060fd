"""Generate random programs and run the differential and soundness oracles.

    python3 scripts/fuzz.py --programs 200 --seeds 50
    python3 scripts/fuzz.py --start 10000 --programs 1000 --mutants-only

Prints the first failing generator seed with its source and exits 1, or a
summary line and exits 0.
"""

import argparse
import collections
import sys
import time

from qimp.frontend import parse_source
from qimp.gen import generate_accepted, generate_rejected
from qimp.lowering import lower_program, verify_ir
from qimp.ownership import check_program
from qimp.resolve import resolve_types
from qimp.sim import first_divergence, run_imperative, run_ir

DYNAMIC = {"QB001": "DoubleBorrowAlias", "QB002": "UseAfterFree", "QB003": "NotOwned", "QB004": "LeakAtScopeExit"}


def fail(seed, what, source):
    print(f"seed {seed}: {what}")
    print(source)
    sys.exit(1)


def accepted(seed, shots):
    g = generate_accepted(seed)
    prog = resolve_types(parse_source(g.source, f"gen{seed}.qimp"))
    if diags := check_program(prog):
        fail(seed, f"generated program rejected: {[d.code for d in diags]}", g.source)
    graph = lower_program(prog)
    if problems := verify_ir(graph):
        fail(seed, f"verify_ir: {problems[0]}", g.source)
    a = run_imperative(prog, "main", seed, shots)
    if a.error:
        fail(seed, f"runtime error {a.error}", g.source)
    if div := first_divergence(a, run_ir(graph, "main", seed, shots)):
        fail(seed, div, g.source)


def rejected(seed, shots, counts):
    g = generate_rejected(seed)
    prog = resolve_types(parse_source(g.source, f"mut{seed}.qimp"))
    codes = [d.code for d in check_program(prog)]
    if g.expected not in codes:
        fail(seed, f"{g.mutation}: expected {g.expected}, checker said {codes}", g.source)
    t = run_imperative(prog, "main", seed, shots)
    kind = t.error and t.error["kind"]
    if kind != DYNAMIC[g.expected]:
        fail(seed, f"{g.mutation}: expected {DYNAMIC[g.expected]}, interpreter said {kind}", g.source)
    counts[g.expected] += 1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--programs", type=int, default=100)
    ap.add_argument("--seeds", type=int, default=100, help="shots per program")
    ap.add_argument("--mutants-only", action="store_true")
    args = ap.parse_args()

    t0 = time.perf_counter()
    counts = collections.Counter()
    for seed in range(args.start, args.start + args.programs):
        if not args.mutants_only:
            accepted(seed, args.seeds)
        rejected(seed, args.seeds, counts)
    dt = time.perf_counter() - t0
    print(f"ok: {args.programs} programs from seed {args.start}, mutants {dict(sorted(counts.items()))}, {dt:.1f}s")


if __name__ == "__main__":
    main()
