"""Differential run over every corpus program that has a ``main``.

    python3 scripts/diff_corpus.py [--seeds N] [--base SEED]
"""

import argparse
import pathlib

from qimp.frontend import parse_source
from qimp.lowering import lower_program
from qimp.ownership import check_program
from qimp.resolve import resolve_types
from qimp.sim import first_divergence, run_imperative, run_ir

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus" / "listings"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--base", type=int, default=0)
    args = ap.parse_args()

    bad = 0
    for path in sorted(CORPUS.glob("*.qimp")):
        prog = resolve_types(parse_source(path.read_text(), path.name))
        if "main" not in prog.functions:
            continue
        if check_program(prog):
            print(f"{path.stem:24s} rejected by the checker, skipped")
            continue
        a = run_imperative(prog, "main", args.base, args.seeds)
        b = run_ir(lower_program(prog), "main", args.base, args.seeds)
        div = first_divergence(a, b)
        bad += div is not None
        print(f"{path.stem:24s} {'identical' if div is None else div}")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
