"""Command-line driver: ``qimp {check,lower,run,diff}``.

Exit codes: 0 ok, 1 ownership diagnostics, 2 lex/parse/type errors, 3 I/O
errors, 4 runtime errors (including failed assertions), 5 divergence between
the imperative and the lowered program.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from qimp.diagnostics import NO_SPAN, Diagnostic, QImpError, SourceMap, render
from qimp.frontend import ast as A
from qimp.frontend import parse_source
from qimp.lowering import emit_ir_json, emit_program_text, lower_program, verify_ir
from qimp.ownership import check_program
from qimp.resolve import TypedProgram, resolve_types
from qimp.sim import first_divergence, run_imperative, run_ir

EXIT_OK, EXIT_DIAG, EXIT_SYNTAX, EXIT_IO, EXIT_RUNTIME, EXIT_DIVERGE = range(6)
U64 = (1 << 64) - 1


@dataclass
class CliConfig:
    command: str
    paths: list[str]
    emit: str | None = None
    seed: int = 0
    shots: int = 1
    entry: str = "main"
    mode: str = "imperative"
    seeds: int = 100
    output: str | None = None


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


class Driver:
    def __init__(self, cfg: CliConfig, stdout=None, stderr=None):
        self.cfg = cfg
        self.out = stdout or sys.stdout
        self.err = stderr or sys.stderr
        self.sources = SourceMap()

    # -- plumbing ----------------------------------------------------------

    def write(self, text: str):
        if self.cfg.output:
            try:
                with open(self.cfg.output, "w", encoding="utf-8") as f:
                    f.write(text)
            except OSError as e:
                self.err.write(f"error: cannot write {self.cfg.output}: {e.strerror}\n")
                raise _Exit(EXIT_IO) from None
        else:
            self.out.write(text)

    def report(self, diags: list[Diagnostic], stream, as_json: bool = False):
        if as_json:
            stream.write(json.dumps({"diagnostics": [d.to_json() for d in diags]}, indent=2) + "\n")
            return
        for d in diags:
            stream.write(render(d, self.sources, stream) + "\n\n")
        if diags:
            n = len(diags)
            stream.write(f"{n} error{'s' if n != 1 else ''}\n")

    def parse(self) -> A.Module:
        structs, functions = [], []
        for path in self.cfg.paths:
            try:
                with open(path, encoding="utf-8") as f:
                    text = f.read()
            except OSError as e:
                self.err.write(f"error: cannot read {path}: {e.strerror}\n")
                raise _Exit(EXIT_IO) from None
            except UnicodeDecodeError:
                self.err.write(f"error: {path} is not valid UTF-8\n")
                raise _Exit(EXIT_IO) from None
            self.sources.files[path] = text
            try:
                m = parse_source(text, path)
            except QImpError as e:
                self.report(e.diagnostics, self.diag_stream(), self.cfg.emit == "json")
                raise _Exit(EXIT_SYNTAX) from None
            structs += m.structs
            functions += m.functions
        span = functions[0].span if functions else (structs[0].span if structs else NO_SPAN)
        return A.Module(structs, functions, span=span)

    def diag_stream(self):
        return self.out if self.cfg.command == "check" else self.err

    def resolve(self, module: A.Module) -> TypedProgram:
        try:
            return resolve_types(module)
        except QImpError as e:
            self.report(e.diagnostics, self.diag_stream(), self.cfg.emit == "json")
            raise _Exit(EXIT_SYNTAX) from None

    def accepted(self) -> TypedProgram:
        prog = self.resolve(self.parse())
        diags = check_program(prog)
        if diags:
            self.report(diags, self.diag_stream(), self.cfg.emit == "json")
            raise _Exit(EXIT_DIAG)
        return prog

    # -- commands ----------------------------------------------------------

    def cmd_check(self) -> int:
        emit = self.cfg.emit
        module = self.parse()
        if emit == "ast":
            self.write(json.dumps(A.to_json(module), indent=2) + "\n")
            return EXIT_OK
        prog = self.resolve(module)
        if emit == "typed-ast":
            self.write(json.dumps(A.to_json(prog.module, typed=True), indent=2) + "\n")
            return EXIT_OK
        diags = check_program(prog)
        if emit == "json":
            self.write(json.dumps({"diagnostics": [d.to_json() for d in diags]}, indent=2) + "\n")
        else:
            self.report(diags, self.out)
        return EXIT_DIAG if diags else EXIT_OK

    def cmd_lower(self) -> int:
        graph = lower_program(self.accepted())
        problems = verify_ir(graph)
        if problems:  # pragma: no cover - would be a compiler bug
            for p in problems:
                self.err.write(f"internal error: {p}\n")
            return EXIT_DIAG
        self.write(emit_ir_json(graph) if self.cfg.emit == "ir-json" else emit_program_text(graph))
        return EXIT_OK

    def _entry_ok(self, prog: TypedProgram) -> bool:
        try:
            run_imperative(prog, self.cfg.entry, 0, 0)
        except (KeyError, ValueError) as e:
            self.err.write(f"error: {e.args[0]}\n")
            return False
        return True

    def cmd_run(self) -> int:
        if self.cfg.mode == "ir":
            prog = self.accepted()
            if not self._entry_ok(prog):
                return EXIT_SYNTAX
            t = run_ir(lower_program(prog), self.cfg.entry, self.cfg.seed, self.cfg.shots)
        else:
            prog = self.resolve(self.parse())
            if not self._entry_ok(prog):
                return EXIT_SYNTAX
            t = run_imperative(prog, self.cfg.entry, self.cfg.seed, self.cfg.shots)
        self.write(t.dumps())
        if t.error:
            e = t.error
            self.err.write(f"runtime error[{e['kind']}]: {e['message']}\n  --> {e['site']} (shot {e['shot']})\n")
            return EXIT_RUNTIME
        return EXIT_OK

    def cmd_diff(self) -> int:
        prog = self.accepted()
        if not self._entry_ok(prog):
            return EXIT_SYNTAX
        a = run_imperative(prog, self.cfg.entry, self.cfg.seed, self.cfg.seeds)
        b = run_ir(lower_program(prog), self.cfg.entry, self.cfg.seed, self.cfg.seeds)
        div = first_divergence(a, b)
        first, last = self.cfg.seed, (self.cfg.seed + self.cfg.seeds - 1) & U64
        if self.cfg.emit == "json":
            self.write(json.dumps({"seeds": self.cfg.seeds, "identical": div is None, "divergence": div}) + "\n")
        elif div is None:
            self.write(f"ok: transcripts identical for {self.cfg.seeds} seeds ({first}..{last})\n")
        else:
            self.write(f"divergence: {div}\n")
        return EXIT_OK if div is None else EXIT_DIVERGE

    def run(self) -> int:
        try:
            return getattr(self, "cmd_" + self.cfg.command)()
        except _Exit as e:
            return e.code


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= U64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qimp", description="Ownership checker, lowering and simulator for QImp.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, emits):
        sp.add_argument("paths", nargs="+", metavar="FILE")
        if emits:
            sp.add_argument("--emit", choices=emits)
        sp.add_argument("-o", dest="output", metavar="PATH", help="write the result here instead of stdout")

    common(sub.add_parser("check", help="type- and ownership-check programs"), ["ast", "typed-ast", "json"])
    common(sub.add_parser("lower", help="print the dataflow IR of an accepted program"), ["ir", "ir-json"])
    for name, help_ in (("run", "simulate a program"), ("diff", "compare imperative and IR execution")):
        sp = sub.add_parser(name, help=help_)
        common(sp, ["json"] if name == "diff" else [])
        sp.add_argument("--entry", default="main")
        sp.add_argument("--seed", type=_u64, default=0, help="base seed; shot i uses seed+i (default 0)")
        if name == "run":
            sp.add_argument("--shots", type=_nonneg, default=1)
            sp.add_argument("--mode", choices=["imperative", "ir"], default="imperative")
        else:
            sp.add_argument("--seeds", type=_nonneg, default=100)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = CliConfig(**{k: v for k, v in vars(args).items() if v is not None})
    return Driver(cfg, stdout, stderr).run()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
