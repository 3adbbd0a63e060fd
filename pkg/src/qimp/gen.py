"""Random QImp programs for differential and soundness testing.

:func:`generate_accepted` builds programs that respect every ownership rule
by construction: each scope consumes exactly the qubits it allocated, nested
blocks only borrow outer qubits (an ``if`` may consume a chosen set in both
branches), and ``for`` loops over qubit arrays never touch the iterated array.
:func:`generate_rejected` then injects one violation at the top level of
``main`` so it is reached on every execution.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

PAIR = "class Pair:\n   a: qubit\n   b: qubit\n   n: int\n"
REG = "class Reg:\n   q: qubit\n   qs: array[qubit, 2]\n   x: int\n"
IND = "   "


@dataclass
class GenConfig:
    max_live_qubits: int = 6
    max_statements: int = 30
    max_depth: int = 3
    max_iterations: int = 3
    max_helpers: int = 2
    structs: bool = True
    arrays: bool = True


@dataclass
class Generated:
    source: str
    seed: int
    # For mutants: the diagnostic code the injected violation must produce.
    expected: str | None = None
    mutation: str | None = None
    n_statements: int = 0


@dataclass(frozen=True)
class _Res:
    place: str
    kind: str  # "q" | "arr"
    scope: int
    length: int = 0
    borrowed: bool = False
    keep: bool = False  # consumed by the function epilogue, not by the body


@dataclass
class _Helper:
    name: str
    kind: str  # "borrow" | "owned" | "make" | "pair" | "struct"
    n_qubits: int
    peak: int
    n_returns: int = 1


@dataclass
class _Main:
    # Per top-level statement of main: (line index, live plain qubit names before it).
    positions: list = field(default_factory=list)
    # (line index just after the statement, qubit name) for top-level measurements.
    consumed: list = field(default_factory=list)


class _Gen:
    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.rng = rng
        self.cfg = cfg
        self.lines: list[str] = []
        self.counter = 0
        self.res: list[_Res] = []
        self.ints: list[str] = []
        self.bools: list[str] = []
        self.floats: list[str] = []
        self.carrs: list[tuple[str, int, str]] = []  # classical arrays: name, length, elem type
        self.structs: list[tuple[str, str]] = []  # struct vars: name, struct type
        self.frozen: set[str] = set()
        self.scope_id = 0
        self.live = 0
        self.peak = 0
        self.helpers: list[_Helper] = []
        self.use_pair = cfg.structs and rng.random() < 0.6
        self.use_reg = cfg.structs and cfg.arrays and rng.random() < 0.5
        self.budget = 0
        self.total = 0
        self.main: _Main | None = None

    # -- utilities -------------------------------------------------------

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def emit(self, depth: int, text: str):
        self.lines.append(IND * depth + text)
        if not text.endswith("else:"):
            self.budget -= 1
            self.total += 1

    def alloc(self, n: int = 1):
        self.live += n
        self.peak = max(self.peak, self.live)

    def room(self, n: int = 1) -> bool:
        return self.live + n <= self.cfg.max_live_qubits

    def borrowable(self) -> list[str]:
        out = []
        for r in self.res:
            if r.kind == "q":
                out.append(r.place)
            elif r.place not in self.frozen:
                out += [f"{r.place}[{i}]" for i in range(r.length)]
        return out

    def consumable(self, kind: str = "q", plain: bool = False) -> list[_Res]:
        return [
            r
            for r in self.res
            if r.scope == self.scope_id
            and r.kind == kind
            and not r.borrowed
            and not r.keep
            and r.place not in self.frozen
            and (not plain or "." not in r.place)
        ]

    def drop(self, place: str):
        self.res = [r for r in self.res if r.place != place]

    def int_expr(self) -> str:
        c = self.rng.choice
        if self.ints and self.rng.random() < 0.7:
            a = c(self.ints)
            return c([a, f"{a} + {self.rng.randint(1, 3)}", f"{a} * 2", f"{a} - 1"])
        return str(self.rng.randint(0, 4))

    def bool_expr(self) -> str:
        c = self.rng.choice
        opts = ["True", "False"]
        if self.bools:
            b = c(self.bools)
            opts += [b, f"not {b}", f"{b} and {c(self.bools)}", f"{b} or {c(self.bools)}"]
        if self.ints:
            opts += [f"{c(self.ints)} < {self.rng.randint(0, 4)}", f"{c(self.ints)} == {c(self.ints)}"]
        return c(opts)

    # -- simple statements -----------------------------------------------

    def s_alloc(self, d):
        name = self.fresh("q")
        self.emit(d, f"{name} = qubit()")
        self.alloc()
        self.res.append(_Res(name, "q", self.scope_id))
        if self.rng.random() < 0.5:
            self.emit(d, f"h({name})")

    def s_gate1(self, d):
        q = self.rng.choice(self.borrowable())
        g = self.rng.choice(["h", "x", "y", "z", "s", "t", "rz"])
        if g == "rz":
            angle = self.rng.choice(self.floats) if self.floats and self.rng.random() < 0.5 else "0.5"
            self.emit(d, f"rz({q}, {angle})")
        else:
            self.emit(d, f"{g}({q})")

    def _distinct_pair(self):
        qs = self.borrowable()
        a, b = self.rng.sample(qs, 2)
        return a, b

    def s_gate2(self, d):
        a, b = self._distinct_pair()
        self.emit(d, f"{self.rng.choice(['cx', 'cx', 'cz'])}({a}, {b})")

    def consume(self, d, r: _Res, main_top: bool = False):
        """Emit a statement that consumes resource ``r``."""
        self.drop(r.place)
        if r.kind == "arr":
            self.live -= r.length
            if self.rng.random() < 0.7:
                name = self.fresh("bs")
                self.emit(d, f"{name} = measure_array({r.place})")
                self.carrs.append((name, r.length, "bool"))
                if self.rng.random() < 0.6 and "acc" in self.ints:
                    v = self.fresh("v")
                    self.emit(d, f"for {v} in {name}:")
                    self.emit(d + 1, f"if {v}:")
                    self.emit(d + 2, "acc += 1")
            else:
                self.emit(d, f"discard_array({r.place})")
            return
        self.live -= 1
        owned = [h for h in self.helpers if h.kind == "owned"]
        roll = self.rng.random()
        if owned and roll < 0.2:
            h = self.rng.choice(owned)
            name = self.fresh("b")
            self.emit(d, f"{name} = {h.name}({r.place})")
            self.bools.append(name)
        elif roll < 0.75:
            name = self.fresh("b")
            self.emit(d, f"{name} = measure({r.place})")
            self.bools.append(name)
            if "acc" in self.ints and self.rng.random() < 0.7:
                self.emit(d, f"if {name}:")
                self.emit(d + 1, "acc += 1")
        else:
            self.emit(d, f"discard({r.place})")
        if main_top and "." not in r.place:
            self.main.consumed.append((len(self.lines), r.place))

    def s_consume(self, d, main_top=False):
        self.consume(d, self.rng.choice(self.consumable("q") + self.consumable("arr")), main_top)

    def s_classical(self, d):
        roll = self.rng.random()
        if roll < 0.35 or not self.ints:
            name = self.fresh("i")
            self.emit(d, f"{name} = {self.int_expr()}")
            self.ints.append(name)
        elif roll < 0.55:
            self.emit(d, f"{self.rng.choice(self.ints)} += {self.int_expr()}")
        elif roll < 0.7:
            name = self.fresh("c")
            self.emit(d, f"{name} = {self.bool_expr()}")
            self.bools.append(name)
        elif roll < 0.8:
            name = self.fresh("f")
            self.emit(d, f"{name} = {self.rng.choice(['0.25', '1.5', '3.0'])} / 2.0")
            self.floats.append(name)
        elif roll < 0.9 and self.structs:
            s = self.rng.choice(self.structs)
            fld = "n" if s[1] == "Pair" else "x"
            self.emit(d, f"{s[0]}.{fld} += {self.int_expr()}")
        else:
            if self.carrs and self.rng.random() < 0.5:
                arr = self.rng.choice([a for a in self.carrs])
                idx = self.rng.randrange(arr[1])
                if arr[2] == "int":
                    self.emit(d, f"{arr[0]}[{idx}] = {self.int_expr()}")
                else:
                    self.emit(d, f"{arr[0]}[{idx}] = {self.bool_expr()}")
            else:
                name = self.fresh("vs")
                n = self.rng.randint(1, 3)
                self.emit(d, f"{name} = array({', '.join(self.int_expr() for _ in range(n))})")
                self.carrs.append((name, n, "int"))

    def s_assert(self, d):
        opts = []
        if self.ints:
            a = self.rng.choice(self.ints)
            opts += [f"{a} == {a}", f"{a} + 1 > {a}"]
        if self.bools:
            b = self.rng.choice(self.bools)
            opts += [f"{b} or not {b}", f"{b} == {b}"]
        self.emit(d, f"assert {self.rng.choice(opts or ['True'])}")

    def s_move(self, d):
        r = self.rng.choice(self.consumable("q", plain=True))
        name = self.fresh("q")
        self.emit(d, f"{name} = {r.place}")
        self.drop(r.place)
        self.res.append(_Res(name, "q", self.scope_id))

    def s_struct(self, d):
        kind = "Reg" if self.use_reg and (not self.use_pair or self.rng.random() < 0.5) else "Pair"
        need = 1 if kind == "Reg" else 2
        plain = self.consumable("q", plain=True)
        chosen = []
        for _ in range(need):
            if plain and self.rng.random() < 0.6:
                chosen.append(plain.pop(self.rng.randrange(len(plain))))
            else:
                chosen.append(None)
        fresh_q = chosen.count(None)
        extra = 2 if kind == "Reg" else 0
        if not self.room(fresh_q + extra):
            return self.s_gate1(d) if self.borrowable() else self.s_classical(d)
        for r in chosen:
            if r is not None:
                self.drop(r.place)
        args = ["qubit()" if r is None else r.place for r in chosen]
        self.alloc(fresh_q + extra)
        name = self.fresh("p" if kind == "Pair" else "r")
        if kind == "Pair":
            if self.rng.random() < 0.5:
                self.emit(d, f"{name} = Pair(a={args[0]}, b={args[1]}, n={self.int_expr()})")
            else:
                self.emit(d, f"{name} = Pair({args[0]}, {args[1]}, {self.int_expr()})")
            self.res += [_Res(f"{name}.a", "q", self.scope_id), _Res(f"{name}.b", "q", self.scope_id)]
        else:
            self.emit(d, f"{name} = Reg(q={args[0]}, qs=array(qubit(), qubit()), x={self.int_expr()})")
            self.res += [_Res(f"{name}.q", "q", self.scope_id), _Res(f"{name}.qs", "arr", self.scope_id, 2)]
        self.structs.append((name, kind))

    def s_array(self, d):
        n = self.rng.randint(1, min(3, self.cfg.max_live_qubits - self.live))
        self.alloc(n)
        name = self.fresh("qs")
        self.emit(d, f"{name} = array({', '.join(['qubit()'] * n)})")
        self.res.append(_Res(name, "arr", self.scope_id, n))

    def s_call(self, d):
        opts = []
        qs = self.borrowable()
        for h in self.helpers:
            if not self.room(h.peak):
                continue
            if h.kind == "borrow" and len(qs) >= h.n_qubits:
                opts.append(h)
            elif h.kind in ("make", "pair") and self.room(h.peak):
                opts.append(h)
            elif h.kind == "struct" and any(
                t == "Pair" and f"{n}.a" in qs and f"{n}.b" in qs for n, t in self.structs
            ):
                opts.append(h)
        if not opts:
            return self.s_gate1(d) if qs else self.s_classical(d)
        h = self.rng.choice(opts)
        self.peak = max(self.peak, self.live + h.peak)
        if h.kind == "borrow":
            args = self.rng.sample(qs, h.n_qubits) + [self.int_expr()]
            name = self.fresh("i")
            self.emit(d, f"{name} = {h.name}({', '.join(args)})")
            self.ints.append(name)
        elif h.kind == "struct":
            p = self.rng.choice([n for n, t in self.structs if t == "Pair" and f"{n}.a" in qs and f"{n}.b" in qs])
            name = self.fresh("i")
            self.emit(d, f"{name} = {h.name}({p})")
            self.ints.append(name)
        else:
            names = [self.fresh("q") for _ in range(h.n_returns)]
            self.emit(d, f"{', '.join(names)} = {h.name}()")
            self.alloc(h.n_returns)
            self.res += [_Res(n, "q", self.scope_id) for n in names]

    # -- compound statements ---------------------------------------------

    def _snapshot(self):
        return (list(self.res), list(self.ints), list(self.bools), list(self.floats), list(self.carrs),
                list(self.structs), self.live)

    def _restore(self, snap):
        self.res, self.ints, self.bools, self.floats, self.carrs, self.structs, self.live = (
            list(snap[0]), list(snap[1]), list(snap[2]), list(snap[3]), list(snap[4]), list(snap[5]), snap[6]
        )

    def _inner(self, d, n, take: list[_Res] = ()):
        """Generate a nested block consuming ``take`` (moved into the new scope)."""
        outer = self.scope_id
        self.scope_id = self.counter = self.counter + 1
        for r in take:
            self.drop(r.place)
            self.res.append(replace(r, scope=self.scope_id))
        start = len(self.lines)
        self.block(d, n)
        self.close(d)
        if len(self.lines) == start:
            self.emit(d, self.rng.choice(["acc += 0", "i0 = 0"]) if "acc" in self.ints else "i0 = 0")
        self.scope_id = outer

    def s_if(self, d):
        cands = self.consumable("q") + self.consumable("arr")
        take = []
        if cands and self.rng.random() < 0.4:
            take = self.rng.sample(cands, self.rng.randint(1, min(2, len(cands))))
        if self.room(1) and self.rng.random() < 0.2:
            self.alloc(1)
            self.live -= 1
            cond = "measure(qubit())"
        else:
            cond = self.bool_expr()
        self.emit(d, f"if {cond}:")
        snap = self._snapshot()
        n = self.rng.randint(1, 3)
        self._inner(d + 1, n, take)
        then_live = self.live
        if take or self.rng.random() < 0.6:
            self._restore(snap)
            self.emit(d, "else:")
            self._inner(d + 1, self.rng.randint(1, 3), take)
        assert then_live == self.live
        self._restore(snap)
        for r in take:
            self.drop(r.place)
            self.live -= r.length if r.kind == "arr" else 1

    def s_while(self, d):
        c = self.fresh("w")
        k = self.rng.randint(0, self.cfg.max_iterations)
        self.emit(d, f"{c} = 0")
        extra = ""
        if self.bools and self.rng.random() < 0.3:
            extra = f" and {self.rng.choice(self.bools)}"
        self.emit(d, f"while {c} < {k}{extra}:")
        snap = self._snapshot()
        self._inner(d + 1, self.rng.randint(1, 3))
        self.emit(d + 1, f"{c} += 1")
        self._restore(snap)

    def s_for_q(self, d):
        arrs = [r for r in self.res if r.kind == "arr" and r.place not in self.frozen]
        arr = self.rng.choice(arrs)
        x = self.fresh("x")
        self.emit(d, f"for {x} in {arr.place}:")
        snap = self._snapshot()
        self.frozen.add(arr.place)
        self.res.append(_Res(x, "q", self.scope_id, borrowed=True))
        self._inner(d + 1, self.rng.randint(1, 3))
        self.frozen.discard(arr.place)
        self._restore(snap)

    def s_for_c(self, d):
        arr = self.rng.choice(self.carrs)
        v = self.fresh("v")
        self.emit(d, f"for {v} in {arr[0]}:")
        snap = self._snapshot()
        if arr[2] == "int":
            self.ints.append(v)
        else:
            self.bools.append(v)
        self._inner(d + 1, self.rng.randint(1, 2))
        self._restore(snap)

    # -- driver ----------------------------------------------------------

    def stmt(self, d, main_top=False):
        cfg = self.cfg
        bq = self.borrowable()
        options = [("classical", 2)]
        if self.room():
            options.append(("alloc", 4))
        if bq:
            options += [("gate1", 5), ("call", 2)]
        if len(bq) >= 2:
            options.append(("gate2", 4))
        if self.consumable("q") or self.consumable("arr"):
            options.append(("consume", 3))
        if self.consumable("q", plain=True):
            options.append(("move", 1))
            if cfg.structs and (self.use_pair or self.use_reg):
                options.append(("struct", 3))
        if self.ints or self.bools:
            options.append(("assert", 1))
        if cfg.arrays and self.room(2):
            options.append(("array", 2))
        if d < cfg.max_depth and self.budget > 4:
            options += [("if", 2), ("while", 1)]
            if any(r.kind == "arr" and r.place not in self.frozen for r in self.res):
                options.append(("for_q", 6))
            if self.carrs:
                options.append(("for_c", 1))
        kinds, weights = zip(*options)
        kind = self.rng.choices(kinds, weights)[0]
        if kind == "consume":
            return self.s_consume(d, main_top)
        getattr(self, "s_" + kind)(d)

    def block(self, d, n, main_top=False):
        for _ in range(n):
            if self.budget <= 0:
                break
            if main_top:
                live = [r.place for r in self.res if r.kind == "q" and "." not in r.place]
                self.main.positions.append((len(self.lines), live))
            self.stmt(d, main_top)

    def close(self, d, main_top=False):
        for r in list(self.res):
            if r.scope == self.scope_id and not r.borrowed and not r.keep:
                if main_top and r.kind == "q" and "." not in r.place:
                    live = [x.place for x in self.res if x.kind == "q" and "." not in x.place]
                    self.main.positions.append((len(self.lines), live))
                self.consume(d, r, main_top)

    def function(self, header: str, params: list[_Res], budget: int, epilogue):
        self.lines.append(header)
        body_start = len(self.lines)
        self.res = list(params)
        self.ints, self.bools, self.floats, self.carrs, self.structs = [], [], [], [], []
        self.scope_id = self.counter = self.counter + 1
        for r in params:
            r2 = replace(r, scope=self.scope_id)
            self.res[self.res.index(r)] = r2
        self.live = sum(r.length if r.kind == "arr" else 1 for r in self.res)
        self.peak = self.live
        start_live = self.live
        self.budget = budget
        return body_start, start_live

    def helper(self, idx: int):
        kind = self.rng.choice(["borrow", "borrow", "owned", "make", "pair"] + (["struct"] if self.use_pair else []))
        name = f"{kind[0]}{idx}"
        budget = self.rng.randint(2, 6)
        if kind == "borrow":
            n = self.rng.randint(1, 2)
            params = [_Res(p, "q", 0, borrowed=True) for p in "ab"[:n]]
            hdr = f"def {name}({', '.join(p + ': qubit' for p in 'ab'[:n])}, n: int) -> int:"
            _, start = self.function(hdr, params, budget, None)
            self.ints.append("n")
            self.block(1, budget)
            self.close(1)
            self.emit(1, f"return {self.int_expr()}")
        elif kind == "struct":
            hdr = f"def {name}(p: Pair) -> int:"
            params = [_Res("p.a", "q", 0, borrowed=True), _Res("p.b", "q", 0, borrowed=True)]
            _, start = self.function(hdr, params, budget, None)
            self.structs.append(("p", "Pair"))
            self.emit(1, "cx(p.a, p.b)")
            self.emit(1, "p.n += 1")
            self.block(1, budget)
            self.close(1)
            self.emit(1, "return p.n")
            n = 2
        elif kind == "owned":
            hdr = f"def {name}(q: qubit @owned) -> bool:"
            _, start = self.function(hdr, [_Res("q", "q", 0, keep=True)], budget, None)
            self.block(1, budget)
            self.close(1)
            self.emit(1, "return measure(q)")
            n = 1
        else:
            k = 1 if kind == "make" else 2
            hdr = f"def {name}() -> {'qubit' if k == 1 else '(qubit, qubit)'}:"
            _, start = self.function(hdr, [], budget, None)
            outs = []
            for _ in range(k):
                q = self.fresh("q")
                self.emit(1, f"{q} = qubit()")
                self.alloc()
                self.res.append(_Res(q, "q", self.scope_id, keep=True))
                outs.append(q)
            if k == 2:
                self.emit(1, f"h({outs[0]})")
                self.emit(1, f"cx({outs[0]}, {outs[1]})")
            self.block(1, budget)
            self.close(1)
            self.emit(1, f"return {', '.join(outs)}")
            n = 0
        peak = self.peak - start
        if kind == "borrow":
            n = len(params)
        self.lines.append("")
        h = _Helper(name, kind, n if kind != "owned" else 1, max(peak, 0), 2 if kind == "pair" else 1)
        self.helpers.append(h)

    def program(self) -> tuple[str, _Main]:
        cfg = self.cfg
        if self.use_pair:
            self.lines += PAIR.splitlines() + [""]
        if self.use_reg:
            self.lines += REG.splitlines() + [""]
        for i in range(self.rng.randint(0, cfg.max_helpers)):
            self.helper(i)
        self.main = _Main()
        self.function("def main() -> int:", [], 0, None)
        self.budget = cfg.max_statements - self.total - 8
        self.emit(1, "acc = 0")
        self.ints.append("acc")
        self.block(1, 10_000, main_top=True)
        self.close(1, main_top=True)
        self.main.positions.append((len(self.lines), [r.place for r in self.res if r.kind == "q"]))
        self.emit(1, "return acc")
        return "\n".join(self.lines) + "\n", self.main


def count_statements(source: str) -> int:
    """Statements in function bodies (compound headers count once; ``else:`` does not)."""
    from qimp.frontend import ast as A
    from qimp.frontend import parse_source

    module = parse_source(source, "<gen>")
    n = 0
    for fn in module.functions:
        for node in A.walk(fn):
            if isinstance(node, (A.Assign, A.AugAssign, A.ExprStmt, A.Return, A.If, A.While, A.For, A.Assert)):
                n += 1
    return n


def generate_accepted(seed: int, cfg: GenConfig | None = None) -> Generated:
    """A program the ownership checker accepts, with at most ``cfg.max_statements`` statements."""
    cfg = cfg or GenConfig()
    for attempt in range(100):
        g = _Gen(random.Random(f"{seed}:{attempt}"), cfg)
        src, _ = g.program()
        n = count_statements(src)
        if n <= cfg.max_statements:
            return Generated(src, seed, n_statements=n)
    raise RuntimeError("could not generate a program within the statement bound")  # pragma: no cover


MUTATIONS = ("QB001", "QB002", "QB003", "QB004")


def generate_rejected(seed: int, cfg: GenConfig | None = None, code: str | None = None) -> Generated:
    """An accepted program plus one injected violation of ``code`` (chosen at random if None)."""
    cfg = cfg or GenConfig()
    rng = random.Random(f"mut:{seed}")
    code = code or rng.choice(("QB001", "QB002", "QB004", "QB004", "QB003"))
    for attempt in range(200):
        g = _Gen(random.Random(f"{seed}:m{attempt}"), cfg)
        src, main = g.program()
        lines = src.splitlines()
        if code == "QB001":
            spots = [(i, live) for i, live in main.positions if live]
            if not spots:
                continue
            i, live = rng.choice(spots)
            q = rng.choice(live)
            lines.insert(i, f"{IND}cx({q}, {q})")
            what = f"cx({q}, {q})"
        elif code == "QB002":
            if not main.consumed:
                continue
            i, q = rng.choice(main.consumed)
            lines.insert(i, f"{IND}h({q})")
            what = f"h({q}) after consuming it"
        elif code == "QB003":
            k = [n for n, ln in enumerate(lines) if ln.startswith("def main")][0]
            lines[k:k] = ["def bad(q: qubit):", f"{IND}discard(q)", ""]
            k += 5  # after "def main" and "acc = 0"
            lines[k:k] = [f"{IND}t0 = qubit()", f"{IND}bad(t0)", f"{IND}discard(t0)"]
            what = "consume a borrowed parameter"
        else:
            i, live = rng.choice(main.positions)
            if live and rng.random() < 0.5:
                q = rng.choice(live)
                lines.insert(i, f"{IND}{q} = qubit()")
                what = f"overwrite live {q}"
            else:
                lines.insert(i, f"{IND}h(qubit())")
                what = "drop a fresh qubit"
        return Generated("\n".join(lines) + "\n", seed, expected=code, mutation=what)
    raise RuntimeError(f"could not inject {code}")  # pragma: no cover
