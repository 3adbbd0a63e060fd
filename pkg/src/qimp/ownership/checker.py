"""Forward dataflow ownership analysis.

For every program point the analysis knows, per variable, which parts hold a
live value. Transfer functions enforce the calling convention (borrow by
default, consume only what you own), uniqueness of borrows within a call,
the reborrow regions opened by ``for`` loops, and that owned qubits are
consumed or returned before the function ends. Control-flow joins require
quantum places to agree on liveness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from qimp.diagnostics import MESSAGES, QB003_GENERIC, Diagnostic, InternalError, Note, Span
from qimp.frontend import ast as A
from qimp.ownership.cfg import CFG, CfgStmt, build_cfg
from qimp.ownership.state import (
    UNASSIGNED,
    Conflict,
    Dead,
    Fact,
    Maybe,
    Owned,
    find_bad,
    join_facts,
    live_quantum,
    set_place,
    subtree,
    type_of,
)
from qimp.resolve import FunctionInfo, TypedProgram, place_of
from qimp.typesys import OwnershipMode, Place, is_quantum, places_overlap

MAX_ROUNDS = 1000


@dataclass
class _Reporter:
    diags: list[Diagnostic] = field(default_factory=list)
    poisoned: list[Place] = field(default_factory=list)

    def emit(self, code: str, place: Place | None, span: Span, message: str | None = None, notes=()):
        if place is not None:
            if any(places_overlap(place, p) for p in self.poisoned):
                return
            self.poisoned.append(place)
        if message is None:
            message = MESSAGES[code].format(place=place)
        self.diags.append(Diagnostic(code, message, span, tuple(notes)))


class FunctionChecker:
    def __init__(self, info: FunctionInfo):
        self.info = info
        self.types = info.var_types
        self.borrowed = info.borrowed
        self.cfg: CFG = build_cfg(info)
        self.rep: _Reporter | None = None

    # -- reporting helpers -----------------------------------------------

    def _emit(self, *args, **kw):
        if self.rep is not None:
            self.rep.emit(*args, **kw)

    def _report_bad(self, place: Place, bad, span: Span):
        where, state = bad
        if isinstance(state, Conflict):
            return
        if isinstance(state, Dead) and state.consumed:
            notes = [Note("consumed here", state.cause)] if state.cause else []
            self._emit("QB002", where, span, notes=notes)
        else:
            self._emit("QB006", Place(where.root), span)
        # The whole place is suspect now, not just the broken part.
        if self.rep is not None:
            self.rep.poisoned.append(place)

    def require_live(self, fact: Fact, place: Place, span: Span) -> bool:
        bad = find_bad(fact, self.types, place)
        if bad is None:
            return True
        self._report_bad(place, bad, span)
        return isinstance(bad[1], Conflict)

    def check_frozen(self, place: Place, frozen, span: Span) -> bool:
        for fp, loop_span in frozen:
            if places_overlap(place, fp):
                self._emit("QB001", place, span, notes=[Note(f"{fp} is borrowed by this loop", loop_span)])
                return False
        return True

    # -- expressions -----------------------------------------------------

    def use(self, e: A.Expr, fact: Fact, frozen, how: str, consume_span: Span | None = None):
        """Account for evaluating ``e``.

        ``how`` is "move" when the value is transferred (assignment, return,
        owned argument), "borrow" when it is lent and handed back, and "drop"
        when it is discarded.
        """
        if isinstance(e, A.PLACE_EXPRS):
            place = place_of(e)
            if is_quantum(e.ty) and how == "move":
                self.move_place(place, e.span, fact, frozen, consume_span or e.span)
            else:
                if is_quantum(e.ty):
                    self.check_frozen(place, frozen, e.span)
                self.require_live(fact, place, e.span)
            return
        if isinstance(e, A.Call):
            self.call(e, fact, frozen)
        elif isinstance(e, (A.BinOp,)):
            self.use(e.left, fact, frozen, "drop")
            self.use(e.right, fact, frozen, "drop")
        elif isinstance(e, A.UnaryOp):
            self.use(e.operand, fact, frozen, "drop")
        elif isinstance(e, A.TupleExpr):
            for elt in e.elts:
                self.use(elt, fact, frozen, how)
            return
        if how in ("borrow", "drop") and e.ty is not None and is_quantum(e.ty):
            # A temporary qubit that nobody ends up owning.
            self._emit("QB004", None, e.span)

    def move_place(self, place: Place, span: Span, fact: Fact, frozen, cause: Span, measure: bool = False):
        if not self.check_frozen(place, frozen, span):
            return
        if not self.require_live(fact, place, span):
            return
        if place.root in self.borrowed:
            self._emit("QB003", place, span, MESSAGES["QB003"] if measure else QB003_GENERIC)
            return
        if place.has_index():
            self._emit("QB007", place, span)
            return
        set_place(fact, self.types, place, Dead(True, cause))

    def call(self, call: A.Call, fact: Fact, frozen):
        sig = call.sig
        pending: list[tuple[A.Expr, Place, OwnershipMode]] = []
        # Nested expressions run to completion before the callee starts.
        for arg, p in zip(call.ordered_args, sig.params):
            if is_quantum(p.type) and isinstance(arg, A.PLACE_EXPRS):
                pending.append((arg, place_of(arg), p.mode))
            else:
                self.use(arg, fact, frozen, "move" if p.mode is OwnershipMode.OWNED else "borrow")
        seen: list[Place] = []
        consumed: list[tuple[A.Expr, Place]] = []
        for arg, place, mode in pending:
            clash = any(places_overlap(place, q) for q in seen)
            seen.append(place)
            if clash:
                self._emit("QB001", place, arg.span)
                continue
            if not self.check_frozen(place, frozen, arg.span):
                continue
            if not self.require_live(fact, place, arg.span):
                continue
            if mode is OwnershipMode.OWNED:
                if place.root in self.borrowed:
                    msg = MESSAGES["QB003"] if call.func == "measure" else QB003_GENERIC
                    self._emit("QB003", place, arg.span, msg)
                    continue
                if place.has_index():
                    self._emit("QB007", place, arg.span)
                    continue
                if self._loop_cond:
                    self._emit("QB005", place, arg.span, "Qubit cannot be consumed in a loop condition")
                    continue
                consumed.append((arg, place))
        for arg, place in consumed:
            set_place(fact, self.types, place, Dead(True, call.span))

    # -- statements ------------------------------------------------------

    _loop_cond = False

    def assign_place(self, target: A.Expr, origin: Span, fact: Fact, frozen):
        place = place_of(target)
        ty = target.ty
        parent = place.parent
        if parent is not None:
            # The enclosing value must still exist (a partially moved struct is fine).
            st = subtree(fact, parent)
            if not isinstance(st, (Owned,)) and not hasattr(st, "fields"):
                bad = find_bad(fact, self.types, parent)
                if bad is not None:
                    self._report_bad(parent, bad, target.span)
                    return
        if is_quantum(ty):
            if place.root in self.borrowed:
                self._emit("QB003", place, target.span, QB003_GENERIC)
                return
            if not self.check_frozen(place, frozen, target.span):
                return
            old = subtree(fact, place)
            if place.has_index():
                live = [(place, None)] if isinstance(old, Owned) else []
            else:
                live = live_quantum(old, ty, place)
            if live:
                notes = [Note("the overwritten qubit was obtained here", o) for _, o in live if o is not None]
                self._emit("QB004", place, target.span, notes=notes)
                return
        set_place(fact, self.types, place, Owned(origin))

    def stmt(self, cs: CfgStmt, fact: Fact):
        s, frozen = cs.node, cs.frozen
        if cs.kind == "cond":
            self._loop_cond = cs.loop_cond
            try:
                self.use(s, fact, frozen, "drop")
            finally:
                self._loop_cond = False
            return
        if cs.kind == "for_init":
            place = place_of(s.iter)
            if is_quantum(s.iter.ty):
                self.check_frozen(place, frozen, s.iter.span)
            self.require_live(fact, place, s.iter.span)
            return
        if cs.kind == "for_bind":
            set_place(fact, self.types, Place(s.target.id), Owned(s.target.span))
            return
        if cs.kind == "for_unbind":
            if is_quantum(s.target.ty):
                set_place(fact, self.types, Place(s.target.id), UNASSIGNED)
            return
        if isinstance(s, A.Assign):
            if isinstance(s.value, A.TupleExpr):
                origins = [e.span for e in s.value.elts]
            else:
                origins = [s.value.span] * len(s.targets)
            self.use(s.value, fact, frozen, "move")
            for t, o in zip(s.targets, origins):
                self.assign_place(t, o, fact, frozen)
        elif isinstance(s, A.AugAssign):
            self.use(s.value, fact, frozen, "drop")
            self.require_live(fact, place_of(s.target), s.target.span)
        elif isinstance(s, A.ExprStmt):
            self.use(s.value, fact, frozen, "borrow" if isinstance(s.value, A.PLACE_EXPRS) else "drop")
        elif isinstance(s, A.Return):
            if s.value is not None:
                self.use(s.value, fact, frozen, "move")
        elif isinstance(s, A.Assert):
            self.use(s.test, fact, frozen, "drop")
        else:  # pragma: no cover
            raise InternalError(f"unexpected statement {s!r}")

    def transfer(self, block_id: int, fact: Fact) -> Fact:
        fact = dict(fact)
        for cs in self.cfg.blocks[block_id].stmts:
            self.stmt(cs, fact)
        return fact

    def exit_checks(self, fact: Fact):
        leaks = []
        for var in sorted(fact):
            if var in self.borrowed:
                continue
            leaks += live_quantum(fact[var], self.types[var], Place(var))
        for place, origin in sorted(leaks, key=lambda x: (x[1] or self.info.decl.span, str(x[0]))):
            self._emit("QB004", place, origin or self.info.decl.span)

    # -- driver ----------------------------------------------------------

    def initial_fact(self) -> Fact:
        spans = {p.name: p.span for p in self.info.decl.params}
        return {p.name: Owned(spans[p.name]) for p in self.info.sig.params}

    def _in_fact(self, b: int, outs: dict[int, Fact], conflicts=None) -> Fact | None:
        block = self.cfg.blocks[b]
        facts = [outs[p] for p in block.preds if p in outs]
        if b == self.cfg.entry:
            facts.insert(0, self.initial_fact())
        if not facts:
            return None
        acc = facts[0]
        for f in facts[1:]:
            acc = join_facts(acc, f, self.types, conflicts)
        return acc

    def run(self) -> list[Diagnostic]:
        order = self.cfg.rpo()
        ins: dict[int, Fact] = {}
        outs: dict[int, Fact] = {}
        for _ in range(MAX_ROUNDS):
            changed = False
            for b in order:
                new_in = self._in_fact(b, outs)
                if new_in is None:
                    continue
                if b in ins:
                    new_in = join_facts(ins[b], new_in, self.types)
                ins[b] = new_in
                out = self.transfer(b, new_in)
                if outs.get(b) != out:
                    outs[b] = out
                    changed = True
            if not changed:
                break
        else:  # pragma: no cover
            raise InternalError(f"ownership analysis of {self.info.decl.name} did not converge")

        self.rep = _Reporter()
        for b in order:
            block = self.cfg.blocks[b]
            conflicts: list = []
            self._in_fact(b, outs, conflicts)
            for place, live, dead in conflicts:
                notes = []
                if isinstance(dead, Dead) and dead.consumed and dead.cause is not None:
                    notes.append(Note("consumed here", dead.cause))
                elif isinstance(live, Owned) and live.origin is not None:
                    notes.append(Note("still live if this was obtained here", live.origin))
                self.rep.emit("QB005", Place(place.root), block.join_span or self.info.decl.span, notes=notes)
            self.transfer(b, ins[b])
        self.exit_checks(outs[self.cfg.exit])
        diags = self.rep.diags
        self.rep = None
        return diags


def check_function(info: FunctionInfo) -> list[Diagnostic]:
    """Ownership diagnostics for one resolved function; empty means accepted."""
    return _dedupe(FunctionChecker(info).run())


def check_program(program: TypedProgram) -> list[Diagnostic]:
    diags = []
    for info in program.functions.values():
        diags += check_function(info)
    return _dedupe(diags)


def _dedupe(diags: list[Diagnostic]) -> list[Diagnostic]:
    seen, out = set(), []
    for d in sorted(diags, key=Diagnostic.sort_key):
        key = (d.code, d.message, d.span)
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


__all__ = ["check_function", "check_program", "FunctionChecker", "Maybe"]
