"""Canonical pretty-printer. ``parse(print_module(m)) == m`` for every parsed ``m``."""

from __future__ import annotations

from qimp.frontend import ast as A

# Binding strength; higher binds tighter.
_PREC = {"or": 1, "and": 2, "not": 3, "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4, "+": 5, "-": 5, "*": 6, "/": 6}
_UNARY_MINUS = 7
_ATOM = 8


def print_type(t: A.TypeExpr) -> str:
    if isinstance(t, A.ArrayTypeExpr):
        return f"array[{print_type(t.elem)}, {t.length}]"
    return t.name


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.BinOp):
        return _PREC[e.op]
    if isinstance(e, A.UnaryOp):
        return _PREC["not"] if e.op == "not" else _UNARY_MINUS
    if isinstance(e, A.TupleExpr):
        return 0
    return _ATOM


def _wrap(e: A.Expr, min_prec: int) -> str:
    s = print_expr(e)
    return f"({s})" if _prec(e) < min_prec else s


def print_expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.FloatLit):
        return repr(e.value)
    if isinstance(e, A.BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.Attribute):
        return f"{_wrap(e.value, _ATOM)}.{e.field}"
    if isinstance(e, A.Subscript):
        return f"{_wrap(e.value, _ATOM)}[{print_expr(e.index)}]"
    if isinstance(e, A.Call):
        parts = [print_expr(a) for a in e.args]
        parts += [f"{k.name}={print_expr(k.value)}" for k in e.keywords]
        return f"{e.func}({', '.join(parts)})"
    if isinstance(e, A.UnaryOp):
        if e.op == "not":
            return f"not {_wrap(e.operand, _PREC['not'])}"
        return f"-{_wrap(e.operand, _UNARY_MINUS)}"
    if isinstance(e, A.BinOp):
        p = _PREC[e.op]
        # Comparisons don't chain, so both sides must bind tighter.
        right_min = p + 1
        left_min = p + 1 if p == 4 else p
        return f"{_wrap(e.left, left_min)} {e.op} {_wrap(e.right, right_min)}"
    if isinstance(e, A.TupleExpr):
        inner = ", ".join(_wrap(x, 1) for x in e.elts)
        return inner + ("," if len(e.elts) == 1 else "")
    raise TypeError(f"not an expression: {e!r}")


def _block(stmts: list[A.Stmt], indent: str) -> list[str]:
    out = []
    for s in stmts:
        out += print_stmt(s, indent)
    return out


def print_stmt(s: A.Stmt, indent: str = "") -> list[str]:
    inner = indent + "    "
    if isinstance(s, A.Assign):
        lhs = ", ".join(print_expr(t) for t in s.targets)
        return [f"{indent}{lhs} = {print_expr(s.value)}"]
    if isinstance(s, A.AugAssign):
        return [f"{indent}{print_expr(s.target)} {s.op}= {print_expr(s.value)}"]
    if isinstance(s, A.ExprStmt):
        return [f"{indent}{print_expr(s.value)}"]
    if isinstance(s, A.Return):
        return [f"{indent}return" + ("" if s.value is None else f" {print_expr(s.value)}")]
    if isinstance(s, A.Assert):
        return [f"{indent}assert {print_expr(s.test)}"]
    if isinstance(s, A.While):
        return [f"{indent}while {print_expr(s.cond)}:"] + _block(s.body, inner)
    if isinstance(s, A.For):
        return [f"{indent}for {s.target.id} in {print_expr(s.iter)}:"] + _block(s.body, inner)
    if isinstance(s, A.If):
        lines = [f"{indent}if {print_expr(s.cond)}:"] + _block(s.body, inner)
        orelse = s.orelse
        while len(orelse) == 1 and isinstance(orelse[0], A.If):
            elif_ = orelse[0]
            lines += [f"{indent}elif {print_expr(elif_.cond)}:"] + _block(elif_.body, inner)
            orelse = elif_.orelse
        if orelse:
            lines += [f"{indent}else:"] + _block(orelse, inner)
        return lines
    raise TypeError(f"not a statement: {s!r}")


def print_module(m: A.Module) -> str:
    chunks = []
    for sd in m.structs:
        lines = [f"class {sd.name}:"] + [f"    {f.name}: {print_type(f.type)}" for f in sd.fields]
        chunks.append("\n".join(lines))
    for fd in m.functions:
        params = ", ".join(f"{p.name}: {print_type(p.type)}" + (" @owned" if p.owned else "") for p in fd.params)
        head = f"def {fd.name}({params})"
        if len(fd.returns) == 1:
            head += f" -> {print_type(fd.returns[0])}"
        elif fd.returns:
            head += f" -> ({', '.join(print_type(t) for t in fd.returns)})"
        chunks.append("\n".join([head + ":"] + _block(fd.body, "    ")))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
