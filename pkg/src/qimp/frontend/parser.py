"""Recursive-descent parser for QImp."""

from __future__ import annotations

from qimp.diagnostics import ParseError, Span
from qimp.frontend import ast as A
from qimp.frontend.lexer import Token, tokenize

_COMPARE = {"EQEQ": "==", "NOTEQ": "!=", "LT": "<", "LE": "<=", "GT": ">", "GE": ">="}
_AUG = {"PLUS_EQ": "+", "MINUS_EQ": "-", "STAR_EQ": "*", "SLASH_EQ": "/"}


class Parser:
    def __init__(self, tokens: list[Token], file: str = "<input>"):
        self.toks = tokens
        self.pos = 0
        self.file = file

    # -- token helpers ---------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def at(self, *kinds: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind in kinds

    def _here(self) -> Span:
        tok = self.peek()
        if tok is not None:
            return tok.span
        if self.toks:
            s = self.toks[-1].span
            return Span(s.file, s.end_line, s.end_col, s.end_line, s.end_col)
        return Span(self.file, 1, 1, 1, 1)

    def error(self, expected: set[str], what: str | None = None):
        tok = self.peek()
        found = "end of input" if tok is None else (repr(tok.text) if tok.text else tok.kind)
        raise ParseError(what or f"unexpected {found}", self._here(), frozenset(expected))

    def expect(self, kind: str) -> Token:
        if not self.at(kind):
            self.error({kind})
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            tok = self.toks[self.pos]
            self.pos += 1
            return tok
        return None

    def _end_simple(self):
        # A simple statement ends at NEWLINE, at a DEDENT, or at end of input.
        if self.accept("NEWLINE") or self.at("DEDENT") or self.peek() is None:
            return
        self.error({"NEWLINE"})

    # -- declarations ----------------------------------------------------

    def parse_module(self) -> A.Module:
        structs, funcs = [], []
        while self.accept("NEWLINE"):
            pass
        while self.peek() is not None:
            if self.at("CLASS"):
                structs.append(self.parse_struct())
            elif self.at("DEF"):
                funcs.append(self.parse_func())
            else:
                self.error({"DEF", "CLASS"})
            while self.accept("NEWLINE"):
                pass
        if self.toks:
            span = self.toks[0].span.merge(self.toks[-1].span)
        else:
            span = Span(self.file, 1, 1, 1, 1)
        return A.Module(structs, funcs, span=span)

    def parse_struct(self) -> A.StructDecl:
        start = self.expect("CLASS").span
        name = self.expect("IDENT").text
        self.expect("COLON")
        self.expect("NEWLINE")
        self.expect("INDENT")
        fields = []
        while not self.at("DEDENT") and self.peek() is not None:
            ftok = self.expect("IDENT")
            self.expect("COLON")
            ty = self.parse_type()
            fields.append(A.FieldDecl(ftok.text, ty, span=ftok.span.merge(ty.span)))
            self._end_simple()
        end = self._here()
        self.accept("DEDENT")
        if not fields:
            raise ParseError("struct declarations need at least one field", start)
        return A.StructDecl(name, fields, span=start.merge(fields[-1].span if fields else end))

    def parse_type(self) -> A.TypeExpr:
        if self.at("NONE"):
            tok = self.expect("NONE")
            return A.NamedTypeExpr("None", span=tok.span)
        tok = self.expect("IDENT")
        if tok.text == "array" and self.accept("LBRACKET"):
            elem = self.parse_type()
            self.expect("COMMA")
            n = self.expect("INT")
            end = self.expect("RBRACKET")
            return A.ArrayTypeExpr(elem, int(n.text), span=tok.span.merge(end.span))
        return A.NamedTypeExpr(tok.text, span=tok.span)

    def parse_func(self) -> A.FuncDecl:
        start = self.expect("DEF").span
        name = self.expect("IDENT").text
        self.expect("LPAREN")
        params = []
        while not self.at("RPAREN"):
            ptok = self.expect("IDENT")
            self.expect("COLON")
            ty = self.parse_type()
            owned = self.accept("AT_OWNED")
            end = owned.span if owned else ty.span
            params.append(A.Param(ptok.text, ty, owned is not None, span=ptok.span.merge(end)))
            if not self.accept("COMMA"):
                break
        self.expect("RPAREN")
        returns: list[A.TypeExpr] = []
        if self.accept("ARROW"):
            if self.accept("LPAREN"):
                while not self.at("RPAREN"):
                    returns.append(self.parse_type())
                    if not self.accept("COMMA"):
                        break
                self.expect("RPAREN")
            else:
                ty = self.parse_type()
                if not (isinstance(ty, A.NamedTypeExpr) and ty.name == "None"):
                    returns.append(ty)
        self.expect("COLON")
        body = self.parse_block()
        return A.FuncDecl(name, params, returns, body, span=start.merge(body[-1].span))

    # -- statements ------------------------------------------------------

    def parse_block(self) -> list[A.Stmt]:
        if not self.at("NEWLINE"):
            if self.at("PASS"):
                self.error(set(), "QImp has no 'pass'; a block must contain at least one statement")
            self.error({"NEWLINE"})
        self.expect("NEWLINE")
        if not self.at("INDENT"):
            self.error({"INDENT"}, "expected an indented block")
        self.expect("INDENT")
        stmts = []
        while not self.at("DEDENT") and self.peek() is not None:
            stmts.append(self.parse_stmt())
        self.accept("DEDENT")
        return stmts

    def parse_stmt(self) -> A.Stmt:
        if self.at("IF"):
            return self.parse_if()
        if self.at("WHILE"):
            start = self.expect("WHILE").span
            cond = self.parse_expr()
            self.expect("COLON")
            body = self.parse_block()
            return A.While(cond, body, span=start.merge(body[-1].span))
        if self.at("FOR"):
            start = self.expect("FOR").span
            tok = self.expect("IDENT")
            target = A.Name(tok.text, span=tok.span)
            self.expect("IN")
            it = self.parse_expr()
            self.expect("COLON")
            body = self.parse_block()
            return A.For(target, it, body, span=start.merge(body[-1].span))
        if self.at("PASS"):
            self.error(set(), "QImp has no 'pass'; a block must contain at least one statement")
        stmt = self.parse_simple()
        self._end_simple()
        return stmt

    def parse_if(self) -> A.If:
        start = self.expect("IF" if self.at("IF") else "ELIF").span
        cond = self.parse_expr()
        self.expect("COLON")
        body = self.parse_block()
        orelse: list[A.Stmt] = []
        if self.at("ELIF"):
            orelse = [self.parse_if()]
        elif self.accept("ELSE"):
            self.expect("COLON")
            orelse = self.parse_block()
        end = (orelse or body)[-1].span
        return A.If(cond, body, orelse, span=start.merge(end))

    def parse_simple(self) -> A.Stmt:
        if self.at("RETURN"):
            tok = self.expect("RETURN")
            if self.at("NEWLINE", "DEDENT") or self.peek() is None:
                return A.Return(None, span=tok.span)
            value = self.parse_exprlist()
            return A.Return(value, span=tok.span.merge(value.span))
        if self.at("ASSERT"):
            tok = self.expect("ASSERT")
            test = self.parse_expr()
            return A.Assert(test, span=tok.span.merge(test.span))
        lhs = self.parse_exprlist()
        if self.accept("EQUALS"):
            targets = lhs.elts if isinstance(lhs, A.TupleExpr) else [lhs]
            for t in targets:
                self._check_target(t)
            value = self.parse_exprlist()
            return A.Assign(targets, value, span=lhs.span.merge(value.span))
        for kind, op in _AUG.items():
            if self.accept(kind):
                self._check_target(lhs)
                value = self.parse_expr()
                return A.AugAssign(lhs, op, value, span=lhs.span.merge(value.span))
        return A.ExprStmt(lhs, span=lhs.span)

    def _check_target(self, e: A.Expr):
        if not isinstance(e, A.PLACE_EXPRS):
            raise ParseError("cannot assign to this expression", e.span)

    # -- expressions -----------------------------------------------------

    def parse_exprlist(self) -> A.Expr:
        first = self.parse_expr()
        if not self.at("COMMA"):
            return first
        elts = [first]
        while self.accept("COMMA"):
            if self.at("NEWLINE", "DEDENT", "EQUALS", "RPAREN") or self.peek() is None:
                break
            elts.append(self.parse_expr())
        return A.TupleExpr(elts, span=elts[0].span.merge(elts[-1].span))

    def parse_expr(self) -> A.Expr:
        left = self.parse_and()
        while self.accept("OR"):
            right = self.parse_and()
            left = A.BinOp("or", left, right, span=left.span.merge(right.span))
        return left

    def parse_and(self) -> A.Expr:
        left = self.parse_not()
        while self.accept("AND"):
            right = self.parse_not()
            left = A.BinOp("and", left, right, span=left.span.merge(right.span))
        return left

    def parse_not(self) -> A.Expr:
        if self.at("NOT"):
            tok = self.expect("NOT")
            operand = self.parse_not()
            return A.UnaryOp("not", operand, span=tok.span.merge(operand.span))
        return self.parse_comparison()

    def parse_comparison(self) -> A.Expr:
        left = self.parse_arith()
        tok = self.peek()
        if tok is not None and tok.kind in _COMPARE:
            self.pos += 1
            right = self.parse_arith()
            left = A.BinOp(_COMPARE[tok.kind], left, right, span=left.span.merge(right.span))
            if self.peek() is not None and self.peek().kind in _COMPARE:
                raise ParseError("chained comparisons are not supported", self._here())
        return left

    def parse_arith(self) -> A.Expr:
        left = self.parse_term()
        while self.at("PLUS", "MINUS"):
            op = self.toks[self.pos].text
            self.pos += 1
            right = self.parse_term()
            left = A.BinOp(op, left, right, span=left.span.merge(right.span))
        return left

    def parse_term(self) -> A.Expr:
        left = self.parse_unary()
        while self.at("STAR", "SLASH"):
            op = self.toks[self.pos].text
            self.pos += 1
            right = self.parse_unary()
            left = A.BinOp(op, left, right, span=left.span.merge(right.span))
        return left

    def parse_unary(self) -> A.Expr:
        if self.at("MINUS"):
            tok = self.expect("MINUS")
            operand = self.parse_unary()
            return A.UnaryOp("-", operand, span=tok.span.merge(operand.span))
        return self.parse_postfix()

    def parse_postfix(self) -> A.Expr:
        e = self.parse_atom()
        while True:
            if self.accept("DOT"):
                tok = self.expect("IDENT")
                if self.at("LPAREN"):
                    raise ParseError("method calls are not supported", self._here())
                e = A.Attribute(e, tok.text, span=e.span.merge(tok.span))
            elif self.accept("LBRACKET"):
                idx = self.parse_expr()
                end = self.expect("RBRACKET")
                e = A.Subscript(e, idx, span=e.span.merge(end.span))
            elif self.at("LPAREN"):
                raise ParseError("only top-level functions can be called", self._here())
            else:
                return e

    def parse_atom(self) -> A.Expr:
        tok = self.peek()
        if tok is None:
            self.error({"expression"})
        if tok.kind == "INT":
            self.pos += 1
            return A.IntLit(int(tok.text), span=tok.span)
        if tok.kind == "FLOAT":
            self.pos += 1
            return A.FloatLit(float(tok.text), span=tok.span)
        if tok.kind in ("TRUE", "FALSE"):
            self.pos += 1
            return A.BoolLit(tok.kind == "TRUE", span=tok.span)
        if tok.kind == "IDENT":
            self.pos += 1
            if self.accept("LPAREN"):
                return self._finish_call(tok)
            return A.Name(tok.text, span=tok.span)
        if tok.kind == "LPAREN":
            self.pos += 1
            inner = self.parse_exprlist()
            end = self.expect("RPAREN")
            if isinstance(inner, A.TupleExpr):
                inner.span = tok.span.merge(end.span)
            return inner
        self.error({"expression"})

    def _finish_call(self, name: Token) -> A.Call:
        args: list[A.Expr] = []
        keywords: list[A.Keyword] = []
        while not self.at("RPAREN"):
            if self.at("IDENT") and self.peek(1) is not None and self.peek(1).kind == "EQUALS":
                ktok = self.expect("IDENT")
                self.expect("EQUALS")
                value = self.parse_expr()
                keywords.append(A.Keyword(ktok.text, value, span=ktok.span.merge(value.span)))
            else:
                if keywords:
                    raise ParseError("positional argument follows keyword argument", self._here())
                args.append(self.parse_expr())
            if not self.accept("COMMA"):
                break
        end = self.expect("RPAREN")
        return A.Call(name.text, args, keywords, span=name.span.merge(end.span))


def parse(tokens: list[Token], file: str = "<input>") -> A.Module:
    return Parser(tokens, file).parse_module()


def parse_source(source: str, file: str = "<input>") -> A.Module:
    return parse(tokenize(source, file), file)
