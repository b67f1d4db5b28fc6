"""Hand-rolled lexer and recursive-descent parser.

The only exception that can escape ``parse`` is ParseError: arbitrary input
must produce a positioned diagnostic, never a crash.
"""

from __future__ import annotations

from ..errors import LogicodeError
from . import nodes
from .nodes import (
    And,
    Binary,
    Binding,
    BoolLit,
    Call,
    Check,
    Compare,
    FieldAccess,
    FloatLit,
    Index,
    IntLit,
    Let,
    Not,
    Or,
    Program,
    Quantifier,
    RangeTest,
    StrLit,
    Unary,
    Var,
)

_DIGITS = "0123456789"

KEYWORDS = {
    "check",
    "covers",
    "type",
    "when",
    "reason",
    "with",
    "forall",
    "exists",
    "in",
    "let",
    "and",
    "or",
    "not",
    "true",
    "false",
}

# Two-char operators first so <= is not lexed as < then =.
_TWO_CHAR_OPS = ("<=", ">=", "!=")
_ONE_CHAR_OPS = "()[],.:=<>+-*/"
_UNICODE_OPS = {"≤": "<=", "≥": ">=", "≠": "!="}


class ParseError(LogicodeError):
    """Syntax failure with a 1-based source position."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind: str, value, line: int, col: int):
        self.kind = kind  # ident | int | float | string | op | eof
        self.value = value
        self.line = line
        self.col = col

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"_Token({self.kind}, {self.value!r}, {self.line}:{self.col})"


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def err(message: str, l=None, c=None):
        raise ParseError(l or line, c or col, message)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":  # comment to end of line
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            tokens.append(_Token("ident", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in _DIGITS:
            j = i
            while j < n and source[j] in _DIGITS:
                j += 1
            is_float = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1] in _DIGITS:
                is_float = True
                j += 1
                while j < n and source[j] in _DIGITS:
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k] in _DIGITS:
                    is_float = True
                    j = k
                    while j < n and source[j] in _DIGITS:
                        j += 1
            text = source[i:j]
            if is_float:
                value = float(text)
                if value in (float("inf"), float("-inf")):
                    err("float literal out of range", start_line, start_col)
                tokens.append(_Token("float", value, start_line, start_col))
            else:
                tokens.append(_Token("int", int(text), start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n:
                    err("unterminated string literal", start_line, start_col)
                c = source[j]
                if c == "\n":
                    err("newline inside string literal", start_line, start_col)
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    if j + 1 >= n:
                        err("unterminated escape", start_line, start_col)
                    esc = source[j + 1]
                    if esc == "n":
                        buf.append("\n")
                    elif esc == "t":
                        buf.append("\t")
                    elif esc in ('"', "\\"):
                        buf.append(esc)
                    else:
                        err(f"unknown escape \\{esc}", line, col + (j - i))
                    j += 2
                    continue
                buf.append(c)
                j += 1
            tokens.append(_Token("string", "".join(buf), start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in _UNICODE_OPS:
            tokens.append(_Token("op", _UNICODE_OPS[ch], start_line, start_col))
            i += 1
            col += 1
            continue
        if source[i : i + 2] in _TWO_CHAR_OPS:
            tokens.append(_Token("op", source[i : i + 2], start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(_Token("op", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        err(f"unexpected character {ch!r}")
    tokens.append(_Token("eof", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    # -- token helpers -------------------------------------------------
    @property
    def _cur(self) -> _Token:
        return self._tokens[self._pos]

    def _peek(self, ahead: int = 1) -> _Token:
        return self._tokens[min(self._pos + ahead, len(self._tokens) - 1)]

    def _advance(self) -> _Token:
        tok = self._cur
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def _error(self, message: str, tok: _Token | None = None):
        tok = tok or self._cur
        raise ParseError(tok.line, tok.col, message)

    def _at_op(self, *ops: str) -> bool:
        return self._cur.kind == "op" and self._cur.value in ops

    def _at_keyword(self, word: str) -> bool:
        return self._cur.kind == "ident" and self._cur.value == word

    def _expect_op(self, op: str) -> _Token:
        if not self._at_op(op):
            self._error(f"expected {op!r}, found {self._describe()}")
        return self._advance()

    def _expect_keyword(self, word: str) -> _Token:
        if not self._at_keyword(word):
            self._error(f"expected keyword {word!r}, found {self._describe()}")
        return self._advance()

    def _expect_name(self, what: str) -> _Token:
        tok = self._cur
        if tok.kind != "ident" or tok.value in KEYWORDS:
            self._error(f"expected {what}, found {self._describe()}")
        return self._advance()

    def _describe(self) -> str:
        tok = self._cur
        if tok.kind == "eof":
            return "end of input"
        return repr(tok.value)

    # -- grammar -------------------------------------------------------
    def parse_program(self, source: str) -> Program:
        checks: list[Check] = []
        names: set[str] = set()
        while self._cur.kind != "eof":
            check = self._check()
            if check.name in names:
                raise ParseError(
                    check.pos[0], check.pos[1], f"duplicate check name {check.name!r}"
                )
            names.add(check.name)
            checks.append(check)
        return Program(checks=tuple(checks), source_text=source)

    def _check(self) -> Check:
        head = self._cur
        self._expect_keyword("check")
        name = self._expect_name("check name")
        self._expect_keyword("covers")
        covers = self._expect_name("rule id")
        self._expect_keyword("type")
        anomaly_tok = self._expect_name("anomaly type")
        if anomaly_tok.value not in nodes.ANOMALY_SHORT:
            self._error(
                f"unknown anomaly type {anomaly_tok.value!r}; expected one of "
                + ", ".join(sorted(nodes.ANOMALY_SHORT)),
                anomaly_tok,
            )
        self._expect_keyword("when")
        condition = self._expr()
        self._expect_keyword("reason")
        if self._cur.kind != "string":
            self._error(f"expected reason string, found {self._describe()}")
        template = self._advance().value
        bindings: list[Binding] = []
        if self._at_keyword("with"):
            self._advance()
            bindings.append(self._binding())
            while self._at_op(","):
                self._advance()
                bindings.append(self._binding())
        return Check(
            name=name.value,
            covers=covers.value,
            anomaly_type=nodes.ANOMALY_SHORT[anomaly_tok.value],
            condition=condition,
            reason_template=template,
            bindings=tuple(bindings),
            pos=(head.line, head.col),
        )

    def _binding(self) -> Binding:
        name = self._expect_name("binding name")
        self._expect_op("=")
        return Binding(name=name.value, expr=self._expr(), pos=(name.line, name.col))

    def _expr(self):
        if self._at_keyword("forall") or self._at_keyword("exists"):
            return self._quantifier()
        if self._at_keyword("let"):
            return self._let()
        return self._or()

    def _quantifier(self):
        head = self._advance()
        var = self._expect_name("quantifier variable")
        self._expect_keyword("in")
        domain = self._or()
        self._expect_op(":")
        body = self._expr()
        return Quantifier(
            kind=head.value,
            var=var.value,
            domain=domain,
            body=body,
            pos=(head.line, head.col),
        )

    def _let(self):
        head = self._advance()
        name = self._expect_name("let binding name")
        self._expect_op("=")
        value = self._or()
        self._expect_keyword("in")
        body = self._expr()
        return Let(name=name.value, value=value, body=body, pos=(head.line, head.col))

    def _or(self):
        left = self._and()
        while self._at_keyword("or"):
            tok = self._advance()
            left = Or(left=left, right=self._and(), pos=(tok.line, tok.col))
        return left

    def _and(self):
        left = self._not()
        while self._at_keyword("and"):
            tok = self._advance()
            left = And(left=left, right=self._not(), pos=(tok.line, tok.col))
        return left

    def _not(self):
        if self._at_keyword("not"):
            tok = self._advance()
            return Not(operand=self._not(), pos=(tok.line, tok.col))
        return self._comparison()

    def _comparison(self):
        left = self._sum()
        if self._at_op("<", "<=", "=", "!=", ">=", ">"):
            tok = self._advance()
            right = self._sum()
            return Compare(op=tok.value, left=left, right=right, pos=(tok.line, tok.col))
        # `in` starts a range test only when a bracket follows; otherwise it
        # belongs to an enclosing let or quantifier.
        if self._at_keyword("in") and self._peek().kind == "op" and self._peek().value == "[":
            tok = self._advance()
            self._expect_op("[")
            low = self._expr()
            self._expect_op(",")
            high = self._expr()
            self._expect_op("]")
            return RangeTest(value=left, low=low, high=high, pos=(tok.line, tok.col))
        return left

    def _sum(self):
        left = self._term()
        while self._at_op("+", "-"):
            tok = self._advance()
            left = Binary(op=tok.value, left=left, right=self._term(), pos=(tok.line, tok.col))
        return left

    def _term(self):
        left = self._unary()
        while self._at_op("*", "/"):
            tok = self._advance()
            left = Binary(op=tok.value, left=left, right=self._unary(), pos=(tok.line, tok.col))
        return left

    def _unary(self):
        if self._at_op("-"):
            tok = self._advance()
            operand = self._unary()
            # Fold a negated literal so -5 has one canonical AST.
            if isinstance(operand, IntLit):
                return IntLit(value=-operand.value, pos=(tok.line, tok.col))
            if isinstance(operand, FloatLit):
                return FloatLit(value=-operand.value, pos=(tok.line, tok.col))
            return Unary(op="-", operand=operand, pos=(tok.line, tok.col))
        return self._postfix()

    def _postfix(self):
        expr = self._primary()
        while True:
            if self._at_op("."):
                tok = self._advance()
                fld = self._expect_name("field name")
                expr = FieldAccess(base=expr, field=fld.value, pos=(tok.line, tok.col))
            elif self._at_op("["):
                tok = self._advance()
                index = self._expr()
                self._expect_op("]")
                expr = Index(base=expr, index=index, pos=(tok.line, tok.col))
            else:
                return expr

    def _primary(self):
        tok = self._cur
        if tok.kind == "int":
            self._advance()
            return IntLit(value=tok.value, pos=(tok.line, tok.col))
        if tok.kind == "float":
            self._advance()
            return FloatLit(value=tok.value, pos=(tok.line, tok.col))
        if tok.kind == "string":
            self._advance()
            return StrLit(value=tok.value, pos=(tok.line, tok.col))
        if tok.kind == "ident":
            if tok.value in ("true", "false"):
                self._advance()
                return BoolLit(value=tok.value == "true", pos=(tok.line, tok.col))
            if tok.value in KEYWORDS:
                self._error(f"unexpected keyword {tok.value!r}")
            self._advance()
            if self._at_op("("):
                self._advance()
                args: list = []
                if not self._at_op(")"):
                    args.append(self._expr())
                    while self._at_op(","):
                        self._advance()
                        args.append(self._expr())
                self._expect_op(")")
                return Call(func=tok.value, args=tuple(args), pos=(tok.line, tok.col))
            return Var(name=tok.value, pos=(tok.line, tok.col))
        if self._at_op("("):
            self._advance()
            inner = self._expr()
            self._expect_op(")")
            return inner
        self._error(f"expected an expression, found {self._describe()}")


def parse(source: str) -> Program:
    """Parse source text into a Program. Raises ParseError on any defect."""
    if not isinstance(source, str):
        raise ParseError(1, 1, "source must be a string")
    tokens = _tokenize(source)
    return _Parser(tokens).parse_program(source)
