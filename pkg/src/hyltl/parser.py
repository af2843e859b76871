"""Concrete syntax for constraints and formulas.

Formulas::

    phi := phi -> phi | phi '|' phi | phi & phi | phi U phi | phi R phi
         | ! phi | X phi | F phi | G phi | ( phi ) | true | false
         | {constraint} | action

Precedence from tightest: unary, U/R (right associative), &, |, ->.
In LTL mode (``parse_ltl``) atoms are ``b<k>`` bit letters and quoted
constraints ``"x >= 21"``.
"""

from __future__ import annotations

import re
from typing import Iterable

from .errors import DeclarationError, ParseError
from .formula import (
    AUX_ACTION,
    FALSE,
    FUNCTIONS,
    TRUE,
    ActionAtom,
    And,
    BinOp,
    BitAtom,
    Const,
    Expr,
    FlowAtom,
    FlowConstraint,
    Func,
    JumpConstraint,
    Neg,
    Next,
    Not,
    Or,
    Release,
    Until,
    Var,
    always,
    eventually,
)

# ---------------------------------------------------------------------------
# arithmetic and constraints

_EXPR_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<rel><=|>=|!=|==|<|>|=)"
    r"|(?P<tilde>~)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<prime>')"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize_expr(text: str, offset: int = 0):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _EXPR_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", offset + pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), offset + start))
        pos = m.end()
    out.append(("end", "", offset + len(text)))
    return out


class _ExprParser:
    def __init__(self, text: str, offset: int = 0):
        self.text = text
        self.toks = _tokenize_expr(text, offset)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2], self.text)
        self.i += 1
        return tok

    def constraint(self):
        lhs = self.sum()
        tok = self.take("rel")
        rhs = self.sum()
        end = self.peek()
        if end[0] != "end":
            raise ParseError(f"unexpected {end[1]!r} after constraint", end[2], self.text)
        return lhs, tok[1], rhs

    def sum(self) -> Expr:
        e = self.product()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            e = BinOp(op, e, self.product())
        return e

    def product(self) -> Expr:
        e = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        kind, value, pos = self.peek()
        if kind == "num":
            self.take()
            return Const(float(value))
        if kind == "tilde":
            self.take()
            name = self.take("name")[1]
            return Var(name, "~")
        if kind == "name":
            self.take()
            if value in FUNCTIONS and self.peek()[:2] == ("op", "("):
                self.take()
                arg = self.sum()
                self.take("op", ")")
                return Func(value, arg)
            if value in ("pow",) and self.peek()[:2] == ("op", "("):
                self.take()
                a = self.sum()
                self.take("op", ",")
                b = self.sum()
                self.take("op", ")")
                return BinOp("^", a, b)
            if self.peek()[0] == "prime":
                self.take()
                return Var(value, "'")
            return Var(value)
        if (kind, value) == ("op", "("):
            self.take()
            e = self.sum()
            self.take("op", ")")
            return e
        raise ParseError(f"unexpected {value or 'end of input'!r} in expression", pos, self.text)


def _check_vars(c, declared_vars, offset):
    if declared_vars is None:
        return
    for v in c.variables():
        if v.name not in declared_vars:
            raise DeclarationError(f"undeclared variable {v.name!r} in {{{c.text}}} at position {offset}")


def parse_flow_constraint(text: str, declared_vars: Iterable[str] | None = None, offset: int = 0) -> FlowConstraint:
    lhs, rel, rhs = _ExprParser(text, offset).constraint()
    try:
        c = FlowConstraint(lhs, rel, rhs)
    except ValueError as e:
        raise ParseError(str(e), offset, text) from None
    _check_vars(c, None if declared_vars is None else set(declared_vars), offset)
    return c


def parse_jump_constraint(text: str, declared_vars: Iterable[str] | None = None, offset: int = 0) -> JumpConstraint:
    lhs, rel, rhs = _ExprParser(text, offset).constraint()
    try:
        c = JumpConstraint(lhs, rel, rhs)
    except ValueError as e:
        raise ParseError(str(e), offset, text) from None
    _check_vars(c, None if declared_vars is None else set(declared_vars), offset)
    return c


# ---------------------------------------------------------------------------
# formulas

_KEYWORDS = {"X", "U", "R", "F", "G", "true", "false"}

_FORMULA_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<flow>\{[^{}]*\})"
    r'|(?P<quoted>"[^"]*")'
    r"|(?P<arrow>->)"
    r"|(?P<and>&&?|/\\)"
    r"|(?P<or>\|\|?|\\/)"
    r"|(?P<not>!|~)"
    r"|(?P<lpar>\()"
    r"|(?P<rpar>\))"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r")"
)


def _tokenize_formula(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _FORMULA_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = len(text[pos:]) - len(text[pos:].lstrip()) + pos
            raise ParseError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "ident" and value in _KEYWORDS:
            kind = value
        out.append((kind, value, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _FormulaParser:
    def __init__(self, text, declared_vars, declared_actions, mode, allow_aux):
        self.text = text
        self.toks = _tokenize_formula(text)
        self.i = 0
        self.vars = None if declared_vars is None else set(declared_vars)
        self.actions = None if declared_actions is None else set(declared_actions)
        self.mode = mode
        self.allow_aux = allow_aux

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2], self.text)
        return self.take()

    def parse(self):
        phi = self.implication()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return phi

    def implication(self):
        left = self.disjunction()
        if self.peek()[0] == "arrow":
            self.take()
            return Or(Not(left), self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek()[0] == "or":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.temporal()
        while self.peek()[0] == "and":
            self.take()
            left = And(left, self.temporal())
        return left

    def temporal(self):
        left = self.unary()
        kind = self.peek()[0]
        if kind in ("U", "R"):
            self.take()
            right = self.temporal()
            return Until(left, right) if kind == "U" else Release(left, right)
        return left

    def unary(self):
        kind, value, pos = self.peek()
        if kind == "not":
            self.take()
            return Not(self.unary())
        if kind == "X":
            self.take()
            return Next(self.unary())
        if kind == "F":
            self.take()
            return eventually(self.unary())
        if kind == "G":
            self.take()
            return always(self.unary())
        return self.atom()

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "lpar":
            self.take()
            phi = self.implication()
            self.expect("rpar")
            return phi
        if kind == "true":
            self.take()
            return TRUE
        if kind == "false":
            self.take()
            return FALSE
        if kind == "flow" and self.mode == "hyltl":
            self.take()
            return FlowAtom(parse_flow_constraint(value[1:-1], self.vars, pos + 1))
        if kind == "quoted" and self.mode == "ltl":
            self.take()
            return FlowAtom(parse_flow_constraint(value[1:-1], self.vars, pos + 1))
        if kind == "ident":
            self.take()
            return self.identifier(value, pos)
        if kind in ("U", "R", "and", "or", "arrow"):
            raise ParseError(f"operator {value!r} is missing its left operand", pos, self.text)
        raise ParseError(f"expected an operand, found {value or 'end of input'!r}", pos, self.text)

    def identifier(self, name, pos):
        if self.mode == "ltl":
            m = re.fullmatch(r"b(\d+)", name)
            if not m:
                raise ParseError(f"LTL atoms are b<k> or quoted constraints, found {name!r}", pos, self.text)
            return BitAtom(int(m.group(1)))
        if name == AUX_ACTION:
            if not self.allow_aux:
                raise DeclarationError(f"{AUX_ACTION} is reserved (position {pos})")
            return ActionAtom(name)
        if self.actions is not None and name not in self.actions:
            raise DeclarationError(f"undeclared action {name!r} at position {pos}")
        return ActionAtom(name)


def parse_hyltl(
    text: str,
    declared_vars: Iterable[str] | None = None,
    declared_actions: Iterable[str] | None = None,
    allow_aux: bool = False,
):
    """Parse HyLTL concrete syntax.

    ``None`` for a declaration set disables that check. ``F``/``G`` are
    desugared on the spot, so the result never contains them.
    """
    return _FormulaParser(text, declared_vars, declared_actions, "hyltl", allow_aux).parse()


def parse_ltl(text: str, declared_vars: Iterable[str] | None = None):
    return _FormulaParser(text, declared_vars, None, "ltl", False).parse()
