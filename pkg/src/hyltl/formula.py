"""Constraint expressions and temporal formula ASTs.

One set of node classes serves both logics: a HyLTL formula uses
``FlowAtom`` and ``ActionAtom`` leaves, the discrete LTL produced by the
bit encoding uses ``FlowAtom`` and ``BitAtom`` leaves.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator

from .errors import FormulaError

AUX_ACTION = "__T"

RELATIONS = ("<", "<=", "=", "!=", ">=", ">")
DUAL_RELATION = {"<": ">=", ">=": "<", ">": "<=", "<=": ">", "=": "!=", "!=": "="}
FUNCTIONS = ("sin", "cos", "exp")


# ---------------------------------------------------------------------------
# arithmetic expressions


class Expr:
    __slots__ = ()

    def variables(self) -> Iterator["Var"]:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def variables(self):
        return iter(())


@dataclass(frozen=True)
class Var(Expr):
    name: str
    mark: str = ""  # "" plain, "'" derivative, "~" pre-jump value

    def __post_init__(self):
        if self.mark not in ("", "'", "~"):
            raise ValueError(f"bad variable mark {self.mark!r}")

    def variables(self):
        yield self


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def variables(self):
        return self.arg.variables()


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")

    def variables(self):
        return self.arg.variables()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in ("+", "-", "*", "/", "^"):
            raise ValueError(f"unknown operator {self.op!r}")

    def variables(self):
        yield from self.left.variables()
        yield from self.right.variables()


_EXPR_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _expr_prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _EXPR_PREC[e.op]
    if isinstance(e, Neg) or (isinstance(e, Const) and e.value < 0):
        return 3
    return 5


def expr_text(e: Expr) -> str:
    if isinstance(e, Const):
        return format_number(e.value)
    if isinstance(e, Var):
        if e.mark == "~":
            return "~" + e.name
        return e.name + e.mark
    if isinstance(e, Func):
        return f"{e.name}({expr_text(e.arg)})"
    if isinstance(e, Neg):
        inner = expr_text(e.arg)
        return "-" + (f"({inner})" if _expr_prec(e.arg) < 3 else inner)
    if isinstance(e, BinOp):
        p = _EXPR_PREC[e.op]
        lt, rt = expr_text(e.left), expr_text(e.right)
        if e.op == "^":
            if _expr_prec(e.left) <= p:
                lt = f"({lt})"
            if _expr_prec(e.right) < p:
                rt = f"({rt})"
            return f"{lt}^{rt}"
        if _expr_prec(e.left) < p:
            lt = f"({lt})"
        if _expr_prec(e.right) <= p:
            rt = f"({rt})"
        return f"{lt} {e.op} {rt}"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# constraints


class Constraint:
    """``lhs rel rhs``; identity is the canonical text."""

    __slots__ = ("lhs", "rel", "rhs", "text", "_hash")

    def __init__(self, lhs: Expr, rel: str, rhs: Expr):
        if rel == "==":
            rel = "="
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        self.lhs = lhs
        self.rel = rel
        self.rhs = rhs
        self._check()
        self.text = f"{expr_text(lhs)} {rel} {expr_text(rhs)}"
        self._hash = hash((type(self).__name__, self.text))

    def _check(self):
        pass

    def variables(self) -> set[Var]:
        return set(self.lhs.variables()) | set(self.rhs.variables())

    def variable_names(self) -> set[str]:
        return {v.name for v in self.variables()}

    def __eq__(self, other):
        return type(other) is type(self) and other.text == self.text

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.text < other.text

    def __repr__(self):
        return f"{type(self).__name__}({self.text!r})"

    def __str__(self):
        return self.text


class FlowConstraint(Constraint):
    """Constraint over plain and dotted variables, holding throughout a trajectory."""

    __slots__ = ()

    def _check(self):
        for v in self.variables():
            if v.mark == "~":
                raise ValueError(f"flow constraint may not mention ~{v.name}")


class JumpConstraint(Constraint):
    """Constraint over pre-jump (``~x``) and post-jump (``x``) values."""

    __slots__ = ()

    def _check(self):
        for v in self.variables():
            if v.mark == "'":
                raise ValueError(f"jump constraint may not mention {v.name}'")


def dual(f: FlowConstraint) -> FlowConstraint:
    """Same sides, complemented relation (``<`` becomes ``>=`` and so on)."""
    return FlowConstraint(f.lhs, DUAL_RELATION[f.rel], f.rhs)


# ---------------------------------------------------------------------------
# formulas


class Formula:
    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class FlowAtom(Formula):
    constraint: FlowConstraint


@dataclass(frozen=True)
class ActionAtom(Formula):
    name: str


@dataclass(frozen=True)
class BitAtom(Formula):
    index: int


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


ATOMS = (FlowAtom, ActionAtom, BitAtom)
UNARY = (Not, Next)
BINARY = (And, Or, Until, Release)

T = ActionAtom(AUX_ACTION)


def eventually(phi: Formula) -> Formula:
    return Until(TRUE, phi)


def always(phi: Formula) -> Formula:
    return Not(Until(TRUE, Not(phi)))


def conj(*parts: Formula) -> Formula:
    """Left-nested conjunction; ``TRUE`` when empty."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: Formula) -> Formula:
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def rebuild(node: Formula, children: tuple[Formula, ...]) -> Formula:
    if isinstance(node, UNARY):
        return type(node)(children[0])
    if isinstance(node, BINARY):
        return type(node)(children[0], children[1])
    return node


def walk(phi: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def subformulas(phi: Formula) -> list[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen: dict[Formula, None] = {}

    def visit(node):
        if node in seen:
            return
        for c in node.children():
            visit(c)
        seen[node] = None

    visit(phi)
    return list(seen)


def flow_constraints(phi: Formula) -> set[FlowConstraint]:
    return {n.constraint for n in walk(phi) if isinstance(n, FlowAtom)}


def action_names(phi: Formula) -> set[str]:
    return {n.name for n in walk(phi) if isinstance(n, ActionAtom)}


def negated_flow_constraints(phi: Formula) -> set[FlowConstraint]:
    return {
        n.arg.constraint
        for n in walk(phi)
        if isinstance(n, Not) and isinstance(n.arg, FlowAtom)
    }


def size(phi: Formula) -> int:
    return sum(1 for _ in walk(phi))


def depth(phi: Formula) -> int:
    kids = phi.children()
    if not kids:
        return 0
    return 1 + max(depth(c) for c in kids)


# ---------------------------------------------------------------------------
# normal forms


def to_nnf(phi: Formula) -> Formula:
    """Push negations down to atoms.

    Uses the infinite-trace dualities; negated literals ``true``/``false``
    are folded so no ``Not`` is left above a constant.
    """
    return _nnf(phi, False)


def _nnf(phi: Formula, neg: bool) -> Formula:
    if isinstance(phi, Not):
        return _nnf(phi.arg, not neg)
    if isinstance(phi, Top):
        return FALSE if neg else TRUE
    if isinstance(phi, Bottom):
        return TRUE if neg else FALSE
    if isinstance(phi, ATOMS):
        return Not(phi) if neg else phi
    if isinstance(phi, Next):
        return Next(_nnf(phi.arg, neg))
    left, right = _nnf(phi.left, neg), _nnf(phi.right, neg)
    if isinstance(phi, And):
        return Or(left, right) if neg else And(left, right)
    if isinstance(phi, Or):
        return And(left, right) if neg else Or(left, right)
    if isinstance(phi, Until):
        return Release(left, right) if neg else Until(left, right)
    if isinstance(phi, Release):
        return Until(left, right) if neg else Release(left, right)
    raise TypeError(f"not a formula: {phi!r}")


def is_nnf(phi: Formula) -> bool:
    return all(not isinstance(n, Not) or isinstance(n.arg, ATOMS) for n in walk(phi))


def is_positive(phi: Formula) -> bool:
    """Membership in the positive-flow fragment (negation only on actions)."""
    if not is_nnf(phi):
        raise FormulaError("is_positive expects a formula in negation normal form")
    return not any(isinstance(n, Not) and isinstance(n.arg, FlowAtom) for n in walk(phi))


def simplify(phi: Formula) -> Formula:
    """Fold boolean and temporal constants bottom-up. Nothing else."""
    kids = tuple(simplify(c) for c in phi.children())
    node = rebuild(phi, kids) if kids else phi
    if isinstance(node, Not):
        if isinstance(node.arg, Top):
            return FALSE
        if isinstance(node.arg, Bottom):
            return TRUE
        if isinstance(node.arg, Not):
            return node.arg.arg
    elif isinstance(node, Next):
        if isinstance(node.arg, (Top, Bottom)):
            return node.arg
    elif isinstance(node, And):
        a, b = node.left, node.right
        if isinstance(a, Bottom) or isinstance(b, Bottom):
            return FALSE
        if isinstance(a, Top):
            return b
        if isinstance(b, Top):
            return a
    elif isinstance(node, Or):
        a, b = node.left, node.right
        if isinstance(a, Top) or isinstance(b, Top):
            return TRUE
        if isinstance(a, Bottom):
            return b
        if isinstance(b, Bottom):
            return a
    elif isinstance(node, Until):
        if isinstance(node.right, (Top, Bottom)):
            return node.right
        if isinstance(node.left, Bottom):
            return node.right
    elif isinstance(node, Release):
        if isinstance(node.right, (Top, Bottom)):
            return node.right
        if isinstance(node.left, Top):
            return node.right
    return node


# ---------------------------------------------------------------------------
# printing

_PREC = {Or: 1, And: 2, Until: 3, Release: 3}
_SYMBOL = {Or: "|", And: "&", Until: "U", Release: "R"}


def _prec(phi: Formula) -> int:
    if isinstance(phi, BINARY):
        return _PREC[type(phi)]
    if isinstance(phi, UNARY):
        return 4
    return 5


def hyltl_atom(phi: Formula) -> str:
    if isinstance(phi, FlowAtom):
        return "{" + phi.constraint.text + "}"
    if isinstance(phi, ActionAtom):
        return phi.name
    if isinstance(phi, BitAtom):
        return f"b{phi.index}"
    raise TypeError(phi)


def ltl_atom(phi: Formula) -> str:
    """Atom syntax understood by common LTL-to-automaton translators."""
    if isinstance(phi, FlowAtom):
        return '"' + phi.constraint.text + '"'
    if isinstance(phi, BitAtom):
        return f"b{phi.index}"
    if isinstance(phi, ActionAtom):
        return phi.name
    raise TypeError(phi)


def pretty_atom(phi: Formula) -> str:
    if isinstance(phi, ActionAtom) and phi.name == AUX_ACTION:
        return "T"
    return hyltl_atom(phi)


def to_text(phi: Formula, atom: Callable[[Formula], str] = hyltl_atom) -> str:
    """Canonical text with minimal parentheses.

    Binary operators are printed left-nested without parentheses; an
    until/release operand of a boolean connective is always parenthesized.
    """
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, ATOMS):
        return atom(phi)
    if isinstance(phi, UNARY):
        inner = to_text(phi.arg, atom)
        if _prec(phi.arg) < 4:
            inner = f"({inner})"
        if isinstance(phi, Not):
            return "!" + inner
        return "X" + inner if inner.startswith("(") else "X " + inner
    p = _PREC[type(phi)]
    lt, rt = to_text(phi.left, atom), to_text(phi.right, atom)
    lp, rp = _prec(phi.left), _prec(phi.right)
    if p == 3:
        # right associative
        if lp <= 3:
            lt = f"({lt})"
        if rp < 3:
            rt = f"({rt})"
    else:
        if lp < p or (lp == 3 and p < 3):
            lt = f"({lt})"
        if rp <= p or rp == 3:
            rt = f"({rt})"
    return f"{lt} {_SYMBOL[type(phi)]} {rt}"


def to_ltl_text(phi: Formula) -> str:
    return to_text(phi, ltl_atom)


def pretty(phi: Formula) -> str:
    """Human-facing text; the auxiliary action prints as ``T``."""
    return to_text(phi, pretty_atom)
