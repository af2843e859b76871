"""Shared test helpers: the two thermostat properties and an associative
normal form for comparing formulas that differ only in bracketing."""

from hyltl.formula import And, Formula, Next, Not, Or, Release, Until
from hyltl.parser import parse_hyltl

HYB = "F({x >= 21} & X on)"  # negated safety property
LIV = "F(!{x >= 18} & X G !on)"  # negated liveness property
ACTIONS = ("off", "on")
ON_FIRST = {"on": 1}


def neg_hyb():
    return parse_hyltl(HYB, ["x"], ACTIONS)


def neg_liv():
    return parse_hyltl(LIV, ["x"], ACTIONS)


def flat(phi: Formula):
    """Nested tuples with And/Or flattened."""
    if isinstance(phi, (And, Or)):
        kind = type(phi)
        parts = []

        def collect(f):
            if isinstance(f, kind):
                collect(f.left)
                collect(f.right)
            else:
                parts.append(flat(f))

        collect(phi)
        return (kind.__name__, tuple(parts))
    if isinstance(phi, (Until, Release)):
        return (type(phi).__name__, flat(phi.left), flat(phi.right))
    if isinstance(phi, (Not, Next)):
        return (type(phi).__name__, flat(phi.arg))
    return phi
