import random

import pytest

from hyltl.errors import FormulaError
from hyltl.formula import ActionAtom, And, FlowAtom, Not, Or, is_positive, simplify, to_nnf
from hyltl.oracle.generators import formula_batch
from hyltl.parser import parse_flow_constraint, parse_hyltl
from hyltl.pi import pi

from helpers import flat, neg_liv


def test_negated_flow_atom():
    f = FlowAtom(parse_flow_constraint("x >= 18"))
    got = pi(Not(f))
    want = parse_hyltl("{x < 18} | X(__T U (__T & {x < 18}))", allow_aux=True)
    assert got == want


def test_action_is_fixed_point():
    assert pi(ActionAtom("on")) == ActionAtom("on")
    assert pi(Not(ActionAtom("on"))) == Not(ActionAtom("on"))


def test_positive_flow_atom_rule():
    f = FlowAtom(parse_flow_constraint("x >= 18"))
    want = parse_hyltl("{x >= 18} & X((__T & {x >= 18}) U !__T)", allow_aux=True)
    assert pi(f) == want


def test_temporal_rules():
    cases = {
        "on U off": "(__T | on) U (!__T & off)",
        "on R off": "(!__T & on) R (__T | off)",
        "X on": "X(__T U (!__T & on))",
    }
    for src, dst in cases.items():
        assert pi(parse_hyltl(src)) == parse_hyltl(dst, allow_aux=True)


def test_liveness_derivation():
    got = simplify(pi(to_nnf(neg_liv())))
    want = parse_hyltl(
        "true U (!__T & ({x<18} | X(__T U (__T & {x<18}))) & X(__T U (!__T & (false R (__T | !on)))))",
        allow_aux=True,
    )
    assert flat(got) == flat(want)


def test_rejects_non_nnf_and_aux():
    with pytest.raises(FormulaError):
        pi(parse_hyltl("!(on U off)"))
    with pytest.raises(FormulaError):
        pi(parse_hyltl("__T U on", allow_aux=True))


def test_output_always_positive():
    for phi in formula_batch(5, 300, 4, 3, nnf=True):
        assert is_positive(pi(phi))


def test_identity_on_pure_boolean_action_formulas():
    rng = random.Random(9)

    def boolean(d):
        if d == 0 or rng.random() < 0.3:
            atom = ActionAtom(rng.choice(["on", "off"]))
            return Not(atom) if rng.random() < 0.5 else atom
        return (And if rng.random() < 0.5 else Or)(boolean(d - 1), boolean(d - 1))

    for _ in range(100):
        phi = boolean(4)
        assert pi(phi) == phi
