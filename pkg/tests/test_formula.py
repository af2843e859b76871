import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyltl.errors import DeclarationError, ParseError
from hyltl.formula import (
    FALSE,
    TRUE,
    ActionAtom,
    FlowAtom,
    Not,
    Release,
    Until,
    dual,
    is_nnf,
    is_positive,
    to_nnf,
    to_text,
)
from hyltl.oracle.batch import compile_formula, observation_universe, run_program
from hyltl.oracle.suites import hybrid_space
from hyltl.oracle.generators import formula_batch, random_hyltl, DEFAULT_POOL
from hyltl.parser import parse_flow_constraint, parse_hyltl, parse_jump_constraint

from helpers import neg_hyb, neg_liv


def fc(text):
    return parse_flow_constraint(text)


# -- parser -----------------------------------------------------------------

def test_eventually_is_sugar_for_until():
    assert parse_hyltl("F {x >= 21}", ["x"]) == Until(TRUE, FlowAtom(fc("x >= 21")))


def test_always_is_sugar():
    phi = parse_hyltl("G on", None, ["on"])
    assert phi == Not(Until(TRUE, Not(ActionAtom("on"))))


def test_action_atom():
    assert parse_hyltl("on", None, ["on", "off"]) == ActionAtom("on")


def test_binary_operator_without_left_operand():
    with pytest.raises(ParseError) as err:
        parse_hyltl("U {x>0}", ["x"])
    assert err.value.pos == 0


def test_undeclared_names():
    with pytest.raises(DeclarationError):
        parse_hyltl("{y > 0}", ["x"])
    with pytest.raises(DeclarationError):
        parse_hyltl("heat", None, ["on"])


def test_reserved_aux_action_needs_permission():
    with pytest.raises((DeclarationError, ParseError)):
        parse_hyltl("__T", None, None)
    assert parse_hyltl("__T", None, None, allow_aux=True) == ActionAtom("__T")


def test_precedence_and_implication():
    phi = parse_hyltl("a | b & c U d", None, None)
    assert phi == parse_hyltl("a | (b & (c U d))", None, None)
    assert parse_hyltl("a U b U c") == parse_hyltl("a U (b U c)")
    assert parse_hyltl("a -> b") == parse_hyltl("!a | b")


def test_canonical_constraint_text():
    assert fc("x'<=2*x+1").text == "x' <= 2 * x + 1"
    assert fc("x == 5") == fc("x = 5")
    assert fc("x >= 21.0").text == "x >= 21"


def test_flow_and_jump_variable_kinds():
    with pytest.raises(ParseError):
        parse_flow_constraint("x = ~x")
    with pytest.raises(ParseError):
        parse_jump_constraint("x' = 0")
    assert parse_jump_constraint("x = ~x + 1").text == "x = ~x + 1"


def test_unknown_function_and_garbage():
    with pytest.raises(ParseError):
        parse_flow_constraint("tan(x) > 0")
    with pytest.raises(ParseError):
        parse_hyltl("{x > } U on", ["x"])


# -- NNF, dual, positivity ---------------------------------------------------

def test_until_release_duality():
    a, b = ActionAtom("a"), ActionAtom("b")
    assert to_nnf(Not(Until(a, b))) == Release(Not(a), Not(b))


def test_double_negation():
    f = FlowAtom(fc("x >= 1"))
    assert to_nnf(Not(Not(f))) == f


def test_nnf_of_safety_formula():
    phi = parse_hyltl("!F({x >= 21} & X on)", ["x"], ["on", "off"])
    assert to_nnf(phi) == parse_hyltl("false R (!{x >= 21} | X !on)", ["x"], ["on", "off"])


@pytest.mark.parametrize(
    "rel,expected", [(">=", "<"), ("<", ">="), (">", "<="), ("<=", ">"), ("=", "!="), ("!=", "=")]
)
def test_dual_relations(rel, expected):
    c = fc(f"x {rel} 5")
    assert dual(c) == fc(f"x {expected} 5")
    assert dual(dual(c)) == c


def test_positivity():
    assert is_positive(to_nnf(neg_hyb()))
    assert not is_positive(to_nnf(neg_liv()))
    assert is_positive(Not(ActionAtom("on")))
    assert is_positive(TRUE) and is_positive(FALSE)


def test_is_positive_rejects_non_nnf():
    with pytest.raises(Exception):
        is_positive(Not(Until(TRUE, ActionAtom("on"))))


# -- properties ---------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _random(seed, depth=4):
    import random

    rng = random.Random(seed)
    return random_hyltl(rng, depth, list(DEFAULT_POOL[:3]), ["on", "off"])


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_nnf_idempotent(seed):
    phi = _random(seed)
    once = to_nnf(phi)
    assert is_nnf(once)
    assert to_nnf(once) == once


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_parse_print_round_trip(seed):
    phi = _random(seed, depth=5)
    assert parse_hyltl(to_text(phi), None, None) == phi


relations = st.sampled_from(["<", "<=", "=", "!=", ">=", ">"])
constants = st.integers(min_value=-50, max_value=50)


@given(relations, constants, st.sampled_from(["x", "x'", "2 * y - x"]))
def test_dual_involution(rel, k, lhs):
    c = fc(f"{lhs} {rel} {k}")
    assert dual(c) != c
    assert dual(dual(c)) == c


def test_nnf_preserves_truth_on_all_small_traces():
    mism = 0
    for phi in formula_batch(11, 30, 4, 2):
        uni, three = observation_universe(phi)
        sp = hybrid_space(uni, three, ("off", "on"))
        out = []
        for f in (phi, to_nnf(phi)):
            prog = compile_formula(f)
            out.append(run_program(prog, sp.hyltl_table(prog.atoms), sp.batch, "unroll")[:, 0])
        mism += int((out[0] != out[1]).sum())
    assert mism == 0
