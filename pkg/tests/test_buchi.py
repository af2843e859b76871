import itertools
import random

import numpy as np
import pytest

from hyltl.buchi import BuchiAutomaton, Cocube, Transition, ltl_to_buchi, normalize_labels
from hyltl.discretization import gamma, make_encoding
from hyltl.errors import FormulaError, ParseError, UnsupportedError
from hyltl.formula import FALSE, TRUE, BitAtom, FlowAtom, to_nnf
from hyltl.hoa import export_hoa, import_hoa
from hyltl.oracle.batch import WordSpace, buchi_table, compile_formula, letter_table, run_automaton, run_program
from hyltl.oracle.emptiness import buchi_empty
from hyltl.oracle.generators import DEFAULT_POOL, random_positive_ltl
from hyltl.oracle.semantics import buchi_accepts
from hyltl.oracle.suites import automaton_suite
from hyltl.parser import parse_flow_constraint, parse_ltl

from helpers import ACTIONS, ON_FIRST, neg_hyb

B0, B1 = BitAtom(0), BitAtom(1)
F = FlowAtom(parse_flow_constraint("x >= 21"))
G = FlowAtom(parse_flow_constraint("y > 1"))


def letters_over(atoms):
    atoms = list(atoms)
    return [frozenset(c) for r in range(len(atoms) + 1) for c in itertools.combinations(atoms, r)]


def hyb_gamma():
    return gamma(to_nnf(neg_hyb()), make_encoding(ACTIONS, ON_FIRST))


def edge_set(aut):
    return {(t.src, str(t.label), t.dst) for t in aut.transitions}


def test_true_is_one_final_state():
    aut = ltl_to_buchi(TRUE)
    assert aut.states == ("q0",) and aut.finals == {"q0"}
    assert edge_set(aut) == {("q0", "true", "q0")}


def test_false_is_empty():
    assert buchi_empty(ltl_to_buchi(FALSE))


def test_safety_automaton_edges():
    aut = ltl_to_buchi(hyb_gamma())
    assert aut.states == ("q0", "q1", "q2", "q3")
    assert aut.initial == "q0"
    assert aut.finals == {"q2", "q3"}
    assert edge_set(aut) == {
        ("q0", "!b0 & !b1", "q1"),
        ("q0", '!b0 & !b1 & "x >= 21"', "q2"),
        ("q1", "true", "q1"),
        ("q1", '"x >= 21"', "q2"),
        ("q2", "b0 & !b1", "q3"),
        ("q3", "true", "q3"),
    }


def test_safety_automaton_language():
    rep = automaton_suite([hyb_gamma()], letters_over([B0, B1, F]))
    assert rep.checks > 1000 and rep.ok, rep.mismatches


def test_random_formulas_against_lasso_semantics():
    rng = random.Random(2)
    flows = [FlowAtom(c) for c in DEFAULT_POOL[:1]]
    phis = [random_positive_ltl(rng, 4, list(DEFAULT_POOL[:1]), 2) for _ in range(40)]
    phis += [parse_ltl("G F b0"), parse_ltl("F G !b1"), parse_ltl("(b0 U b1) R !b0"), parse_ltl("!(b0 U X b1)")]
    rep = automaton_suite(phis, letters_over([B0, B1] + flows))
    assert rep.ok, rep.mismatches[:3]


def test_scalar_acceptance_agrees_with_batch():
    aut = ltl_to_buchi(hyb_gamma())
    ws = WordSpace(letters_over([B0, B1, F]), 1, 2)
    batch = run_automaton(buchi_table(aut, ws.letters), ws.batch)
    scalar = np.array([buchi_accepts(aut, ws.word(i)) for i in range(len(ws))])
    assert (batch == scalar).all()


# -- normalization -------------------------------------------------------------

def single(label):
    return BuchiAutomaton(("s",), "s", (Transition("s", label, "s"),), {"s"})


def labels(aut):
    return sorted((t.label for t in aut.transitions), key=Cocube.sort_key)


def test_cocube_label_untouched():
    cube = Cocube(frozenset({F}), frozenset({B0}))
    assert labels(normalize_labels(single(parse_ltl('"x >= 21" & !b0')))) == [cube]


def test_disjunction_splits():
    out = normalize_labels(single(parse_ltl('"x >= 21" | "y > 1"')))
    assert labels(out) == sorted([Cocube(frozenset({F})), Cocube(frozenset({G}))], key=Cocube.sort_key)


def test_negated_flow_deleted_or_rejected():
    aut = single(parse_ltl('"x >= 21" & !"y > 1"'))
    assert labels(normalize_labels(aut)) == [Cocube(frozenset({F}))]
    with pytest.raises(FormulaError):
        normalize_labels(aut, positive_expected=False)


def test_contradictions_dropped():
    aut = single(parse_ltl("(b0 & !b0) | b1"))
    assert labels(normalize_labels(aut)) == [Cocube(frozenset({B1}))]


def test_impossible_patterns_dropped():
    enc = make_encoding(["a"])  # a = 1, __pad_0 = 2, T = 3
    assert len(normalize_labels(single(parse_ltl("b0 & !b1")), enc=enc).transitions) == 1
    assert len(normalize_labels(single(parse_ltl("!b0 & !b1")), enc=enc).transitions) == 1
    # only the padding action carries pattern 2, and it never labels a step
    assert normalize_labels(single(parse_ltl("!b0 & b1")), enc=enc).transitions == ()


def test_normalization_preserves_positive_languages():
    rng = random.Random(8)
    pool = list(DEFAULT_POOL[:2])
    letters = letters_over([B0, B1] + [FlowAtom(c) for c in pool])
    ws = WordSpace(letters, 1, 2)
    for _ in range(25):
        phi = random_positive_ltl(rng, 3, pool, 2)
        raw = ltl_to_buchi(phi)
        # split labels without deleting anything, then delete negated flows
        prog = compile_formula(phi)
        truth = run_program(prog, letter_table(prog.atoms, ws.letters), ws.batch)[:, 0]
        after = run_automaton(buchi_table(normalize_labels(raw), ws.letters), ws.batch)
        assert (truth == after).all(), phi


# -- HOA -------------------------------------------------------------------------

UNIVERSAL = """HOA: v1
States: 1
Start: 0
AP: 0
Acceptance: 1 Inf(0)
--BODY--
State: 0 {0}
[t] 0
--END--
"""


def test_hoa_universal():
    aut = import_hoa(UNIVERSAL)
    assert len(aut.states) == 1 and aut.finals == set(aut.states)
    assert [t.label for t in aut.transitions] == [Cocube()]


def test_hoa_generalized_rejected():
    text = UNIVERSAL.replace("Acceptance: 1 Inf(0)", "Acceptance: 2 Inf(0)&Inf(1)")
    with pytest.raises(UnsupportedError):
        import_hoa(text)


def test_hoa_multiple_initial_rejected():
    text = UNIVERSAL.replace("Start: 0", "Start: 0\nStart: 0")
    with pytest.raises(UnsupportedError):
        import_hoa(text)


def test_hoa_transition_marks_rejected():
    with pytest.raises(UnsupportedError):
        import_hoa(UNIVERSAL.replace("[t] 0", "[t] 0 {0}"))


def test_hoa_syntax_error_has_position():
    with pytest.raises(ParseError) as err:
        import_hoa(UNIVERSAL.replace("[t] 0", "[t & ] 0"))
    assert err.value.pos is not None


def test_hoa_round_trip():
    aut = ltl_to_buchi(hyb_gamma())
    back = import_hoa(export_hoa(aut))
    assert back == aut


# Same language as the safety automaton, numbered and labelled the way an
# external translator might print it.
EXTERNAL = """HOA: v1
name: "external"
States: 4
Start: 3
AP: 3 "x >= 21" "b1" "b0"
acc-name: Buchi
Acceptance: 1 Inf(0)
properties: trans-labels explicit-labels state-acc
--BODY--
State: 0 {0}
[t] 0
State: 1 {0}
[2&!1] 0
State: 2
[t] 2
[0] 1
State: 3 /* init */
[!2 & !1] 2
[(0 & !1) & !2] 1
--END--
"""


def test_external_hoa_passes_oracle():
    aut = import_hoa(EXTERNAL)
    letters = letters_over([B0, B1, F])
    ws = WordSpace(letters, 2, 2)
    prog = compile_formula(hyb_gamma())
    truth = run_program(prog, letter_table(prog.atoms, ws.letters), ws.batch)[:, 0]
    acc = run_automaton(buchi_table(aut, ws.letters), ws.batch)
    assert (truth == acc).all()
