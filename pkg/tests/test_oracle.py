import os
import subprocess
import sys

import numpy as np
import pytest

from hyltl.buchi import BuchiAutomaton, Cocube, Transition, ltl_to_buchi
from hyltl.discretization import DiscreteWord, gamma, make_encoding
from hyltl.errors import ParseError, TraceError
from hyltl.formula import FALSE, TRUE, BitAtom, FlowAtom, to_nnf
from hyltl.hybrid import universal_bha
from hyltl.oracle.batch import (
    compile_formula,
    observation_universe,
    run_automaton,
    run_program,
)
from hyltl.oracle.emptiness import buchi_empty, buchi_empty_scc
from hyltl.oracle.semantics import bha_accepts, eval_hyltl, eval_ltl_lasso
from hyltl.oracle.suites import emptiness_suite, hybrid_space
from hyltl.oracle.traces import format_trace, parse_trace, restrict
from hyltl.parser import parse_flow_constraint, parse_hyltl
from hyltl.pipeline import compile_property

from helpers import ACTIONS, ON_FIRST, neg_hyb

X21 = parse_flow_constraint("x >= 21")
B0, B1 = BitAtom(0), BitAtom(1)


# -- HyLTL truth -----------------------------------------------------------------

def test_action_false_at_first_position():
    alpha = parse_trace("( [{x >= 21}] on )")
    for a in ("on", "off"):
        assert not eval_hyltl(alpha, parse_hyltl(a))
    assert eval_hyltl(alpha, parse_hyltl("on"), position=2)


def test_flow_atom_and_witness():
    both = parse_trace("( [{x >= 21} {x >= 21}] on )")
    mixed = parse_trace("( [{x >= 21} {}] on )")
    f = parse_hyltl("{x >= 21}")
    assert eval_hyltl(both, f)
    assert not eval_hyltl(mixed, f)
    assert eval_hyltl(mixed, parse_hyltl("!{x >= 21}"))
    assert eval_hyltl(mixed, parse_hyltl("{x < 21}")) is False  # dual needs every point
    assert eval_hyltl(parse_trace("( [{}] on )", [X21]), parse_hyltl("{x < 21}"))


def test_safety_counterexample_trace():
    alpha = parse_trace("[{x >= 21}] on ( [{x >= 21}] off )")
    assert eval_hyltl(alpha, neg_hyb())


def test_constraint_outside_universe():
    with pytest.raises(TraceError):
        eval_hyltl(parse_trace("( [{x >= 21}] on )"), parse_hyltl("{y > 1}"))


# -- restriction ---------------------------------------------------------------

def test_restrict_identity():
    alpha = parse_trace("[{x >= 21}] on ( [{}] off [{x >= 21}] on )", [X21])
    assert restrict(alpha, ACTIONS) == alpha.normalized()


def test_restrict_concatenates():
    beta = parse_trace("[{x >= 21}] T [{}] on ( [{}] off )", [X21])
    alpha = restrict(beta, ACTIONS)
    assert alpha.stem[0].trajectory == (frozenset({X21}), frozenset())
    assert alpha.stem[0].action == "on"


def test_restrict_aux_loop_is_error():
    with pytest.raises(TraceError):
        restrict(parse_trace("[{}] on ( [{}] T )", [X21]), ACTIONS)


def test_trace_literal_round_trip_and_errors():
    text = "[{x >= 21} {}] on ( [{}] T )"
    assert format_trace(parse_trace(text)) == text
    with pytest.raises(ParseError):
        parse_trace("[{x >= 21}] on")
    with pytest.raises(ParseError):
        parse_trace("( [{x >= 21}] )")


# -- discrete words --------------------------------------------------------------

def test_lasso_ltl():
    enc = make_encoding(ACTIONS, ON_FIRST)
    g = gamma(to_nnf(neg_hyb()), enc)
    f = FlowAtom(X21)
    yes = DiscreteWord((frozenset({f}),), (frozenset({B0, f}),))
    no = DiscreteWord((frozenset(),), (frozenset({B0}),))
    assert eval_ltl_lasso(yes, g)
    assert not eval_ltl_lasso(no, g)
    for w in (yes, no):
        assert eval_ltl_lasso(w, TRUE) and not eval_ltl_lasso(w, FALSE)


# -- BHA acceptance -------------------------------------------------------------

def test_universal_bha_accepts_everything():
    u = universal_bha(["x"], ["off", "on", "__T"])
    for text in ("( [{}] on )", "[{x >= 21}] T ( [{}] off [{x >= 21}] on )"):
        assert bha_accepts(u, parse_trace(text, [X21]))


def test_safety_bha_runs():
    h = compile_property(neg_hyb(), ACTIONS, ["x"], ON_FIRST).bha
    assert bha_accepts(h, parse_trace("[{x >= 21}] on ( [{x >= 21}] off )"))
    for text in ("[{}] on ( [{} {}] off [{}] on )", "( [{}] on )", "[{} {}] T ( [{}] on )"):
        assert not bha_accepts(h, parse_trace(text, [X21]))


def test_resets_must_be_trivial(fixtures):
    from hyltl.haformat import parse_ha
    from hyltl.hybrid import as_buchi

    h = as_buchi(parse_ha((fixtures / "thermostat.ha").read_text()))
    alpha = parse_trace("( [{x >= 18}] on [{x <= 22}] off )")
    from hyltl.errors import AutomatonError

    with pytest.raises(AutomatonError):
        bha_accepts(h, alpha)


# -- emptiness --------------------------------------------------------------------

def test_emptiness_basics():
    empty = BuchiAutomaton(("a",), "a", (Transition("a", Cocube(frozenset({B0}), frozenset({B0})), "a"),), {"a"})
    assert buchi_empty(empty) and buchi_empty_scc(empty)
    assert not buchi_empty(ltl_to_buchi(TRUE))
    assert buchi_empty(ltl_to_buchi(FALSE))


def test_nested_dfs_matches_scc():
    rep = emptiness_suite(count=300, max_states=8, seed=17)
    assert rep.ok, rep.mismatches[:2]


# -- kernels ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def kernel_case():
    enc = make_encoding(ACTIONS, ON_FIRST)
    phi = to_nnf(neg_hyb())
    uni, three = observation_universe(phi)
    sp = hybrid_space(uni, three, ACTIONS + ("__T",))
    prog = compile_formula(phi)
    h = compile_property(phi, ACTIONS, ["x"], ON_FIRST).bha
    return enc, phi, sp, prog, h


@pytest.mark.parametrize("use_numba", [True, False])
def test_kernels_agree_with_scalar_semantics(kernel_case, use_numba):
    enc, phi, sp, prog, h = kernel_case
    table = sp.hyltl_table(prog.atoms)
    unroll = run_program(prog, table, sp.batch, "unroll", use_numba)[:, 0]
    backward = run_program(prog, table, sp.batch, "backward", use_numba)[:, 0]
    acc = run_automaton(sp.bha_table(h), sp.batch, use_numba)
    assert (unroll == backward).all() and (unroll == acc).all()
    idx = np.random.default_rng(0).choice(len(sp), 300, replace=False)
    for i in idx:
        alpha = sp.trace(int(i))
        assert unroll[i] == eval_hyltl(alpha, phi)
        assert acc[i] == bha_accepts(h, alpha)


def test_numba_and_numpy_paths_identical(kernel_case):
    enc, phi, sp, prog, h = kernel_case
    g = gamma(phi, enc)
    gp = compile_formula(g)
    from hyltl.oracle.batch import letter_table

    table = letter_table(gp.atoms, sp.sigma_letters(enc))
    a = run_program(gp, table, sp.batch, "backward", True)
    b = run_program(gp, table, sp.batch, "backward", False)
    assert np.array_equal(a, b)


def test_env_flag_selects_numpy():
    code = "from hyltl.oracle._jit import numba_enabled; print(numba_enabled())"
    env = dict(os.environ, HYLTL_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
