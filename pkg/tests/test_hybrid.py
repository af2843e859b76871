import pytest

from hyltl.buchi import ltl_to_buchi, normalize_labels
from hyltl.discretization import make_encoding
from hyltl.errors import AutomatonError, DeclarationError, ParseError
from hyltl.formula import AUX_ACTION, TRUE
from hyltl.haformat import export_dot, export_ha, export_monitor, parse_ha, parse_monitor
from hyltl.hoa import export_bha_hoa
from hyltl.hybrid import (
    BuchiHybridAutomaton,
    Edge,
    HybridAutomaton,
    build_bha,
    compose,
    universal_bha,
)
from hyltl.oracle.semantics import bha_accepts, generated_by
from hyltl.oracle.traces import parse_trace
from hyltl.parser import parse_flow_constraint
from hyltl.pipeline import compile_property

from helpers import ACTIONS, ON_FIRST, neg_hyb, neg_liv

X21 = parse_flow_constraint("x >= 21")


@pytest.fixture
def thermostat(fixtures):
    return parse_ha((fixtures / "thermostat.ha").read_text())


@pytest.fixture
def safety():
    return compile_property(neg_hyb(), ACTIONS, ["x"], ON_FIRST).bha


def test_safety_bha_shape(safety):
    assert safety.locations == ("q1", "q2", "q3")
    assert safety.dyn == {"q1": frozenset(), "q2": frozenset({X21}), "q3": frozenset()}
    assert safety.init == {"q1", "q2"}
    assert safety.finals == {"q2", "q3"}
    user_edges = {(e.src, e.action, e.dst) for e in safety.edges if e.action != AUX_ACTION}
    assert user_edges == {
        ("q1", "on", "q1"), ("q1", "off", "q1"),
        ("q1", "on", "q2"), ("q1", "off", "q2"),
        ("q2", "on", "q3"),
        ("q3", "on", "q3"), ("q3", "off", "q3"),
    }


def test_bha_invariants(safety):
    for l in safety.locations:
        assert safety.dyn[l] == safety.origin[l].flows
    assert all(not r for r in safety.rst.values())


def test_liveness_bha_has_five_locations():
    h = compile_property(neg_liv(), ACTIONS, ["x"], ON_FIRST).bha
    assert len(h.locations) == 5
    assert len(h.finals) == 1


def test_true_gives_one_location():
    enc = make_encoding(ACTIONS)
    h = build_bha(normalize_labels(ltl_to_buchi(TRUE), enc=enc), enc, ["x"])
    assert h.locations == ("q0",)
    assert h.dyn["q0"] == frozenset()
    assert {e.action for e in h.edges} == {"off", "on", AUX_ACTION}
    assert all(e.src == e.dst == "q0" for e in h.edges)
    assert h.init == h.finals == {"q0"}


def test_build_bha_rejects_raw_labels():
    from hyltl.buchi import BuchiAutomaton, Transition
    from hyltl.parser import parse_ltl

    enc = make_encoding(ACTIONS, ON_FIRST)
    raw = BuchiAutomaton(("s",), "s", (Transition("s", parse_ltl("b0 | b1"), "s"),), {"s"})
    with pytest.raises(AutomatonError):
        build_bha(raw, enc, ["x"])


def test_automaton_validation():
    with pytest.raises(AutomatonError):
        HybridAutomaton(("a",), ("x",), ("on",), (Edge("a", "on", "b"),), {}, {}, {"a"})
    with pytest.raises(AutomatonError):
        HybridAutomaton(("a",), ("x",), ("on",), (Edge("a", "off", "a"),), {}, {}, {"a"})
    with pytest.raises(DeclarationError):
        HybridAutomaton(("a",), ("x",), ("on",), (), {"a": {parse_flow_constraint("y > 0")}}, {}, {"a"})
    with pytest.raises(AutomatonError):
        BuchiHybridAutomaton(("a",), ("x",), ("on",), (), {}, {}, {"a"}, {"b"})


# -- composition ---------------------------------------------------------------

def test_product_with_thermostat(thermostat, safety, fixtures):
    product = compose(thermostat, safety)
    assert len(product.locations) == 6 <= len(thermostat.locations) * len(safety.locations)
    assert product == parse_ha((fixtures / "thermostat_product.ha").read_text())


def test_variable_mismatch(thermostat):
    prop = universal_bha(["y"], ["on"])
    with pytest.raises(DeclarationError):
        compose(thermostat, prop)


def test_unknown_property_action(thermostat):
    with pytest.raises(DeclarationError):
        compose(thermostat, universal_bha(["x"], ["heat"]))


def test_universal_property_is_neutral(thermostat):
    # resets of the system are not evaluated by the abstraction
    u = universal_bha(["x"], thermostat.actions)
    product = compose(thermostat, u)
    traces = [
        "[{x >= 18}] on ( [{x <= 22}] off [{x >= 18}] on )",
        "( [{x >= 18}] on [{x >= 18}] on )",
        "( [{}] on [{x <= 22}] off )",
        "[{x >= 18} {}] on ( [{x <= 22}] off [{x >= 18}] on )",
    ]
    for text in traces:
        alpha = parse_trace(text, [parse_flow_constraint("x >= 18"), parse_flow_constraint("x <= 22"),
                                   parse_flow_constraint("x' = -0.1 * x"), parse_flow_constraint("x' = 5 - 0.1 * x")])
        assert generated_by(product, alpha) == generated_by(thermostat, alpha), text


def test_product_language_is_intersection(thermostat, safety):
    product = compose(thermostat, safety)
    uni = [parse_flow_constraint(t) for t in ("x >= 18", "x <= 22", "x >= 21", "x' = -0.1 * x", "x' = 5 - 0.1 * x")]
    cool = "{x >= 18, x' = -0.1 * x}"
    hot = "{x >= 18, x >= 21, x' = -0.1 * x}"
    heat = "{x <= 22, x' = 5 - 0.1 * x}"
    for text in (
        f"[{hot}] on ( [{heat}] off [{cool}] on )",
        f"[{cool}] on ( [{heat}] off [{cool}] on )",
        f"[{cool}] T ( [{hot}] on [{heat}] off )",
        f"( [{cool}] on [{heat}] off )",
    ):
        alpha = parse_trace(text, uni)
        want = generated_by(thermostat_with_t(thermostat), alpha) and bha_accepts(safety, alpha)
        assert bha_accepts(product, alpha, ignore_resets=True) == want, text


def thermostat_with_t(h):
    from hyltl.hybrid import graft_actions

    return graft_actions(h, [AUX_ACTION])


# -- formats -------------------------------------------------------------------

def test_native_round_trip(thermostat, safety):
    for h in (thermostat, safety, compose(thermostat, safety)):
        assert parse_ha(export_ha(h)) == h
    assert not isinstance(thermostat, BuchiHybridAutomaton)


def test_native_parse_errors_carry_positions():
    bad = "vars: x\nactions: on\nlocation a { flow: x >; }\ninit: a\n"
    with pytest.raises(ParseError) as err:
        parse_ha(bad)
    assert err.value.pos == bad.index(";")
    with pytest.raises(ParseError) as err:
        parse_ha("vars: x\nactions: on\nedge a => b\n")
    assert err.value.pos is not None
    with pytest.raises(ParseError):
        parse_ha("vars: x\nlocation a { }\n")


def test_dot_output(safety):
    dot = export_dot(safety)
    boxes = [l for l in dot.splitlines() if "[label=" in l and "->" not in l]
    assert len(boxes) == 3
    assert sum("peripheries=2" in l for l in boxes) == 2
    assert "x >= 21" in dot and '"T, off, on"' in dot


def test_monitor_round_trip(thermostat, safety):
    product = compose(thermostat, safety)
    text = export_monitor(product)
    assert "automaton monitor" in text and "synclabs: __T, off, on;" in text
    assert "wait {x' == -0.1 * x}" in text
    assert parse_monitor(text) == product


def test_monitor_needs_locations():
    empty = BuchiHybridAutomaton((), ("x",), ("on",), (), {}, {}, frozenset(), frozenset())
    with pytest.raises(AutomatonError):
        export_monitor(empty)


def test_bha_hoa_skeleton(safety):
    text = export_bha_hoa(safety)
    lines = text.splitlines()
    assert sum(l.startswith("State:") for l in lines) == 3
    assert sum(l.startswith("Start:") for l in lines) == 2
    assert sum(l.startswith("  [") for l in lines) == len(safety.edges)
    assert 'AP: 3 "T" "off" "on"' in text
