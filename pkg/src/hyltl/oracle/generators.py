"""Seeded random formulas and automata for the property suites."""

from __future__ import annotations

import random
from typing import Sequence

from ..buchi import BuchiAutomaton, Cocube, Transition
from ..formula import (
    ActionAtom,
    And,
    BitAtom,
    FlowAtom,
    FlowConstraint,
    Formula,
    Next,
    Not,
    Or,
    Release,
    TRUE,
    FALSE,
    Until,
    always,
    eventually,
    flow_constraints,
    to_nnf,
)
from ..parser import parse_flow_constraint

DEFAULT_POOL = tuple(
    parse_flow_constraint(t) for t in ("x >= 21", "x < 18", "x >= 18", "x' <= 0", "y > 1")
)
ACTIONS = ("on", "off")


def random_hyltl(
    rng: random.Random,
    depth: int,
    flows: Sequence[FlowConstraint],
    actions: Sequence[str],
    negation: str = "any",
) -> Formula:
    """Random formula of depth at most ``depth``.

    ``negation``: ``"any"`` puts negations anywhere, ``"positive"`` only
    above action atoms (output is in the positive fragment and in NNF).
    """

    def leaf():
        r = rng.random()
        if r < 0.05:
            return TRUE
        if r < 0.08:
            return FALSE
        if r < 0.55 and flows:
            return FlowAtom(rng.choice(flows))
        atom = ActionAtom(rng.choice(actions))
        if negation == "positive" and rng.random() < 0.3:
            return Not(atom)
        return atom

    def go(d):
        if d <= 1 or rng.random() < 0.2:
            return leaf()
        kinds = ["and", "or", "U", "R", "X", "F", "G"]
        if negation == "any":
            kinds.append("not")
        k = rng.choice(kinds)
        if k == "not":
            return Not(go(d - 1))
        if k == "X":
            return Next(go(d - 1))
        if k == "F":
            return eventually(go(d - 1))
        if k == "G":
            if negation == "positive":
                return Release(FALSE, go(d - 1))
            return always(go(d - 1))
        left, right = go(d - 1), go(d - 1)
        return {"and": And, "or": Or, "U": Until, "R": Release}[k](left, right)

    return go(depth)


def pick_flows(rng: random.Random, max_atoms: int, pool: Sequence[FlowConstraint] = DEFAULT_POOL) -> list:
    k = rng.randint(1, max_atoms)
    return rng.sample(list(pool), k)


def formula_batch(seed: int, count: int, depth: int, max_flows: int, negation: str = "any",
                  actions: Sequence[str] = ACTIONS, nnf: bool = False) -> list[Formula]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        phi = random_hyltl(rng, depth, pick_flows(rng, max_flows), actions, negation)
        if nnf:
            phi = to_nnf(phi)
        if len(flow_constraints(phi)) <= max_flows:
            out.append(phi)
    return out


def random_positive_ltl(rng: random.Random, depth: int, flows: Sequence[FlowConstraint], n_bits: int) -> Formula:
    """LTL over flow atoms and bits; flow atoms never under a negation."""

    def leaf():
        if rng.random() < 0.5 and flows:
            return FlowAtom(rng.choice(flows))
        b = BitAtom(rng.randrange(n_bits))
        return Not(b) if rng.random() < 0.4 else b

    def go(d):
        if d <= 1 or rng.random() < 0.2:
            return leaf()
        k = rng.choice(["and", "or", "U", "R", "X", "F", "G"])
        if k == "X":
            return Next(go(d - 1))
        if k == "F":
            return Until(TRUE, go(d - 1))
        if k == "G":
            return Release(FALSE, go(d - 1))
        return {"and": And, "or": Or, "U": Until, "R": Release}[k](go(d - 1), go(d - 1))

    return go(depth)


def random_buchi(rng: random.Random, max_states: int, atoms: Sequence[Formula] = (BitAtom(0), BitAtom(1))) -> BuchiAutomaton:
    """Random automaton with cocube labels; some labels are contradictory
    so that emptiness has to look at satisfiability."""
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    trans = []
    density = rng.uniform(0.05, 0.35)
    for a in states:
        for b in states:
            if rng.random() < density:
                pos, neg = set(), set()
                for atom in atoms:
                    r = rng.random()
                    if r < 0.25:
                        pos.add(atom)
                    elif r < 0.5:
                        neg.add(atom)
                if rng.random() < 0.08 and atoms:
                    clash = rng.choice(list(atoms))
                    pos.add(clash)
                    neg.add(clash)
                trans.append(Transition(a, Cocube(frozenset(pos), frozenset(neg)), b))
    finals = {q for q in states if rng.random() < 0.3}
    return BuchiAutomaton(tuple(states), states[0], tuple(trans), frozenset(finals))
