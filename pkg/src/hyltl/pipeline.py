"""End-to-end translation of a property formula into a BHA."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .buchi import BuchiAutomaton, ltl_to_buchi, normalize_labels
from .discretization import ActionEncoding, gamma, make_encoding
from .errors import DeclarationError
from .formula import AUX_ACTION, Formula, action_names, flow_constraints, is_positive, simplify, size, to_nnf
from .hybrid import BuchiHybridAutomaton, build_bha
from .pi import pi


@dataclass
class Compiled:
    formula: Formula
    nnf: Formula
    positive: bool
    hyltl_plus: Formula  # the NNF itself when already positive, else pi of it
    encoding: ActionEncoding
    ltl: Formula
    buchi: BuchiAutomaton
    normalized: BuchiAutomaton
    bha: BuchiHybridAutomaton
    log: list = field(default_factory=list)


def encoding_for(phi: Formula, actions: Iterable[str] | None, pinned: Mapping[str, int] | None = None) -> ActionEncoding:
    used = action_names(phi) - {AUX_ACTION}
    declared = set(actions) if actions is not None else used
    if not used <= declared:
        raise DeclarationError(f"formula uses undeclared actions {sorted(used - declared)}")
    if not declared:
        raise DeclarationError("no actions declared and the formula mentions none")
    return make_encoding(declared, pinned)


def compile_property(
    phi: Formula,
    actions: Iterable[str] | None = None,
    variables: Iterable[str] | None = None,
    pinned: Mapping[str, int] | None = None,
    external: BuchiAutomaton | None = None,
) -> Compiled:
    """parse result -> NNF -> (pi unless positive) -> gamma -> automaton ->
    normalized labels -> BHA. ``external`` replaces the internal LTL
    translation (for automata imported from HOA)."""
    log = []
    nnf = to_nnf(phi)
    positive = is_positive(nnf)
    log.append(f"nnf: size {size(nnf)}, positive={positive}")
    if positive:
        plus = nnf
        log.append("pi: skipped (formula already positive)")
    else:
        plus = simplify(pi(nnf))
        log.append(f"pi: applied, size {size(plus)}")
    enc = encoding_for(phi, actions, pinned)
    ltl = gamma(plus, enc)
    log.append(f"gamma: {enc.n} bits, size {size(ltl)}")
    if external is None:
        aut = ltl_to_buchi(ltl)
        log.append(f"ba: {len(aut.states)} states, {len(aut.transitions)} transitions")
    else:
        aut = external
        log.append(f"ba: imported, {len(aut.states)} states")
    norm = normalize_labels(aut, positive_expected=True, enc=enc)
    log.append(f"normalize: {len(norm.transitions)} transitions")
    if variables is None:
        variables = sorted({v for c in flow_constraints(plus) for v in c.variable_names()})
    h = build_bha(norm, enc, variables)
    log.append(f"bha: {len(h.locations)} locations, {len(h.edges)} edges, {len(h.finals)} final")
    return Compiled(phi, nnf, positive, plus, enc, ltl, aut, norm, h, log)
