"""Hybrid automata, their Büchi variant, the automaton-to-BHA construction
and parallel composition."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .buchi import BuchiAutomaton, Cocube
from .discretization import ActionEncoding
from .errors import AutomatonError, DeclarationError
from .formula import AUX_ACTION, FlowConstraint, JumpConstraint
from .parser import parse_jump_constraint


@dataclass(frozen=True, order=True)
class Edge:
    src: str
    action: str
    dst: str

    def __str__(self):
        return f"{self.src} -{self.action}-> {self.dst}"


@dataclass(frozen=True)
class BhaLocation:
    """Origin of a constructed location: automaton state and flow set."""

    state: str
    flows: frozenset


def _constraint_set(items) -> frozenset:
    return frozenset(items)


@dataclass(frozen=True, eq=True)
class HybridAutomaton:
    """``<Loc, X, A, Edg, Dyn, Rst, Init>``.

    Components are stored canonically sorted, so two automata built from
    the same sets compare equal. ``dyn`` and ``rst`` are total mappings;
    an empty constraint set means true.
    """

    locations: tuple
    variables: tuple
    actions: tuple
    edges: tuple
    dyn: Mapping
    rst: Mapping
    init: frozenset

    def __post_init__(self):
        locs = tuple(sorted(set(self.locations)))
        if len(locs) != len(self.locations):
            raise AutomatonError("duplicate location names")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "variables", tuple(sorted(set(self.variables))))
        object.__setattr__(self, "actions", tuple(sorted(set(self.actions))))
        edges = tuple(sorted(set(self.edges)))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "init", frozenset(self.init))
        lset = set(locs)
        dyn = {l: _constraint_set(self.dyn.get(l, ())) for l in locs}
        unknown = set(self.dyn) - lset
        if unknown:
            raise AutomatonError(f"flow for unknown location {sorted(unknown)[0]!r}")
        rst = {e: _constraint_set(self.rst.get(e, ())) for e in edges}
        if set(self.rst) - set(edges):
            raise AutomatonError("reset for an edge that does not exist")
        object.__setattr__(self, "dyn", dyn)
        object.__setattr__(self, "rst", rst)
        for e in edges:
            if e.src not in lset or e.dst not in lset:
                raise AutomatonError(f"edge {e} leaves the location set")
            if e.action not in self.actions:
                raise AutomatonError(f"edge {e} uses undeclared action {e.action!r}")
        if not self.init <= lset:
            raise AutomatonError("initial locations must be locations")
        xs = set(self.variables)
        for l, cs in dyn.items():
            for c in cs:
                if not isinstance(c, FlowConstraint):
                    raise AutomatonError(f"flow of {l} holds a non-flow constraint {c}")
                if not c.variable_names() <= xs:
                    raise DeclarationError(f"flow {c} of {l} mentions an undeclared variable")
        for e, cs in rst.items():
            for c in cs:
                if not isinstance(c, JumpConstraint):
                    raise AutomatonError(f"reset of {e} holds a non-jump constraint {c}")
                if not c.variable_names() <= xs:
                    raise DeclarationError(f"reset {c} of {e} mentions an undeclared variable")

    __hash__ = None

    @cached_property
    def out(self) -> dict:
        table = {l: [] for l in self.locations}
        for e in self.edges:
            table[e.src].append(e)
        return table

    def reachable(self) -> set:
        seen = set(self.init)
        todo = deque(sorted(self.init))
        while todo:
            l = todo.popleft()
            for e in self.out[l]:
                if e.dst not in seen:
                    seen.add(e.dst)
                    todo.append(e.dst)
        return seen


@dataclass(frozen=True, eq=True)
class BuchiHybridAutomaton(HybridAutomaton):
    finals: frozenset = frozenset()
    origin: Mapping = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "finals", frozenset(self.finals))
        if not self.finals <= set(self.locations):
            raise AutomatonError("final locations must be locations")

    __hash__ = None

    def restricted_to(self, keep: Iterable[str]) -> "BuchiHybridAutomaton":
        keep = set(keep)
        edges = [e for e in self.edges if e.src in keep and e.dst in keep]
        return BuchiHybridAutomaton(
            tuple(keep),
            self.variables,
            self.actions,
            tuple(edges),
            {l: self.dyn[l] for l in keep},
            {e: self.rst[e] for e in edges},
            self.init & keep,
            self.finals & keep,
            None if self.origin is None else {l: o for l, o in self.origin.items() if l in keep},
        )


def as_buchi(h: HybridAutomaton, finals: Iterable[str] | None = None) -> BuchiHybridAutomaton:
    """View a plain automaton as a BHA (all locations final by default)."""
    if isinstance(h, BuchiHybridAutomaton) and finals is None:
        return h
    return BuchiHybridAutomaton(
        h.locations, h.variables, h.actions, h.edges, h.dyn, h.rst, h.init,
        frozenset(h.locations if finals is None else finals),
    )


# ---------------------------------------------------------------------------
# automaton to BHA


def _bits_consistent(cube: Cocube, pattern: int) -> bool:
    on, off = cube.bits
    return all(pattern >> i & 1 for i in on) and not any(pattern >> i & 1 for i in off)


def build_bha(aut: BuchiAutomaton, enc: ActionEncoding, variables: Iterable[str]) -> BuchiHybridAutomaton:
    """Hybrid automaton accepting the traces whose abstraction ``aut`` accepts.

    A location is a pair (state, C) where C is the set of flow atoms on a
    transition into the state; its flow is C. A transition from q yields
    an edge labelled a out of every location of q whenever the label's
    bits are consistent with b(a); initial locations come from q0's
    transitions consistent with the all-false bits. Resets are true and
    only locations reachable from the initial ones are kept.
    """
    if not aut.is_normalized:
        raise AutomatonError("build_bha needs cocube labels without negated flow atoms")
    variables = tuple(variables)
    actions = enc.automaton_actions
    patterns = {a: enc.pattern(a) for a in actions}

    def loc_of(t):
        return (t.dst, frozenset(a.constraint for a in t.label.flows))

    init = {loc_of(t) for t in aut.out[aut.initial] if _bits_consistent(t.label, 0)}
    seen = set(init)
    todo = deque(sorted(init, key=_loc_key))
    edges = set()
    while todo:
        q, c = todo.popleft()
        for t in aut.out[q]:
            target = loc_of(t)
            for a in actions:
                if _bits_consistent(t.label, patterns[a]):
                    edges.add(((q, c), a, target))
                    if target not in seen:
                        seen.add(target)
                        todo.append(target)

    names = _location_names(seen)
    locs = tuple(names[l] for l in seen)
    return BuchiHybridAutomaton(
        locs,
        variables,
        actions,
        tuple(Edge(names[s], a, names[d]) for s, a, d in edges),
        {names[l]: l[1] for l in seen},
        {},
        frozenset(names[l] for l in init),
        frozenset(names[l] for l in seen if l[0] in aut.finals),
        {names[l]: BhaLocation(l[0], l[1]) for l in seen},
    )


def _loc_key(loc):
    q, c = loc
    return (q, -len(c), sorted(x.text for x in c))


def _location_names(locs) -> dict:
    """``q`` when the state has one location, ``q_1, q_2, ...`` otherwise."""
    by_state: dict = {}
    for l in sorted(locs, key=_loc_key):
        by_state.setdefault(l[0], []).append(l)
    names = {}
    for q, group in by_state.items():
        if len(group) == 1:
            names[group[0]] = q
        else:
            for k, l in enumerate(group, 1):
                names[l] = f"{q}_{k}"
    return names


# ---------------------------------------------------------------------------
# composition


def stutter_reset(variables: Iterable[str]) -> frozenset:
    """``x = ~x`` for every variable: the jump leaves the state unchanged."""
    return frozenset(parse_jump_constraint(f"{x} = ~{x}") for x in variables)


def graft_actions(sys: HybridAutomaton, extra: Iterable[str]) -> HybridAutomaton:
    """Add each action of ``extra`` missing from ``sys`` as a stutter
    self-loop on every location."""
    missing = sorted(set(extra) - set(sys.actions))
    if not missing:
        return sys
    stay = stutter_reset(sys.variables)
    new_edges = [Edge(l, a, l) for l in sys.locations for a in missing]
    rst = dict(sys.rst)
    rst.update({e: stay for e in new_edges})
    return HybridAutomaton(
        sys.locations, sys.variables, sys.actions + tuple(missing), sys.edges + tuple(new_edges),
        sys.dyn, rst, sys.init,
    )


def product_name(l1: str, l2: str) -> str:
    return f"{l1}__{l2}"


def compose(sys: HybridAutomaton, prop: BuchiHybridAutomaton) -> BuchiHybridAutomaton:
    """Synchronous product on shared actions, restricted to reachable pairs.

    T and padding actions of the property are first added to the system as
    stutter self-loops. Flows and resets are unions; a pair is final when
    its property component is.
    """
    if set(sys.variables) != set(prop.variables):
        raise DeclarationError(
            f"variable sets differ: system {list(sys.variables)}, property {list(prop.variables)}"
        )
    user_prop = {a for a in prop.actions if a != AUX_ACTION and not a.startswith("__pad_")}
    if not user_prop <= set(sys.actions):
        raise DeclarationError(f"property actions {sorted(user_prop - set(sys.actions))} unknown to the system")
    sys = graft_actions(sys, prop.actions)
    init = {(a, b) for a in sys.init for b in prop.init}
    seen = set(init)
    todo = deque(sorted(init))
    edges = {}
    prop_out = prop.out
    while todo:
        l1, l2 = todo.popleft()
        for e1 in sys.out[l1]:
            for e2 in prop_out[l2]:
                if e1.action != e2.action:
                    continue
                dst = (e1.dst, e2.dst)
                e = Edge(product_name(l1, l2), e1.action, product_name(*dst))
                edges[e] = sys.rst[e1] | prop.rst[e2]
                if dst not in seen:
                    seen.add(dst)
                    todo.append(dst)
    return BuchiHybridAutomaton(
        tuple(product_name(*l) for l in seen),
        sys.variables,
        tuple(sorted(set(sys.actions) & set(prop.actions))),
        tuple(edges),
        {product_name(*l): sys.dyn[l[0]] | prop.dyn[l[1]] for l in seen},
        edges,
        frozenset(product_name(*l) for l in init),
        frozenset(product_name(*l) for l in seen if l[1] in prop.finals),
    )


def universal_bha(variables: Iterable[str], actions: Iterable[str]) -> BuchiHybridAutomaton:
    """One final location with no flow and a self-loop for every action."""
    acts = tuple(actions)
    return BuchiHybridAutomaton(
        ("u",), tuple(variables), acts, tuple(Edge("u", a, "u") for a in acts), {}, {},
        frozenset({"u"}), frozenset({"u"}),
    )
