"""Büchi automata over letters ``2^AP`` and the LTL translation.

``ltl_to_buchi`` is a tableau construction: each state is a fully
expanded pair (obligations now, obligations next), transitions carry the
literal set of their target, generalized acceptance (one set per until)
is degeneralized with a counter. The result is trimmed and quotiented by
bisimulation.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import networkx as nx

from .errors import AutomatonError, FormulaError
from .formula import (
    ATOMS,
    ActionAtom,
    And,
    BitAtom,
    Bottom,
    FlowAtom,
    Formula,
    Next,
    Not,
    Or,
    Release,
    Top,
    Until,
    conj,
    disj,
    ltl_atom,
    simplify,
    to_nnf,
)


def atom_key(atom: Formula):
    if isinstance(atom, BitAtom):
        return (0, atom.index, "")
    if isinstance(atom, FlowAtom):
        return (1, 0, atom.constraint.text)
    if isinstance(atom, ActionAtom):
        return (2, 0, atom.name)
    raise TypeError(atom)


@dataclass(frozen=True)
class Cocube:
    """Conjunction of literals: ``pos`` atoms true, ``neg`` atoms false."""

    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    @property
    def consistent(self) -> bool:
        return not (self.pos & self.neg)

    def holds(self, letter: frozenset) -> bool:
        return self.pos <= letter and not (self.neg & letter)

    def implies(self, other: "Cocube") -> bool:
        """Literal-set inclusion: every literal of ``other`` occurs here."""
        return other.pos <= self.pos and other.neg <= self.neg

    def literals(self) -> list[tuple[Formula, bool]]:
        lits = [(a, True) for a in self.pos] + [(a, False) for a in self.neg]
        return sorted(lits, key=lambda l: (atom_key(l[0]), not l[1]))

    @property
    def flows(self) -> frozenset:
        return frozenset(a for a in self.pos if isinstance(a, FlowAtom))

    @property
    def negative_flows(self) -> frozenset:
        return frozenset(a for a in self.neg if isinstance(a, FlowAtom))

    @property
    def bits(self) -> tuple[frozenset, frozenset]:
        return (
            frozenset(a.index for a in self.pos if isinstance(a, BitAtom)),
            frozenset(a.index for a in self.neg if isinstance(a, BitAtom)),
        )

    def to_formula(self) -> Formula:
        parts = [a if p else Not(a) for a, p in self.literals()]
        return conj(*parts) if parts else Top()

    def sort_key(self):
        return tuple((atom_key(a), p) for a, p in self.literals())

    def __str__(self):
        if not self.pos and not self.neg:
            return "true"
        return " & ".join(ltl_atom(a) if p else "!" + ltl_atom(a) for a, p in self.literals())


TRUE_CUBE = Cocube()


def label_holds(label, letter: frozenset) -> bool:
    if isinstance(label, Cocube):
        return label.holds(letter)
    return formula_holds(label, letter)


def formula_holds(phi: Formula, letter: frozenset) -> bool:
    """Boolean (non-temporal) evaluation of a label against a letter."""
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bottom):
        return False
    if isinstance(phi, ATOMS):
        return phi in letter
    if isinstance(phi, Not):
        return not formula_holds(phi.arg, letter)
    if isinstance(phi, And):
        return formula_holds(phi.left, letter) and formula_holds(phi.right, letter)
    if isinstance(phi, Or):
        return formula_holds(phi.left, letter) or formula_holds(phi.right, letter)
    raise FormulaError(f"temporal operator in a transition label: {phi}")


def to_dnf(phi: Formula) -> list[Cocube]:
    """Consistent cocubes whose disjunction is ``phi``; subsumed ones removed."""

    def go(node):
        if isinstance(node, Top):
            return [TRUE_CUBE]
        if isinstance(node, Bottom):
            return []
        if isinstance(node, ATOMS):
            return [Cocube(frozenset([node]))]
        if isinstance(node, Not):
            return [Cocube(frozenset(), frozenset([node.arg]))]
        if isinstance(node, Or):
            return go(node.left) + go(node.right)
        if isinstance(node, And):
            out = []
            for a in go(node.left):
                for b in go(node.right):
                    c = Cocube(a.pos | b.pos, a.neg | b.neg)
                    if c.consistent:
                        out.append(c)
            return out
        raise FormulaError(f"temporal operator in a transition label: {node}")

    return prune_cubes(go(to_nnf(phi)))


def prune_cubes(cubes: Iterable[Cocube]) -> list[Cocube]:
    uniq = sorted(set(cubes), key=lambda c: (len(c.pos) + len(c.neg), c.sort_key()))
    kept: list[Cocube] = []
    for c in uniq:
        if not any(c.implies(k) for k in kept):
            kept.append(c)
    return sorted(kept, key=Cocube.sort_key)


def label_satisfiable(label) -> bool:
    if isinstance(label, Cocube):
        return label.consistent
    return bool(to_dnf(label))


@dataclass(frozen=True)
class Transition:
    src: str
    label: object  # Cocube or boolean Formula
    dst: str


@dataclass(frozen=True)
class BuchiAutomaton:
    states: tuple
    initial: str
    transitions: tuple
    finals: frozenset
    names: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "finals", frozenset(self.finals))
        sset = set(self.states)
        if len(sset) != len(self.states):
            raise AutomatonError("duplicate state names")
        if self.initial not in sset:
            raise AutomatonError(f"initial state {self.initial!r} is not a state")
        if not self.finals <= sset:
            raise AutomatonError("final states must be states")
        for t in self.transitions:
            if t.src not in sset or t.dst not in sset:
                raise AutomatonError(f"transition {t.src} -> {t.dst} leaves the state set")

    @cached_property
    def out(self) -> dict:
        table = {q: [] for q in self.states}
        for t in self.transitions:
            table[t.src].append(t)
        return table

    @property
    def is_normalized(self) -> bool:
        return all(isinstance(t.label, Cocube) and not t.label.negative_flows for t in self.transitions)

    def atoms(self) -> list[Formula]:
        found = set()
        for t in self.transitions:
            if isinstance(t.label, Cocube):
                found |= t.label.pos | t.label.neg
            else:
                from .formula import walk

                found |= {n for n in walk(t.label) if isinstance(n, ATOMS)}
        return sorted(found, key=atom_key)

    def __str__(self):
        lines = [f"states: {' '.join(self.states)}", f"initial: {self.initial}", f"final: {' '.join(sorted(self.finals))}"]
        for t in self.transitions:
            lines.append(f"{t.src} -[{t.label}]-> {t.dst}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# tableau construction


def _is_literal(phi):
    return isinstance(phi, ATOMS) or (isinstance(phi, Not) and isinstance(phi.arg, ATOMS))


def _negate_literal(phi):
    return phi.arg if isinstance(phi, Not) else Not(phi)


def _cover(obligations: frozenset) -> list[tuple[frozenset, frozenset]]:
    """All consistent fully expanded ``(old, next)`` pairs for the obligations."""
    results = []
    seen = set()
    stack = [(frozenset(obligations), frozenset(), frozenset())]
    while stack:
        new, old, nxt = stack.pop()
        if not new:
            key = (old, nxt)
            if key not in seen:
                seen.add(key)
                results.append(key)
            continue
        eta = min(new, key=_formula_order)
        new = new - {eta}
        if eta in old:
            stack.append((new, old, nxt))
            continue
        if isinstance(eta, Top):
            stack.append((new, old | {eta}, nxt))
        elif isinstance(eta, Bottom):
            continue
        elif _is_literal(eta):
            if _negate_literal(eta) in old:
                continue
            stack.append((new, old | {eta}, nxt))
        elif isinstance(eta, And):
            stack.append((new | ({eta.left, eta.right} - old), old | {eta}, nxt))
        elif isinstance(eta, Next):
            stack.append((new, old | {eta}, nxt | {eta.arg}))
        elif isinstance(eta, Or):
            stack.append((new | ({eta.right} - old), old | {eta}, nxt))
            stack.append((new | ({eta.left} - old), old | {eta}, nxt))
        elif isinstance(eta, Until):
            stack.append((new | ({eta.right} - old), old | {eta}, nxt))
            stack.append((new | ({eta.left} - old), old | {eta}, nxt | {eta}))
        elif isinstance(eta, Release):
            stack.append((new | ({eta.left, eta.right} - old), old | {eta}, nxt))
            stack.append((new | ({eta.right} - old), old | {eta}, nxt | {eta}))
        else:
            raise FormulaError(f"unexpected node {eta!r}")
    return results


_ORDER_CACHE: dict = {}


def _formula_order(phi):
    # literals first so contradictions prune early; deterministic otherwise
    key = _ORDER_CACHE.get(phi)
    if key is None:
        rank = 0 if _is_literal(phi) or isinstance(phi, (Top, Bottom)) else 1
        from .formula import to_text

        key = (rank, to_text(phi, ltl_atom))
        if len(_ORDER_CACHE) > 100000:
            _ORDER_CACHE.clear()
        _ORDER_CACHE[phi] = key
    return key


def _label_of(old: frozenset) -> Cocube:
    pos = frozenset(l for l in old if isinstance(l, ATOMS))
    neg = frozenset(l.arg for l in old if isinstance(l, Not) and isinstance(l.arg, ATOMS))
    return Cocube(pos, neg)


def ltl_to_buchi(phi: Formula) -> BuchiAutomaton:
    """Büchi automaton accepting exactly the words satisfying ``phi``."""
    phi = simplify(to_nnf(phi))
    untils = [n for n in _closure(phi) if isinstance(n, Until)]
    untils.sort(key=_formula_order)

    init = ("init",)
    index: dict = {}
    succ: dict = defaultdict(list)
    queue = deque()

    def state_for(node):
        if node not in index:
            index[node] = len(index)
            queue.append(node)
        return node

    for node in _cover(frozenset([phi])):
        succ[init].append(state_for(node))
    while queue:
        node = queue.popleft()
        for nb in _cover(node[1]):
            succ[node].append(state_for(nb))

    def accepting_sets(node):
        old = node[0]
        return [u not in old or u.right in old for u in untils]

    # degeneralize: counter i waits for acceptance set i
    k = max(1, len(untils))
    flags = {node: (accepting_sets(node) if untils else [True]) for node in index}
    states = {}
    transitions = []
    finals = set()
    work = deque()

    def st(node, i):
        key = (node, i)
        if key not in states:
            states[key] = f"s{len(states)}"
            work.append(key)
        return states[key]

    start = st(init, 0)
    while work:
        node, i = work.popleft()
        name = states[(node, i)]
        if node is init:
            j = 0
        else:
            j = i
            while j < k and flags[node][j]:
                j += 1
            if j == k:
                finals.add(name)
                j = 0
        for nb in succ[node]:
            transitions.append(Transition(name, _label_of(nb[0]), st(nb, j)))
    aut = BuchiAutomaton(tuple(states.values()), start, tuple(transitions), frozenset(finals))
    return reduce_automaton(aut)


def _closure(phi):
    from .formula import walk

    return set(walk(phi))


# ---------------------------------------------------------------------------
# simplification


def _reachable(aut: BuchiAutomaton, live_only=True) -> set:
    seen = {aut.initial}
    todo = [aut.initial]
    while todo:
        q = todo.pop()
        for t in aut.out[q]:
            if (not live_only or label_satisfiable(t.label)) and t.dst not in seen:
                seen.add(t.dst)
                todo.append(t.dst)
    return seen


def _productive(aut: BuchiAutomaton, keep: set) -> set:
    """States of ``keep`` from which an accepting cycle is reachable."""

    g = nx.DiGraph()
    g.add_nodes_from(keep)
    for t in aut.transitions:
        if t.src in keep and t.dst in keep and label_satisfiable(t.label):
            g.add_edge(t.src, t.dst)
    good = set()
    for comp in nx.strongly_connected_components(g):
        if comp & aut.finals and (len(comp) > 1 or any(g.has_edge(q, q) for q in comp)):
            good |= comp
    result = set(good)
    rev = g.reverse(copy=False)
    for q in good:
        result |= nx.descendants(rev, q)
    return result


def _trim(aut: BuchiAutomaton) -> BuchiAutomaton:
    keep = _reachable(aut)
    keep = _productive(aut, keep)
    keep.add(aut.initial)
    trans = [t for t in aut.transitions if t.src in keep and t.dst in keep and label_satisfiable(t.label)]
    # A state on no cycle is visited at most once, so its acceptance is
    # free; copying it from the successors (final iff all are) lets the
    # quotient merge it with look-alike cyclic states.
    g = nx.DiGraph()
    g.add_nodes_from(keep)
    g.add_edges_from((t.src, t.dst) for t in trans)
    finals = set(aut.finals & keep)
    cond = nx.condensation(g)
    for c in reversed(list(nx.topological_sort(cond))):
        members = cond.nodes[c]["members"]
        if len(members) == 1:
            (q,) = members
            if not g.has_edge(q, q):
                succ = list(g.successors(q))
                finals.discard(q)
                if succ and all(r in finals for r in succ):
                    finals.add(q)
    return BuchiAutomaton(tuple(q for q in aut.states if q in keep), aut.initial, tuple(trans), finals)


def _drop_subsumed(transitions):
    """Remove duplicate transitions and cocube labels implied by a weaker
    label on a parallel transition."""
    groups = defaultdict(list)
    others = []
    for t in transitions:
        if isinstance(t.label, Cocube):
            groups[(t.src, t.dst)].append(t.label)
        else:
            others.append(t)
    out = []
    for (src, dst), labels in groups.items():
        for c in prune_cubes(labels):
            out.append(Transition(src, c, dst))
    seen = set()
    for t in others:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def _simulation(aut: BuchiAutomaton) -> set:
    """Direct simulation: ``(p, q)`` means q simulates p.

    q must be final whenever p is, and every move ``p -l-> p'`` must be
    answered by some ``q -l'-> q'`` with ``l`` implying ``l'`` and
    ``(p', q')`` again related. Greatest fixpoint by refinement.
    """
    out = defaultdict(list)
    for t in aut.transitions:
        out[t.src].append(t)
    rel = {
        (p, q)
        for p in aut.states
        for q in aut.states
        if p not in aut.finals or q in aut.finals
    }
    changed = True
    while changed:
        changed = False
        for p, q in list(rel):
            if not _answers(out[p], out[q], rel):
                rel.discard((p, q))
                changed = True
    return rel


def _answers(moves, replies, rel) -> bool:
    return all(
        any(t.label.implies(u.label) and (t.dst, u.dst) in rel for u in replies) for t in moves
    )


def _quotient(aut: BuchiAutomaton) -> BuchiAutomaton:
    """Merge simulation-equivalent states, then prune dominated moves.

    A move ``p -l-> r`` is dropped when ``p`` has another move ``l'`` to
    ``r'`` with ``l`` implying ``l'`` and ``r'`` strictly simulating ``r``
    (or equal targets with a strictly weaker label). An initial state
    without incoming moves is folded into an equivalent state, ignoring
    its own acceptance, since it is visited once.
    """
    sim = _simulation(aut)
    rep = {}
    for q in aut.states:
        rep[q] = next(r for r in aut.states if (q, r) in sim and (r, q) in sim)
    rep[aut.initial], init_old = aut.initial, rep[aut.initial]
    for q in aut.states:
        if rep[q] == init_old:
            rep[q] = aut.initial
    states = tuple(dict.fromkeys(rep[q] for q in aut.states))
    trans = _drop_subsumed(Transition(rep[t.src], t.label, rep[t.dst]) for t in aut.transitions)
    merged = BuchiAutomaton(states, aut.initial, tuple(trans), frozenset(rep[q] for q in aut.finals))

    sim = _simulation(merged)
    out = defaultdict(list)
    for t in merged.transitions:
        out[t.src].append(t)
    kept = []
    for t in merged.transitions:
        dominated = any(
            u is not t
            and t.label.implies(u.label)
            and (t.dst, u.dst) in sim
            and not (u.label.implies(t.label) and (u.dst, t.dst) in sim)
            for u in out[t.src]
        )
        if not dominated:
            kept.append(t)
    merged = BuchiAutomaton(merged.states, merged.initial, tuple(kept), merged.finals)

    if not any(t.dst == merged.initial for t in merged.transitions):
        sim = _simulation(merged)
        out = defaultdict(list)
        for t in merged.transitions:
            out[t.src].append(t)
        mine = out[merged.initial]
        for q in merged.states:
            if q != merged.initial and _answers(mine, out[q], sim) and _answers(out[q], mine, sim):
                states = tuple(s for s in merged.states if s != merged.initial)
                trans = tuple(t for t in merged.transitions if t.src != merged.initial)
                return BuchiAutomaton(states, q, trans, merged.finals - {merged.initial})
    return merged


def _rename(aut: BuchiAutomaton) -> BuchiAutomaton:
    """States become q0 (initial), q1, ... in breadth-first order."""
    order = [aut.initial]
    seen = {aut.initial}
    todo = deque(order)
    by_src = defaultdict(list)
    for t in aut.transitions:
        by_src[t.src].append(t)
    while todo:
        q = todo.popleft()
        for t in sorted(by_src[q], key=lambda t: _label_sort(t.label)):
            if t.dst not in seen:
                seen.add(t.dst)
                order.append(t.dst)
                todo.append(t.dst)
    order += [q for q in aut.states if q not in seen]
    names = {q: f"q{i}" for i, q in enumerate(order)}
    trans = sorted(
        (Transition(names[t.src], t.label, names[t.dst]) for t in aut.transitions),
        key=lambda t: (int(t.src[1:]), int(t.dst[1:]), _label_sort(t.label)),
    )
    return BuchiAutomaton(
        tuple(names[q] for q in order), names[aut.initial], tuple(trans), frozenset(names[q] for q in aut.finals)
    )


def _label_sort(label):
    if isinstance(label, Cocube):
        return (0, label.sort_key())
    from .formula import to_text

    return (1, to_text(label, ltl_atom))


def reduce_automaton(aut: BuchiAutomaton) -> BuchiAutomaton:
    """Trim, drop subsumed transitions and quotient until nothing changes."""
    aut = _trim(aut)
    while True:
        before = (len(aut.states), len(aut.transitions))
        aut = BuchiAutomaton(aut.states, aut.initial, tuple(_drop_subsumed(aut.transitions)), aut.finals)
        aut = _trim(_quotient(aut))
        if (len(aut.states), len(aut.transitions)) == before:
            break
    return _rename(aut)


# ---------------------------------------------------------------------------
# label normalization


def _bits_possible(cube: Cocube, patterns: Iterable[int]) -> bool:
    on, off = cube.bits
    for p in patterns:
        if all(p >> i & 1 for i in on) and not any(p >> i & 1 for i in off):
            return True
    return False


def normalize_labels(aut: BuchiAutomaton, positive_expected: bool = True, enc=None) -> BuchiAutomaton:
    """One transition per DNF cocube; negated flow literals deleted.

    With ``enc`` given, cocubes whose bits match neither the all-false
    letter nor the pattern of an action or T are dropped. With
    ``positive_expected`` false a negated flow literal is an error.
    """
    patterns = None
    if enc is not None:
        patterns = [0] + [enc.pattern(a) for a in enc.automaton_actions]
    trans = []
    for t in aut.transitions:
        cubes = [t.label] if isinstance(t.label, Cocube) else to_dnf(t.label)
        for c in cubes:
            if not c.consistent:
                continue
            if patterns is not None and not _bits_possible(c, patterns):
                continue
            if c.negative_flows:
                if not positive_expected:
                    raise FormulaError(
                        f"negated flow constraint on transition {t.src} -> {t.dst}: "
                        "only positive-flow formulas are supported"
                    )
                c = Cocube(c.pos, c.neg - c.negative_flows)
            trans.append(Transition(t.src, c, t.dst))
    return BuchiAutomaton(aut.states, aut.initial, tuple(_drop_subsumed(trans)), aut.finals)
