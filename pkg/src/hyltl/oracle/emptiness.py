"""Accepting-cycle search.

``nested_dfs`` is the classic two-phase search (blue search in post-order
seeds a red search from each accepting node). ``buchi_empty_scc`` decides
the same question through strongly connected components and serves as the
independent cross-check.
"""

from __future__ import annotations

from typing import Callable, Hashable, Iterable

import networkx as nx

from ..buchi import BuchiAutomaton, label_satisfiable


def nested_dfs(
    roots: Iterable[Hashable],
    successors: Callable[[Hashable], Iterable[Hashable]],
    accepting: Callable[[Hashable], bool],
) -> bool:
    """True iff some accepting node on a cycle is reachable from ``roots``."""
    blue: set = set()
    red: set = set()

    def red_search(seed) -> bool:
        stack = [iter(successors(seed))]
        while stack:
            for nxt in stack[-1]:
                if nxt == seed:
                    return True
                if nxt not in red:
                    red.add(nxt)
                    stack.append(iter(successors(nxt)))
                    break
            else:
                stack.pop()
        return False

    for root in roots:
        if root in blue:
            continue
        blue.add(root)
        stack = [(root, iter(successors(root)))]
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if nxt not in blue:
                    blue.add(nxt)
                    stack.append((nxt, iter(successors(nxt))))
                    break
            else:
                stack.pop()
                if accepting(node) and red_search(node):
                    return True
    return False


def _live_successors(aut: BuchiAutomaton):
    table = {q: [] for q in aut.states}
    for t in aut.transitions:
        if label_satisfiable(t.label):
            table[t.src].append(t.dst)
    return table


def buchi_empty(aut: BuchiAutomaton) -> bool:
    """No accepted word: letters are chosen freely, so a transition is usable
    iff its label is satisfiable."""
    succ = _live_successors(aut)
    return not nested_dfs([aut.initial], succ.__getitem__, aut.finals.__contains__)


def buchi_empty_scc(aut: BuchiAutomaton) -> bool:
    succ = _live_successors(aut)
    g = nx.DiGraph()
    g.add_nodes_from(aut.states)
    g.add_edges_from((q, r) for q, rs in succ.items() for r in rs)
    reach = nx.descendants(g, aut.initial) | {aut.initial}
    sub = g.subgraph(reach)
    for comp in nx.strongly_connected_components(sub):
        nontrivial = len(comp) > 1 or any(sub.has_edge(q, q) for q in comp)
        if nontrivial and comp & aut.finals:
            return False
    return True
