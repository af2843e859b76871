"""Reference semantics on lassos.

``eval_hyltl`` follows the truth relation on hybrid traces directly: an
until is decided by walking forward from the position, which on a lasso
needs at most one pass over the distinct positions. ``eval_ltl_lasso``
uses a different technique on purpose (fixpoint iteration over position
sets), so the two evaluators cross-check each other through the
discretization.
"""

from __future__ import annotations

from ..buchi import BuchiAutomaton, label_holds
from ..errors import AutomatonError, FormulaError, TraceError
from ..formula import (
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
    dual,
    flow_constraints,
)
from ..lasso import Lasso
from .emptiness import nested_dfs
from .traces import AbstractLassoTrace, letter_positions, trajectory_satisfies


def eval_hyltl(alpha: AbstractLassoTrace, phi: Formula, position: int = 1) -> bool:
    """``alpha, position |= phi`` with 1-based positions."""
    if position < 1:
        raise ValueError("positions start at 1")
    uni = set(alpha.universe)
    known = uni | {dual(c) for c in uni}
    for c in flow_constraints(phi):
        if c not in known:
            raise TraceError(f"constraint {c} is outside the trace universe")
    pos = letter_positions(alpha)
    n = len(pos)
    memo: dict = {}

    def canon(i):
        s = len(pos.stem)
        return i if i < s else s + (i - s) % len(pos.loop)

    def ev(f, p):
        key = (f, p)
        hit = memo.get(key)
        if hit is not None:
            return hit
        memo[key] = r = _ev(f, p)
        return r

    def _ev(f, p):
        traj, prev = pos[p]
        if isinstance(f, Top):
            return True
        if isinstance(f, Bottom):
            return False
        if isinstance(f, FlowAtom):
            return trajectory_satisfies(traj, f.constraint, alpha.universe)
        if isinstance(f, ActionAtom):
            return prev is not None and prev == f.name
        if isinstance(f, BitAtom):
            raise FormulaError("bit letters have no meaning on hybrid traces")
        if isinstance(f, Not):
            return not ev(f.arg, p)
        if isinstance(f, And):
            return ev(f.left, p) and ev(f.right, p)
        if isinstance(f, Or):
            return ev(f.left, p) or ev(f.right, p)
        if isinstance(f, Next):
            return ev(f.arg, pos.successor(p))
        if isinstance(f, Until):
            q = p
            for _ in range(n):
                if ev(f.right, q):
                    return True
                if not ev(f.left, q):
                    return False
                q = pos.successor(q)
            return False
        if isinstance(f, Release):
            q = p
            for _ in range(n):
                if not ev(f.right, q):
                    return False
                if ev(f.left, q):
                    return True
                q = pos.successor(q)
            return True
        raise FormulaError(f"cannot evaluate {f!r}")

    return ev(phi, canon(position - 1))


def eval_ltl_lasso(word: Lasso, phi: Formula, position: int = 1) -> bool:
    """Discrete LTL on a lasso of letters (sets of atoms), 1-based."""
    n = len(word)
    s = len(word.stem)
    succ = [word.successor(p) for p in range(n)]
    pred: list[list[int]] = [[] for _ in range(n)]
    for p, q in enumerate(succ):
        pred[q].append(p)
    cache: dict = {}

    def sat(f) -> frozenset:
        hit = cache.get(f)
        if hit is not None:
            return hit
        cache[f] = r = _sat(f)
        return r

    everything = frozenset(range(n))

    def _sat(f):
        if isinstance(f, Top):
            return everything
        if isinstance(f, Bottom):
            return frozenset()
        if isinstance(f, (FlowAtom, BitAtom, ActionAtom)):
            return frozenset(p for p in range(n) if f in word[p])
        if isinstance(f, Not):
            return everything - sat(f.arg)
        if isinstance(f, And):
            return sat(f.left) & sat(f.right)
        if isinstance(f, Or):
            return sat(f.left) | sat(f.right)
        if isinstance(f, Next):
            inner = sat(f.arg)
            return frozenset(p for p in range(n) if succ[p] in inner)
        if isinstance(f, Until):
            # least fixpoint of Z = right | (left & pre(Z))
            left, right = sat(f.left), sat(f.right)
            z = set(right)
            todo = list(z)
            while todo:
                q = todo.pop()
                for p in pred[q]:
                    if p not in z and p in left:
                        z.add(p)
                        todo.append(p)
            return frozenset(z)
        if isinstance(f, Release):
            # greatest fixpoint of Z = right & (left | pre(Z))
            left, right = sat(f.left), sat(f.right)
            z = set(right)
            changed = True
            while changed:
                changed = False
                for p in list(z):
                    if p not in left and succ[p] not in z:
                        z.discard(p)
                        changed = True
            return frozenset(z)
        raise FormulaError(f"cannot evaluate {f!r}")

    if position < 1:
        raise ValueError("positions start at 1")
    p = position - 1
    if p >= n:
        p = s + (p - s) % len(word.loop)
    return p in sat(phi)


# ---------------------------------------------------------------------------
# acceptance


def buchi_accepts(aut: BuchiAutomaton, word: Lasso) -> bool:
    """Accepting run of ``aut`` on the lasso word, via the product graph."""
    out = aut.out

    def successors(node):
        q, p = node
        letter = word[p]
        nxt = word.successor(p)
        for t in out[q]:
            if label_holds(t.label, letter):
                yield (t.dst, nxt)

    def accepting(node):
        return node[0] in aut.finals

    return nested_dfs([(aut.initial, 0)], successors, accepting)


def bha_accepts(h, alpha: AbstractLassoTrace, ignore_resets: bool = False) -> bool:
    """A run visits a final location infinitely often.

    Locations must admit each trajectory (every Atom satisfies the flow)
    and edges must match the actions. Jump constraints cannot be evaluated
    on abstract traces, so automata with non-trivial resets are refused
    unless ``ignore_resets`` is set.
    """
    if not ignore_resets and any(h.rst[e] for e in h.edges):
        raise AutomatonError("automaton has non-trivial resets; pass ignore_resets=True to skip them")
    universe = alpha.universe
    steps = alpha.stem + alpha.loop
    admits = {}

    def admitted(l, p):
        key = (l, p)
        if key not in admits:
            traj = steps[p].trajectory
            admits[key] = all(trajectory_satisfies(traj, c, universe) for c in h.dyn[l])
        return admits[key]

    by_action: dict = {}
    for e in h.edges:
        by_action.setdefault((e.src, e.action), []).append(e.dst)

    def successors(node):
        l, p = node
        nxt = alpha.successor(p)
        for d in by_action.get((l, steps[p].action), ()):
            if admitted(d, nxt):
                yield (d, nxt)

    roots = [(l, 0) for l in sorted(h.init) if admitted(l, 0)]
    return nested_dfs(roots, successors, lambda node: node[0] in h.finals)


def generated_by(h, alpha: AbstractLassoTrace) -> bool:
    """Plain automaton view: some infinite run exists (every location final)."""
    from ..hybrid import as_buchi

    return bha_accepts(as_buchi(h, h.locations), alpha, ignore_resets=True)
