"""Abstract hybrid lasso traces.

A trajectory is a nonempty sequence of Atoms; an Atom is the set of
universe constraints true at one sampled instant. A trajectory satisfies
a constraint iff every Atom does. The dual of a universe constraint is
evaluated as its pointwise complement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from ..errors import ParseError, TraceError
from ..formula import AUX_ACTION, FlowConstraint, dual
from ..lasso import Lasso
from ..parser import parse_flow_constraint

Atom = frozenset
Trajectory = tuple


@dataclass(frozen=True)
class Step:
    trajectory: tuple
    action: str

    def __post_init__(self):
        object.__setattr__(self, "trajectory", tuple(frozenset(a) for a in self.trajectory))
        if not self.trajectory:
            raise TraceError("trajectory must contain at least one Atom")


@dataclass(frozen=True)
class AbstractLassoTrace(Lasso):
    universe: tuple = field(default=())

    def __post_init__(self):
        super().__post_init__()
        universe = tuple(sorted(set(self.universe)))
        object.__setattr__(self, "universe", universe)
        uset = set(universe)
        for c in universe:
            if dual(c) in uset:
                raise TraceError(f"universe holds both {c} and its dual")
        for step in self.stem + self.loop:
            if not isinstance(step, Step):
                raise TraceError(f"trace elements must be Steps, got {step!r}")
            for atom in step.trajectory:
                if not atom <= uset:
                    raise TraceError(f"Atom {sorted(map(str, atom))} leaves the universe")

    def actions(self) -> set[str]:
        return {s.action for s in self.stem + self.loop}

    def __str__(self):
        return format_trace(self)


def atom_holds(atom: frozenset, g: FlowConstraint, universe: Iterable[FlowConstraint]) -> bool:
    if g in universe:
        return g in atom
    d = dual(g)
    if d in universe:
        return d not in atom
    raise TraceError(f"constraint {g} is outside the trace universe")


def trajectory_satisfies(trajectory, g: FlowConstraint, universe) -> bool:
    """``g`` holds at every instant of the trajectory."""
    return all(atom_holds(a, g, universe) for a in trajectory)


def concat(first: tuple, second: tuple) -> tuple:
    """Concatenate trajectories, gluing a shared endpoint."""
    if first and second and first[-1] == second[0]:
        return first + second[1:]
    return first + second


def restrict(beta: AbstractLassoTrace, keep: Iterable[str]) -> AbstractLassoTrace:
    """Drop actions outside ``keep`` and concatenate the adjacent trajectories."""
    keep = set(keep)
    if not keep:
        raise TraceError("restriction to an empty action set")
    loop = beta.loop
    first = next((i for i, s in enumerate(loop) if s.action in keep), None)
    if first is None:
        raise TraceError("trace loop contains no action of the restriction set; restriction is finite")

    def group(steps, pending=()):
        out = []
        for s in steps:
            pending = concat(pending, s.trajectory)
            if s.action in keep:
                out.append(Step(pending, s.action))
                pending = ()
        return out, pending

    stem_steps, pending = group(beta.stem + loop[: first + 1])
    assert pending == ()
    loop_steps, pending = group(loop[first + 1 :] + loop[: first + 1])
    assert pending == ()
    return AbstractLassoTrace(tuple(stem_steps), tuple(loop_steps), beta.universe).normalized()


def letter_positions(trace: AbstractLassoTrace) -> Lasso:
    """Re-cut the trace into ``(trajectory, previous action)`` positions.

    The loop head is seen once after the stem and then after every loop
    pass, with different previous actions, so it is duplicated.
    """
    stem, loop = trace.stem, trace.loop
    first_prev = stem[-1].action if stem else None
    head = [(stem[i].trajectory, stem[i - 1].action if i else None) for i in range(len(stem))]
    head.append((loop[0].trajectory, first_prev))
    cycle = [(loop[i].trajectory, loop[i - 1].action) for i in range(1, len(loop))]
    cycle.append((loop[0].trajectory, loop[-1].action))
    return Lasso(tuple(head), tuple(cycle))


# ---------------------------------------------------------------------------
# literal syntax:  [{f, g} {f}] on [{f}] T ( [{g}] off )

_TRACE_TOKEN = re.compile(r"\s*(?:(?P<atom>\{[^{}]*\})|(?P<sym>[\[\]()])|(?P<ident>[A-Za-z_][A-Za-z_0-9]*))")


def _split_top_level(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p for p in (s.strip() for s in parts) if p]


def parse_trace(text: str, universe: Iterable[FlowConstraint] | None = None) -> AbstractLassoTrace:
    toks = []
    pos = 0
    while pos < len(text):
        if not text[pos:].strip():
            break
        m = _TRACE_TOKEN.match(text, pos)
        if not m:
            raise ParseError("unexpected character in trace literal", pos, text)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()

    mentioned: set[FlowConstraint] = set()
    stem: list[tuple] = []
    loop: list[tuple] = []
    target = stem
    in_loop = False
    i = 0
    while i < len(toks):
        kind, value, p = toks[i]
        if (kind, value) == ("sym", "("):
            if in_loop:
                raise ParseError("nested loop marker", p, text)
            in_loop, target = True, loop
            i += 1
            continue
        if (kind, value) == ("sym", ")"):
            if not in_loop:
                raise ParseError("unbalanced ')'", p, text)
            in_loop = False
            i += 1
            if i != len(toks):
                raise ParseError("the loop must end the trace", toks[i][2], text)
            continue
        if (kind, value) != ("sym", "["):
            raise ParseError(f"expected '[', found {value!r}", p, text)
        i += 1
        atoms = []
        while i < len(toks) and toks[i][0] == "atom":
            body, ap = toks[i][1][1:-1], toks[i][2]
            atom = frozenset(parse_flow_constraint(c) for c in _split_top_level(body))
            mentioned |= atom
            atoms.append(atom)
            i += 1
        if i >= len(toks) or toks[i][1] != "]":
            raise ParseError("expected ']'", toks[i][2] if i < len(toks) else len(text), text)
        i += 1
        if i >= len(toks) or toks[i][0] != "ident":
            raise ParseError("expected an action after a trajectory", toks[i][2] if i < len(toks) else len(text), text)
        action = toks[i][1]
        i += 1
        target.append((atoms, AUX_ACTION if action == "T" else action))
    if in_loop:
        raise ParseError("unterminated loop", len(text), text)
    if not loop:
        raise ParseError("trace literal needs a loop in parentheses", len(text), text)
    uni = tuple(universe) if universe is not None else tuple(sorted(mentioned))
    return AbstractLassoTrace(
        tuple(Step(t, a) for t, a in stem), tuple(Step(t, a) for t, a in loop), uni
    )


def format_trace(trace: AbstractLassoTrace) -> str:
    def step(s):
        atoms = " ".join("{" + ", ".join(sorted(c.text for c in a)) + "}" for a in s.trajectory)
        act = "T" if s.action == AUX_ACTION else s.action
        return f"[{atoms}] {act}"

    stem = " ".join(step(s) for s in trace.stem)
    loop = " ".join(step(s) for s in trace.loop)
    return (stem + " " if stem else "") + f"( {loop} )"
