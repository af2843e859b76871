"""Bit encoding of actions, the HyLTL to LTL translation and the
discrete abstraction of hybrid traces."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .errors import DeclarationError, FormulaError
from .formula import (
    AUX_ACTION,
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
    dual,
)
from .lasso import Lasso
from .oracle.traces import AbstractLassoTrace, letter_positions, trajectory_satisfies

PAD_PREFIX = "__pad_"


@dataclass(frozen=True)
class ActionEncoding:
    n: int
    patterns: tuple  # ((action, pattern), ...) over A, T and padding, by pattern
    padding: tuple

    def __post_init__(self):
        seen = set()
        for a, p in self.patterns:
            if not 0 < p < 2**self.n:
                raise ValueError(f"pattern {p} of {a} out of range")
            if p in seen:
                raise ValueError(f"pattern {p} assigned twice")
            seen.add(p)
        if dict(self.patterns).get(AUX_ACTION) != 2**self.n - 1:
            raise ValueError("T must carry the all-ones pattern")

    def pattern(self, action: str) -> int:
        try:
            return self._table[action]
        except KeyError:
            raise DeclarationError(f"action {action!r} is not covered by the encoding") from None

    @cached_property
    def _table(self) -> dict:
        return dict(self.patterns)

    @property
    def actions(self) -> tuple:
        """User actions (no T, no padding), sorted."""
        return tuple(sorted(a for a, _ in self.patterns if a != AUX_ACTION and a not in self.padding))

    @property
    def automaton_actions(self) -> tuple:
        """Actions that label hybrid-automaton edges: A and T."""
        return self.actions + (AUX_ACTION,)

    def true_bits(self, action: str) -> frozenset:
        p = self.pattern(action)
        return frozenset(i for i in range(self.n) if p >> i & 1)

    def formula(self, action: str) -> Formula:
        """``b(a)`` as a conjunction of bit literals, ``b0`` first."""
        p = self.pattern(action)
        lits = [BitAtom(i) if p >> i & 1 else Not(BitAtom(i)) for i in range(self.n)]
        return conj(*lits)


def make_encoding(actions: Iterable[str], pinned: Mapping[str, int] | None = None) -> ActionEncoding:
    """Smallest ``n`` with ``|A| + 1 <= 2**n - 1``.

    Sorted actions take patterns 1, 2, ... (bit ``i`` of the pattern is
    ``b_i``); ``pinned`` fixes patterns for chosen actions first, the rest
    fill the free patterns in order. T takes ``2**n - 1``; fresh
    ``__pad_k`` actions take whatever is left.
    """
    acts = sorted(set(actions))
    if not acts:
        raise DeclarationError("action set must be nonempty")
    for a in acts:
        if a == AUX_ACTION or a.startswith(PAD_PREFIX):
            raise DeclarationError(f"reserved action name {a!r}")
    pinned = dict(pinned or {})
    for a in pinned:
        if a not in acts:
            raise DeclarationError(f"pinned action {a!r} is not declared")
    n = 1
    while 2**n - 1 < len(acts) + 1:
        n += 1
    full = 2**n - 1
    table = {}
    for a, p in pinned.items():
        if not 0 < p < full:
            raise DeclarationError(f"pattern {p} for {a!r} is outside 1..{full - 1}")
        table[a] = p
    if len(set(table.values())) != len(table):
        raise DeclarationError("pinned patterns collide")
    free = (p for p in range(1, full) if p not in table.values())
    for a in acts:
        if a not in table:
            table[a] = next(free)
    padding = []
    for k, p in enumerate(free):
        name = f"{PAD_PREFIX}{k}"
        table[name] = p
        padding.append(name)
    table[AUX_ACTION] = full
    patterns = tuple(sorted(table.items(), key=lambda kv: kv[1]))
    return ActionEncoding(n, patterns, tuple(padding))


def bits_zero(enc: ActionEncoding) -> Formula:
    return conj(*[Not(BitAtom(i)) for i in range(enc.n)])


def gamma0(phi: Formula, enc: ActionEncoding) -> Formula:
    if isinstance(phi, ActionAtom):
        return enc.formula(phi.name)
    if isinstance(phi, (FlowAtom, Top, Bottom)):
        return phi
    if isinstance(phi, BitAtom):
        raise FormulaError("bit letters cannot appear in a HyLTL formula")
    if isinstance(phi, Not):
        return Not(gamma0(phi.arg, enc))
    if isinstance(phi, Next):
        return Next(gamma0(phi.arg, enc))
    for cls in (And, Or, Until, Release):
        if isinstance(phi, cls):
            return cls(gamma0(phi.left, enc), gamma0(phi.right, enc))
    raise FormulaError(f"cannot translate {phi!r}")


def gamma(phi: Formula, enc: ActionEncoding) -> Formula:
    """``!b0 & ... & !b{n-1} & gamma0(phi)``."""
    return And(bits_zero(enc), gamma0(phi, enc))


# ---------------------------------------------------------------------------
# discrete abstraction


class DiscreteWord(Lasso):
    """Lasso of letters; a letter is a frozenset of ``FlowAtom``/``BitAtom``."""


def observed_constraints(universe) -> tuple:
    """Universe constraints together with their duals."""
    return tuple(sorted(set(universe) | {dual(c) for c in universe}))


def sigma_letter(trajectory, prev_action, enc: ActionEncoding, universe) -> frozenset:
    letter = {FlowAtom(c) for c in observed_constraints(universe) if trajectory_satisfies(trajectory, c, universe)}
    if prev_action is not None:
        letter |= {BitAtom(i) for i in enc.true_bits(prev_action)}
    return frozenset(letter)


def sigma(trace: AbstractLassoTrace, enc: ActionEncoding) -> DiscreteWord:
    """Each letter holds the constraints true throughout the trajectory and
    the bits of the action that preceded it (none for the first)."""
    for a in trace.actions():
        enc.pattern(a)
    pos = letter_positions(trace)
    conv = [sigma_letter(t, prev, enc, trace.universe) for t, prev in pos.stem + pos.loop]
    return DiscreteWord(tuple(conv[: len(pos.stem)]), tuple(conv[len(pos.stem) :]))
