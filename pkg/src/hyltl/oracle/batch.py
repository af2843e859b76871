"""Bounded trace spaces as arrays, formula programs and automaton tables
for the kernels."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..buchi import BuchiAutomaton, label_holds
from ..discretization import ActionEncoding, sigma_letter
from ..errors import FormulaError
from ..formula import (
    ATOMS,
    ActionAtom,
    And,
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
from . import kernels
from .traces import AbstractLassoTrace, Step, letter_positions, trajectory_satisfies

# ---------------------------------------------------------------------------
# trajectories


def all_trajectories(universe: Sequence, max_atoms: int) -> list[tuple]:
    """Every Atom sequence of length 1..max_atoms over the universe."""
    atoms = [frozenset(c for c, bit in zip(universe, bits) if bit) for bits in itertools.product((0, 1), repeat=len(universe))]
    out = []
    for m in range(1, max_atoms + 1):
        out.extend(itertools.product(atoms, repeat=m))
    return out


def trajectory_classes(universe: Sequence, three_valued: Iterable = ()) -> list[tuple]:
    """One representative (at most two Atoms) per observable behaviour.

    A constraint is observed as "throughout" or not; for constraints in
    ``three_valued`` the "nowhere" case (its dual holds throughout) is
    told apart from "somewhere but not everywhere".
    """
    three = set(three_valued)
    choices = [("all", "none", "mixed") if c in three else ("all", "notall") for c in universe]
    reps = []
    for combo in itertools.product(*choices):
        first = frozenset(c for c, k in zip(universe, combo) if k in ("all", "mixed"))
        second = frozenset(c for c, k in zip(universe, combo) if k == "all")
        if any(k == "mixed" for k in combo):
            reps.append((first, second))
        else:
            reps.append((first,))
    return reps


def observation_universe(phi: Formula) -> tuple[tuple, frozenset]:
    """Universe (one constraint per dual pair) and the pairs seen both ways."""
    cs = flow_constraints(phi)
    universe, three = [], set()
    for c in sorted(cs):
        d = dual(c)
        if d in universe:
            three.add(d)
        else:
            universe.append(c)
    return tuple(universe), frozenset(three)


# ---------------------------------------------------------------------------
# lasso batches


@dataclass
class LassoBatch:
    letters: np.ndarray  # int32[N, maxn]
    stem: np.ndarray  # int32[N]
    length: np.ndarray  # int32[N]

    def __len__(self):
        return len(self.stem)

    @classmethod
    def from_lassos(cls, lassos: Sequence[Lasso]) -> "LassoBatch":
        maxn = max((len(l) for l in lassos), default=1)
        letters = np.zeros((len(lassos), maxn), dtype=np.int32)
        stem = np.zeros(len(lassos), dtype=np.int32)
        length = np.zeros(len(lassos), dtype=np.int32)
        for i, l in enumerate(lassos):
            seq = l.stem + l.loop
            letters[i, : len(seq)] = seq
            stem[i] = len(l.stem)
            length[i] = len(seq)
        return cls(letters, stem, length)


def enumerate_lassos(n_symbols: int, max_stem: int, max_loop: int) -> list[Lasso]:
    """All lassos of symbol ids within the bounds, up to normalization."""
    seen = set()
    out = []
    for s in range(max_stem + 1):
        for l in range(1, max_loop + 1):
            for seq in itertools.product(range(n_symbols), repeat=s + l):
                lasso = Lasso(seq[:s], seq[s:]).normalized()
                key = (lasso.stem, lasso.loop)
                if key not in seen:
                    seen.add(key)
                    out.append(lasso)
    return out


class Interner:
    def __init__(self):
        self.items: list = []
        self.index: dict = {}

    def __call__(self, item) -> int:
        i = self.index.get(item)
        if i is None:
            i = self.index[item] = len(self.items)
            self.items.append(item)
        return i

    def __len__(self):
        return len(self.items)


@dataclass
class HybridSpace:
    """Every lasso trace over ``trajectories x actions`` within the bounds.

    Lassos are kept as step ids; ``batch`` holds their letter lassos
    (trajectory, previous action) as ids into ``letters``.
    """

    universe: tuple
    actions: tuple
    trajectories: list
    max_stem: int = 2
    max_loop: int = 2
    sample: int | None = None
    seed: int = 0
    step_lassos: list = field(init=False)

    def __post_init__(self):
        self.universe = tuple(sorted(self.universe))
        self.actions = tuple(self.actions)
        self.steps = [Step(t, a) for t in self.trajectories for a in self.actions]
        if self.sample is None:
            self.step_lassos = enumerate_lassos(len(self.steps), self.max_stem, self.max_loop)
        else:
            self.step_lassos = sample_lassos(len(self.steps), self.max_stem, self.max_loop, self.sample, self.seed)
        intern = Interner()
        letter_lassos = []
        for sl in self.step_lassos:
            pos = letter_positions(self.trace_of(sl))
            letter_lassos.append(Lasso(tuple(intern(x) for x in pos.stem), tuple(intern(x) for x in pos.loop)))
        self.letters = intern.items  # (trajectory, prev action or None)
        self.batch = LassoBatch.from_lassos(letter_lassos)

    def trace_of(self, step_lasso: Lasso) -> AbstractLassoTrace:
        return AbstractLassoTrace(
            tuple(self.steps[i] for i in step_lasso.stem),
            tuple(self.steps[i] for i in step_lasso.loop),
            self.universe,
        )

    def trace(self, i: int) -> AbstractLassoTrace:
        return self.trace_of(self.step_lassos[i])

    def __len__(self):
        return len(self.step_lassos)

    def hyltl_table(self, atoms: Sequence[Formula]) -> np.ndarray:
        return hyltl_table(atoms, self.letters, self.universe)

    def sigma_letters(self, enc: ActionEncoding) -> list[frozenset]:
        return [sigma_letter(traj, prev, enc, self.universe) for traj, prev in self.letters]

    def bha_table(self, h):
        return bha_table(h, self.letters, self.universe)


def batch_from_traces(traces: Sequence[AbstractLassoTrace]) -> tuple[list, LassoBatch]:
    """Letter lassos of arbitrary traces, sharing one letter table."""
    intern = Interner()
    lassos = []
    for tr in traces:
        pos = letter_positions(tr)
        lassos.append(Lasso(tuple(intern(x) for x in pos.stem), tuple(intern(x) for x in pos.loop)))
    return intern.items, LassoBatch.from_lassos(lassos)


def hyltl_table(atoms: Sequence[Formula], letters: Sequence, universe) -> np.ndarray:
    """Truth of HyLTL atoms on (trajectory, previous action) letters."""
    table = np.zeros((max(1, len(atoms)), max(1, len(letters))), dtype=bool)
    for i, atom in enumerate(atoms):
        for j, (traj, prev) in enumerate(letters):
            if isinstance(atom, FlowAtom):
                table[i, j] = trajectory_satisfies(traj, atom.constraint, universe)
            elif isinstance(atom, ActionAtom):
                table[i, j] = prev == atom.name
            else:
                raise FormulaError(f"{atom} is not a HyLTL atom")
    return table


def bha_table(h, letters: Sequence, universe) -> tuple[np.ndarray, int, np.ndarray]:
    """A hybrid automaton as an automaton over (trajectory, previous
    action) letters: state 0 is a fresh start state, then one state per
    location. Moving into a location requires its flow to hold on the
    letter's trajectory."""
    locs = list(h.locations)
    idx = {l: i + 1 for i, l in enumerate(locs)}
    n = len(locs) + 1
    k = max(1, len(letters))
    step = np.zeros((n, k, n), dtype=bool)
    admits = np.zeros((n, k), dtype=bool)
    for l in locs:
        for j, (traj, _) in enumerate(letters):
            admits[idx[l], j] = all(trajectory_satisfies(traj, c, universe) for c in h.dyn[l])
    for j, (_, prev) in enumerate(letters):
        if prev is None:
            for l in h.init:
                step[0, j, idx[l]] = admits[idx[l], j]
    by_action: dict = {}
    for e in h.edges:
        by_action.setdefault(e.action, []).append(e)
    for j, (_, prev) in enumerate(letters):
        for e in by_action.get(prev, ()):
            step[idx[e.src], j, idx[e.dst]] |= admits[idx[e.dst], j]
    final = np.zeros(n, dtype=bool)
    for l in h.finals:
        final[idx[l]] = True
    return step, 0, final


def sample_lassos(n_symbols: int, max_stem: int, max_loop: int, count: int, seed: int) -> list[Lasso]:
    rng = np.random.default_rng(seed)
    seen = set()
    out = []
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        s = int(rng.integers(0, max_stem + 1))
        l = int(rng.integers(1, max_loop + 1))
        seq = tuple(int(x) for x in rng.integers(0, n_symbols, size=s + l))
        lasso = Lasso(seq[:s], seq[s:]).normalized()
        if (lasso.stem, lasso.loop) not in seen:
            seen.add((lasso.stem, lasso.loop))
            out.append(lasso)
    return out


@dataclass
class WordSpace:
    """Every lasso word over the given letters within the bounds."""

    letters: list
    max_stem: int = 2
    max_loop: int = 2

    def __post_init__(self):
        self.lassos = enumerate_lassos(len(self.letters), self.max_stem, self.max_loop)
        self.batch = LassoBatch.from_lassos(self.lassos)
        self.index = {(l.stem, l.loop): i for i, l in enumerate(self.lassos)}

    def word(self, i: int) -> Lasso:
        l = self.lassos[i]
        return Lasso(tuple(self.letters[j] for j in l.stem), tuple(self.letters[j] for j in l.loop))

    def __len__(self):
        return len(self.lassos)


# ---------------------------------------------------------------------------
# programs


_OPS = {Not: kernels.NOT, And: kernels.AND, Or: kernels.OR, Next: kernels.NEXT,
        Until: kernels.UNTIL, Release: kernels.RELEASE}


@dataclass(frozen=True)
class Program:
    ops: np.ndarray
    arg1: np.ndarray
    arg2: np.ndarray
    atoms: tuple

    def arrays(self):
        return (self.ops, self.arg1, self.arg2)


def compile_formula(phi: Formula) -> Program:
    """Postfix program with shared subformulas emitted once."""
    ops, a1, a2 = [], [], []
    atoms: dict = {}
    slot: dict = {}

    def emit(op, x=0, y=0):
        ops.append(op)
        a1.append(x)
        a2.append(y)
        return len(ops) - 1

    def go(f):
        if f in slot:
            return slot[f]
        if isinstance(f, Top):
            k = emit(kernels.TRUE)
        elif isinstance(f, Bottom):
            k = emit(kernels.FALSE)
        elif isinstance(f, ATOMS):
            k = emit(kernels.ATOM, atoms.setdefault(f, len(atoms)))
        elif isinstance(f, (Not, Next)):
            k = emit(_OPS[type(f)], go(f.arg))
        elif type(f) in _OPS:
            x = go(f.left)
            y = go(f.right)
            k = emit(_OPS[type(f)], x, y)
        else:
            raise FormulaError(f"cannot compile {f!r}")
        slot[f] = k
        return k

    go(phi)
    atom_list = tuple(sorted(atoms, key=atoms.get))
    return Program(
        np.array(ops, dtype=np.int32), np.array(a1, dtype=np.int32), np.array(a2, dtype=np.int32), atom_list
    )


def letter_table(atoms: Sequence[Formula], letters: Sequence[frozenset]) -> np.ndarray:
    table = np.zeros((max(1, len(atoms)), max(1, len(letters))), dtype=bool)
    for i, a in enumerate(atoms):
        for j, letter in enumerate(letters):
            table[i, j] = a in letter
    return table


def buchi_table(aut: BuchiAutomaton, letters: Sequence[frozenset]) -> tuple[np.ndarray, int, np.ndarray]:
    idx = {q: i for i, q in enumerate(aut.states)}
    n = len(aut.states)
    step = np.zeros((n, max(1, len(letters)), n), dtype=bool)
    for t in aut.transitions:
        for j, letter in enumerate(letters):
            if label_holds(t.label, letter):
                step[idx[t.src], j, idx[t.dst]] = True
    final = np.array([q in aut.finals for q in aut.states], dtype=bool)
    return step, idx[aut.initial], final


def run_program(program: Program, table: np.ndarray, batch: LassoBatch, method: str = "backward", use_numba=None):
    fn = kernels.eval_backward if method == "backward" else kernels.eval_unroll
    return fn(program.arrays(), table, batch.letters, batch.stem, batch.length, use_numba=use_numba)


def run_automaton(tables, batch: LassoBatch, use_numba=None):
    step, init, final = tables
    return kernels.accepts(step, init, final, batch.letters, batch.stem, batch.length, use_numba=use_numba)
