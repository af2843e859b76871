"""Bounded property suites for each translation stage.

Each suite returns a ``SuiteReport``; a mismatch is a counterexample to
the property within the bounds. Trajectories are enumerated up to what the
formula can observe (see ``trajectory_classes``), which covers every Atom
sequence of the stated length exactly.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..buchi import ltl_to_buchi, normalize_labels
from ..discretization import gamma, make_encoding
from ..errors import TraceError
from ..formula import AUX_ACTION, BitAtom, Formula, FlowAtom, negated_flow_constraints, to_text
from ..hybrid import build_bha
from ..lasso import Lasso
from ..pi import pi
from . import batch as B
from .emptiness import buchi_empty, buchi_empty_scc
from .generators import random_buchi
from .semantics import eval_hyltl
from .traces import AbstractLassoTrace, Step, restrict


@dataclass
class SuiteReport:
    name: str
    formulas: int = 0
    checks: int = 0
    mismatches: list = field(default_factory=list)
    exhausted: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def line(self) -> str:
        extra = f", {len(self.exhausted)} bound exhaustions" if self.exhausted else ""
        return (
            f"{self.name}: {self.formulas} formulas, {self.checks} checks, "
            f"{len(self.mismatches)} mismatches{extra}, {self.seconds:.1f}s"
        )


_SPACES: dict = {}


def hybrid_space(universe, three, actions, max_stem=2, max_loop=2) -> B.HybridSpace:
    key = (tuple(universe), frozenset(three), tuple(actions), max_stem, max_loop)
    sp = _SPACES.get(key)
    if sp is None:
        trajs = B.trajectory_classes(universe, three) if universe else [(frozenset(),)]
        sp = _SPACES[key] = B.HybridSpace(universe, actions, trajs, max_stem, max_loop)
    return sp


def _note(report, phi, detail):
    report.mismatches.append((to_text(phi), detail))


# ---------------------------------------------------------------------------
# discretization


def gamma_suite(formulas: Sequence[Formula], actions=("off", "on"), max_stem=2, max_loop=2, use_numba=None) -> SuiteReport:
    """HyLTL truth on a trace equals LTL truth of gamma on its abstraction."""
    rep = SuiteReport("gamma")
    t0 = time.perf_counter()
    enc = make_encoding(actions)
    for phi in formulas:
        uni, three = B.observation_universe(phi)
        sp = hybrid_space(uni, three, actions, max_stem, max_loop)
        prog = B.compile_formula(phi)
        lhs = B.run_program(prog, sp.hyltl_table(prog.atoms), sp.batch, "unroll", use_numba)[:, 0]
        g = gamma(phi, enc)
        gprog = B.compile_formula(g)
        rhs = B.run_program(gprog, B.letter_table(gprog.atoms, sp.sigma_letters(enc)), sp.batch, "backward", use_numba)[:, 0]
        rep.formulas += 1
        rep.checks += len(sp)
        for i in np.nonzero(lhs != rhs)[0][:3]:
            _note(rep, phi, f"trace {sp.trace(int(i))}: hyltl={bool(lhs[i])} ltl={bool(rhs[i])}")
    rep.seconds = time.perf_counter() - t0
    return rep


_PAIRS: dict = {}


def _superset_pairs(ws: B.WordSpace, flows):
    """(word, position, bigger word, same position there) for every
    single flow atom added at a single lasso position."""
    key = id(ws)
    if key in _PAIRS:
        return _PAIRS[key]
    letter_index = {l: i for i, l in enumerate(ws.letters)}
    rows = []
    for w, lasso in enumerate(ws.lassos):
        seq = lasso.stem + lasso.loop
        s = len(lasso.stem)
        for p, lid in enumerate(seq):
            letter = ws.letters[lid]
            for f in flows:
                if f in letter:
                    continue
                bigger = list(seq)
                bigger[p] = letter_index[letter | {f}]
                big = Lasso(tuple(bigger[:s]), tuple(bigger[s:])).normalized()
                w2 = ws.index[(big.stem, big.loop)]
                s2, n2 = len(big.stem), len(big)
                for j in range(len(seq)):
                    j2 = j if j < s2 else s2 + (j - s2) % (n2 - s2)
                    rows.append((w, j, w2, j2))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    _PAIRS[key] = arr
    return arr


_WORDS: dict = {}


def monotone_suite(formulas: Sequence[Formula], flows: Sequence, n_bits=2, max_stem=2, max_loop=2, use_numba=None) -> SuiteReport:
    """Adding flow atoms to letters (bits unchanged) never falsifies a
    positive formula at any position."""
    rep = SuiteReport("monotone")
    t0 = time.perf_counter()
    flows = tuple(FlowAtom(c) if not isinstance(c, FlowAtom) else c for c in flows)

    key = (flows, n_bits, max_stem, max_loop)
    if key not in _WORDS:
        bits = [BitAtom(i) for i in range(n_bits)]
        letters = [
            frozenset(fs) | frozenset(bs)
            for fs in _powerset(flows)
            for bs in _powerset(bits)
        ]
        _WORDS[key] = B.WordSpace(letters, max_stem, max_loop)
    ws = _WORDS[key]
    pairs = _superset_pairs(ws, flows)
    for phi in formulas:
        prog = B.compile_formula(phi)
        sat = B.run_program(prog, B.letter_table(prog.atoms, ws.letters), ws.batch, "backward", use_numba)
        small = sat[pairs[:, 0], pairs[:, 1]]
        big = sat[pairs[:, 2], pairs[:, 3]]
        bad = np.nonzero(small & ~big)[0]
        rep.formulas += 1
        rep.checks += int(small.sum())
        for r in bad[:3]:
            w, j, w2, j2 = pairs[r]
            _note(rep, phi, f"word {ws.word(int(w))} at {j + 1} holds, superset {ws.word(int(w2))} at {j2 + 1} fails")
    rep.seconds = time.perf_counter() - t0
    return rep


def _powerset(items):
    items = list(items)
    return [c for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


# ---------------------------------------------------------------------------
# BHA construction


def bha_suite(formulas: Sequence[Formula], actions=("off", "on"), max_stem=2, max_loop=2, with_aux=True, use_numba=None) -> SuiteReport:
    """The constructed BHA accepts exactly the traces satisfying the
    (positive) formula. Traces may also use T when ``with_aux`` is set."""
    rep = SuiteReport("bha")
    t0 = time.perf_counter()
    enc = make_encoding(actions)
    trace_actions = tuple(actions) + ((AUX_ACTION,) if with_aux else ())
    for phi in formulas:
        uni, three = B.observation_universe(phi)
        sp = hybrid_space(uni, three, trace_actions, max_stem, max_loop)
        aut = normalize_labels(ltl_to_buchi(gamma(phi, enc)), enc=enc)
        h = build_bha(aut, enc, sorted({v for c in uni for v in c.variable_names()}))
        prog = B.compile_formula(phi)
        truth = B.run_program(prog, sp.hyltl_table(prog.atoms), sp.batch, "unroll", use_numba)[:, 0]
        acc = B.run_automaton(sp.bha_table(h), sp.batch, use_numba)
        rep.formulas += 1
        rep.checks += len(sp)
        for i in np.nonzero(truth != acc)[0][:3]:
            _note(rep, phi, f"trace {sp.trace(int(i))}: formula={bool(truth[i])} bha={bool(acc[i])}")
    rep.seconds = time.perf_counter() - t0
    return rep


def automaton_suite(formulas: Sequence[Formula], letters: Sequence[frozenset], max_stem=2, max_loop=2, use_numba=None) -> SuiteReport:
    """An LTL formula and its automaton agree on every lasso word."""
    rep = SuiteReport("ltl_to_buchi")
    t0 = time.perf_counter()
    ws = B.WordSpace(list(letters), max_stem, max_loop)
    for phi in formulas:
        aut = ltl_to_buchi(phi)
        prog = B.compile_formula(phi)
        truth = B.run_program(prog, B.letter_table(prog.atoms, ws.letters), ws.batch, "backward", use_numba)[:, 0]
        acc = B.run_automaton(B.buchi_table(aut, ws.letters), ws.batch, use_numba)
        rep.formulas += 1
        rep.checks += len(ws)
        for i in np.nonzero(truth != acc)[0][:3]:
            _note(rep, phi, f"word {ws.word(int(i))}: formula={bool(truth[i])} automaton={bool(acc[i])}")
    rep.seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# pi


def split_step(step: Step, points: Sequence[int]) -> list[Step]:
    """Cut the trajectory so each point becomes a one-Atom piece of its own,
    pieces sharing endpoints; all but the last piece end with T."""
    traj = step.trajectory
    pieces = []
    start = 0
    for j in sorted(points):
        pieces.append(traj[start : j + 1])
        pieces.append(traj[j : j + 1])
        start = j
    pieces.append(traj[start:])
    return [Step(p, AUX_ACTION) for p in pieces[:-1]] + [Step(pieces[-1], step.action)]


def split_candidates(alpha: AbstractLassoTrace, k: int):
    """Traces obtained by isolating at most ``k`` points of every
    trajectory (the same points on every loop pass)."""
    steps = alpha.stem + alpha.loop
    options = []
    for st in steps:
        m = len(st.trajectory)
        opts = [c for r in range(min(k, m) + 1) for c in itertools.combinations(range(m), r)]
        options.append(opts)
    s = len(alpha.stem)
    for choice in itertools.product(*options):
        parts = [split_step(st, pts) for st, pts in zip(steps, choice)]
        stem = [x for p in parts[:s] for x in p]
        loop = [x for p in parts[s:] for x in p]
        yield AbstractLassoTrace(tuple(stem), tuple(loop), alpha.universe)


def split_suite(formulas: Sequence[Formula], alphas_per_formula=24, actions=("off", "on"), seed=0,
                 max_stem=2, max_loop=2, max_atoms=2, use_numba=None) -> SuiteReport:
    """alpha satisfies phi iff some T-split beta of alpha satisfies pi(phi).

    ``exhausted`` lists alpha satisfying phi with no witness inside the
    split bound (k isolated points per trajectory, k the number of distinct
    negated flow constraints); a mismatch is a split beta satisfying
    pi(phi) whose restriction violates phi, or a bad restriction.
    """
    rep = SuiteReport("split")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    for phi in formulas:
        k = len(negated_flow_constraints(phi))
        target = pi(phi)
        uni, _ = B.observation_universe(phi)
        trajs = B.all_trajectories(uni, max_atoms) if uni else [(frozenset(),)]
        sp = B.HybridSpace(uni, actions, trajs, max_stem, max_loop, sample=alphas_per_formula,
                           seed=int(rng.integers(1 << 31)))
        alphas = [sp.trace(i) for i in range(len(sp))]
        truth = [eval_hyltl(a, phi) for a in alphas]
        betas, owner = [], []
        for n, a in enumerate(alphas):
            for b in split_candidates(a, k):
                betas.append(b)
                owner.append(n)
        letters, lb = B.batch_from_traces(betas)
        prog = B.compile_formula(target)
        val = B.run_program(prog, B.hyltl_table(prog.atoms, letters, tuple(sorted(uni))), lb, "unroll", use_numba)[:, 0]
        witness = [False] * len(alphas)
        for b, n, v in zip(betas, owner, val):
            rep.checks += 1
            if v:
                witness[n] = True
                if not truth[n]:
                    _note(rep, phi, f"beta {b} satisfies pi(phi) but alpha {alphas[n]} violates phi")
        for b, n in zip(betas, owner):
            try:
                back = restrict(b, actions)
            except TraceError as exc:
                _note(rep, phi, f"restriction failed for {b}: {exc}")
                continue
            if back != alphas[n].normalized():
                _note(rep, phi, f"restriction of {b} is {back}, expected {alphas[n]}")
        for n, a in enumerate(alphas):
            if truth[n] and not witness[n]:
                rep.exhausted.append((to_text(phi), str(a), k))
        rep.formulas += 1
    rep.seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# emptiness


def emptiness_suite(count=200, max_states=8, seed=0) -> SuiteReport:
    import random

    rep = SuiteReport("emptiness")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    for i in range(count):
        aut = random_buchi(rng, max_states)
        a, b = buchi_empty(aut), buchi_empty_scc(aut)
        rep.formulas += 1
        rep.checks += 1
        if a != b:
            rep.mismatches.append((f"automaton #{i}", f"nested_dfs={a} scc={b}\n{aut}"))
    rep.seconds = time.perf_counter() - t0
    return rep
