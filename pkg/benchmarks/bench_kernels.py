"""Time the lasso kernels: numba loops, numpy fallback and the scalar oracle.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--atoms 2]

The numba timing is taken after a warm-up call, so compilation (or cache
loading) is excluded. Results of all three paths are cross-checked.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hyltl.oracle.batch import (
    HybridSpace,
    all_trajectories,
    compile_formula,
    observation_universe,
    run_automaton,
    run_program,
)
from hyltl.oracle.semantics import bha_accepts
from hyltl.parser import parse_hyltl
from hyltl.pipeline import compile_property

ACTIONS = ("off", "on")
FORMULA = "F({x >= 21} & X on)"


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--atoms", type=int, default=2, help="max atoms per trajectory")
    ap.add_argument("--skip-scalar", action="store_true")
    args = ap.parse_args()

    phi = parse_hyltl(FORMULA, ["x"], list(ACTIONS))
    c = compile_property(phi, ACTIONS, ["x"], {"on": 1})
    uni, _ = observation_universe(c.nnf)
    sp = HybridSpace(uni, ACTIONS, all_trajectories(uni, args.atoms), 2, 2)
    tables = sp.bha_table(c.bha)
    prog = compile_formula(c.nnf)
    atoms_table = sp.hyltl_table(prog.atoms)
    print(f"{len(sp)} lassos, BHA with {len(c.bha.locations)} locations, program of {len(prog.ops)} ops")

    rows = []
    for label, flag in (("numba", True), ("numpy", False)):
        run_automaton(tables, sp.batch, use_numba=flag)  # warm-up
        run_program(prog, atoms_table, sp.batch, use_numba=flag)
        t_acc, acc = best(lambda: run_automaton(tables, sp.batch, use_numba=flag), args.repeat)
        t_b, fb = best(lambda: run_program(prog, atoms_table, sp.batch, "backward", use_numba=flag), args.repeat)
        t_u, fu = best(lambda: run_program(prog, atoms_table, sp.batch, "unroll", use_numba=flag), args.repeat)
        rows.append((label, t_acc, t_b, t_u))
        assert np.array_equal(fb[:, 0], fu[:, 0]), "evaluators disagree"
        assert np.array_equal(acc, fb[:, 0]), f"{label}: automaton and formula disagree"

    print(f"{'path':8} {'accepts':>10} {'backward':>10} {'unroll':>10}")
    for label, *ts in rows:
        print(f"{label:8} " + " ".join(f"{t:9.3f}s" for t in ts))

    if not args.skip_scalar:
        t0 = time.perf_counter()
        scalar = np.array([bha_accepts(c.bha, sp.trace(i)) for i in range(len(sp))])
        print(f"{'scalar':8} {time.perf_counter() - t0:9.3f}s")
        assert np.array_equal(scalar, acc)


if __name__ == "__main__":
    main()
