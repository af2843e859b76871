"""Batched lasso kernels.

A formula is compiled to a postfix program (``ops``, ``arg1``, ``arg2``);
``ATOM`` nodes index a row of ``table[atom, letter]``. A batch of lassos
is ``letters[N, maxn]`` (letter ids), ``stem[N]`` and ``length[N]``; the
successor of the last position is ``stem``.

Two evaluators with different algorithms:

* ``eval_unroll`` decides U/R at each position by walking forward,
* ``eval_backward`` computes U/R by backward passes (twice around the loop).

``accepts`` runs an automaton ``step[S, K, S]`` over each lasso and looks
for an accepting cycle through loop summaries.

Each kernel exists as a numba loop nest and as a vectorized numpy version
over groups of equal-shaped lassos; ``HYLTL_DISABLE_NUMBA`` picks the
latter.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit, numba_enabled

TRUE, FALSE, ATOM, NOT, AND, OR, NEXT, UNTIL, RELEASE = range(9)


# ---------------------------------------------------------------------------
# numba versions


@njit
def _eval_backward_jit(ops, arg1, arg2, table, letters, stem, length):
    n_traces, maxn = letters.shape
    m = ops.shape[0]
    out = np.zeros((n_traces, maxn), dtype=np.bool_)
    val = np.zeros((m, maxn), dtype=np.bool_)
    for t in range(n_traces):
        n = length[t]
        s = stem[t]
        for k in range(m):
            op = ops[k]
            a = arg1[k]
            b = arg2[k]
            if op == TRUE:
                for p in range(n):
                    val[k, p] = True
            elif op == FALSE:
                for p in range(n):
                    val[k, p] = False
            elif op == ATOM:
                for p in range(n):
                    val[k, p] = table[a, letters[t, p]]
            elif op == NOT:
                for p in range(n):
                    val[k, p] = not val[a, p]
            elif op == AND:
                for p in range(n):
                    val[k, p] = val[a, p] and val[b, p]
            elif op == OR:
                for p in range(n):
                    val[k, p] = val[a, p] or val[b, p]
            elif op == NEXT:
                for p in range(n - 1):
                    val[k, p] = val[a, p + 1]
                val[k, n - 1] = val[a, s]
            else:
                until = op == UNTIL
                for p in range(n):
                    val[k, p] = not until
                for _ in range(2):
                    for p in range(n - 1, s - 1, -1):
                        nxt = val[k, p + 1] if p + 1 < n else val[k, s]
                        if until:
                            val[k, p] = val[b, p] or (val[a, p] and nxt)
                        else:
                            val[k, p] = val[b, p] and (val[a, p] or nxt)
                for p in range(s - 1, -1, -1):
                    nxt = val[k, p + 1]
                    if until:
                        val[k, p] = val[b, p] or (val[a, p] and nxt)
                    else:
                        val[k, p] = val[b, p] and (val[a, p] or nxt)
        for p in range(n):
            out[t, p] = val[m - 1, p]
    return out


@njit
def _eval_unroll_jit(ops, arg1, arg2, table, letters, stem, length):
    n_traces, maxn = letters.shape
    m = ops.shape[0]
    out = np.zeros((n_traces, maxn), dtype=np.bool_)
    val = np.zeros((m, maxn), dtype=np.bool_)
    for t in range(n_traces):
        n = length[t]
        s = stem[t]
        for k in range(m):
            op = ops[k]
            a = arg1[k]
            b = arg2[k]
            for p in range(n):
                if op == TRUE:
                    r = True
                elif op == FALSE:
                    r = False
                elif op == ATOM:
                    r = table[a, letters[t, p]]
                elif op == NOT:
                    r = not val[a, p]
                elif op == AND:
                    r = val[a, p] and val[b, p]
                elif op == OR:
                    r = val[a, p] or val[b, p]
                elif op == NEXT:
                    r = val[a, p + 1] if p + 1 < n else val[a, s]
                elif op == UNTIL:
                    r = False
                    q = p
                    for _ in range(n):
                        if val[b, q]:
                            r = True
                            break
                        if not val[a, q]:
                            break
                        q = q + 1 if q + 1 < n else s
                else:
                    r = True
                    q = p
                    for _ in range(n):
                        if not val[b, q]:
                            r = False
                            break
                        if val[a, q]:
                            break
                        q = q + 1 if q + 1 < n else s
                val[k, p] = r
        for p in range(n):
            out[t, p] = val[m - 1, p]
    return out


@njit
def _accepts_jit(step, init, final, letters, stem, length):
    n_traces = letters.shape[0]
    n_states = step.shape[0]
    out = np.zeros(n_traces, dtype=np.bool_)
    cur = np.zeros(n_states, dtype=np.bool_)
    nxt = np.zeros(n_states, dtype=np.bool_)
    reach = np.zeros((n_states, n_states), dtype=np.bool_)
    reach_f = np.zeros((n_states, n_states), dtype=np.bool_)
    r = np.zeros(n_states, dtype=np.bool_)
    rf = np.zeros(n_states, dtype=np.bool_)
    r2 = np.zeros(n_states, dtype=np.bool_)
    rf2 = np.zeros(n_states, dtype=np.bool_)
    for t in range(n_traces):
        n = length[t]
        s = stem[t]
        # states at the loop head after the stem
        cur[:] = False
        cur[init] = True
        for p in range(s):
            nxt[:] = False
            k = letters[t, p]
            for u in range(n_states):
                if cur[u]:
                    for v in range(n_states):
                        if step[u, k, v]:
                            nxt[v] = True
            cur[:] = nxt
        # one loop pass from each head state; rf marks a final visited
        for u in range(n_states):
            r[:] = False
            rf[:] = False
            r[u] = True
            rf[u] = final[u]
            for p in range(s, n):
                k = letters[t, p]
                r2[:] = False
                rf2[:] = False
                for v in range(n_states):
                    if r[v]:
                        for w in range(n_states):
                            if step[v, k, w]:
                                r2[w] = True
                                if rf[v] or (p + 1 < n and final[w]):
                                    rf2[w] = True
                r[:] = r2
                rf[:] = rf2
            for v in range(n_states):
                reach[u, v] = r[v]
                reach_f[u, v] = rf[v]
        # reflexive-transitive closure of the loop summary
        for u in range(n_states):
            reach[u, u] = True
        for w in range(n_states):
            for u in range(n_states):
                if reach[u, w]:
                    for v in range(n_states):
                        if reach[w, v]:
                            reach[u, v] = True
        found = False
        for u in range(n_states):
            if not found:
                live = False
                for h in range(n_states):
                    if cur[h] and reach[h, u]:
                        live = True
                        break
                if live:
                    for v in range(n_states):
                        if reach_f[u, v] and reach[v, u]:
                            found = True
                            break
        out[t] = found
    return out


# ---------------------------------------------------------------------------
# numpy versions (vectorized over lassos of equal shape)


def _groups(stem, length):
    keys = np.stack([stem, length], axis=1)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    for g, (s, n) in enumerate(uniq):
        yield int(s), int(n), np.nonzero(inv.ravel() == g)[0]


def _eval_np(ops, arg1, arg2, table, letters, stem, length, backward):
    n_traces, maxn = letters.shape
    out = np.zeros((n_traces, maxn), dtype=bool)
    for s, n, idx in _groups(stem, length):
        lt = letters[idx, :n]
        succ = np.append(np.arange(1, n), s)
        vals = []
        for k, op in enumerate(ops):
            a, b = arg1[k], arg2[k]
            if op == TRUE:
                v = np.ones(lt.shape, dtype=bool)
            elif op == FALSE:
                v = np.zeros(lt.shape, dtype=bool)
            elif op == ATOM:
                v = table[a][lt]
            elif op == NOT:
                v = ~vals[a]
            elif op == AND:
                v = vals[a] & vals[b]
            elif op == OR:
                v = vals[a] | vals[b]
            elif op == NEXT:
                v = vals[a][:, succ]
            elif backward:
                v = _fix_backward(vals[a], vals[b], s, n, op == UNTIL)
            else:
                v = _fix_unroll(vals[a], vals[b], succ, n, op == UNTIL)
            vals.append(v)
        out[idx, :n] = vals[-1]
    return out


def _fix_backward(left, right, s, n, until):
    v = np.full(left.shape, not until)
    order = list(range(n - 1, s - 1, -1)) * 2 + list(range(s - 1, -1, -1))
    for p in order:
        nxt = v[:, p + 1] if p + 1 < n else v[:, s]
        v[:, p] = right[:, p] | (left[:, p] & nxt) if until else right[:, p] & (left[:, p] | nxt)
    return v


def _fix_unroll(left, right, succ, n, until):
    g = left.shape[0]
    v = np.empty(left.shape, dtype=bool)
    for p in range(n):
        decided = np.zeros(g, dtype=bool)
        res = np.full(g, not until)
        q = p
        for _ in range(n):
            if until:
                hit = ~decided & right[:, q]
                res |= hit
                decided |= hit | ~left[:, q]
            else:
                miss = ~decided & ~right[:, q]
                res &= ~miss
                decided |= miss | left[:, q]
            q = succ[q]
        v[:, p] = res
    return v


def _bool_matmul(a, b):
    return np.matmul(a.astype(np.uint8), b.astype(np.uint8)) > 0


def _accepts_np(step, init, final, letters, stem, length):
    n_traces = letters.shape[0]
    n_states = step.shape[0]
    out = np.zeros(n_traces, dtype=bool)
    final = np.asarray(final, dtype=bool)
    eye = np.eye(n_states, dtype=bool)
    for s, n, idx in _groups(stem, length):
        g = len(idx)
        lt = letters[idx]
        cur = np.zeros((g, n_states), dtype=bool)
        cur[:, init] = True
        for p in range(s):
            mats = np.transpose(step[:, lt[:, p], :], (1, 0, 2))  # g, S, S
            cur = _bool_matmul(cur[:, None, :], mats)[:, 0, :]
        reach = np.broadcast_to(eye, (g, n_states, n_states)).copy()
        reach_f = reach & final[None, :, None]
        for p in range(s, n):
            mats = np.transpose(step[:, lt[:, p], :], (1, 0, 2))
            new_reach = _bool_matmul(reach, mats)
            new_f = _bool_matmul(reach_f, mats)
            if p + 1 < n:
                new_f |= new_reach & final[None, None, :]
            reach, reach_f = new_reach, new_f
        closure = reach | eye
        for _ in range(max(1, int(np.ceil(np.log2(max(n_states, 2)))) + 1)):
            closure = _bool_matmul(closure, closure)
        live = _bool_matmul(cur[:, None, :], closure)[:, 0, :]  # g, S
        cyc = reach_f & np.transpose(closure, (0, 2, 1))  # u->v final pass, v ->* u
        out[idx] = np.any(live & np.any(cyc, axis=2), axis=1)
    return out


# ---------------------------------------------------------------------------
# dispatch


def _prep(letters, stem, length):
    return (
        np.ascontiguousarray(letters, dtype=np.int32),
        np.ascontiguousarray(stem, dtype=np.int32),
        np.ascontiguousarray(length, dtype=np.int32),
    )


def eval_backward(program, table, letters, stem, length, use_numba=None):
    """Root values at every position, ``bool[N, maxn]``."""
    ops, a1, a2 = program
    letters, stem, length = _prep(letters, stem, length)
    table = np.ascontiguousarray(table, dtype=np.bool_)
    if numba_enabled() if use_numba is None else use_numba:
        return _eval_backward_jit(ops, a1, a2, table, letters, stem, length)
    return _eval_np(ops, a1, a2, table, letters, stem, length, backward=True)


def eval_unroll(program, table, letters, stem, length, use_numba=None):
    ops, a1, a2 = program
    letters, stem, length = _prep(letters, stem, length)
    table = np.ascontiguousarray(table, dtype=np.bool_)
    if numba_enabled() if use_numba is None else use_numba:
        return _eval_unroll_jit(ops, a1, a2, table, letters, stem, length)
    return _eval_np(ops, a1, a2, table, letters, stem, length, backward=False)


def accepts(step, init, final, letters, stem, length, use_numba=None):
    """``bool[N]``: the automaton has an accepting run on each lasso."""
    letters, stem, length = _prep(letters, stem, length)
    step = np.ascontiguousarray(step, dtype=np.bool_)
    final = np.ascontiguousarray(final, dtype=np.bool_)
    if numba_enabled() if use_numba is None else use_numba:
        return _accepts_jit(step, np.int64(init), final, letters, stem, length)
    return _accepts_np(step, int(init), final, letters, stem, length)
