"""Independent reference implementation used to cross-check the package.

Written directly from the transition rules over plain dicts, sharing no code
with ``aapp.semantics`` or the search kernels.
"""

from __future__ import annotations

from collections import deque

from aapp.model import STAR


def state_of(C, reg):
    """Configuration -> frozen dict-of-counts keyed by (worker, function)."""
    return frozenset(((w, f), n) for w, s in C.items() for f, n in s.allocated)


def _load(state, w):
    return {f: n for (ww, f), n in state if ww == w}


def oracle_valid(f, w, state, reg, maxima, block):
    load = _load(state, w)
    used = sum(reg[g].occupancy * n for g, n in load.items())
    if used + reg[f].occupancy > maxima[w]:
        return False
    for opt in block.invalidate:
        kind = type(opt).__name__
        if kind == "CapacityUsed" and used * 100 / maxima[w] >= opt.percent:
            return False
        if kind == "MaxConcurrent" and sum(load.values()) >= opt.count:
            return False
    present = {reg[g].tag for g, n in load.items() if n}
    return set(block.affine) <= present and not (set(block.anti_affine) & present)


def oracle_moves(state, policy, reg, maxima):
    workers = sorted(maxima)
    out = []
    for f in reg:
        for block in policy[reg[f].tag]:
            ws = workers if block.workers is STAR else list(block.workers)
            ok = [w for w in ws if w in maxima and oracle_valid(f, w, state, reg, maxima, block)]
            if ok:
                if block.strategy.value == "best_first":
                    ok = ok[:1]
                out += [("start", f, w) for w in ok]
                break
    for (w, f), n in state:
        if n:
            out.append(("done", f, w))
    return out


def apply_move(state, move):
    kind, f, w = move
    d = dict(state)
    d[(w, f)] = d.get((w, f), 0) + (1 if kind == "start" else -1)
    return frozenset((k, v) for k, v in d.items() if v)


def oracle_search(policy, reg, C, goal, exact=False, limit=200_000):
    """Shortest path length to a goal-satisfying state, or None. ``goal``: [(w, f, n)]."""
    maxima = {w: s.max for w, s in C.items()}

    def hit(state):
        d = dict(state)
        return all((d.get((w, f), 0) == n) if exact else (d.get((w, f), 0) >= n) for w, f, n in goal)

    start = state_of(C, reg)
    if hit(start):
        return 0
    seen = {start: 0}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for m in oracle_moves(s, policy, reg, maxima):
            t = apply_move(s, m)
            if t in seen:
                continue
            seen[t] = seen[s] + 1
            if hit(t):
                return seen[t]
            if len(seen) > limit:
                raise RuntimeError("oracle state limit")
            queue.append(t)
    return None
