"""Pure-Python BFS kernel over integer count vectors. Mirrors ``_ckernel.pyx``."""

from collections import deque


def successors(inst, state):
    nw = len(inst.workers)
    nf = len(inst.functions)
    nt = inst.n_tags
    occ = inst.occ
    fun_tag = inst.fun_tag
    max_cap = inst.max_cap

    used = [0] * nw
    count = [0] * nw
    tagcnt = [0] * (nw * nt)
    for w in range(nw):
        base = w * nf
        u = c = 0
        for f in range(nf):
            n = state[base + f]
            if n:
                u += n * occ[f]
                c += n
                tagcnt[w * nt + fun_tag[f]] += n
        used[w] = u
        count[w] = c

    out = []
    for f in range(nf):
        o = occ[f]
        for ws, best_first, cap, maxc, affine, anti in inst.blocks[f]:
            chosen = []
            for w in ws:
                u = used[w]
                if u + o > max_cap[w]:
                    continue
                if cap >= 0 and u * 100 >= cap * max_cap[w]:
                    continue
                if maxc >= 0 and count[w] >= maxc:
                    continue
                ok = True
                for t in affine:
                    if t < 0 or tagcnt[w * nt + t] == 0:
                        ok = False
                        break
                if ok:
                    for t in anti:
                        if tagcnt[w * nt + t] != 0:
                            ok = False
                            break
                if not ok:
                    continue
                chosen.append(w)
                if best_first:
                    break
            if chosen:
                for w in chosen:
                    cell = w * nf + f
                    nxt = list(state)
                    nxt[cell] += 1
                    out.append((cell, tuple(nxt)))
                break
    for cell in range(nw * nf):
        if state[cell]:
            nxt = list(state)
            nxt[cell] -= 1
            out.append((-cell - 1, tuple(nxt)))
    return out


def _is_goal(state, goal_cells, goal_counts, exact):
    for cell, n in zip(goal_cells, goal_counts):
        have = state[cell]
        if (have != n) if exact else (have < n):
            return False
    return True


def _path(parents, state):
    actions = []
    while True:
        prev, code = parents[state]
        if prev is None:
            break
        actions.append(code)
        state = prev
    actions.reverse()
    return actions


def bfs(inst, start, goal_cells, goal_counts, exact, max_states):
    start = tuple(start)
    parents = {start: (None, 0)}
    if _is_goal(start, goal_cells, goal_counts, exact):
        return 0, [], 1, 1
    queue = deque([start])
    peak = 1
    while queue:
        state = queue.popleft()
        for code, nxt in successors(inst, state):
            if nxt in parents:
                continue
            parents[nxt] = (state, code)
            if _is_goal(nxt, goal_cells, goal_counts, exact):
                return 0, _path(parents, nxt), len(parents), peak
            if max_states and len(parents) >= max_states:
                return 2, [], len(parents), peak
            queue.append(nxt)
        if len(queue) > peak:
            peak = len(queue)
    return 1, [], len(parents), peak
