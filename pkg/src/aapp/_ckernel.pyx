# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled BFS kernel. Same contract and successor order as ``_pykernel``."""

from collections import deque

from libc.stdlib cimport free, malloc


cdef class _Compiled:
    cdef int nw, nf, nt, nblocks
    cdef int *occ
    cdef int *fun_tag
    cdef long *max_cap
    # flattened blocks
    cdef int *fb_start        # nf + 1 offsets into block arrays
    cdef int *b_wstart        # nblocks + 1 offsets into wlist
    cdef int *b_astart        # nblocks + 1 offsets into alist
    cdef int *b_nstart        # nblocks + 1 offsets into nlist
    cdef int *b_best
    cdef long *b_cap
    cdef long *b_maxc
    cdef int *wlist
    cdef int *alist
    cdef int *nlist
    # scratch
    cdef long *used
    cdef long *count
    cdef long *tagcnt
    cdef int *chosen

    def __cinit__(self, inst):
        cdef int i, j, k, b
        self.nw = len(inst.workers)
        self.nf = len(inst.functions)
        self.nt = inst.n_tags
        blocks = [blk for fb in inst.blocks for blk in fb]
        self.nblocks = len(blocks)
        nwl = sum(len(blk[0]) for blk in blocks)
        nal = sum(len(blk[4]) for blk in blocks)
        nnl = sum(len(blk[5]) for blk in blocks)
        self.occ = <int *>malloc(max(self.nf, 1) * sizeof(int))
        self.fun_tag = <int *>malloc(max(self.nf, 1) * sizeof(int))
        self.max_cap = <long *>malloc(max(self.nw, 1) * sizeof(long))
        self.fb_start = <int *>malloc((self.nf + 1) * sizeof(int))
        self.b_wstart = <int *>malloc((self.nblocks + 1) * sizeof(int))
        self.b_astart = <int *>malloc((self.nblocks + 1) * sizeof(int))
        self.b_nstart = <int *>malloc((self.nblocks + 1) * sizeof(int))
        self.b_best = <int *>malloc(max(self.nblocks, 1) * sizeof(int))
        self.b_cap = <long *>malloc(max(self.nblocks, 1) * sizeof(long))
        self.b_maxc = <long *>malloc(max(self.nblocks, 1) * sizeof(long))
        self.wlist = <int *>malloc(max(nwl, 1) * sizeof(int))
        self.alist = <int *>malloc(max(nal, 1) * sizeof(int))
        self.nlist = <int *>malloc(max(nnl, 1) * sizeof(int))
        self.used = <long *>malloc(max(self.nw, 1) * sizeof(long))
        self.count = <long *>malloc(max(self.nw, 1) * sizeof(long))
        self.tagcnt = <long *>malloc(max(self.nw * self.nt, 1) * sizeof(long))
        self.chosen = <int *>malloc(max(self.nw, 1) * sizeof(int))
        if (self.occ == NULL or self.fun_tag == NULL or self.max_cap == NULL or self.fb_start == NULL
                or self.b_wstart == NULL or self.b_astart == NULL or self.b_nstart == NULL
                or self.b_best == NULL or self.b_cap == NULL or self.b_maxc == NULL
                or self.wlist == NULL or self.alist == NULL or self.nlist == NULL
                or self.used == NULL or self.count == NULL or self.tagcnt == NULL or self.chosen == NULL):
            raise MemoryError()
        for i in range(self.nf):
            self.occ[i] = inst.occ[i]
            self.fun_tag[i] = inst.fun_tag[i]
        for i in range(self.nw):
            self.max_cap[i] = inst.max_cap[i]
        b = 0
        self.fb_start[0] = 0
        self.b_wstart[0] = 0
        self.b_astart[0] = 0
        self.b_nstart[0] = 0
        for i in range(self.nf):
            for ws, best, cap, maxc, affine, anti in inst.blocks[i]:
                self.b_best[b] = 1 if best else 0
                self.b_cap[b] = cap
                self.b_maxc[b] = maxc
                k = self.b_wstart[b]
                for j in ws:
                    self.wlist[k] = j
                    k += 1
                self.b_wstart[b + 1] = k
                k = self.b_astart[b]
                for j in affine:
                    self.alist[k] = j
                    k += 1
                self.b_astart[b + 1] = k
                k = self.b_nstart[b]
                for j in anti:
                    self.nlist[k] = j
                    k += 1
                self.b_nstart[b + 1] = k
                b += 1
            self.fb_start[i + 1] = b

    def __dealloc__(self):
        free(self.occ); free(self.fun_tag); free(self.max_cap); free(self.fb_start)
        free(self.b_wstart); free(self.b_astart); free(self.b_nstart); free(self.b_best)
        free(self.b_cap); free(self.b_maxc); free(self.wlist); free(self.alist); free(self.nlist)
        free(self.used); free(self.count); free(self.tagcnt); free(self.chosen)

    cdef list expand(self, tuple state):
        cdef int nw = self.nw, nf = self.nf, nt = self.nt
        cdef int w, f, b, k, t, nchosen, cell
        cdef long n, u, o
        cdef bint ok
        cdef list out = []
        cdef list nxt
        for w in range(nw * nt):
            self.tagcnt[w] = 0
        for w in range(nw):
            self.used[w] = 0
            self.count[w] = 0
            for f in range(nf):
                n = <long>state[w * nf + f]
                if n:
                    self.used[w] += n * self.occ[f]
                    self.count[w] += n
                    self.tagcnt[w * nt + self.fun_tag[f]] += n
        for f in range(nf):
            o = self.occ[f]
            for b in range(self.fb_start[f], self.fb_start[f + 1]):
                nchosen = 0
                for k in range(self.b_wstart[b], self.b_wstart[b + 1]):
                    w = self.wlist[k]
                    u = self.used[w]
                    if u + o > self.max_cap[w]:
                        continue
                    if self.b_cap[b] >= 0 and u * 100 >= self.b_cap[b] * self.max_cap[w]:
                        continue
                    if self.b_maxc[b] >= 0 and self.count[w] >= self.b_maxc[b]:
                        continue
                    ok = True
                    for t in range(self.b_astart[b], self.b_astart[b + 1]):
                        if self.alist[t] < 0 or self.tagcnt[w * nt + self.alist[t]] == 0:
                            ok = False
                            break
                    if ok:
                        for t in range(self.b_nstart[b], self.b_nstart[b + 1]):
                            if self.tagcnt[w * nt + self.nlist[t]] != 0:
                                ok = False
                                break
                    if not ok:
                        continue
                    self.chosen[nchosen] = w
                    nchosen += 1
                    if self.b_best[b]:
                        break
                if nchosen:
                    for k in range(nchosen):
                        cell = self.chosen[k] * nf + f
                        nxt = list(state)
                        nxt[cell] = nxt[cell] + 1
                        out.append((cell, tuple(nxt)))
                    break
        for cell in range(nw * nf):
            if state[cell]:
                nxt = list(state)
                nxt[cell] = nxt[cell] - 1
                out.append((-cell - 1, tuple(nxt)))
        return out


cdef bint _is_goal(tuple state, tuple cells, tuple counts, bint exact):
    cdef Py_ssize_t i
    cdef long have, n
    for i in range(len(cells)):
        have = state[<int>cells[i]]
        n = counts[i]
        if exact:
            if have != n:
                return False
        elif have < n:
            return False
    return True


def successors(inst, state):
    return _Compiled(inst).expand(tuple(state))


def bfs(inst, start, goal_cells, goal_counts, exact, long max_states):
    cdef _Compiled comp = _Compiled(inst)
    cdef tuple cells = tuple(goal_cells)
    cdef tuple counts = tuple(goal_counts)
    cdef bint ex = exact
    cdef tuple s0 = tuple(start)
    cdef tuple state
    cdef dict parents = {s0: (None, 0)}
    cdef Py_ssize_t peak = 1
    if _is_goal(s0, cells, counts, ex):
        return 0, [], 1, 1
    queue = deque([s0])
    while queue:
        state = queue.popleft()
        for code, nxt in comp.expand(state):
            if nxt in parents:
                continue
            parents[nxt] = (state, code)
            if _is_goal(nxt, cells, counts, ex):
                actions = []
                cur = nxt
                while True:
                    prev, c = parents[cur]
                    if prev is None:
                        break
                    actions.append(c)
                    cur = prev
                actions.reverse()
                return 0, actions, len(parents), peak
            if max_states and len(parents) >= max_states:
                return 2, [], len(parents), peak
            queue.append(nxt)
        if len(queue) > peak:
            peak = len(queue)
    return 1, [], len(parents), peak
