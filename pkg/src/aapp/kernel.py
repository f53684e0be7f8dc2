"""Integer encoding of a search instance and backend selection for the BFS kernel.

A configuration becomes a flat tuple of instance counts indexed
``worker * n_functions + function``; workers and functions are numbered in
sorted-name order, so successor order (and hence the witness the kernel
returns) is deterministic.

Two interchangeable kernels exist: ``aapp._ckernel`` (Cython, built when a
compiler is available) and ``aapp._pykernel``. Setting ``AAPP_PURE_PYTHON=1``
forces the pure-Python one.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from . import _pykernel
from .errors import UnknownName
from .model import STAR, Configuration, EncodedPolicy, GoalSpec, Registry, Strategy
from .semantics import blocks_for

try:
    if os.environ.get("AAPP_PURE_PYTHON"):
        raise ImportError("pure Python kernel requested")
    from . import _ckernel as _backend
except ImportError:
    _backend = _pykernel

BACKEND = "cython" if _backend is not _pykernel else "python"

HOLDS, DOES_NOT_HOLD, BOUND_EXHAUSTED = 0, 1, 2


@dataclass(frozen=True)
class CompiledInstance:
    workers: tuple[str, ...]
    functions: tuple[str, ...]
    occ: tuple[int, ...]
    fun_tag: tuple[int, ...]
    max_cap: tuple[int, ...]
    n_tags: int
    # per function: (worker indices, best_first, cap %, max concurrent, affine tags, anti-affine tags)
    # cap/max concurrent are -1 when absent; an affine tag no function carries is -1 (never satisfiable)
    blocks: tuple[tuple[tuple[tuple[int, ...], bool, int, int, tuple[int, ...], tuple[int, ...]], ...], ...]

    @property
    def n_workers(self) -> int:
        return len(self.workers)

    @property
    def n_functions(self) -> int:
        return len(self.functions)

    def encode_state(self, C: Configuration) -> tuple[int, ...]:
        nf = self.n_functions
        counts = [0] * (self.n_workers * nf)
        for wi, w in enumerate(self.workers):
            for f, n in C[w].allocated:
                counts[wi * nf + self.functions.index(f)] = n
        return tuple(counts)

    def cell(self, w: str, f: str) -> int:
        try:
            return self.workers.index(w) * self.n_functions + self.functions.index(f)
        except ValueError:
            raise UnknownName(f"goal names unknown worker/function {w}/{f}") from None

    def decode_action(self, code: int):
        from .model import Done, Start

        nf = self.n_functions
        if code >= 0:
            w, f = divmod(code, nf)
            return Start(self.functions[f], self.workers[w])
        w, f = divmod(-code - 1, nf)
        return Done(self.functions[f], self.workers[w])


def compile_instance(p: EncodedPolicy, reg: Registry, C: Configuration) -> CompiledInstance:
    workers = tuple(sorted(C))
    functions = tuple(reg)
    tags = sorted(reg.tags())
    tag_index = {t: i for i, t in enumerate(tags)}
    windex = {w: i for i, w in enumerate(workers)}
    compiled_blocks = []
    for f in functions:
        fb = []
        for b in blocks_for(f, p, reg):
            ws = tuple(windex[w] for w in b.expand_workers(C) if w in windex)
            caps = b.capacity_thresholds()
            lims = b.concurrency_limits()
            fb.append(
                (
                    ws,
                    b.strategy is Strategy.BEST_FIRST,
                    min(caps) if caps else -1,
                    min(lims) if lims else -1,
                    tuple(tag_index.get(t, -1) for t in b.affine),
                    tuple(tag_index[t] for t in b.anti_affine if t in tag_index),
                )
            )
        compiled_blocks.append(tuple(fb))
    return CompiledInstance(
        workers=workers,
        functions=functions,
        occ=tuple(reg.occupancy(f) for f in functions),
        fun_tag=tuple(tag_index[reg.tag(f)] for f in functions),
        max_cap=tuple(C[w].max for w in workers),
        n_tags=len(tags),
        blocks=tuple(compiled_blocks),
    )


def compile_goal(inst: CompiledInstance, goal: GoalSpec) -> tuple[tuple[int, ...], tuple[int, ...]]:
    cells, counts = [], []
    for w, f, n in goal.constraints:
        cells.append(inst.cell(w, f))
        counts.append(n)
    return tuple(cells), tuple(counts)


def bfs(inst, start, goal_cells, goal_counts, exact, max_states, backend=None):
    """Run the selected kernel. Returns ``(status, action_codes, visited, frontier_peak)``.

    Start actions are coded ``w * nf + f``; done actions ``-(w * nf + f) - 1``.
    ``max_states`` of ``None`` or ``0`` means unbounded.
    """
    impl = backend if backend is not None else _backend
    return impl.bfs(inst, start, goal_cells, goal_counts, bool(exact), int(max_states or 0))


def successors(inst, state, backend=None):
    """``[(action_code, next_state), ...]`` in canonical order."""
    impl = backend if backend is not None else _backend
    return impl.successors(inst, state)


def backend_name(impl=None) -> str:
    impl = impl if impl is not None else _backend
    return "python" if impl is _pykernel else "cython"


def available_backends() -> dict:
    out = {"python": _pykernel}
    if BACKEND == "cython":
        out["cython"] = _backend
    else:
        try:
            from . import _ckernel

            out["cython"] = _ckernel
        except ImportError:
            pass
    return out


__all__ = ["BACKEND", "CompiledInstance", "compile_instance", "compile_goal", "bfs", "successors", "STAR"]
