"""Reach / CoOccur decision procedures.

Scripts without affinity clauses, or with anti-affinity only, are decided in
linear time by looking at the target worker in isolation on an emptied
configuration. Everything else goes through breadth-first search over the
finite configuration graph, which also yields shortest witness traces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import kernel
from .errors import UnknownFunction, UnknownName, UnknownWorker, WrongFragment
from .model import (
    STAR,
    Block,
    Configuration,
    EncodedPolicy,
    GoalSpec,
    Polarity,
    Registry,
    Trace,
    apply_start,
)
from .semantics import blocks_for, valid


@dataclass(frozen=True)
class Holds:
    witness: Optional[Trace]
    note: Optional[str] = None

    verdict = "HOLDS"


@dataclass(frozen=True)
class DoesNotHold:
    verdict = "DOES_NOT_HOLD"


@dataclass(frozen=True)
class BoundExhausted:
    states_visited: int

    verdict = "BOUND_EXHAUSTED"


Decision = Union[Holds, DoesNotHold, BoundExhausted]


@dataclass(frozen=True)
class SearchStats:
    states_visited: int = 0
    frontier_peak: int = 0
    witness_length: Optional[int] = None
    backend: str = "linear"


def classify(p: EncodedPolicy) -> Polarity:
    has_pos = any(b.affine for b in p.blocks())
    has_neg = any(b.anti_affine for b in p.blocks())
    if has_pos and has_neg:
        return Polarity.FULL
    if has_pos:
        return Polarity.POS_ONLY
    if has_neg:
        return Polarity.NEG_ONLY
    return Polarity.PLAIN_APP


def fltr(blocks: tuple[Block, ...], w: str) -> tuple[Block, ...]:
    return tuple(
        Block((w,), b.strategy, b.invalidate, b.affine, b.anti_affine)
        for b in blocks
        if b.workers is STAR or w in b.workers
    )


def simplify(p: EncodedPolicy, w: str) -> dict[str, tuple[Block, ...]]:
    """Keep only blocks mentioning ``w`` (or ``*``), each narrowed to ``[w]``.

    Returns a plain mapping: a tag may end up with no blocks at all, which an
    EncodedPolicy does not allow.
    """
    return {t: fltr(bs, w) for t, bs in p.items()}


def _check_linear(p: EncodedPolicy) -> None:
    pol = classify(p)
    if not pol.linear:
        raise WrongFragment(f"linear deciders need PlainApp or NegOnly scripts, got {pol}")


def _some_block_valid(f: str, w: str, C: Configuration, reg: Registry, blocks: tuple[Block, ...]) -> bool:
    return any(valid(f, w, C, reg, b) for b in blocks)


def _simple_blocks(p: EncodedPolicy, reg: Registry, f: str, w: str) -> tuple[Block, ...]:
    return fltr(blocks_for(f, p, reg), w)


def _check_names(reg: Registry, C: Configuration, w: str, *fs: str) -> None:
    if w not in C:
        raise UnknownWorker(w)
    for f in fs:
        if f not in reg:
            raise UnknownFunction(f)


def reach_linear(p: EncodedPolicy, reg: Registry, C: Configuration, f: str, w: str) -> bool:
    _check_linear(p)
    _check_names(reg, C, w, f)
    empty = C.emptied()
    return _some_block_valid(f, w, empty, reg, _simple_blocks(p, reg, f, w))


def cooccur_linear(p: EncodedPolicy, reg: Registry, C: Configuration, f: str, g: str, w: str) -> bool:
    _check_linear(p)
    _check_names(reg, C, w, f, g)
    empty = C.emptied()
    for first, second in ((f, g), (g, f)):
        if not _some_block_valid(first, w, empty, reg, _simple_blocks(p, reg, first, w)):
            continue
        if empty[w].used + reg.occupancy(first) > empty[w].max:
            continue
        loaded = apply_start(empty, first, w, reg)
        if _some_block_valid(second, w, loaded, reg, _simple_blocks(p, reg, second, w)):
            return True
    return False


def goal_search(
    p: EncodedPolicy,
    reg: Registry,
    C: Configuration,
    goal: GoalSpec,
    max_states: Optional[int] = None,
    exact: bool = False,
    backend=None,
) -> tuple[Decision, SearchStats]:
    """Breadth-first search from ``C`` for a configuration meeting ``goal``.

    Start moves follow the scheduler (every valid worker of the first usable
    block for ``any``, only the first for ``best_first``); done moves remove
    any allocated instance. Fail moves are never expanded. With ``exact`` the
    goal counts must match exactly instead of being lower bounds.
    """
    for w, f, _ in goal.constraints:
        if w not in C or f not in reg:
            raise UnknownName(f"goal names unknown worker/function {w}/{f}")
    inst = kernel.compile_instance(p, reg, C)
    cells, counts = kernel.compile_goal(inst, goal)
    status, actions, visited, peak = kernel.bfs(
        inst, inst.encode_state(C), cells, counts, exact, max_states, backend=backend
    )
    name = kernel.backend_name(backend)
    if status == kernel.HOLDS:
        witness = tuple(inst.decode_action(a) for a in actions)
        return Holds(witness), SearchStats(visited, peak, len(witness), name)
    if status == kernel.DOES_NOT_HOLD:
        return DoesNotHold(), SearchStats(visited, peak, None, name)
    return BoundExhausted(visited), SearchStats(visited, peak, None, name)


def _preloaded(C: Configuration, w: str, *fs: str) -> bool:
    return any(C[w].count(f) > 0 for f in fs)


def reach(
    p: EncodedPolicy,
    reg: Registry,
    C: Configuration,
    f: str,
    w: str,
    max_states: Optional[int] = None,
    witness: bool = False,
) -> tuple[Decision, SearchStats]:
    """Can ``f`` ever run on ``w``? Linear fragments skip the search unless a witness is wanted."""
    _check_names(reg, C, w, f)
    goal = GoalSpec.reach(f, w)
    if _preloaded(C, w, f):
        return Holds((), note=f"{f} is already allocated on {w}"), SearchStats(0, 0, 0)
    if classify(p).linear:
        if not reach_linear(p, reg, C, f, w):
            return DoesNotHold(), SearchStats()
        if witness:
            return goal_search(p, reg, C, goal, max_states)
        return Holds(None), SearchStats()
    return goal_search(p, reg, C, goal, max_states)


def cooccur(
    p: EncodedPolicy,
    reg: Registry,
    C: Configuration,
    f: str,
    g: str,
    w: str,
    max_states: Optional[int] = None,
    witness: bool = False,
) -> tuple[Decision, SearchStats]:
    """Can ``f`` and ``g`` ever run on ``w`` at the same time?"""
    _check_names(reg, C, w, f, g)
    goal = GoalSpec.cooccur(f, g, w)
    if f != g and C[w].count(f) > 0 and C[w].count(g) > 0:
        return Holds((), note=f"{f} and {g} are already on {w}"), SearchStats(0, 0, 0)
    if classify(p).linear and f != g and not _preloaded(C, w, f, g):
        if not cooccur_linear(p, reg, C, f, g, w):
            return DoesNotHold(), SearchStats()
        if witness:
            return goal_search(p, reg, C, goal, max_states)
        return Holds(None), SearchStats()
    return goal_search(p, reg, C, goal, max_states)


__all__ = [
    "Holds",
    "DoesNotHold",
    "BoundExhausted",
    "Decision",
    "SearchStats",
    "classify",
    "fltr",
    "simplify",
    "reach_linear",
    "cooccur_linear",
    "goal_search",
    "reach",
    "cooccur",
]
