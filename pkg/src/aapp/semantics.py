"""The scheduling LTS: worker validity, block walking, single steps and trace replay."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import (
    AappError,
    CapacityExceeded,
    FunctionNotAllocated,
    IllegalTransition,
    UnknownWorker,
    UntaggedFunction,
)
from .model import (
    Block,
    Configuration,
    Done,
    EncodedPolicy,
    Fail,
    Label,
    Registry,
    Start,
    Strategy,
    apply_done,
    apply_start,
)


def worker_tags(C: Configuration, w: str, reg: Registry) -> set[str]:
    return {reg.tag(f) for f in C[w].functions()}


def valid(f: str, w: str, C: Configuration, reg: Registry, b: Block) -> bool:
    """Can ``f`` be placed on ``w`` under block ``b``, given the current load?

    Thresholds are evaluated on the load before ``f`` is added; the capacity
    threshold compares in integers (``used * 100 < n * max``).
    """
    occ = reg.occupancy(f)
    if w not in C:
        return False
    state = C[w]
    if state.used + occ > state.max:
        return False
    for n in b.capacity_thresholds():
        if state.used * 100 >= n * state.max:
            return False
    for n in b.concurrency_limits():
        if state.instances >= n:
            return False
    if b.affine or b.anti_affine:
        tags = worker_tags(C, w, reg)
        if any(t not in tags for t in b.affine):
            return False
        if any(t in tags for t in b.anti_affine):
            return False
    return True


@dataclass(frozen=True)
class Candidates:
    block_index: int
    strategy: Strategy
    workers: tuple[str, ...]

    def allowed(self) -> tuple[str, ...]:
        """Workers the LTS may actually pick: all of them for ``any``, the first for ``best_first``."""
        return self.workers[:1] if self.strategy is Strategy.BEST_FIRST else self.workers


@dataclass(frozen=True)
class Chosen:
    block_index: int
    worker: str


@dataclass(frozen=True)
class Failed:
    pass


ScheduleOutcome = Union[Chosen, Failed]


def blocks_for(f: str, p: EncodedPolicy, reg: Registry) -> tuple[Block, ...]:
    tag = reg.tag(f)
    if tag in p:
        return p[tag]
    raise UntaggedFunction(f"function {f} has tag {tag}, which has no policy")


def schedule_candidates(f: str, C: Configuration, p: EncodedPolicy, reg: Registry) -> Optional[Candidates]:
    """First block with at least one valid worker, or None when every block is exhausted."""
    for i, b in enumerate(blocks_for(f, p, reg)):
        ws = tuple(w for w in b.expand_workers(C) if valid(f, w, C, reg, b))
        if ws:
            return Candidates(i, b.strategy, ws)
    return None


def schedule(
    f: str,
    C: Configuration,
    p: EncodedPolicy,
    reg: Registry,
    rng: Optional[random.Random] = None,
) -> ScheduleOutcome:
    """Pick a worker for ``f``. ``any`` draws from ``rng`` (seed 0 when omitted)."""
    cands = schedule_candidates(f, C, p, reg)
    if cands is None:
        return Failed()
    if cands.strategy is Strategy.BEST_FIRST:
        return Chosen(cands.block_index, cands.workers[0])
    rng = rng if rng is not None else random.Random(0)
    return Chosen(cands.block_index, rng.choice(cands.workers))


def step(
    C: Configuration,
    label: Label,
    p: EncodedPolicy,
    reg: Registry,
    strict: bool = True,
) -> Configuration:
    if isinstance(label, Start):
        if strict:
            cands = schedule_candidates(label.f, C, p, reg)
            if cands is None or label.w not in cands.allowed():
                allowed = () if cands is None else cands.allowed()
                raise IllegalTransition(f"{label.w} is not a selectable worker for {label.f} (selectable: {list(allowed)})", "C_start")
        try:
            return apply_start(C, label.f, label.w, reg)
        except (CapacityExceeded, UnknownWorker) as exc:
            raise IllegalTransition(str(exc), "C_start") from exc
    if isinstance(label, Done):
        try:
            return apply_done(C, label.f, label.w, reg)
        except (FunctionNotAllocated, UnknownWorker) as exc:
            raise IllegalTransition(f"FunctionNotAllocated: {exc}", "C_done") from exc
    if isinstance(label, Fail):
        if strict and schedule_candidates(label.f, C, p, reg) is not None:
            raise IllegalTransition(f"{label.f} is schedulable, fail is not enabled", "C_fail")
        return C
    raise TypeError(f"not a label: {label!r}")


def replay(
    C: Configuration,
    trace: Iterable[Label],
    p: EncodedPolicy,
    reg: Registry,
    strict: bool = True,
) -> Configuration:
    """Fold ``step`` over a trace. Non-strict mode only enforces capacity on starts."""
    for i, label in enumerate(trace):
        try:
            C = step(C, label, p, reg, strict)
        except IllegalTransition as exc:
            raise IllegalTransition(exc.reason, exc.rule, i) from exc
        except AappError as exc:
            raise IllegalTransition(str(exc), "lookup", i) from exc
    return C


def enabled_labels(C: Configuration, p: EncodedPolicy, reg: Registry) -> list[Label]:
    """Every label the LTS can take from ``C``, fails included, in a fixed order."""
    out: list[Label] = []
    for f in reg:
        cands = schedule_candidates(f, C, p, reg)
        if cands is None:
            out.append(Fail(f))
        else:
            out.extend(Start(f, w) for w in cands.allowed())
    for w, s in C.items():
        out.extend(Done(f, w) for f, _ in s.allocated)
    return out


__all__ = [
    "Candidates",
    "Chosen",
    "Failed",
    "valid",
    "schedule_candidates",
    "schedule",
    "step",
    "replay",
    "enabled_labels",
    "worker_tags",
]
