"""Domain types shared across the toolkit and the elementary configuration updates.

Everything here is immutable. ``apply_start`` and ``apply_done`` return new
``Configuration`` values and never touch their inputs, so search code can keep
snapshots around without copying.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import (
    CapacityExceeded,
    FunctionNotAllocated,
    InvariantViolation,
    UnknownFunction,
    UnknownWorker,
)

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*\Z")
DEFAULT_TAG = "default"


def is_identifier(text: str) -> bool:
    return isinstance(text, str) and IDENTIFIER_RE.match(text) is not None


def check_identifier(text: str, what: str = "identifier") -> str:
    if not is_identifier(text):
        raise ValueError(f"invalid {what}: {text!r}")
    return text


# --------------------------------------------------------------------------- registry


@dataclass(frozen=True)
class FunctionInfo:
    occupancy: int
    tag: str


class Registry(Mapping[str, FunctionInfo]):
    """Function name -> (occupancy, tag). Occupancy must be at least 1."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[str, Union[FunctionInfo, tuple]]):
        built = {}
        for name in sorted(entries):
            info = entries[name]
            if not isinstance(info, FunctionInfo):
                info = FunctionInfo(*info)
            check_identifier(name, "function name")
            check_identifier(info.tag, "tag")
            if not isinstance(info.occupancy, int) or info.occupancy < 1:
                raise ValueError(f"function {name!r}: occupancy must be a natural >= 1, got {info.occupancy!r}")
            built[name] = info
        self._entries = MappingProxyType(built)

    def __getitem__(self, name: str) -> FunctionInfo:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownFunction(name) from None

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Registry):
            return dict(self._entries) == dict(other._entries)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{f}: ({i.occupancy}, {i.tag})" for f, i in self._entries.items())
        return f"Registry({{{inner}}})"

    def occupancy(self, f: str) -> int:
        return self[f].occupancy

    def tag(self, f: str) -> str:
        return self[f].tag

    def tags(self) -> set[str]:
        return {i.tag for i in self._entries.values()}


# --------------------------------------------------------------------------- configuration


@dataclass(frozen=True)
class WorkerState:
    """One worker: allocated multiset (sorted ``(function, count)`` pairs), used and max units."""

    allocated: tuple[tuple[str, int], ...]
    used: int
    max: int

    def __post_init__(self) -> None:
        pairs = tuple(sorted((f, n) for f, n in self.allocated if n > 0))
        if any(n < 0 for _, n in self.allocated):
            raise ValueError("negative multiplicity in allocation")
        if len({f for f, _ in pairs}) != len(pairs):
            raise ValueError("duplicate function in allocation pairs")
        object.__setattr__(self, "allocated", pairs)
        if self.max < 0 or self.used < 0:
            raise ValueError("used and max must be naturals")
        if self.used > self.max:
            raise InvariantViolation(f"used {self.used} exceeds max {self.max}")

    @classmethod
    def empty(cls, max_units: int) -> "WorkerState":
        return cls((), 0, max_units)

    def count(self, f: str) -> int:
        for name, n in self.allocated:
            if name == f:
                return n
        return 0

    @property
    def instances(self) -> int:
        return sum(n for _, n in self.allocated)

    def functions(self) -> list[str]:
        return [f for f, _ in self.allocated]

    def multiset(self) -> dict[str, int]:
        return dict(self.allocated)

    def _with(self, f: str, delta: int, units: int) -> "WorkerState":
        counts = dict(self.allocated)
        counts[f] = counts.get(f, 0) + delta
        return WorkerState(tuple(counts.items()), self.used + units, self.max)


class Configuration(Mapping[str, WorkerState]):
    """Worker name -> WorkerState. Equality is map equality; insertion order is irrelevant."""

    __slots__ = ("_workers",)

    def __init__(self, workers: Mapping[str, WorkerState]):
        if not workers:
            raise ValueError("a configuration needs at least one worker")
        for name in workers:
            check_identifier(name, "worker name")
        self._workers = MappingProxyType({w: workers[w] for w in sorted(workers)})

    @classmethod
    def empty(cls, maxima: Mapping[str, int]) -> "Configuration":
        return cls({w: WorkerState.empty(m) for w, m in maxima.items()})

    @classmethod
    def from_counts(
        cls,
        maxima: Mapping[str, int],
        counts: Mapping[str, Mapping[str, int]],
        reg: Registry,
    ) -> "Configuration":
        """Build from per-worker function counts, computing ``used`` from the registry."""
        states = {}
        for w, m in maxima.items():
            alloc = dict(counts.get(w, {}))
            used = sum(reg.occupancy(f) * n for f, n in alloc.items())
            states[w] = WorkerState(tuple(alloc.items()), used, m)
        unknown = set(counts) - set(maxima)
        if unknown:
            raise UnknownWorker(sorted(unknown)[0])
        return cls(states)

    def __getitem__(self, w: str) -> WorkerState:
        try:
            return self._workers[w]
        except KeyError:
            raise UnknownWorker(w) from None

    def __contains__(self, w: object) -> bool:
        return w in self._workers

    def __iter__(self) -> Iterator[str]:
        return iter(self._workers)

    def __len__(self) -> int:
        return len(self._workers)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Configuration):
            return dict(self._workers) == dict(other._workers)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._workers.items()))

    def __repr__(self) -> str:
        parts = []
        for w, s in self._workers.items():
            ms = "{" + ", ".join(f for f, n in s.allocated for _ in range(n)) + "}"
            parts.append(f"{w}: ({ms}, {s.used}, {s.max})")
        return "Configuration({" + ", ".join(parts) + "})"

    def replace(self, w: str, state: WorkerState) -> "Configuration":
        workers = dict(self._workers)
        workers[w] = state
        return Configuration(workers)

    def emptied(self) -> "Configuration":
        """Same workers and maxima, no allocations."""
        return Configuration({w: WorkerState.empty(s.max) for w, s in self._workers.items()})

    def maxima(self) -> dict[str, int]:
        return {w: s.max for w, s in self._workers.items()}


def apply_start(C: Configuration, f: str, w: str, reg: Registry) -> Configuration:
    state = C[w]
    occ = reg.occupancy(f)
    if state.used + occ > state.max:
        raise CapacityExceeded(f"{f} needs {occ} units on {w}: {state.used} + {occ} > {state.max}")
    return C.replace(w, state._with(f, 1, occ))


def apply_done(C: Configuration, f: str, w: str, reg: Registry) -> Configuration:
    state = C[w]
    if state.count(f) < 1:
        raise FunctionNotAllocated(f"{f} is not allocated on {w}")
    return C.replace(w, state._with(f, -1, -reg.occupancy(f)))


CanonicalState = tuple[tuple[str, str, int], ...]


def canonicalize(C: Configuration) -> CanonicalState:
    """Sorted ``(worker, function, count)`` triples with count > 0.

    Worker maxima are not part of the canonical state; they are fixed for the
    lifetime of a search and ``used`` is recomputable from the triples.
    """
    return tuple(sorted((w, f, n) for w, s in C.items() for f, n in s.allocated if n > 0))


def check_invariants(C: Configuration, reg: Registry) -> None:
    """Raise InvariantViolation unless used = sum of occupancies and used <= max on every worker."""
    for w, s in C.items():
        expected = sum(reg.occupancy(f) * n for f, n in s.allocated)
        if s.used != expected:
            raise InvariantViolation(f"{w}: used {s.used} but allocations sum to {expected}")
        if s.used > s.max:
            raise InvariantViolation(f"{w}: used {s.used} exceeds max {s.max}")


# --------------------------------------------------------------------------- policies


class _Star:
    """The universal worker selector ``*``."""

    _instance: Optional["_Star"] = None

    def __new__(cls) -> "_Star":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "STAR"

    def __reduce__(self):
        return (_Star, ())


STAR = _Star()


class Strategy(enum.Enum):
    ANY = "any"
    BEST_FIRST = "best_first"


@dataclass(frozen=True)
class CapacityUsed:
    percent: int

    def __post_init__(self) -> None:
        if not 0 <= self.percent <= 100:
            raise ValueError(f"capacity_used percent out of range: {self.percent}")

    def __str__(self) -> str:
        return f"capacity_used {self.percent}%"


@dataclass(frozen=True)
class MaxConcurrent:
    count: int

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("max_concurrent_invocations must be a natural")

    def __str__(self) -> str:
        return f"max_concurrent_invocations {self.count}"


InvalidateOpt = Union[CapacityUsed, MaxConcurrent]
Workers = Union[_Star, tuple[str, ...]]


@dataclass(frozen=True)
class Block:
    workers: Workers
    strategy: Strategy = Strategy.ANY
    invalidate: tuple[InvalidateOpt, ...] = (CapacityUsed(100),)
    affine: tuple[str, ...] = ()
    anti_affine: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.workers is not STAR:
            ws = tuple(self.workers)
            if not ws:
                raise ValueError("block worker list must be non-empty")
            if len(set(ws)) != len(ws):
                raise ValueError(f"duplicate worker in block: {ws}")
            object.__setattr__(self, "workers", ws)
        for name in ("invalidate", "affine", "anti_affine"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(set(self.affine)) != len(self.affine) or len(set(self.anti_affine)) != len(self.anti_affine):
            raise ValueError("duplicate tag in affinity list")

    def expand_workers(self, C: Configuration) -> tuple[str, ...]:
        """Star expands to every worker of ``C`` in ascending name order."""
        if self.workers is STAR:
            return tuple(sorted(C))
        return self.workers

    def capacity_thresholds(self) -> list[int]:
        return [o.percent for o in self.invalidate if isinstance(o, CapacityUsed)]

    def concurrency_limits(self) -> list[int]:
        return [o.count for o in self.invalidate if isinstance(o, MaxConcurrent)]


class EncodedPolicy(Mapping[str, tuple[Block, ...]]):
    """Tag -> ordered block list, followups already unfolded. Always holds ``default``."""

    __slots__ = ("_policies",)

    def __init__(self, policies: Mapping[str, Iterable[Block]]):
        built = {}
        for tag, blocks in policies.items():
            blocks = tuple(blocks)
            if not blocks:
                raise ValueError(f"tag {tag!r} has an empty block list")
            built[tag] = blocks
        if DEFAULT_TAG not in built:
            raise ValueError("encoded policy lacks the default tag")
        self._policies = MappingProxyType(built)

    def __getitem__(self, tag: str) -> tuple[Block, ...]:
        return self._policies[tag]

    def __iter__(self) -> Iterator[str]:
        return iter(self._policies)

    def __len__(self) -> int:
        return len(self._policies)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, EncodedPolicy):
            return dict(self._policies) == dict(other._policies)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._policies.items(), key=lambda kv: kv[0])))

    def __repr__(self) -> str:
        return f"EncodedPolicy({dict(self._policies)!r})"

    def blocks(self) -> Iterator[Block]:
        for bs in self._policies.values():
            yield from bs


# --------------------------------------------------------------------------- labels, goals


@dataclass(frozen=True)
class Start:
    f: str
    w: str

    def __str__(self) -> str:
        return f"(start, {self.f}, {self.w})"


@dataclass(frozen=True)
class Done:
    f: str
    w: str

    def __str__(self) -> str:
        return f"(done, {self.f}, {self.w})"


@dataclass(frozen=True)
class Fail:
    f: str

    def __str__(self) -> str:
        return f"(fail, {self.f})"


Label = Union[Start, Done, Fail]
Trace = tuple[Label, ...]


def label_to_record(label: Label) -> dict:
    if isinstance(label, Start):
        return {"action": "start", "function": label.f, "worker": label.w}
    if isinstance(label, Done):
        return {"action": "done", "function": label.f, "worker": label.w}
    return {"action": "fail", "function": label.f, "worker": None}


def label_from_record(rec: Mapping) -> Label:
    try:
        action, f = rec["action"], rec["function"]
    except (KeyError, TypeError):
        raise ValueError(f"malformed trace record: {rec!r}") from None
    w = rec.get("worker")
    if action == "start" and w is not None:
        return Start(f, w)
    if action == "done" and w is not None:
        return Done(f, w)
    if action == "fail":
        return Fail(f)
    raise ValueError(f"malformed trace record: {rec!r}")


def trace_to_records(trace: Iterable[Label]) -> list[dict]:
    return [label_to_record(lab) for lab in trace]


def trace_from_records(records: Iterable[Mapping]) -> Trace:
    return tuple(label_from_record(r) for r in records)


@dataclass(frozen=True)
class GoalSpec:
    """Conjunction of ``count(function on worker) >= min_count`` constraints."""

    constraints: tuple[tuple[str, str, int], ...]

    def __post_init__(self) -> None:
        cs = tuple((w, f, int(n)) for w, f, n in self.constraints)
        if not cs:
            raise ValueError("goal needs at least one constraint")
        pairs = [(w, f) for w, f, _ in cs]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate (worker, function) pair in goal")
        if any(n < 1 for _, _, n in cs):
            raise ValueError("goal counts must be >= 1")
        object.__setattr__(self, "constraints", cs)

    @classmethod
    def reach(cls, f: str, w: str) -> "GoalSpec":
        return cls(((w, f, 1),))

    @classmethod
    def cooccur(cls, f: str, g: str, w: str) -> "GoalSpec":
        if f == g:
            return cls(((w, f, 2),))
        return cls(((w, f, 1), (w, g, 1)))

    @classmethod
    def parse(cls, text: str) -> "GoalSpec":
        """Parse the ``worker:function:count`` comma-joined micro-format."""
        cs = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split(":")
            if len(parts) == 2:
                parts.append("1")
            if len(parts) != 3 or not parts[2].isdigit():
                raise ValueError(f"bad goal constraint {chunk!r}; expected worker:function:count")
            cs.append((parts[0], parts[1], int(parts[2])))
        return cls(tuple(cs))

    def satisfied_by(self, C: Configuration, exact: bool = False) -> bool:
        for w, f, n in self.constraints:
            have = C[w].count(f)
            if (have != n) if exact else (have < n):
                return False
        return True


class Polarity(enum.Enum):
    PLAIN_APP = "PlainApp"
    NEG_ONLY = "NegOnly"
    POS_ONLY = "PosOnly"
    FULL = "Full"

    def __str__(self) -> str:
        return self.value

    @property
    def linear(self) -> bool:
        return self in (Polarity.PLAIN_APP, Polarity.NEG_ONLY)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "ERROR" | "WARN"
    code: str
    message: str
    subject: Optional[str] = field(default=None, compare=True)

    def __str__(self) -> str:
        return f"{self.severity} {self.code}: {self.message}"
