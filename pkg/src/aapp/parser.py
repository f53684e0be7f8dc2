"""Readers for aAPP scripts and platform configuration files.

Scripts use a small YAML subset. Real YAML loaders choke on the script surface
(``workers: *`` reads as an alias, ``- !h_tag`` as a node tag), so scripts go
through a line-oriented reader here that keeps every scalar as raw text and
remembers line numbers for error reporting. Platform configurations are plain
YAML and are loaded with PyYAML.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

import yaml

from .errors import (
    DuplicateName,
    DuplicateTag,
    EmptyBlockList,
    InitialOverCapacity,
    PercentOutOfRange,
    ScriptSyntaxError,
    UnknownName,
    UnknownOption,
    ZeroMemory,
)
from .model import (
    STAR,
    CapacityUsed,
    Configuration,
    GoalSpec,
    InvalidateOpt,
    MaxConcurrent,
    Registry,
    Strategy,
    WorkerState,
    Workers,
    is_identifier,
)

# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class AffinityOpt:
    tag: str
    negated: bool = False

    def __str__(self) -> str:
        return ("!" if self.negated else "") + self.tag


@dataclass(frozen=True)
class RawBlock:
    workers: Workers
    strategy: Optional[Strategy] = None
    invalidate: Optional[tuple[InvalidateOpt, ...]] = None
    affinity: Optional[tuple[AffinityOpt, ...]] = None
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class TagDecl:
    name: str
    blocks: tuple[RawBlock, ...]
    followup: Optional[str] = None  # "default" | "fail" | None
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class ScriptAst:
    tags: tuple[TagDecl, ...]

    def tag(self, name: str) -> TagDecl:
        for t in self.tags:
            if t.name == name:
                return t
        raise KeyError(name)


@dataclass(frozen=True)
class PlatformSpec:
    workers: tuple[tuple[str, int], ...]
    functions: tuple[tuple[str, int, str], ...]
    initial: tuple[tuple[str, str, int], ...] = ()


# --------------------------------------------------------------------------- YAML-subset reader


@dataclass
class _Scalar:
    value: str
    line: int
    quoted: bool = False


@dataclass
class _Seq:
    items: list
    line: int


@dataclass
class _Map:
    entries: list  # [(key, node, line)]
    line: int

    def get(self, key: str):
        for k, node, _ in self.entries:
            if k == key:
                return node
        return None


_Node = Union[_Scalar, _Seq, _Map]
_KEY_RE = re.compile(r"""(?P<key>"[^"]*"|'[^']*'|[^\s:"'#\[\]{}][^:#]*?)\s*:(?:\s+(?P<rest>.*)|$)""")


def _strip_comment(text: str) -> str:
    quote = None
    for i, ch in enumerate(text):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#" and (i == 0 or text[i - 1] in " \t"):
            return text[:i]
    return text


def _unquote(text: str, line: int) -> tuple[str, bool]:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1], True
    if text[:1] in "\"'":
        raise ScriptSyntaxError(f"unterminated quoted string {text!r}", line)
    return text, False


def _scalar_or_flow(text: str, line: int) -> _Node:
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ScriptSyntaxError("unterminated flow list", line)
        inner = text[1:-1].strip()
        items = [] if not inner else [_scalar_or_flow(p, line) for p in inner.split(",")]
        if any(isinstance(i, _Scalar) and not i.value for i in items):
            raise ScriptSyntaxError("empty item in flow list", line)
        return _Seq(items, line)
    if text.startswith("{") or text.startswith("&") or text.startswith("|") or text.startswith(">"):
        raise ScriptSyntaxError(f"unsupported YAML construct {text!r}", line)
    value, quoted = _unquote(text, line)
    return _Scalar(value, line, quoted)


class _Reader:
    def __init__(self, text: str):
        self.lines: list[list] = []
        for no, raw in enumerate(text.splitlines(), start=1):
            if "\t" in raw[: len(raw) - len(raw.lstrip())]:
                raise ScriptSyntaxError("tabs are not allowed in indentation", no)
            body = _strip_comment(raw).rstrip()
            if not body.strip():
                continue
            if body.strip() in ("---", "..."):
                raise ScriptSyntaxError("multi-document streams are not supported", no)
            indent = len(body) - len(body.lstrip(" "))
            self.lines.append([no, indent, body.strip()])
        self.pos = 0

    def peek(self):
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def document(self) -> _Node:
        first = self.peek()
        if first is None:
            raise ScriptSyntaxError("empty document", 1)
        if first[1] != 0:
            raise ScriptSyntaxError("document must start at column 0", first[0])
        node = self.node(0)
        rest = self.peek()
        if rest is not None:
            raise ScriptSyntaxError(f"unexpected content {rest[2]!r}", rest[0])
        return node

    def node(self, indent: int) -> _Node:
        no, ind, text = self.peek()
        if ind != indent:
            raise ScriptSyntaxError("bad indentation", no)
        if text == "-" or text.startswith("- "):
            return self.seq(indent)
        if _KEY_RE.match(text):
            return self.mapping(indent)
        self.pos += 1
        return _scalar_or_flow(text, no)

    def seq(self, indent: int) -> _Seq:
        start = self.peek()[0]
        items = []
        while True:
            cur = self.peek()
            if cur is None or cur[1] < indent:
                break
            no, ind, text = cur
            if ind > indent:
                raise ScriptSyntaxError("bad indentation", no)
            if not (text == "-" or text.startswith("- ")):
                break
            rest = text[1:].lstrip()
            if not rest:
                self.pos += 1
                nxt = self.peek()
                if nxt is None or nxt[1] <= indent:
                    raise ScriptSyntaxError("empty list item", no)
                items.append(self.node(nxt[1]))
                continue
            col = ind + (len(text) - len(rest))
            # re-read the item body as if it started on its own line at column `col`
            cur[1], cur[2] = col, rest
            items.append(self.node(col))
        return _Seq(items, start)

    def mapping(self, indent: int) -> _Map:
        start = self.peek()[0]
        entries = []
        seen = set()
        while True:
            cur = self.peek()
            if cur is None or cur[1] < indent:
                break
            no, ind, text = cur
            if ind > indent:
                raise ScriptSyntaxError("bad indentation", no)
            if text.startswith("- ") or text == "-":
                break
            m = _KEY_RE.match(text)
            if not m:
                raise ScriptSyntaxError(f"expected 'key: value', got {text!r}", no)
            key, _ = _unquote(m.group("key"), no)
            key = key.strip()
            if key in seen:
                raise ScriptSyntaxError(f"duplicate key {key!r}", no)
            seen.add(key)
            rest = (m.group("rest") or "").strip()
            self.pos += 1
            if rest:
                value = _scalar_or_flow(rest, no)
            else:
                nxt = self.peek()
                if nxt is not None and (nxt[1] > indent or (nxt[1] == indent and (nxt[2].startswith("- ") or nxt[2] == "-"))):
                    value = self.node(nxt[1])
                else:
                    value = None
            entries.append((key, value, no))
        return _Map(entries, start)


# --------------------------------------------------------------------------- script interpretation

_BLOCK_KEYS = ("workers", "strategy", "invalidate", "affinity")
_CAP_RE = re.compile(r"capacity_used\s+(\d+)\s*%\Z")
_MAXC_RE = re.compile(r"max_concurrent_invocations\s+(\d+)\Z")


def _ident(node: _Node, what: str) -> str:
    if not isinstance(node, _Scalar):
        raise ScriptSyntaxError(f"expected {what} identifier", node.line)
    if not is_identifier(node.value):
        raise ScriptSyntaxError(f"invalid {what} identifier {node.value!r}", node.line)
    return node.value


def _workers(node, line: int) -> Workers:
    if node is None:
        raise ScriptSyntaxError("workers: missing value", line)
    if isinstance(node, _Scalar):
        if node.value == "*":
            return STAR
        raise ScriptSyntaxError(f"workers must be '*' or a list of worker ids, got {node.value!r}", node.line)
    if isinstance(node, _Seq):
        if not node.items:
            raise ScriptSyntaxError("workers list is empty", node.line)
        ws = tuple(_ident(i, "worker") for i in node.items)
        if len(set(ws)) != len(ws):
            raise ScriptSyntaxError("duplicate worker in block", node.line)
        return ws
    raise ScriptSyntaxError("workers must be '*' or a list", node.line)


def _strategy(node, line: int) -> Strategy:
    if not isinstance(node, _Scalar):
        raise ScriptSyntaxError("strategy expects a single option", getattr(node, "line", line))
    try:
        return Strategy(node.value)
    except ValueError:
        raise UnknownOption(f"unknown strategy {node.value!r} (expected any or best_first)", node.line) from None


def _invalidate(node, line: int) -> tuple[InvalidateOpt, ...]:
    if not isinstance(node, _Seq):
        raise ScriptSyntaxError("invalidate expects a list of options", getattr(node, "line", line))
    if not node.items:
        raise ScriptSyntaxError("invalidate list is empty", node.line)
    opts: list[InvalidateOpt] = []
    kinds = set()
    for item in node.items:
        if not isinstance(item, _Scalar):
            raise ScriptSyntaxError("invalidate option must be a scalar", item.line)
        text = " ".join(item.value.split())
        if m := _CAP_RE.match(text):
            n = int(m.group(1))
            if n > 100:
                raise PercentOutOfRange(f"capacity_used {n}% exceeds 100%", item.line)
            opt: InvalidateOpt = CapacityUsed(n)
        elif m := _MAXC_RE.match(text):
            opt = MaxConcurrent(int(m.group(1)))
        else:
            raise UnknownOption(f"unknown invalidate option {item.value!r}", item.line)
        if type(opt) in kinds:
            raise ScriptSyntaxError(f"duplicate invalidate option kind {type(opt).__name__}", item.line)
        kinds.add(type(opt))
        opts.append(opt)
    return tuple(opts)


def _affinity(node, line: int) -> tuple[AffinityOpt, ...]:
    if isinstance(node, _Scalar):
        raw = [(p.strip(), node.line) for p in node.value.split(",")]
    elif isinstance(node, _Seq):
        raw = []
        for item in node.items:
            if not isinstance(item, _Scalar):
                raise ScriptSyntaxError("affinity option must be a scalar", item.line)
            raw.append((item.value.strip(), item.line))
    else:
        raise ScriptSyntaxError("affinity expects a list of tags", line)
    if not raw or any(not t for t, _ in raw):
        raise ScriptSyntaxError("empty affinity option", line)
    opts = []
    for text, ln in raw:
        neg = text.startswith("!")
        tag = text[1:] if neg else text
        if not is_identifier(tag):
            raise ScriptSyntaxError(f"invalid affinity tag {text!r}", ln)
        opt = AffinityOpt(tag, neg)
        if opt in opts:
            raise ScriptSyntaxError(f"duplicate affinity option {text!r}", ln)
        opts.append(opt)
    return tuple(opts)


def _block(node: _Node) -> RawBlock:
    if not isinstance(node, _Map):
        raise ScriptSyntaxError("a block must be a mapping starting with 'workers:'", node.line)
    for key, _, ln in node.entries:
        if key not in _BLOCK_KEYS:
            raise UnknownOption(f"unknown block option {key!r}", ln)
    if node.get("workers") is None and all(k != "workers" for k, _, _ in node.entries):
        raise ScriptSyntaxError("block lacks the mandatory 'workers' entry", node.line)
    values = {key: (value, ln) for key, value, ln in node.entries}
    for key, (value, ln) in values.items():
        if value is None:
            raise ScriptSyntaxError(f"{key}: missing value", ln)
    return RawBlock(
        workers=_workers(*values["workers"]),
        strategy=_strategy(*values["strategy"]) if "strategy" in values else None,
        invalidate=_invalidate(*values["invalidate"]) if "invalidate" in values else None,
        affinity=_affinity(*values["affinity"]) if "affinity" in values else None,
        line=node.line,
    )


def _tag(node: _Node) -> TagDecl:
    if not isinstance(node, _Map):
        raise ScriptSyntaxError("each script item must be 'tag: <blocks>'", node.line)
    named = [(k, v, ln) for k, v, ln in node.entries if k != "followup"]
    if len(named) != 1:
        raise ScriptSyntaxError("each script item must declare exactly one tag", node.line)
    name, blocks_node, ln = named[0]
    if not is_identifier(name):
        raise ScriptSyntaxError(f"invalid tag identifier {name!r}", ln)
    if blocks_node is None or (isinstance(blocks_node, _Seq) and not blocks_node.items):
        raise EmptyBlockList(f"tag {name!r} has no blocks", ln)
    if not isinstance(blocks_node, _Seq):
        raise ScriptSyntaxError(f"tag {name!r} must hold a list of blocks", ln)
    followup = None
    for k, v, fl in node.entries:
        if k == "followup":
            if not isinstance(v, _Scalar):
                raise ScriptSyntaxError("followup expects 'default' or 'fail'", fl)
            if v.value not in ("default", "fail"):
                raise UnknownOption(f"unknown followup option {v.value!r}", fl)
            followup = v.value
    return TagDecl(name, tuple(_block(b) for b in blocks_node.items), followup, line=ln)


def parse_script(text: str) -> ScriptAst:
    """Parse an aAPP script into a ScriptAst. Errors carry the offending line number."""
    doc = _Reader(text).document()
    if not isinstance(doc, _Seq):
        raise ScriptSyntaxError("a script is a list of '- tag:' entries", doc.line)
    tags = []
    seen = set()
    for item in doc.items:
        t = _tag(item)
        if t.name in seen:
            raise DuplicateTag(f"tag {t.name!r} declared twice", t.line)
        seen.add(t.name)
        tags.append(t)
    return ScriptAst(tuple(tags))


# --------------------------------------------------------------------------- printing


def _format_block(b: RawBlock) -> list[str]:
    out = []
    if b.workers is STAR:
        out.append("  - workers: *")
    else:
        out.append("  - workers:")
        out.extend(f"      - {w}" for w in b.workers)
    if b.strategy is not None:
        out.append(f"    strategy: {b.strategy.value}")
    if b.invalidate is not None:
        out.append("    invalidate:")
        out.extend(f"      - {o}" for o in b.invalidate)
    if b.affinity is not None:
        out.append("    affinity:")
        out.extend(f"      - {o}" for o in b.affinity)
    return out


def format_script(ast: ScriptAst) -> str:
    """Render an AST back to script text; ``parse_script(format_script(a)) == a``."""
    lines = []
    for t in ast.tags:
        lines.append(f"- {t.name}:")
        for b in t.blocks:
            lines.extend(_format_block(b))
        if t.followup is not None:
            lines.append(f"  followup: {t.followup}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- platform configuration


def _yaml_load(text: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScriptSyntaxError(str(getattr(exc, "problem", exc)), mark.line + 1 if mark else None) from None


def _records(doc: dict, key: str, fields: dict, required: bool) -> list[tuple]:
    raw = doc.get(key)
    if raw is None:
        if required:
            raise ScriptSyntaxError(f"missing top-level key {key!r}")
        return []
    if not isinstance(raw, list):
        raise ScriptSyntaxError(f"{key!r} must be a list")
    out = []
    for i, rec in enumerate(raw):
        if not isinstance(rec, dict):
            raise ScriptSyntaxError(f"{key}[{i}] must be a mapping")
        extra = set(rec) - set(fields)
        if extra:
            raise ScriptSyntaxError(f"{key}[{i}]: unknown field(s) {sorted(extra)}")
        row = []
        for name, kind in fields.items():
            if name not in rec:
                raise ScriptSyntaxError(f"{key}[{i}]: missing field {name!r}")
            value = rec[name]
            if kind is int:
                if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                    raise ScriptSyntaxError(f"{key}[{i}].{name} must be a natural number, got {value!r}")
            else:
                if not isinstance(value, str) or not is_identifier(value):
                    raise ScriptSyntaxError(f"{key}[{i}].{name} must be an identifier, got {value!r}")
            row.append(value)
        out.append(tuple(row))
    return out


def parse_platform(text: str) -> PlatformSpec:
    doc = _yaml_load(text)
    if not isinstance(doc, dict):
        raise ScriptSyntaxError("configuration must be a mapping with 'workers' and 'functions'")
    extra = set(doc) - {"workers", "functions", "initial"}
    if extra:
        raise ScriptSyntaxError(f"unknown top-level key(s) {sorted(extra)}")
    workers = _records(doc, "workers", {"name": str, "max_memory": int}, True)
    functions = _records(doc, "functions", {"name": str, "memory": int, "tag": str}, True)
    initial = _records(doc, "initial", {"worker": str, "function": str, "count": int}, False)
    if not workers:
        raise ScriptSyntaxError("at least one worker is required")
    for kind, rows in (("worker", workers), ("function", functions)):
        names = [r[0] for r in rows]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise DuplicateName(f"duplicate {kind} name(s) {sorted(dup)}")
    for name, mem, _ in functions:
        if mem == 0:
            raise ZeroMemory(f"function {name!r} declares memory 0")
    return PlatformSpec(tuple(workers), tuple(functions), tuple(initial))


def build_platform(spec: PlatformSpec) -> tuple[Configuration, Registry]:
    reg = Registry({name: (mem, tag) for name, mem, tag in spec.functions})
    maxima = dict(spec.workers)
    counts: dict[str, dict[str, int]] = {}
    for w, f, n in spec.initial:
        if w not in maxima:
            raise UnknownName(f"initial allocation names unknown worker {w!r}")
        if f not in reg:
            raise UnknownName(f"initial allocation names unknown function {f!r}")
        counts.setdefault(w, {})
        counts[w][f] = counts[w].get(f, 0) + n
    for w, alloc in counts.items():
        used = sum(reg.occupancy(f) * n for f, n in alloc.items())
        if used > maxima[w]:
            raise InitialOverCapacity(f"initial allocations on {w!r} need {used} units, max is {maxima[w]}")
    states = {}
    for w, m in maxima.items():
        alloc = counts.get(w, {})
        states[w] = WorkerState(tuple(alloc.items()), sum(reg.occupancy(f) * n for f, n in alloc.items()), m)
    return Configuration(states), reg


def parse_config(text: str) -> tuple[Configuration, Registry]:
    """Parse a platform configuration file into the initial configuration and registry."""
    return build_platform(parse_platform(text))


def parse_goal_file(text: str) -> GoalSpec:
    """Goal files: a list (or ``goal:`` key) of ``{worker, function, count}`` records."""
    doc = _yaml_load(text)
    if isinstance(doc, dict):
        doc = {"goal": doc.get("goal")}
    else:
        doc = {"goal": doc}
    rows = _records(doc, "goal", {"worker": str, "function": str, "count": int}, True)
    try:
        return GoalSpec(tuple(rows))
    except ValueError as exc:
        raise ScriptSyntaxError(str(exc)) from None
