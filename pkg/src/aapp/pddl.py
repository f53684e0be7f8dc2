"""PDDL encoding of a script + platform for external planners.

Actions are fully grounded: one ``start_<f>_b<i>_<w>`` per (function, block,
worker) and one ``done_<f>_<w>`` per (function, worker). Block priority and
``best_first`` order become disjunctive preconditions stating that every
earlier candidate is invalid. There is no fail action; failing leaves the
configuration untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .encoder import has_errors, validate
from .errors import UnknownName, ValidationFailed
from .model import Block, Configuration, EncodedPolicy, GoalSpec, Registry, Strategy
from .semantics import blocks_for

REQUIREMENTS = "(:requirements :typing :fluents :disjunctive-preconditions :negative-preconditions)"
DOMAIN_NAME = "aapp"


@dataclass(frozen=True)
class PddlBundle:
    domain_text: str
    problem_text: str


@dataclass(frozen=True)
class RawGoal:
    """A goal written directly in PDDL, e.g. ``(exists (?w - worker) ...)``."""

    text: str


class _Names:
    """PDDL object names. PDDL is case-insensitive and has one namespace for
    constants, so a tag that clashes with a worker/function name gets a prefix."""

    def __init__(self, workers, functions, tags):
        taken = {}
        for w in workers:
            taken.setdefault(w.lower(), "worker")
        for f in functions:
            if taken.setdefault(f.lower(), "function") != "function":
                raise ValidationFailed([f"function {f} clashes with a worker name in PDDL"])
        self.worker = {w: w for w in workers}
        self.function = {f: f for f in functions}
        self.tag = {}
        for t in tags:
            name = t if t.lower() not in taken else f"tag-{t}"
            while name.lower() in taken:
                name = "tag-" + name
            taken[name.lower()] = "tag"
            self.tag[t] = name


def _policy_tags(p: EncodedPolicy, reg: Registry) -> list[str]:
    tags = set(reg.tags())
    for b in p.blocks():
        tags.update(b.affine)
        tags.update(b.anti_affine)
    return sorted(tags)


def _count(names: _Names, f: str, w: str) -> str:
    return f"(number_of_f_in_W {names.function[f]} {names.worker[w]})"


def _instances(names: _Names, reg: Registry, w: str) -> str:
    terms = [_count(names, f, w) for f in reg]
    return terms[0] if len(terms) == 1 else "(+ " + " ".join(terms) + ")"


def _atoms(names: _Names, reg: Registry, f: str, w: str, b: Block, negate: bool) -> list[str]:
    """Conditions of ``valid(f, w, ., b)`` as fluent comparisons, or their negations."""
    W = names.worker[w]
    F = names.function[f]
    used = f"(used {W})"
    cap = f"(max_cap {W})"
    atoms = []
    atoms.append(
        f"(> (+ {used} (occ {F})) {cap})" if negate else f"(<= (+ {used} (occ {F})) {cap})"
    )
    for n in b.capacity_thresholds():
        atoms.append(f"(>= (* {used} 100) (* {n} {cap}))" if negate else f"(< (* {used} 100) (* {n} {cap}))")
    for n in b.concurrency_limits():
        inst = _instances(names, reg, w)
        atoms.append(f"(>= {inst} {n})" if negate else f"(< {inst} {n})")
    for t in b.affine:
        tc = f"(tag_count {names.tag[t]} {W})"
        atoms.append(f"(= {tc} 0)" if negate else f"(> {tc} 0)")
    for t in b.anti_affine:
        tc = f"(tag_count {names.tag[t]} {W})"
        atoms.append(f"(> {tc} 0)" if negate else f"(= {tc} 0)")
    return atoms


def _invalid(names, reg, f, w, b) -> str:
    atoms = _atoms(names, reg, f, w, b, negate=True)
    return atoms[0] if len(atoms) == 1 else "(or " + " ".join(atoms) + ")"


def _conj(parts: list[str], indent: str) -> str:
    if len(parts) == 1:
        return parts[0]
    return "(and\n" + "".join(f"{indent}  {p}\n" for p in parts) + f"{indent})"


def _unique(name: str, used: set[str]) -> str:
    candidate, k = name, 1
    while candidate.lower() in used:
        candidate = f"{name}_{k}"
        k += 1
    used.add(candidate.lower())
    return candidate


def emit_domain(p: EncodedPolicy, reg: Registry, C: Configuration, name: str = DOMAIN_NAME) -> str:
    diags = validate(p, reg, C)
    if has_errors(diags):
        raise ValidationFailed([d for d in diags if d.severity == "ERROR"])
    workers = sorted(C)
    functions = list(reg)
    tags = _policy_tags(p, reg)
    names = _Names(workers, functions, tags)

    out = [f"(define (domain {name})", f"  {REQUIREMENTS}", "  (:types worker function tag)", "  (:constants"]
    out.append("    " + " ".join(names.worker[w] for w in workers) + " - worker")
    out.append("    " + " ".join(names.function[f] for f in functions) + " - function")
    out.append("    " + " ".join(names.tag[t] for t in tags) + " - tag")
    out.append("  )")
    out += [
        "  (:functions",
        "    (number_of_f_in_W ?f - function ?w - worker)",
        "    (used ?w - worker)",
        "    (max_cap ?w - worker)",
        "    (occ ?f - function)",
        "    (tag_count ?t - tag ?w - worker)",
        "  )",
    ]

    action_names: set[str] = set()
    for f in functions:
        F = names.function[f]
        T = names.tag[reg.tag(f)]
        blocks = blocks_for(f, p, reg)
        effect = "(and (increase {c} 1) (increase (used {W}) (occ {F})) (increase (tag_count {T} {W}) 1))"
        for i, b in enumerate(blocks):
            ws = [w for w in b.expand_workers(C) if w in C]
            earlier = []
            for j in range(i):
                earlier += [_invalid(names, reg, f, u, blocks[j]) for u in blocks[j].expand_workers(C) if u in C]
            for k, w in enumerate(ws):
                pre = _atoms(names, reg, f, w, b, negate=False) + earlier
                if b.strategy is Strategy.BEST_FIRST:
                    pre += [_invalid(names, reg, f, u, b) for u in ws[:k]]
                W = names.worker[w]
                act = _unique(f"start_{f}_b{i}_{w}", action_names)
                out.append(f"  (:action {act}")
                out.append("    :parameters ()")
                out.append("    :precondition " + _conj(pre, "    "))
                out.append("    :effect " + effect.format(c=_count(names, f, w), W=W, F=F, T=T))
                out.append("  )")
        for w in workers:
            W = names.worker[w]
            act = _unique(f"done_{f}_{w}", action_names)
            c = _count(names, f, w)
            out.append(f"  (:action {act}")
            out.append("    :parameters ()")
            out.append(f"    :precondition (>= {c} 1)")
            out.append(
                f"    :effect (and (decrease {c} 1) (decrease (used {W}) (occ {F})) (decrease (tag_count {T} {W}) 1))"
            )
            out.append("  )")
    out.append(")")
    return "\n".join(out) + "\n"


def _goal_block(query: Union[GoalSpec, RawGoal], names: _Names, at_least: bool) -> list[str]:
    if isinstance(query, RawGoal):
        return ["  (:goal", "    " + query.text.strip(), "  )"]
    op = ">=" if at_least else "="
    atoms = []
    for w, f, n in query.constraints:
        if w not in names.worker or f not in names.function:
            raise UnknownName(f"goal names unknown worker/function {w}/{f}")
        atoms.append(f"({op} {_count(names, f, w)} {n})")
    if len(atoms) == 1:
        return ["  (:goal", f"    {atoms[0]}", "  )"]
    lines = ["  (:goal", f"    (and {atoms[0]}"]
    lines += [f"         {a}" for a in atoms[1:-1]]
    lines.append(f"         {atoms[-1]}")
    lines.append("  ))")
    return lines


def emit_problem(
    C: Configuration,
    reg: Registry,
    query: Union[GoalSpec, RawGoal, str],
    policy: Optional[EncodedPolicy] = None,
    at_least: bool = False,
    name: str = "aapp-problem",
    domain: str = DOMAIN_NAME,
) -> str:
    """Initial state from ``C`` plus the goal.

    ``policy`` is needed only when affinity clauses mention tags no function
    carries, so those tags get a zero ``tag_count`` too. A plain string query
    is treated as raw PDDL and copied verbatim.
    """
    if isinstance(query, str):
        query = RawGoal(query)
    workers = sorted(C)
    functions = list(reg)
    tags = _policy_tags(policy, reg) if policy is not None else sorted(reg.tags())
    names = _Names(workers, functions, tags)
    init = []
    for f in functions:
        for w in workers:
            init.append(f"(= {_count(names, f, w)} {C[w].count(f)})")
    for w in workers:
        W = names.worker[w]
        init.append(f"(= (used {W}) {C[w].used})")
        init.append(f"(= (max_cap {W}) {C[w].max})")
    for f in functions:
        init.append(f"(= (occ {names.function[f]}) {reg.occupancy(f)})")
    for t in tags:
        for w in workers:
            n = sum(C[w].count(f) for f in functions if reg.tag(f) == t)
            init.append(f"(= (tag_count {names.tag[t]} {names.worker[w]}) {n})")
    out = [f"(define (problem {name})", f"  (:domain {domain})", "  (:init"]
    out += [f"    {i}" for i in init]
    out.append("  )")
    out += _goal_block(query, names, at_least)
    out.append(")")
    return "\n".join(out) + "\n"


def emit(
    p: EncodedPolicy,
    reg: Registry,
    C: Configuration,
    query: Union[GoalSpec, RawGoal, str],
    at_least: bool = False,
) -> PddlBundle:
    return PddlBundle(emit_domain(p, reg, C), emit_problem(C, reg, query, policy=p, at_least=at_least))
