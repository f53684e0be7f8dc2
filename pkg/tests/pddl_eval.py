"""Tiny interpreter for the grounded numeric PDDL the emitter produces.

Enough to BFS a domain/problem pair and compare with the native search; it
does not aim to handle PDDL in general.
"""

from __future__ import annotations

import re
from collections import deque

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_sexp(text: str):
    tokens = _TOKEN.findall(re.sub(r";[^\n]*", "", text))
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            out = []
            while tokens[pos] != ")":
                out.append(read())
            pos += 1
            return out
        return tok

    expr = read()
    if pos != len(tokens):
        raise ValueError("trailing tokens")
    return expr


def _section(form, key):
    for item in form:
        if isinstance(item, list) and item and item[0] == key:
            return item
    raise KeyError(key)


def _fluent_key(term):
    return tuple(x.lower() for x in term)


def eval_num(expr, state):
    if isinstance(expr, str):
        return int(expr)
    op = expr[0]
    if op == "+":
        return sum(eval_num(e, state) for e in expr[1:])
    if op == "-":
        return eval_num(expr[1], state) - sum(eval_num(e, state) for e in expr[2:])
    if op == "*":
        out = 1
        for e in expr[1:]:
            out *= eval_num(e, state)
        return out
    return state[_fluent_key(expr)]


_CMP = {
    "=": lambda a, b: a == b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_bool(expr, state) -> bool:
    op = expr[0]
    if op == "and":
        return all(eval_bool(e, state) for e in expr[1:])
    if op == "or":
        return any(eval_bool(e, state) for e in expr[1:])
    if op == "not":
        return not eval_bool(expr[1], state)
    return _CMP[op](eval_num(expr[1], state), eval_num(expr[2], state))


def apply_effect(effect, state: dict) -> dict:
    out = dict(state)
    items = effect[1:] if effect[0] == "and" else [effect]
    for op, target, amount in items:
        delta = eval_num(amount, state)
        out[_fluent_key(target)] += delta if op == "increase" else -delta
    return out


class Planner:
    def __init__(self, domain_text: str, problem_text: str):
        domain = parse_sexp(domain_text)
        problem = parse_sexp(problem_text)
        self.actions = []
        for item in domain:
            if isinstance(item, list) and item and item[0] == ":action":
                fields = dict(zip(item[2::2], item[3::2]))
                self.actions.append((item[1], fields[":precondition"], fields[":effect"]))
        self.init = {_fluent_key(term): int(value) for _, term, value in _section(problem, ":init")[1:]}
        self.goal = _section(problem, ":goal")[1]

    def search(self, limit: int = 100_000):
        """Shortest plan as a list of action names, or None when the goal is unreachable."""
        key = lambda s: tuple(sorted(s.items()))
        if eval_bool(self.goal, self.init):
            return []
        parents = {key(self.init): None}
        queue = deque([self.init])
        while queue:
            s = queue.popleft()
            for name, pre, eff in self.actions:
                if not eval_bool(pre, s):
                    continue
                t = apply_effect(eff, s)
                k = key(t)
                if k in parents:
                    continue
                parents[k] = (key(s), name)
                if eval_bool(self.goal, t):
                    plan = []
                    while parents[k] is not None:
                        k, a = parents[k]
                        plan.append(a)
                    return plan[::-1]
                if len(parents) > limit:
                    raise RuntimeError("planner state limit")
                queue.append(t)
        return None
